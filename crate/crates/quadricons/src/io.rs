//! Ingestion, date bucketing, random instance generation, and concept
//! emission.
//!
//! Input is delimiter-separated text with one (user, tag, resource, date)
//! assignment per line; column positions are configurable so dumps with
//! extra or reordered columns load without preprocessing. Output is one
//! concept per line, either as JSON or as tab-separated label lists.

use std::io::BufRead;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closure::QuadConcept;
use crate::model::{DFolksonomy, Error, QuadSet, UserSet};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("no valid quadruples in input")]
    NoData,
    #[error("unknown {dimension} label {label:?}")]
    UnknownLabel { dimension: &'static str, label: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] Error),
}

/// How a raw date field collapses into a date label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DateGranularity {
    /// Keep the field verbatim.
    #[default]
    Raw,
    Day,
    Month,
    Year,
}

/// Column layout and date handling for one input source.
#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub delimiter: char,
    pub user_col: usize,
    pub tag_col: usize,
    pub resource_col: usize,
    pub date_col: usize,
    pub skip_header: bool,
    pub granularity: DateGranularity,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            delimiter: '\t',
            user_col: 0,
            tag_col: 1,
            resource_col: 2,
            date_col: 3,
            skip_header: false,
            granularity: DateGranularity::Raw,
        }
    }
}

/// One rejected input line, kept for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub reason: String,
}

/// Parse result: the relation plus whatever lines could not be used.
pub struct ParseOutcome {
    pub folksonomy: DFolksonomy,
    pub skipped: Vec<LineError>,
}

/// Collapse one date field according to the granularity.
///
/// Recognized forms: integer seconds since the Unix epoch, `YYYY-MM-DD`, and
/// RFC 3339 timestamps (converted to UTC before bucketing). At `Raw`
/// granularity the field passes through untouched and unvalidated.
pub fn bucket_date(field: &str, granularity: DateGranularity) -> Result<String, String> {
    if granularity == DateGranularity::Raw {
        return Ok(field.to_owned());
    }
    let date: NaiveDate = parse_date(field)?;
    Ok(match granularity {
        DateGranularity::Raw => unreachable!(),
        DateGranularity::Day => date.format("%Y-%m-%d").to_string(),
        DateGranularity::Month => date.format("%Y-%m").to_string(),
        DateGranularity::Year => date.format("%Y").to_string(),
    })
}

fn parse_date(field: &str) -> Result<NaiveDate, String> {
    let trimmed = field.trim();
    let digits = trimmed.strip_prefix('-').unwrap_or(trimmed);
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
        let secs: i64 = trimmed
            .parse()
            .map_err(|_| format!("unparsable epoch seconds {trimmed:?}"))?;
        return DateTime::from_timestamp(secs, 0)
            .map(|dt| dt.date_naive())
            .ok_or_else(|| format!("epoch seconds {secs} out of range"));
    }
    if let Ok(d) = NaiveDate::parse_from_str(trimmed, "%Y-%m-%d") {
        return Ok(d);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(trimmed) {
        return Ok(dt.with_timezone(&chrono::Utc).date_naive());
    }
    Err(format!("unrecognized date {trimmed:?}"))
}

/// Read a delimiter-separated stream into a relation.
///
/// Fields are trimmed. Lines that are blank, are short of the rightmost
/// configured column, or carry an unbucketable date are collected into
/// `skipped` rather than aborting the load; only an input with zero usable
/// lines is an error.
pub fn parse_quadruples(
    reader: impl BufRead,
    config: &IngestConfig,
) -> Result<ParseOutcome, IngestError> {
    let mut rows: Vec<(String, String, String, String)> = Vec::new();
    let mut skipped = Vec::new();
    let needed = config
        .user_col
        .max(config.tag_col)
        .max(config.resource_col)
        .max(config.date_col);
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if config.skip_header && idx == 0 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(config.delimiter).map(str::trim).collect();
        if fields.len() <= needed {
            skipped.push(LineError {
                line: lineno,
                reason: format!("expected at least {} fields, got {}", needed + 1, fields.len()),
            });
            continue;
        }
        let date = match bucket_date(fields[config.date_col], config.granularity) {
            Ok(d) => d,
            Err(reason) => {
                skipped.push(LineError { line: lineno, reason });
                continue;
            }
        };
        let (u, t, r) = (
            fields[config.user_col],
            fields[config.tag_col],
            fields[config.resource_col],
        );
        if u.is_empty() || t.is_empty() || r.is_empty() || date.is_empty() {
            skipped.push(LineError {
                line: lineno,
                reason: "empty field".to_owned(),
            });
            continue;
        }
        rows.push((u.to_owned(), t.to_owned(), r.to_owned(), date));
    }
    if rows.is_empty() {
        return Err(IngestError::NoData);
    }
    let folksonomy = DFolksonomy::from_quadruples(rows)?;
    Ok(ParseOutcome {
        folksonomy,
        skipped,
    })
}

/// Shape of a synthetic relation: dimension sizes, cell density, and seed.
#[derive(Debug, Clone, Copy)]
pub struct InstanceSpec {
    pub users: u32,
    pub tags: u32,
    pub resources: u32,
    pub dates: u32,
    /// Probability that any one (user, tag, resource, date) cell is present.
    pub density: f64,
    pub seed: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The i-th output of the SplitMix64 stream seeded with `seed`.
///
/// Counter form of the usual stateful generator: output i equals
/// `mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)` with wrapping arithmetic,
/// which is what i + 1 sequential state advances would produce. Addressing
/// outputs by index keeps generation independent of iteration order and
/// identical on every platform.
fn splitmix64_at(seed: u64, i: u64) -> u64 {
    mix64(seed.wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Generate a seeded random relation.
///
/// Cell (u, t, r, d) is present exactly when the SplitMix64 output at the
/// cell's row-major index (user outermost, date innermost) falls below
/// `floor(density * 2^64)`. The same spec therefore yields the same relation
/// on every run and platform. Labels are `u1..`, `t1..`, `r1..`, `d1..`.
/// All dimension members exist in the result even if no sampled cell
/// mentions them.
pub fn generate_random_instance(spec: &InstanceSpec) -> Result<DFolksonomy, Error> {
    if spec.users == 0 || spec.tags == 0 || spec.resources == 0 || spec.dates == 0 {
        return Err(Error::EmptyDimension);
    }
    if !(spec.density > 0.0 && spec.density <= 1.0) {
        return Err(Error::InvalidDensity(spec.density));
    }
    let all_present = spec.density >= 1.0;
    // 2^64 itself is not representable in u64; density 1.0 is short-circuited
    let limit = (spec.density * 2f64.powi(64)) as u64;
    let labels = |prefix: &str, n: u32| (1..=n).map(|i| format!("{prefix}{i}")).collect();
    let mut relation = Vec::new();
    let mut idx: u64 = 0;
    for u in 0..spec.users {
        for t in 0..spec.tags {
            for r in 0..spec.resources {
                for d in 0..spec.dates {
                    if all_present || splitmix64_at(spec.seed, idx) < limit {
                        relation.push((u, t, r, d));
                    }
                    idx += 1;
                }
            }
        }
    }
    DFolksonomy::from_parts(
        labels("u", spec.users),
        labels("t", spec.tags),
        labels("r", spec.resources),
        labels("d", spec.dates),
        relation,
    )
}

/// Output format for mined concepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    /// One JSON object per line with `extent`, `modus`, `intent`, `variable`
    /// label arrays.
    #[default]
    JsonLines,
    /// Four tab-separated columns of comma-joined labels.
    Tsv,
}

#[derive(Serialize, Deserialize)]
struct ConceptRow {
    extent: Vec<String>,
    modus: Vec<String>,
    intent: Vec<String>,
    variable: Vec<String>,
}

fn concept_row(f: &DFolksonomy, c: &QuadSet) -> ConceptRow {
    let mut extent: Vec<String> = c.extent.ids().map(|u| f.user_label(u).to_owned()).collect();
    let mut modus: Vec<String> = c.modus.iter().map(|&t| f.tag_label(t).to_owned()).collect();
    let mut intent: Vec<String> = c
        .intent
        .iter()
        .map(|&r| f.resource_label(r).to_owned())
        .collect();
    let mut variable: Vec<String> = c
        .variable
        .iter()
        .map(|&d| f.date_label(d).to_owned())
        .collect();
    extent.sort_unstable();
    modus.sort_unstable();
    intent.sort_unstable();
    variable.sort_unstable();
    ConceptRow {
        extent,
        modus,
        intent,
        variable,
    }
}

/// Render concepts in the order given, one per line, with each component's
/// labels sorted lexicographically. Ends with a newline when any concept was
/// written.
pub fn emit_concepts(
    f: &DFolksonomy,
    concepts: &[QuadConcept],
    format: OutputFormat,
) -> Result<String, IngestError> {
    let mut out = String::new();
    for c in concepts {
        let row = concept_row(f, c.as_quad());
        match format {
            OutputFormat::JsonLines => {
                out.push_str(&serde_json::to_string(&row)?);
            }
            OutputFormat::Tsv => {
                for (i, col) in [&row.extent, &row.modus, &row.intent, &row.variable]
                    .into_iter()
                    .enumerate()
                {
                    if i > 0 {
                        out.push('\t');
                    }
                    out.push_str(&col.join(","));
                }
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Read concepts back from the JSON lines form, mapping labels to the ids of
/// `f`. Unknown labels are errors: round-tripping only makes sense against
/// the relation the concepts came from.
pub fn parse_concepts_jsonl(f: &DFolksonomy, text: &str) -> Result<Vec<QuadSet>, IngestError> {
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let row: ConceptRow = serde_json::from_str(line)?;
        let label_err = |dimension, label: &String| IngestError::UnknownLabel {
            dimension,
            label: label.clone(),
        };
        let mut extent = UserSet::empty(f.user_count() as u32);
        for l in &row.extent {
            extent.insert(f.user_id(l).ok_or_else(|| label_err("user", l))?);
        }
        let modus = row
            .modus
            .iter()
            .map(|l| f.tag_id(l).ok_or_else(|| label_err("tag", l)))
            .collect::<Result<_, _>>()?;
        let intent = row
            .intent
            .iter()
            .map(|l| f.resource_id(l).ok_or_else(|| label_err("resource", l)))
            .collect::<Result<_, _>>()?;
        let variable = row
            .variable
            .iter()
            .map(|l| f.date_id(l).ok_or_else(|| label_err("date", l)))
            .collect::<Result<_, _>>()?;
        out.push(QuadSet::new(extent, modus, intent, variable));
    }
    Ok(out)
}
