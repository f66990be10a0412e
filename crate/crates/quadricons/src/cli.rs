//! Command-line interface.
//!
//! Four subcommands: `mine` extracts concepts from a quadruple stream,
//! `verify` replays mining and checks it against brute-force ground truth,
//! `gen` emits a seeded random relation, and `stats` summarizes an input
//! without mining it. Exit codes: 0 on success, 1 when verification finds a
//! mismatch, 2 on unusable input or arguments.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::io::{
    emit_concepts, generate_random_instance, parse_quadruples, DateGranularity, IngestConfig,
    InstanceSpec, OutputFormat,
};
use crate::miner::quadricons;
use crate::model::{DFolksonomy, Thresholds};
use crate::oracle::{enumerate_quadsets, verify, DEFAULT_ENUM_CAP_BITS};

#[derive(Parser)]
#[command(
    name = "quadricons",
    version,
    about = "Mine frequent closed concepts from user/tag/resource/date tagging relations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine frequent quadri-concepts from a quadruple stream.
    Mine(MineArgs),
    /// Mine, then check the result against brute-force enumeration.
    Verify(VerifyArgs),
    /// Generate a seeded random relation as tab-separated quadruples.
    Gen(GenArgs),
    /// Print dimension and quadruple counts of an input.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    Raw,
    Day,
    Month,
    Year,
}

impl From<GranularityArg> for DateGranularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Raw => DateGranularity::Raw,
            GranularityArg::Day => DateGranularity::Day,
            GranularityArg::Month => DateGranularity::Month,
            GranularityArg::Year => DateGranularity::Year,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    JsonLines,
    Tsv,
}

#[derive(Args)]
struct InputArgs {
    /// Input file of delimiter-separated quadruples, or - for stdin.
    input: PathBuf,
    /// Field delimiter (single character).
    #[arg(long, default_value = "\t")]
    delimiter: char,
    /// Zero-based column of the user field.
    #[arg(long, default_value_t = 0)]
    user_col: usize,
    /// Zero-based column of the tag field.
    #[arg(long, default_value_t = 1)]
    tag_col: usize,
    /// Zero-based column of the resource field.
    #[arg(long, default_value_t = 2)]
    resource_col: usize,
    /// Zero-based column of the date field.
    #[arg(long, default_value_t = 3)]
    date_col: usize,
    /// Skip the first line.
    #[arg(long)]
    skip_header: bool,
    /// Collapse dates to a calendar granularity (raw keeps them verbatim).
    #[arg(long, value_enum, default_value_t = GranularityArg::Raw)]
    date_granularity: GranularityArg,
}

impl InputArgs {
    fn config(&self) -> IngestConfig {
        IngestConfig {
            delimiter: self.delimiter,
            user_col: self.user_col,
            tag_col: self.tag_col,
            resource_col: self.resource_col,
            date_col: self.date_col,
            skip_header: self.skip_header,
            granularity: self.date_granularity.into(),
        }
    }
}

#[derive(Args)]
struct ThresholdArgs {
    /// Minimum users per concept.
    #[arg(long, default_value_t = 1)]
    min_users: usize,
    /// Minimum tags per concept.
    #[arg(long, default_value_t = 1)]
    min_tags: usize,
    /// Minimum resources per concept.
    #[arg(long, default_value_t = 1)]
    min_resources: usize,
    /// Minimum dates per concept.
    #[arg(long, default_value_t = 1)]
    min_dates: usize,
}

impl ThresholdArgs {
    fn thresholds(&self) -> Result<Thresholds, crate::model::Error> {
        Thresholds::new(self.min_users, self.min_tags, self.min_resources, self.min_dates)
    }
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Output format for the concept stream.
    #[arg(long, value_enum, default_value_t = FormatArg::JsonLines)]
    format: FormatArg,
    /// Emit run statistics as JSON on stderr.
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Enumeration budget in bits for the ground-truth side.
    #[arg(long, default_value_t = DEFAULT_ENUM_CAP_BITS)]
    cap_bits: u32,
}

#[derive(Args)]
struct GenArgs {
    /// Number of users.
    #[arg(long)]
    users: u32,
    /// Number of tags.
    #[arg(long)]
    tags: u32,
    /// Number of resources.
    #[arg(long)]
    resources: u32,
    /// Number of dates.
    #[arg(long)]
    dates: u32,
    /// Probability that a (user, tag, resource, date) cell is present.
    #[arg(long)]
    density: f64,
    /// Seed for the deterministic generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
}

fn open_input(path: &PathBuf) -> io::Result<Box<dyn BufRead>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        Ok(Box::new(BufReader::new(File::open(path)?)))
    }
}

/// Peak resident set size of this process in kilobytes, if the platform
/// reports one.
fn peak_memory_kb() -> Option<u64> {
    let mut text = String::new();
    File::open("/proc/self/status")
        .ok()?
        .read_to_string(&mut text)
        .ok()?;
    let line = text.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn load(input: &InputArgs) -> Result<DFolksonomy, String> {
    let reader = open_input(&input.input).map_err(|e| format!("{}: {e}", input.input.display()))?;
    let outcome = parse_quadruples(reader, &input.config()).map_err(|e| e.to_string())?;
    for skip in &outcome.skipped {
        eprintln!("warning: skipped line {}: {}", skip.line, skip.reason);
    }
    Ok(outcome.folksonomy)
}

enum RunError {
    /// Verification found a mismatch: exit 1.
    Mismatch,
    /// Unusable input or arguments: exit 2.
    Input(String),
}

impl From<crate::model::Error> for RunError {
    fn from(e: crate::model::Error) -> Self {
        RunError::Input(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Mine(args) => {
            let f = load(&args.input).map_err(RunError::Input)?;
            let t = args.thresholds.thresholds()?;
            let (concepts, mut stats) = quadricons(&f, &t)?;
            let format = match args.format {
                FormatArg::JsonLines => OutputFormat::JsonLines,
                FormatArg::Tsv => OutputFormat::Tsv,
            };
            let rendered =
                emit_concepts(&f, &concepts, format).map_err(|e| RunError::Input(e.to_string()))?;
            io::stdout()
                .write_all(rendered.as_bytes())
                .map_err(|e| RunError::Input(e.to_string()))?;
            if args.stats {
                stats.peak_memory_kb = peak_memory_kb();
                let enum_bits = (f.user_count()
                    + f.tag_count()
                    + f.resource_count()
                    + f.date_count()) as u32;
                if enum_bits <= DEFAULT_ENUM_CAP_BITS {
                    let count = enumerate_quadsets(&f, &t, DEFAULT_ENUM_CAP_BITS)?;
                    stats.quadset_count = Some(count);
                    if count > 0 {
                        stats.compacity = Some(concepts.len() as f64 / count as f64);
                    }
                }
                let json = serde_json::to_string_pretty(&stats)
                    .map_err(|e| RunError::Input(e.to_string()))?;
                eprintln!("{json}");
            }
            Ok(())
        }
        Command::Verify(args) => {
            let f = load(&args.input).map_err(RunError::Input)?;
            let t = args.thresholds.thresholds()?;
            crate::oracle::ensure_enumerable(&f, args.cap_bits)?;
            let (concepts, _) = quadricons(&f, &t)?;
            let report = verify(&f, &concepts, &t, args.cap_bits)?;
            let json = serde_json::to_string_pretty(&report.to_json(&f))
                .map_err(|e| RunError::Input(e.to_string()))?;
            println!("{json}");
            if report.is_clean() {
                Ok(())
            } else {
                Err(RunError::Mismatch)
            }
        }
        Command::Gen(args) => {
            let spec = InstanceSpec {
                users: args.users,
                tags: args.tags,
                resources: args.resources,
                dates: args.dates,
                density: args.density,
                seed: args.seed,
            };
            let f = generate_random_instance(&spec)?;
            let stdout = io::stdout();
            let mut out = io::BufWriter::new(stdout.lock());
            for &(u, t, r, d) in f.quadruples() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    f.user_label(u),
                    f.tag_label(t),
                    f.resource_label(r),
                    f.date_label(d)
                )
                .map_err(|e| RunError::Input(e.to_string()))?;
            }
            out.flush().map_err(|e| RunError::Input(e.to_string()))?;
            Ok(())
        }
        Command::Stats(args) => {
            let f = load(&args.input).map_err(RunError::Input)?;
            let json = serde_json::json!({
                "users": f.user_count(),
                "tags": f.tag_count(),
                "resources": f.resource_count(),
                "dates": f.date_count(),
                "quadruples": f.quadruple_count(),
            });
            println!("{}", serde_json::to_string_pretty(&json).expect("static shape"));
            Ok(())
        }
    }
}

/// Entry point behind `main`; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help and --version as "errors" with exit 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(RunError::Mismatch) => 1,
        Err(RunError::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
