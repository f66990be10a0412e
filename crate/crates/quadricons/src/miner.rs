//! Generator-driven mining of frequent quadri-concepts.
//!
//! Mining starts from one generator per occupied (tag, resource, date)
//! triple and runs three merge phases, one per non-user dimension. Each
//! phase combines candidates in two ways:
//!
//! * when one candidate's fixed components all contain the other's, the
//!   merge dimension of the larger-extent partner is folded into the
//!   smaller-extent one (its users hold everything both candidates claim);
//! * when neither contains the other, their shared part (component-wise
//!   intersection, merge dimension union) is a new candidate, provided it
//!   still meets the frequency thresholds.
//!
//! New candidates join the phase's worklist, so merging runs to quiescence.
//! Both rules preserve the box property but can leave components short of
//! closure, so the final step re-checks every survivor against the relation
//! and keeps exactly the closed maximal boxes. Rejected candidates are
//! counted and reported in [`MiningStats`], never dropped silently.

use std::time::Instant;

use indexmap::IndexSet;
use serde::Serialize;

use crate::closure::{is_maximal_box, QuadConcept};
use crate::model::{DFolksonomy, Error, QuadSet, Thresholds};

/// The dimension a merge phase grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Modus,
    Intent,
    Variable,
}

/// Insertion-ordered set of candidates.
///
/// Candidates double as a worklist: phases process entries by index while
/// appending discoveries at the tail, and the set semantics make re-adding a
/// known candidate a no-op, which is what guarantees the worklists drain.
#[derive(Debug, Default, Clone)]
pub struct CandidateSet {
    items: IndexSet<QuadSet>,
}

impl CandidateSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert unless already present; reports whether the set grew.
    pub fn add(&mut self, q: QuadSet) -> bool {
        self.items.insert(q)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&QuadSet> {
        self.items.get_index(index)
    }

    pub fn contains(&self, q: &QuadSet) -> bool {
        self.items.contains(q)
    }

    pub fn iter(&self) -> impl Iterator<Item = &QuadSet> {
        self.items.iter()
    }

    pub fn retain(&mut self, keep: impl FnMut(&QuadSet) -> bool) {
        self.items.retain(keep);
    }
}

/// Result of processing one candidate against a pool.
pub struct PhaseOutput {
    /// The candidate with its merge dimension folded up over every
    /// containing partner in the pool.
    pub merged: QuadSet,
    /// Shared parts discovered against overlapping partners; they join the
    /// phase worklist.
    pub discovered: Vec<QuadSet>,
}

fn is_subset_sorted(a: &[u32], b: &[u32]) -> bool {
    let mut bi = b.iter();
    'outer: for x in a {
        for y in bi.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn union_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// One generator per occupied (tag, resource, date) triple whose user set
/// meets the user threshold, in ascending (tag, resource, date) order.
pub fn find_minimal_generators(f: &DFolksonomy, t: &Thresholds) -> CandidateSet {
    let mut out = CandidateSet::new();
    for ((tag, resource, date), ext) in f.triples() {
        if ext.len() >= t.min_users {
            out.add(QuadSet::new(
                ext.clone(),
                vec![tag],
                vec![resource],
                vec![date],
            ));
        }
    }
    out
}

/// Merge one candidate against a pool in the given phase.
///
/// The phase's merge dimension grows; every dimension after it must match
/// exactly for two candidates to interact at all, and every dimension before
/// it is intersected when the candidates merely overlap. This asymmetry is
/// what keeps every produced quadruple set a box: components that are not
/// yet saturated for this phase would poison larger merges if they were
/// allowed to differ.
///
/// `q` itself may be a pool member; matching against itself is a harmless
/// no-op in every phase.
pub fn closure_compute(
    q: &QuadSet,
    pool: &CandidateSet,
    phase: Phase,
    t: &Thresholds,
) -> PhaseOutput {
    match phase {
        Phase::Modus => merge_modus(q, pool, t),
        Phase::Intent => merge_intent(q, pool, t),
        Phase::Variable => merge_variable(q, pool, t),
    }
}

fn merge_modus(q: &QuadSet, pool: &CandidateSet, t: &Thresholds) -> PhaseOutput {
    let mut modus = q.modus.clone();
    let mut discovered = Vec::new();
    for other in pool.iter() {
        if other.intent != q.intent || other.variable != q.variable {
            continue;
        }
        if q.extent.is_subset(&other.extent) {
            modus = union_sorted(&modus, &other.modus);
        } else if !other.extent.is_subset(&q.extent) {
            let extent = q.extent.intersect(&other.extent);
            if extent.len() >= t.min_users {
                discovered.push(QuadSet::new(
                    extent,
                    union_sorted(&q.modus, &other.modus),
                    q.intent.clone(),
                    q.variable.clone(),
                ));
            }
        }
    }
    PhaseOutput {
        merged: QuadSet::new(q.extent.clone(), modus, q.intent.clone(), q.variable.clone()),
        discovered,
    }
}

fn merge_intent(q: &QuadSet, pool: &CandidateSet, t: &Thresholds) -> PhaseOutput {
    let mut intent = q.intent.clone();
    let mut discovered = Vec::new();
    for other in pool.iter() {
        if other.variable != q.variable {
            continue;
        }
        if q.extent.is_subset(&other.extent) && is_subset_sorted(&q.modus, &other.modus) {
            intent = union_sorted(&intent, &other.intent);
        } else if !(other.extent.is_subset(&q.extent)
            && is_subset_sorted(&other.modus, &q.modus))
        {
            let extent = q.extent.intersect(&other.extent);
            if extent.len() < t.min_users {
                continue;
            }
            let modus = intersect_sorted(&q.modus, &other.modus);
            if modus.len() < t.min_tags {
                continue;
            }
            discovered.push(QuadSet::new(
                extent,
                modus,
                union_sorted(&q.intent, &other.intent),
                q.variable.clone(),
            ));
        }
    }
    PhaseOutput {
        merged: QuadSet::new(q.extent.clone(), q.modus.clone(), intent, q.variable.clone()),
        discovered,
    }
}

fn merge_variable(q: &QuadSet, pool: &CandidateSet, t: &Thresholds) -> PhaseOutput {
    let mut variable = q.variable.clone();
    let mut discovered = Vec::new();
    for other in pool.iter() {
        if q.extent.is_subset(&other.extent)
            && is_subset_sorted(&q.modus, &other.modus)
            && is_subset_sorted(&q.intent, &other.intent)
        {
            variable = union_sorted(&variable, &other.variable);
        } else if !(other.extent.is_subset(&q.extent)
            && is_subset_sorted(&other.modus, &q.modus)
            && is_subset_sorted(&other.intent, &q.intent))
        {
            let extent = q.extent.intersect(&other.extent);
            if extent.len() < t.min_users {
                continue;
            }
            let modus = intersect_sorted(&q.modus, &other.modus);
            if modus.len() < t.min_tags {
                continue;
            }
            let intent = intersect_sorted(&q.intent, &other.intent);
            if intent.len() < t.min_resources {
                continue;
            }
            discovered.push(QuadSet::new(
                extent,
                modus,
                intent,
                union_sorted(&q.variable, &other.variable),
            ));
        }
    }
    PhaseOutput {
        merged: QuadSet::new(
            q.extent.clone(),
            q.modus.clone(),
            q.intent.clone(),
            variable,
        ),
        discovered,
    }
}

/// Drop candidates whose phase dimension is below its threshold; returns how
/// many were removed.
pub fn prune_infrequent(set: &mut CandidateSet, phase: Phase, t: &Thresholds) -> usize {
    let before = set.len();
    match phase {
        Phase::Modus => set.retain(|q| q.modus.len() >= t.min_tags),
        Phase::Intent => set.retain(|q| q.intent.len() >= t.min_resources),
        Phase::Variable => set.retain(|q| q.variable.len() >= t.min_dates),
    }
    before - set.len()
}

/// How many reject descriptions [`MiningStats`] keeps; the count is always
/// exact.
const REJECT_DETAIL_CAP: usize = 32;

/// Counters and timings for one mining run.
#[derive(Debug, Clone, Serialize)]
pub struct MiningStats {
    pub users: usize,
    pub tags: usize,
    pub resources: usize,
    pub dates: usize,
    pub quadruples: usize,
    pub min_users: usize,
    pub min_tags: usize,
    pub min_resources: usize,
    pub min_dates: usize,
    /// Generators taken straight from occupied triples.
    pub initial_generators: usize,
    /// Generators discovered by overlap during the first phase.
    pub derived_generators: usize,
    /// Candidate pool sizes after each phase's prune.
    pub candidates_after_modus: usize,
    pub candidates_after_intent: usize,
    pub candidates_after_variable: usize,
    pub pruned_after_modus: usize,
    pub pruned_after_intent: usize,
    pub pruned_after_variable: usize,
    /// Survivors of final validation: the mined concepts.
    pub concepts: usize,
    /// Candidates the final validation rejected (boxes that fell short of
    /// closure, maximality, or the thresholds).
    pub validation_rejects: usize,
    /// Renderings of the first rejected candidates, at most
    /// [`REJECT_DETAIL_CAP`].
    pub rejected_candidates: Vec<String>,
    pub phase_modus_ms: u64,
    pub phase_intent_ms: u64,
    pub phase_variable_ms: u64,
    pub validation_ms: u64,
    pub total_ms: u64,
    /// Peak resident set of the process, when the platform exposes it.
    pub peak_memory_kb: Option<u64>,
    /// Number of frequent quadruple sets, when small enough to count.
    pub quadset_count: Option<u64>,
    /// concepts / quadset_count: the compression the concept set achieves.
    pub compacity: Option<f64>,
}

impl MiningStats {
    fn new(f: &DFolksonomy, t: &Thresholds) -> Self {
        MiningStats {
            users: f.user_count(),
            tags: f.tag_count(),
            resources: f.resource_count(),
            dates: f.date_count(),
            quadruples: f.quadruple_count(),
            min_users: t.min_users,
            min_tags: t.min_tags,
            min_resources: t.min_resources,
            min_dates: t.min_dates,
            initial_generators: 0,
            derived_generators: 0,
            candidates_after_modus: 0,
            candidates_after_intent: 0,
            candidates_after_variable: 0,
            pruned_after_modus: 0,
            pruned_after_intent: 0,
            pruned_after_variable: 0,
            concepts: 0,
            validation_rejects: 0,
            rejected_candidates: Vec::new(),
            phase_modus_ms: 0,
            phase_intent_ms: 0,
            phase_variable_ms: 0,
            validation_ms: 0,
            total_ms: 0,
            peak_memory_kb: None,
            quadset_count: None,
            compacity: None,
        }
    }
}

fn describe(f: &DFolksonomy, q: &QuadSet) -> String {
    let join = |parts: Vec<&str>| parts.join(",");
    format!(
        "({{{}}},{{{}}},{{{}}},{{{}}})",
        join(q.extent.ids().map(|u| f.user_label(u)).collect()),
        join(q.modus.iter().map(|&t| f.tag_label(t)).collect()),
        join(q.intent.iter().map(|&r| f.resource_label(r)).collect()),
        join(q.variable.iter().map(|&d| f.date_label(d)).collect()),
    )
}

/// Why validation rejected a candidate, or `None` if it is a frequent
/// quadri-concept.
fn rejection_reason(
    f: &DFolksonomy,
    q: &QuadSet,
    t: &Thresholds,
) -> Result<Option<&'static str>, Error> {
    if !t.admits(q) {
        return Ok(Some("component below threshold"));
    }
    let max_extent = f.extent_of(&q.modus, &q.intent, &q.variable)?;
    if max_extent != q.extent {
        return Ok(Some("extent not maximal"));
    }
    if !is_maximal_box(f, q)? {
        return Ok(Some("component not closed"));
    }
    Ok(None)
}

/// Mine every frequent quadri-concept of the relation.
///
/// Returns the concepts in canonical order together with run statistics.
/// The result is exact: a final validation pass re-derives closure and
/// maximality for every candidate directly from the relation, so merge-phase
/// by-products never leak into the output.
pub fn quadricons(
    f: &DFolksonomy,
    t: &Thresholds,
) -> Result<(Vec<QuadConcept>, MiningStats), Error> {
    let total_start = Instant::now();
    let mut stats = MiningStats::new(f, t);

    let phase_start = Instant::now();
    let mut generators = find_minimal_generators(f, t);
    stats.initial_generators = generators.len();
    let mut after_modus = CandidateSet::new();
    let mut i = 0;
    while let Some(q) = generators.get(i).cloned() {
        let out = closure_compute(&q, &generators, Phase::Modus, t);
        debug_assert!(f.is_box(&out.merged)?);
        for g in out.discovered {
            generators.add(g);
        }
        after_modus.add(out.merged);
        i += 1;
    }
    stats.derived_generators = generators.len() - stats.initial_generators;
    stats.pruned_after_modus = prune_infrequent(&mut after_modus, Phase::Modus, t);
    stats.candidates_after_modus = after_modus.len();
    stats.phase_modus_ms = phase_start.elapsed().as_millis() as u64;

    // The pool is its own worklist here: merged candidates re-enter it so
    // later arrivals can build on them, and the survivors seed the next
    // phase.
    let phase_start = Instant::now();
    let mut pool = after_modus;
    let mut i = 0;
    while let Some(q) = pool.get(i).cloned() {
        let out = closure_compute(&q, &pool, Phase::Intent, t);
        debug_assert!(f.is_box(&out.merged)?);
        for g in out.discovered {
            pool.add(g);
        }
        pool.add(out.merged);
        i += 1;
    }
    stats.pruned_after_intent = prune_infrequent(&mut pool, Phase::Intent, t);
    stats.candidates_after_intent = pool.len();
    stats.phase_intent_ms = phase_start.elapsed().as_millis() as u64;

    let phase_start = Instant::now();
    let mut raw = CandidateSet::new();
    let mut i = 0;
    while let Some(q) = pool.get(i).cloned() {
        let out = closure_compute(&q, &pool, Phase::Variable, t);
        debug_assert!(f.is_box(&out.merged)?);
        for g in out.discovered {
            pool.add(g);
        }
        raw.add(out.merged);
        i += 1;
    }
    stats.pruned_after_variable = prune_infrequent(&mut raw, Phase::Variable, t);
    stats.candidates_after_variable = raw.len();
    stats.phase_variable_ms = phase_start.elapsed().as_millis() as u64;

    let validation_start = Instant::now();
    let mut concepts = Vec::new();
    for q in raw.iter() {
        match rejection_reason(f, q, t)? {
            None => concepts.push(QuadConcept::from_maximal_unchecked(q.clone())),
            Some(reason) => {
                stats.validation_rejects += 1;
                if stats.rejected_candidates.len() < REJECT_DETAIL_CAP {
                    stats
                        .rejected_candidates
                        .push(format!("{}: {reason}", describe(f, q)));
                }
            }
        }
    }
    concepts.sort_by(|a, b| a.as_quad().canonical_cmp(b.as_quad()));
    stats.concepts = concepts.len();
    stats.validation_ms = validation_start.elapsed().as_millis() as u64;
    stats.total_ms = total_start.elapsed().as_millis() as u64;
    Ok((concepts, stats))
}
