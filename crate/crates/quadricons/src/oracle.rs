//! Brute-force ground truth and miner verification.
//!
//! Everything here recomputes from first principles: candidate concepts are
//! enumerated over all subsets of the tag, resource, and date dimensions and
//! reduced by pairwise dominance, with no reliance on the closure operator
//! or the merge phases. That independence is the point; agreement between
//! this module and the miner is evidence, not tautology.
//!
//! All entry points refuse relations whose enumeration space exceeds a bit
//! cap. Refusal keeps the ground truth exact: there is no sampled or
//! truncated mode.

use std::collections::HashSet;

use serde::Serialize;

use crate::closure::{is_maximal_box, QuadConcept};
use crate::model::{DFolksonomy, Error, QuadSet, Thresholds};

/// Default enumeration budget: the summed bit widths of the enumerated
/// dimensions may not exceed this.
pub const DEFAULT_ENUM_CAP_BITS: u32 = 24;

fn guard(bits: u32, cap: u32) -> Result<(), Error> {
    if bits > cap {
        return Err(Error::EnumerationTooLarge { bits, cap });
    }
    Ok(())
}

/// Cheap pre-check that concept enumeration on `f` fits inside `cap_bits`.
/// Lets callers refuse an oversized verification before spending any effort
/// on mining work whose check would then be rejected anyway.
pub fn ensure_enumerable(f: &DFolksonomy, cap_bits: u32) -> Result<(), Error> {
    let bits = (f.tag_count() + f.resource_count() + f.date_count()) as u32;
    guard(bits, cap_bits)
}

fn nonempty_masks(n: usize) -> impl Iterator<Item = u64> {
    1..(1u64 << n)
}

fn mask_to_ids(mask: u64) -> Vec<u32> {
    (0..64).filter(|b| (mask >> b) & 1 == 1).collect()
}

/// Every quadri-concept of the relation meeting the thresholds, by direct
/// enumeration: one candidate per nonempty (modus, intent, variable)
/// combination, closed over users, then reduced to the component-wise
/// maximal ones. Exponential in tags + resources + dates, hence the cap.
pub fn enumerate_concepts_bruteforce(
    f: &DFolksonomy,
    t: &Thresholds,
    cap_bits: u32,
) -> Result<Vec<QuadConcept>, Error> {
    let bits = (f.tag_count() + f.resource_count() + f.date_count()) as u32;
    guard(bits, cap_bits)?;
    let mut candidates: Vec<QuadSet> = Vec::new();
    for bmask in nonempty_masks(f.tag_count()) {
        let modus = mask_to_ids(bmask);
        for cmask in nonempty_masks(f.resource_count()) {
            let intent = mask_to_ids(cmask);
            for emask in nonempty_masks(f.date_count()) {
                let variable = mask_to_ids(emask);
                let extent = f.extent_of(&modus, &intent, &variable)?;
                if !extent.is_empty() {
                    candidates.push(QuadSet {
                        extent,
                        modus: modus.clone(),
                        intent: intent.clone(),
                        variable: variable.clone(),
                    });
                }
            }
        }
    }
    // a candidate strictly inside another candidate is not maximal; every
    // maximal box shows up as the candidate of its own (modus, intent,
    // variable), so dominance-filtering the candidates leaves exactly the
    // concepts
    let mut concepts: Vec<QuadConcept> = Vec::new();
    'outer: for (i, c) in candidates.iter().enumerate() {
        if !t.admits(c) {
            continue;
        }
        for (j, other) in candidates.iter().enumerate() {
            if i != j && dominates(other, c) {
                continue 'outer;
            }
        }
        concepts.push(QuadConcept::from_maximal_unchecked(c.clone()));
    }
    concepts.sort_by(|a, b| a.as_quad().canonical_cmp(b.as_quad()));
    Ok(concepts)
}

/// True when every component of `a` contains the matching component of `b`.
fn dominates(a: &QuadSet, b: &QuadSet) -> bool {
    fn contains_sorted(sup: &[u32], sub: &[u32]) -> bool {
        sub.iter().all(|x| sup.binary_search(x).is_ok())
    }
    b.extent.is_subset(&a.extent)
        && contains_sorted(&a.modus, &b.modus)
        && contains_sorted(&a.intent, &b.intent)
        && contains_sorted(&a.variable, &b.variable)
}

fn binomials(n: usize) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1;
        for j in 1..=i {
            c[i][j] = c[i - 1][j - 1].saturating_add(c[i - 1][j]);
        }
    }
    c
}

/// Count the frequent quadri-sets (boxes meeting the thresholds) without
/// materializing them: for every admissible (modus, intent, variable)
/// combination, any sufficiently large subset of its full extent completes
/// it to a box, and distinct combinations yield distinct quadri-sets. The
/// cap covers all four dimensions here since the count is exponential in
/// each.
pub fn enumerate_quadsets(
    f: &DFolksonomy,
    t: &Thresholds,
    cap_bits: u32,
) -> Result<u64, Error> {
    let bits =
        (f.user_count() + f.tag_count() + f.resource_count() + f.date_count()) as u32;
    guard(bits, cap_bits)?;
    let binom = binomials(f.user_count());
    let mut total: u64 = 0;
    for bmask in nonempty_masks(f.tag_count()) {
        let modus = mask_to_ids(bmask);
        if modus.len() < t.min_tags {
            continue;
        }
        for cmask in nonempty_masks(f.resource_count()) {
            let intent = mask_to_ids(cmask);
            if intent.len() < t.min_resources {
                continue;
            }
            for emask in nonempty_masks(f.date_count()) {
                let variable = mask_to_ids(emask);
                if variable.len() < t.min_dates {
                    continue;
                }
                let n = f.extent_of(&modus, &intent, &variable)?.len();
                for subsets_of_size_k in binom[n].iter().take(n + 1).skip(t.min_users) {
                    total = total.saturating_add(*subsets_of_size_k);
                }
            }
        }
    }
    Ok(total)
}

fn component_mask(ids: impl Iterator<Item = u32>) -> u64 {
    ids.fold(0u64, |m, id| m | (1u64 << id))
}

fn submasks_with_min_popcount(mask: u64, min: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut s = mask;
    loop {
        if s.count_ones() as usize >= min {
            out.push(s);
        }
        if s == 0 {
            break;
        }
        s = (s - 1) & mask;
    }
    out
}

/// Count the frequent quadri-sets by materializing every admissible sub-box
/// of every concept and deduplicating. Same number as
/// [`enumerate_quadsets`], reached along a different road: that agreement is
/// what the equivalence suite checks.
pub fn quadsets_from_concepts(
    f: &DFolksonomy,
    concepts: &[QuadConcept],
    t: &Thresholds,
    cap_bits: u32,
) -> Result<u64, Error> {
    let bits =
        (f.user_count() + f.tag_count() + f.resource_count() + f.date_count()) as u32;
    guard(bits, cap_bits)?;
    let mut seen: HashSet<(u64, u64, u64, u64)> = HashSet::new();
    for c in concepts {
        let q = c.as_quad();
        let usubs = submasks_with_min_popcount(component_mask(q.extent.ids()), t.min_users);
        let bsubs =
            submasks_with_min_popcount(component_mask(q.modus.iter().copied()), t.min_tags);
        let csubs = submasks_with_min_popcount(
            component_mask(q.intent.iter().copied()),
            t.min_resources,
        );
        let esubs = submasks_with_min_popcount(
            component_mask(q.variable.iter().copied()),
            t.min_dates,
        );
        for &um in &usubs {
            for &bm in &bsubs {
                for &cm in &csubs {
                    for &em in &esubs {
                        seen.insert((um, bm, cm, em));
                    }
                }
            }
        }
    }
    Ok(seen.len() as u64)
}

/// Outcome of checking a miner run against the ground truth.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub miner_count: usize,
    pub oracle_count: usize,
    /// Ground-truth concepts the miner did not produce.
    pub missing: Vec<QuadSet>,
    /// Miner outputs that are not ground-truth concepts.
    pub extra: Vec<QuadSet>,
    /// Miner outputs that fail closure, maximality, or the thresholds on
    /// direct recheck, with the reason.
    pub soundness_violations: Vec<(QuadSet, String)>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.soundness_violations.is_empty()
    }

    /// Render with labels resolved, for logs and the command line.
    pub fn to_json(&self, f: &DFolksonomy) -> serde_json::Value {
        let render = |q: &QuadSet| RenderedQuad::new(f, q);
        serde_json::json!({
            "miner_count": self.miner_count,
            "oracle_count": self.oracle_count,
            "missing": self.missing.iter().map(render).collect::<Vec<_>>(),
            "extra": self.extra.iter().map(render).collect::<Vec<_>>(),
            "soundness_violations": self
                .soundness_violations
                .iter()
                .map(|(q, why)| serde_json::json!({"candidate": render(q), "reason": why}))
                .collect::<Vec<_>>(),
            "clean": self.is_clean(),
        })
    }
}

#[derive(Serialize)]
struct RenderedQuad {
    extent: Vec<String>,
    modus: Vec<String>,
    intent: Vec<String>,
    variable: Vec<String>,
}

impl RenderedQuad {
    fn new(f: &DFolksonomy, q: &QuadSet) -> Self {
        let mut extent: Vec<String> =
            q.extent.ids().map(|u| f.user_label(u).to_owned()).collect();
        let mut modus: Vec<String> = q.modus.iter().map(|&t| f.tag_label(t).to_owned()).collect();
        let mut intent: Vec<String> = q
            .intent
            .iter()
            .map(|&r| f.resource_label(r).to_owned())
            .collect();
        let mut variable: Vec<String> = q
            .variable
            .iter()
            .map(|&d| f.date_label(d).to_owned())
            .collect();
        extent.sort_unstable();
        modus.sort_unstable();
        intent.sort_unstable();
        variable.sort_unstable();
        RenderedQuad {
            extent,
            modus,
            intent,
            variable,
        }
    }
}

fn soundness_reason(f: &DFolksonomy, q: &QuadSet, t: &Thresholds) -> Option<String> {
    if !t.admits(q) {
        return Some("component below threshold".to_owned());
    }
    match f.extent_of(&q.modus, &q.intent, &q.variable) {
        Err(e) => return Some(e.to_string()),
        Ok(ext) if ext != q.extent => return Some("extent not maximal".to_owned()),
        Ok(_) => {}
    }
    match is_maximal_box(f, q) {
        Err(e) => Some(e.to_string()),
        Ok(false) => Some("a component can be extended".to_owned()),
        Ok(true) => None,
    }
}

/// Check a miner run against brute-force ground truth.
///
/// Completeness and exactness come from the set difference in both
/// directions; soundness is additionally rechecked per mined concept so a
/// defect shows up with its reason even if the ground truth side were wrong
/// too.
pub fn verify(
    f: &DFolksonomy,
    mined: &[QuadConcept],
    t: &Thresholds,
    cap_bits: u32,
) -> Result<VerificationReport, Error> {
    let oracle = enumerate_concepts_bruteforce(f, t, cap_bits)?;
    let oracle_set: HashSet<&QuadSet> = oracle.iter().map(|c| c.as_quad()).collect();
    let mined_set: HashSet<&QuadSet> = mined.iter().map(|c| c.as_quad()).collect();
    let mut missing: Vec<QuadSet> = oracle_set
        .difference(&mined_set)
        .map(|q| (*q).clone())
        .collect();
    let mut extra: Vec<QuadSet> = mined_set
        .difference(&oracle_set)
        .map(|q| (*q).clone())
        .collect();
    missing.sort_by(QuadSet::canonical_cmp);
    extra.sort_by(QuadSet::canonical_cmp);
    let soundness_violations = mined
        .iter()
        .filter_map(|c| soundness_reason(f, c.as_quad(), t).map(|why| (c.as_quad().clone(), why)))
        .collect();
    Ok(VerificationReport {
        miner_count: mined.len(),
        oracle_count: oracle.len(),
        missing,
        extra,
        soundness_violations,
    })
}

/// Greedily shrink a failing input: drop any quadruple whose removal keeps
/// `still_failing` true, repeating until no single removal does. The
/// predicate sees candidate quadruple lists and must treat unbuildable ones
/// as not failing.
pub fn minimize_counterexample<P>(
    rows: &[(String, String, String, String)],
    still_failing: P,
) -> Vec<(String, String, String, String)>
where
    P: Fn(&[(String, String, String, String)]) -> bool,
{
    let mut current: Vec<(String, String, String, String)> = rows.to_vec();
    loop {
        let mut shrunk = false;
        let mut i = 0;
        while i < current.len() {
            let mut attempt = current.clone();
            attempt.remove(i);
            if still_failing(&attempt) {
                current = attempt;
                shrunk = true;
            } else {
                i += 1;
            }
        }
        if !shrunk {
            return current;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DFolksonomy, UserSet};

    fn sample() -> DFolksonomy {
        let mut rows: Vec<(&str, &str, &str, &str)> = Vec::new();
        for (u, ts) in [
            ("u1", vec!["t1", "t2", "t3"]),
            ("u2", vec!["t1", "t2"]),
            ("u3", vec!["t2", "t3"]),
            ("u4", vec!["t1", "t2", "t3"]),
        ] {
            for t in ts {
                rows.push((u, t, "r1", "d1"));
                rows.push((u, t, "r2", "d1"));
            }
        }
        for (u, t, r) in [
            ("u1", "t1", "r1"),
            ("u1", "t2", "r1"),
            ("u1", "t2", "r2"),
            ("u2", "t1", "r1"),
            ("u2", "t2", "r1"),
            ("u2", "t2", "r2"),
            ("u3", "t3", "r1"),
            ("u3", "t3", "r2"),
            ("u4", "t3", "r1"),
            ("u4", "t3", "r2"),
        ] {
            rows.push((u, t, r, "d2"));
        }
        DFolksonomy::from_quadruples(rows).unwrap()
    }

    fn quad(f: &DFolksonomy, us: &[&str], ts: &[&str], rs: &[&str], ds: &[&str]) -> QuadSet {
        QuadSet::new(
            UserSet::from_ids(
                f.user_count() as u32,
                us.iter().map(|l| f.user_id(l).unwrap()),
            ),
            ts.iter().map(|l| f.tag_id(l).unwrap()).collect(),
            rs.iter().map(|l| f.resource_id(l).unwrap()).collect(),
            ds.iter().map(|l| f.date_id(l).unwrap()).collect(),
        )
    }

    #[test]
    fn bruteforce_finds_the_four_sample_concepts() {
        let f = sample();
        let t = Thresholds::new(2, 2, 1, 1).unwrap();
        let concepts = enumerate_concepts_bruteforce(&f, &t, DEFAULT_ENUM_CAP_BITS).unwrap();
        let got: Vec<&QuadSet> = concepts.iter().map(|c| c.as_quad()).collect();
        assert_eq!(got.len(), 4);
        for e in [
            quad(&f, &["u1", "u2"], &["t1", "t2"], &["r1"], &["d1", "d2"]),
            quad(&f, &["u1", "u2", "u4"], &["t1", "t2"], &["r1", "r2"], &["d1"]),
            quad(&f, &["u1", "u3", "u4"], &["t2", "t3"], &["r1", "r2"], &["d1"]),
            quad(&f, &["u1", "u4"], &["t1", "t2", "t3"], &["r1", "r2"], &["d1"]),
        ] {
            assert!(got.contains(&&e), "missing {e:?}");
        }
    }

    #[test]
    fn lower_thresholds_keep_more_concepts() {
        let f = sample();
        let loose = enumerate_concepts_bruteforce(
            &f,
            &Thresholds::all_one(),
            DEFAULT_ENUM_CAP_BITS,
        )
        .unwrap();
        let twos = quad(&f, &["u3", "u4"], &["t3"], &["r1", "r2"], &["d1", "d2"]);
        assert!(loose.iter().any(|c| c.as_quad() == &twos));
        let tight = enumerate_concepts_bruteforce(
            &f,
            &Thresholds::new(2, 2, 1, 1).unwrap(),
            DEFAULT_ENUM_CAP_BITS,
        )
        .unwrap();
        assert!(tight.len() < loose.len());
    }

    #[test]
    fn quadset_count_on_tiny_relations() {
        let f = DFolksonomy::from_quadruples(vec![("a", "x", "p", "m")]).unwrap();
        let t = Thresholds::all_one();
        assert_eq!(enumerate_quadsets(&f, &t, DEFAULT_ENUM_CAP_BITS).unwrap(), 1);
        let f = DFolksonomy::from_quadruples(vec![
            ("a", "x", "p", "m"),
            ("b", "x", "p", "m"),
        ])
        .unwrap();
        // {a}, {b}, {a,b} over the single triple
        assert_eq!(enumerate_quadsets(&f, &t, DEFAULT_ENUM_CAP_BITS).unwrap(), 3);
    }

    #[test]
    fn quadset_routes_agree_on_the_sample() {
        let f = sample();
        for t in [Thresholds::all_one(), Thresholds::new(2, 2, 1, 1).unwrap()] {
            let direct = enumerate_quadsets(&f, &t, DEFAULT_ENUM_CAP_BITS).unwrap();
            let concepts =
                enumerate_concepts_bruteforce(&f, &t, DEFAULT_ENUM_CAP_BITS).unwrap();
            let via_concepts =
                quadsets_from_concepts(&f, &concepts, &t, DEFAULT_ENUM_CAP_BITS).unwrap();
            assert_eq!(direct, via_concepts);
        }
    }

    #[test]
    fn sample_quadset_count_is_frozen() {
        let f = sample();
        let t = Thresholds::new(2, 2, 1, 1).unwrap();
        assert_eq!(enumerate_quadsets(&f, &t, DEFAULT_ENUM_CAP_BITS).unwrap(), 32);
    }

    #[test]
    fn cap_refuses_oversized_relations() {
        let f = sample();
        let t = Thresholds::all_one();
        // tags + resources + dates = 7 bits
        assert!(enumerate_concepts_bruteforce(&f, &t, 6).is_err());
        // users push it to 11
        assert!(enumerate_quadsets(&f, &t, 10).is_err());
        assert!(enumerate_quadsets(&f, &t, 11).is_ok());
    }

    #[test]
    fn verify_flags_missing_and_extra() {
        let f = sample();
        let t = Thresholds::new(2, 2, 1, 1).unwrap();
        let oracle = enumerate_concepts_bruteforce(&f, &t, DEFAULT_ENUM_CAP_BITS).unwrap();
        let clean = verify(&f, &oracle, &t, DEFAULT_ENUM_CAP_BITS).unwrap();
        assert!(clean.is_clean());
        assert_eq!(clean.miner_count, clean.oracle_count);
        // drop one concept: it must come back as missing
        let partial = &oracle[1..];
        let report = verify(&f, partial, &t, DEFAULT_ENUM_CAP_BITS).unwrap();
        assert!(!report.is_clean());
        assert_eq!(report.missing.len(), 1);
        assert!(report.extra.is_empty());
        assert_eq!(
            report.miner_count - report.extra.len() + report.missing.len(),
            report.oracle_count
        );
        // smuggle in a non-concept: extra plus a soundness violation
        let mut tampered: Vec<QuadConcept> = oracle.clone();
        tampered.push(QuadConcept::from_maximal_unchecked(quad(
            &f,
            &["u1", "u4"],
            &["t1", "t2"],
            &["r1", "r2"],
            &["d1"],
        )));
        let report = verify(&f, &tampered, &t, DEFAULT_ENUM_CAP_BITS).unwrap();
        assert_eq!(report.extra.len(), 1);
        assert_eq!(report.soundness_violations.len(), 1);
    }

    #[test]
    fn minimizer_reaches_a_local_minimum() {
        let rows: Vec<(String, String, String, String)> = [
            ("a", "x", "p", "m"),
            ("b", "x", "p", "m"),
            ("c", "y", "q", "n"),
        ]
        .iter()
        .map(|(u, t, r, d)| {
            (
                u.to_string(),
                t.to_string(),
                r.to_string(),
                d.to_string(),
            )
        })
        .collect();
        // "failing" = still contains the (a, x) row
        let shrunk = minimize_counterexample(&rows, |rs| {
            rs.iter().any(|r| r.0 == "a" && r.1 == "x")
        });
        assert_eq!(shrunk.len(), 1);
        assert_eq!(shrunk[0].0, "a");
    }
}
