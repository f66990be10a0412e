//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use quadricons::{DFolksonomy, QuadSet, UserSet};

/// Two-date sample relation used across the suites: four users, three tags,
/// two resources, two dates, 30 quadruples. On the first date users tag both
/// resources heavily; on the second only a few assignments survive.
pub fn sample() -> DFolksonomy {
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

/// The sample relation as raw label rows, for tests that rebuild or shrink
/// it.
pub fn sample_rows() -> Vec<(String, String, String, String)> {
    let f = sample();
    f.quadruples()
        .iter()
        .map(|&(u, t, r, d)| {
            (
                f.user_label(u).to_owned(),
                f.tag_label(t).to_owned(),
                f.resource_label(r).to_owned(),
                f.date_label(d).to_owned(),
            )
        })
        .collect()
}

/// Build a quadruple set from labels against `f`.
pub fn quad(f: &DFolksonomy, us: &[&str], ts: &[&str], rs: &[&str], ds: &[&str]) -> QuadSet {
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

/// Build a closure-ready input anchored at an occupied quadruple: start
/// from that row's (tag, resource, date) triple, then admit further ids
/// (chosen by the selector bitmasks) only while the extent stays nonempty.
/// The result always has a nonempty extent equal to the extent of its own
/// (modus, intent, variable) box, so `closure` accepts it.
pub fn proper_quadset(
    f: &DFolksonomy,
    row_sel: usize,
    bsel: u64,
    csel: u64,
    esel: u64,
) -> QuadSet {
    let rows = f.quadruples();
    let (_, t0, r0, d0) = rows[row_sel % rows.len()];
    let mut modus = vec![t0];
    let mut intent = vec![r0];
    let mut variable = vec![d0];
    {
        let nonempty = |m: &[u32], i: &[u32], v: &[u32]| !f.extent_of(m, i, v).unwrap().is_empty();
        for t in 0..f.tag_count() as u32 {
            if t != t0 && (bsel >> (t % 64)) & 1 == 1 {
                modus.push(t);
                if !nonempty(&modus, &intent, &variable) {
                    modus.pop();
                }
            }
        }
        for r in 0..f.resource_count() as u32 {
            if r != r0 && (csel >> (r % 64)) & 1 == 1 {
                intent.push(r);
                if !nonempty(&modus, &intent, &variable) {
                    intent.pop();
                }
            }
        }
        for d in 0..f.date_count() as u32 {
            if d != d0 && (esel >> (d % 64)) & 1 == 1 {
                variable.push(d);
                if !nonempty(&modus, &intent, &variable) {
                    variable.pop();
                }
            }
        }
    }
    let extent = f.extent_of(&modus, &intent, &variable).unwrap();
    QuadSet::new(extent, modus, intent, variable)
}
