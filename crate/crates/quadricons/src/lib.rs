//! Mining of frequent closed quadri-concepts from 4-ary tagging relations.
//!
//! A tagging relation records (user, tag, resource, date) assignments. A
//! quadri-concept is a maximal box inside that relation: a set of users, a
//! set of tags, a set of resources, and a set of dates whose full direct
//! product lies in the relation and that cannot be enlarged in any dimension
//! without losing that property. This crate mines every quadri-concept
//! meeting per-dimension frequency thresholds, using a generator-merge
//! algorithm ([`miner`]), and ships an independent brute-force enumerator
//! ([`oracle`]) to verify it against.

pub mod cli;
pub mod closure;
pub mod io;
pub mod miner;
pub mod model;
pub mod oracle;

pub use closure::{closure, is_closed, is_maximal_box, QuadConcept};
pub use miner::{quadricons, CandidateSet, MiningStats, Phase};
pub use model::{DFolksonomy, Error, QuadSet, Thresholds, UserSet};
pub use oracle::{
    ensure_enumerable, enumerate_concepts_bruteforce, enumerate_quadsets,
    minimize_counterexample, quadsets_from_concepts, verify, VerificationReport,
    DEFAULT_ENUM_CAP_BITS,
};
