//! Core data model for 4-ary tagging relations.
//!
//! A tagging relation records which user assigned which tag to which resource
//! on which date. This module interns the four label dimensions into dense
//! ids, stores the relation as a sorted deduplicated quadruple list plus a
//! per-(tag, resource, date) extent index, and defines the set types the
//! mining and verification layers operate on.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

pub type UserId = u32;
pub type TagId = u32;
pub type ResourceId = u32;
pub type DateId = u32;

/// Errors raised by the model, closure, mining, and verification layers.
///
/// Every variant describes a caller mistake (malformed input, violated
/// precondition, or an enumeration request too large to honor); none of them
/// is an internal failure.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("{dimension} id {id} is out of range (dimension has {len} members)")]
    InvalidId {
        dimension: &'static str,
        id: u32,
        len: u32,
    },
    #[error("{component} must be nonempty")]
    EmptyComponent { component: &'static str },
    #[error("relation must contain at least one quadruple")]
    EmptyRelation,
    #[error("{dimension} threshold must be at least 1")]
    ZeroThreshold { dimension: &'static str },
    #[error("extent is not the full user set of its tag/resource/date box")]
    ExtentNotMaximal,
    #[error("quadruple set is not a box in the relation")]
    NotABox,
    #[error("density must lie in (0, 1], got {0}")]
    InvalidDensity(f64),
    #[error("every generated dimension must have at least one member")]
    EmptyDimension,
    #[error("enumeration space of {bits} bits exceeds the cap of {cap}")]
    EnumerationTooLarge { bits: u32, cap: u32 },
}

/// Dense-id interner for one label dimension.
///
/// Ids are assigned in first-appearance order, so rebuilding a relation from
/// the same input reproduces the same ids.
#[derive(Debug, Default, Clone)]
pub struct Interner {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn label(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.names
    }
}

/// Set of user ids, stored as a fixed-width bit vector.
///
/// All user sets attached to one relation share the same width, so subset and
/// intersection tests are straight word loops.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UserSet {
    nbits: u32,
    words: Vec<u64>,
}

impl UserSet {
    pub fn empty(nbits: u32) -> Self {
        let nwords = (nbits as usize).div_ceil(64);
        UserSet {
            nbits,
            words: vec![0; nwords],
        }
    }

    pub fn from_ids(nbits: u32, ids: impl IntoIterator<Item = UserId>) -> Self {
        let mut s = Self::empty(nbits);
        for id in ids {
            s.insert(id);
        }
        s
    }

    /// Width of the underlying bit vector, i.e. the user count of the
    /// relation this set belongs to.
    pub fn capacity(&self) -> u32 {
        self.nbits
    }

    pub fn insert(&mut self, id: UserId) {
        debug_assert!(id < self.nbits);
        self.words[(id / 64) as usize] |= 1u64 << (id % 64);
    }

    pub fn contains(&self, id: UserId) -> bool {
        if id >= self.nbits {
            return false;
        }
        self.words[(id / 64) as usize] & (1u64 << (id % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &UserSet) -> bool {
        debug_assert_eq!(self.nbits, other.nbits);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersect(&self, other: &UserSet) -> UserSet {
        debug_assert_eq!(self.nbits, other.nbits);
        UserSet {
            nbits: self.nbits,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn intersect_in_place(&mut self, other: &UserSet) {
        debug_assert_eq!(self.nbits, other.nbits);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// Compare as ascending id sequences (shorter prefix first).
    pub fn cmp_ids(&self, other: &UserSet) -> Ordering {
        let mut a = self.ids();
        let mut b = other.ids();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => match x.cmp(&y) {
                    Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }

    /// Member ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = UserId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let base = wi as u32 * 64;
            (0..64u32)
                .filter(move |b| (w >> b) & 1 == 1)
                .map(move |b| base + b)
        })
    }
}

impl std::fmt::Debug for UserSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.ids()).finish()
    }
}

/// A quadruple set (extent, modus, intent, variable): candidate unit of the
/// miner. The id vectors are kept sorted and deduplicated so structural
/// equality coincides with set equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadSet {
    pub extent: UserSet,
    pub modus: Vec<TagId>,
    pub intent: Vec<ResourceId>,
    pub variable: Vec<DateId>,
}

impl QuadSet {
    pub fn new(
        extent: UserSet,
        mut modus: Vec<TagId>,
        mut intent: Vec<ResourceId>,
        mut variable: Vec<DateId>,
    ) -> Self {
        modus.sort_unstable();
        modus.dedup();
        intent.sort_unstable();
        intent.dedup();
        variable.sort_unstable();
        variable.dedup();
        QuadSet {
            extent,
            modus,
            intent,
            variable,
        }
    }

    /// Deterministic output order: extent as an ascending id sequence, then
    /// modus, intent, and variable lexicographically.
    pub fn canonical_cmp(&self, other: &QuadSet) -> Ordering {
        self.extent
            .cmp_ids(&other.extent)
            .then_with(|| self.modus.cmp(&other.modus))
            .then_with(|| self.intent.cmp(&other.intent))
            .then_with(|| self.variable.cmp(&other.variable))
    }

    pub fn has_empty_component(&self) -> bool {
        self.extent.is_empty()
            || self.modus.is_empty()
            || self.intent.is_empty()
            || self.variable.is_empty()
    }
}

/// Minimum component sizes a quadri-concept must reach to count as frequent.
/// All four bounds are at least 1; a "threshold of zero" has no meaning here
/// because empty components never occur in a concept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub min_users: usize,
    pub min_tags: usize,
    pub min_resources: usize,
    pub min_dates: usize,
}

impl Thresholds {
    pub fn new(
        min_users: usize,
        min_tags: usize,
        min_resources: usize,
        min_dates: usize,
    ) -> Result<Self, Error> {
        for (v, dim) in [
            (min_users, "user"),
            (min_tags, "tag"),
            (min_resources, "resource"),
            (min_dates, "date"),
        ] {
            if v == 0 {
                return Err(Error::ZeroThreshold { dimension: dim });
            }
        }
        Ok(Thresholds {
            min_users,
            min_tags,
            min_resources,
            min_dates,
        })
    }

    pub fn all_one() -> Self {
        Thresholds {
            min_users: 1,
            min_tags: 1,
            min_resources: 1,
            min_dates: 1,
        }
    }

    /// True when every component of `q` meets its minimum size.
    pub fn admits(&self, q: &QuadSet) -> bool {
        q.extent.len() >= self.min_users
            && q.modus.len() >= self.min_tags
            && q.intent.len() >= self.min_resources
            && q.variable.len() >= self.min_dates
    }
}

/// A 4-ary tagging relation over interned users, tags, resources, and dates.
///
/// `extent_index` maps every occupied (tag, resource, date) triple to the set
/// of users holding it; this index is the workhorse of both the closure
/// operator and the miner. The `BTreeMap` keeps triples in ascending
/// (tag, resource, date) order, which fixes the generator order and hence
/// makes mining fully deterministic.
#[derive(Debug, Clone)]
pub struct DFolksonomy {
    users: Interner,
    tags: Interner,
    resources: Interner,
    dates: Interner,
    relation: Vec<(UserId, TagId, ResourceId, DateId)>,
    extent_index: BTreeMap<(TagId, ResourceId, DateId), UserSet>,
}

impl DFolksonomy {
    /// Build a relation from labeled quadruples in (user, tag, resource,
    /// date) order. Labels are interned in first-appearance order and
    /// duplicate quadruples collapse. Fails on empty input: a relation with
    /// no quadruples has no dimensions to speak of.
    pub fn from_quadruples<S: AsRef<str>>(
        rows: impl IntoIterator<Item = (S, S, S, S)>,
    ) -> Result<Self, Error> {
        let mut users = Interner::default();
        let mut tags = Interner::default();
        let mut resources = Interner::default();
        let mut dates = Interner::default();
        let mut relation = Vec::new();
        for (u, t, r, d) in rows {
            relation.push((
                users.intern(u.as_ref()),
                tags.intern(t.as_ref()),
                resources.intern(r.as_ref()),
                dates.intern(d.as_ref()),
            ));
        }
        if relation.is_empty() {
            return Err(Error::EmptyRelation);
        }
        Ok(Self::assemble(users, tags, resources, dates, relation))
    }

    /// Build a relation whose dimensions are given up front, so members that
    /// happen to appear in no quadruple still count toward the dimension
    /// sizes. Ids in `relation` index into the label vectors. Unlike
    /// [`DFolksonomy::from_quadruples`] an empty relation is allowed here as
    /// long as every dimension is populated.
    pub fn from_parts(
        user_labels: Vec<String>,
        tag_labels: Vec<String>,
        resource_labels: Vec<String>,
        date_labels: Vec<String>,
        relation: Vec<(UserId, TagId, ResourceId, DateId)>,
    ) -> Result<Self, Error> {
        if user_labels.is_empty()
            || tag_labels.is_empty()
            || resource_labels.is_empty()
            || date_labels.is_empty()
        {
            return Err(Error::EmptyDimension);
        }
        let mut users = Interner::default();
        let mut tags = Interner::default();
        let mut resources = Interner::default();
        let mut dates = Interner::default();
        for l in &user_labels {
            users.intern(l);
        }
        for l in &tag_labels {
            tags.intern(l);
        }
        for l in &resource_labels {
            resources.intern(l);
        }
        for l in &date_labels {
            dates.intern(l);
        }
        let bounds = [
            (users.len(), "user"),
            (tags.len(), "tag"),
            (resources.len(), "resource"),
            (dates.len(), "date"),
        ];
        for &(u, t, r, d) in &relation {
            for (id, (len, dim)) in [u, t, r, d].into_iter().zip(bounds) {
                if id as usize >= len {
                    return Err(Error::InvalidId {
                        dimension: dim,
                        id,
                        len: len as u32,
                    });
                }
            }
        }
        Ok(Self::assemble(users, tags, resources, dates, relation))
    }

    fn assemble(
        users: Interner,
        tags: Interner,
        resources: Interner,
        dates: Interner,
        mut relation: Vec<(UserId, TagId, ResourceId, DateId)>,
    ) -> Self {
        relation.sort_unstable();
        relation.dedup();
        let nusers = users.len() as u32;
        let mut extent_index: BTreeMap<(TagId, ResourceId, DateId), UserSet> = BTreeMap::new();
        for &(u, t, r, d) in &relation {
            extent_index
                .entry((t, r, d))
                .or_insert_with(|| UserSet::empty(nusers))
                .insert(u);
        }
        DFolksonomy {
            users,
            tags,
            resources,
            dates,
            relation,
            extent_index,
        }
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn tag_count(&self) -> usize {
        self.tags.len()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn date_count(&self) -> usize {
        self.dates.len()
    }

    pub fn quadruple_count(&self) -> usize {
        self.relation.len()
    }

    pub fn user_label(&self, id: UserId) -> &str {
        self.users.label(id)
    }

    pub fn tag_label(&self, id: TagId) -> &str {
        self.tags.label(id)
    }

    pub fn resource_label(&self, id: ResourceId) -> &str {
        self.resources.label(id)
    }

    pub fn date_label(&self, id: DateId) -> &str {
        self.dates.label(id)
    }

    pub fn user_id(&self, label: &str) -> Option<UserId> {
        self.users.get(label)
    }

    pub fn tag_id(&self, label: &str) -> Option<TagId> {
        self.tags.get(label)
    }

    pub fn resource_id(&self, label: &str) -> Option<ResourceId> {
        self.resources.get(label)
    }

    pub fn date_id(&self, label: &str) -> Option<DateId> {
        self.dates.get(label)
    }

    pub fn contains(&self, u: UserId, t: TagId, r: ResourceId, d: DateId) -> bool {
        self.relation.binary_search(&(u, t, r, d)).is_ok()
    }

    pub fn quadruples(&self) -> &[(UserId, TagId, ResourceId, DateId)] {
        &self.relation
    }

    /// Users holding one (tag, resource, date) triple, or `None` if the
    /// triple is unoccupied.
    pub fn triple_extent(&self, t: TagId, r: ResourceId, d: DateId) -> Option<&UserSet> {
        self.extent_index.get(&(t, r, d))
    }

    /// Occupied (tag, resource, date) triples with their user sets, in
    /// ascending (tag, resource, date) order.
    pub fn triples(&self) -> impl Iterator<Item = ((TagId, ResourceId, DateId), &UserSet)> {
        self.extent_index.iter().map(|(&k, v)| (k, v))
    }

    fn check_ids(
        &self,
        modus: &[TagId],
        intent: &[ResourceId],
        variable: &[DateId],
    ) -> Result<(), Error> {
        for &t in modus {
            if t as usize >= self.tags.len() {
                return Err(Error::InvalidId {
                    dimension: "tag",
                    id: t,
                    len: self.tags.len() as u32,
                });
            }
        }
        for &r in intent {
            if r as usize >= self.resources.len() {
                return Err(Error::InvalidId {
                    dimension: "resource",
                    id: r,
                    len: self.resources.len() as u32,
                });
            }
        }
        for &d in variable {
            if d as usize >= self.dates.len() {
                return Err(Error::InvalidId {
                    dimension: "date",
                    id: d,
                    len: self.dates.len() as u32,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_quad_ids(&self, q: &QuadSet) -> Result<(), Error> {
        if q.extent.capacity() != self.users.len() as u32 {
            let bad = q.extent.ids().last().unwrap_or(0);
            return Err(Error::InvalidId {
                dimension: "user",
                id: bad,
                len: self.users.len() as u32,
            });
        }
        self.check_ids(&q.modus, &q.intent, &q.variable)
    }

    /// The set of users related to every (tag, resource, date) combination of
    /// the given components: the largest extent completing them to a box.
    ///
    /// All three components must be nonempty; an extent "over no tags" is not
    /// a meaningful query and is rejected rather than answered with the whole
    /// user dimension.
    pub fn extent_of(
        &self,
        modus: &[TagId],
        intent: &[ResourceId],
        variable: &[DateId],
    ) -> Result<UserSet, Error> {
        for (v, name) in [
            (modus.is_empty(), "modus"),
            (intent.is_empty(), "intent"),
            (variable.is_empty(), "variable"),
        ] {
            if v {
                return Err(Error::EmptyComponent { component: name });
            }
        }
        self.check_ids(modus, intent, variable)?;
        let mut acc: Option<UserSet> = None;
        for &t in modus {
            for &r in intent {
                for &d in variable {
                    match self.extent_index.get(&(t, r, d)) {
                        None => return Ok(UserSet::empty(self.users.len() as u32)),
                        Some(ext) => match &mut acc {
                            None => acc = Some(ext.clone()),
                            Some(a) => {
                                a.intersect_in_place(ext);
                                if a.is_empty() {
                                    return Ok(UserSet::empty(self.users.len() as u32));
                                }
                            }
                        },
                    }
                }
            }
        }
        Ok(acc.expect("components verified nonempty"))
    }

    /// True when every (user, tag, resource, date) combination drawn from the
    /// four components lies in the relation. Vacuously true if any component
    /// is empty.
    pub fn is_box(&self, q: &QuadSet) -> Result<bool, Error> {
        self.check_quad_ids(q)?;
        for u in q.extent.ids() {
            for &t in &q.modus {
                for &r in &q.intent {
                    for &d in &q.variable {
                        if !self.contains(u, t, r, d) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }
}
