//! Closure operator and concept certification.
//!
//! A quadri-concept is a box none of whose four components can grow without
//! breaking the box property. The closure operator takes a box whose extent
//! is already as large as its other three components allow and saturates
//! those three components in sequence: first every tag shared by the whole
//! extent over the original resources and dates, then every resource shared
//! over the new tags and original dates, then every date shared over the new
//! tags and new resources. Each step can only add members, never remove, and
//! the result is always a quadri-concept.

use crate::model::{DFolksonomy, DateId, Error, QuadSet, ResourceId, TagId, UserSet};

/// A certified quadri-concept: a closed, maximal box of its relation.
///
/// Values of this type are only produced by [`closure`], by
/// [`QuadConcept::certify`], or by the brute-force enumerator, so holding one
/// is proof the wrapped quadruple set passed maximality checks.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadConcept(QuadSet);

impl QuadConcept {
    /// Re-check a candidate from scratch and wrap it on success. Returns
    /// `None` when the candidate is a box but not closed or not maximal;
    /// propagates errors for inputs that are not boxes at all.
    pub fn certify(f: &DFolksonomy, q: &QuadSet) -> Result<Option<QuadConcept>, Error> {
        if q.has_empty_component() {
            return Err(Error::EmptyComponent {
                component: "concept candidate",
            });
        }
        let max_extent = f.extent_of(&q.modus, &q.intent, &q.variable)?;
        if max_extent != q.extent {
            return Ok(None);
        }
        if !is_maximal_box(f, q)? {
            return Ok(None);
        }
        Ok(Some(QuadConcept(q.clone())))
    }

    pub(crate) fn from_maximal_unchecked(q: QuadSet) -> QuadConcept {
        QuadConcept(q)
    }

    pub fn as_quad(&self) -> &QuadSet {
        &self.0
    }

    pub fn into_quad(self) -> QuadSet {
        self.0
    }
}

impl std::ops::Deref for QuadConcept {
    type Target = QuadSet;

    fn deref(&self) -> &QuadSet {
        &self.0
    }
}

fn check_closure_input(f: &DFolksonomy, s: &QuadSet) -> Result<(), Error> {
    f.check_quad_ids(s)?;
    for (empty, name) in [
        (s.extent.is_empty(), "extent"),
        (s.modus.is_empty(), "modus"),
        (s.intent.is_empty(), "intent"),
        (s.variable.is_empty(), "variable"),
    ] {
        if empty {
            return Err(Error::EmptyComponent { component: name });
        }
    }
    let max_extent = f.extent_of(&s.modus, &s.intent, &s.variable)?;
    if max_extent != s.extent {
        return Err(Error::ExtentNotMaximal);
    }
    Ok(())
}

/// True when the whole extent holds tag `t` on every (resource, date) pair
/// drawn from `intent` and `variable`.
fn tag_shared(f: &DFolksonomy, extent: &UserSet, t: TagId, intent: &[ResourceId], variable: &[DateId]) -> bool {
    intent.iter().all(|&r| {
        variable.iter().all(|&d| match f.triple_extent(t, r, d) {
            Some(ext) => extent.is_subset(ext),
            None => false,
        })
    })
}

fn resource_shared(f: &DFolksonomy, extent: &UserSet, r: ResourceId, modus: &[TagId], variable: &[DateId]) -> bool {
    modus.iter().all(|&t| {
        variable.iter().all(|&d| match f.triple_extent(t, r, d) {
            Some(ext) => extent.is_subset(ext),
            None => false,
        })
    })
}

fn date_shared(f: &DFolksonomy, extent: &UserSet, d: DateId, modus: &[TagId], intent: &[ResourceId]) -> bool {
    modus.iter().all(|&t| {
        intent.iter().all(|&r| match f.triple_extent(t, r, d) {
            Some(ext) => extent.is_subset(ext),
            None => false,
        })
    })
}

/// Close a box around its extent.
///
/// Preconditions: all four components of `s` are nonempty and `s.extent` is
/// exactly `extent_of(s.modus, s.intent, s.variable)`; anything else is an
/// input error. The extent is untouched; modus, intent, and variable are
/// saturated in that order, each step building on the previous one.
pub fn closure(f: &DFolksonomy, s: &QuadSet) -> Result<QuadConcept, Error> {
    check_closure_input(f, s)?;
    let extent = &s.extent;
    let modus: Vec<TagId> = (0..f.tag_count() as TagId)
        .filter(|&t| tag_shared(f, extent, t, &s.intent, &s.variable))
        .collect();
    let intent: Vec<ResourceId> = (0..f.resource_count() as ResourceId)
        .filter(|&r| resource_shared(f, extent, r, &modus, &s.variable))
        .collect();
    let variable: Vec<DateId> = (0..f.date_count() as DateId)
        .filter(|&d| date_shared(f, extent, d, &modus, &intent))
        .collect();
    Ok(QuadConcept(QuadSet {
        extent: extent.clone(),
        modus,
        intent,
        variable,
    }))
}

/// True when `s` equals its own closure. Same preconditions as [`closure`].
pub fn is_closed(f: &DFolksonomy, s: &QuadSet) -> Result<bool, Error> {
    Ok(closure(f, s)?.as_quad() == s)
}

/// True when no single user, tag, resource, or date can be added to `s`
/// without breaking the box property. Requires `s` to be a box with nonempty
/// components; a non-box input is an error, not a `false`.
pub fn is_maximal_box(f: &DFolksonomy, s: &QuadSet) -> Result<bool, Error> {
    f.check_quad_ids(s)?;
    if s.has_empty_component() {
        return Err(Error::EmptyComponent {
            component: "box candidate",
        });
    }
    if !f.is_box(s)? {
        return Err(Error::NotABox);
    }
    // user extension: the extent of the other three components strictly
    // contains s.extent exactly when some user can be added
    let max_extent = f.extent_of(&s.modus, &s.intent, &s.variable)?;
    if max_extent != s.extent {
        return Ok(false);
    }
    for t in 0..f.tag_count() as TagId {
        if !s.modus.contains(&t) && tag_shared(f, &s.extent, t, &s.intent, &s.variable) {
            return Ok(false);
        }
    }
    for r in 0..f.resource_count() as ResourceId {
        if !s.intent.contains(&r) && resource_shared(f, &s.extent, r, &s.modus, &s.variable) {
            return Ok(false);
        }
    }
    for d in 0..f.date_count() as DateId {
        if !s.variable.contains(&d) && date_shared(f, &s.extent, d, &s.modus, &s.intent) {
            return Ok(false);
        }
    }
    Ok(true)
}
