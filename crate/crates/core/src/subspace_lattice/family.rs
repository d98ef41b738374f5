use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};

use super::{Ambient, LatticeElement, SubsetHandle, SubspaceHandle};

/// Level-wise member counts `(f_0, ..., f_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileVector {
    pub counts: Vec<u64>,
}

impl ProfileVector {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Whether every level count is at most the level size.
    pub fn is_feasible(&self, ambient: &Ambient) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, &c)| BigUint::from(c) <= ambient.level_size(i))
    }
}

/// A finite set of lattice elements sharing one ambient, kept sorted in
/// canonical order without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family<E> {
    elements: Vec<E>,
    ambient: Ambient,
}

impl PartialOrd for Ambient {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ambient {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.kind(), self.q(), self.n()).cmp(&(other.kind(), other.q(), other.n()))
    }
}

impl<E: LatticeElement> Family<E> {
    pub fn new(ambient: Ambient, elements: impl IntoIterator<Item = E>) -> Result<Self> {
        let mut elements: Vec<E> = elements.into_iter().collect();
        if let Some(bad) = elements.iter().find(|e| e.ambient() != ambient) {
            return Err(Error::AmbientMismatch(format!(
                "element {:?} does not live in {:?}",
                bad, ambient
            )));
        }
        elements.sort();
        elements.dedup();
        Ok(Family { elements, ambient })
    }

    pub fn empty(ambient: Ambient) -> Self {
        Family {
            elements: Vec::new(),
            ambient,
        }
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<E> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, e: &E) -> bool {
        self.elements.binary_search(e).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, E> {
        self.elements.iter()
    }

    pub fn profile(&self) -> ProfileVector {
        let mut counts = vec![0u64; self.ambient.n() + 1];
        for e in &self.elements {
            counts[e.rank()] += 1;
        }
        ProfileVector { counts }
    }

    /// Common rank when the family is uniform (and nonempty).
    pub fn uniform_rank(&self) -> Option<usize> {
        let r = self.elements.first()?.rank();
        self.elements.iter().all(|e| e.rank() == r).then_some(r)
    }

    /// Members of rank `i`.
    pub fn level(&self, i: usize) -> Vec<E> {
        self.elements.iter().filter(|e| e.rank() == i).cloned().collect()
    }

    /// The family with the member at `index` removed.
    pub fn without(&self, index: usize) -> Self {
        let mut elements = self.elements.clone();
        elements.remove(index);
        Family {
            elements,
            ambient: self.ambient.clone(),
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch("union of families in different ambients".into()));
        }
        Family::new(
            self.ambient.clone(),
            self.elements.iter().chain(other.elements.iter()).cloned(),
        )
    }

    pub fn encodings(&self) -> Vec<String> {
        self.elements.iter().map(|e| e.encode()).collect()
    }
}

/// Serializes as the list of member encodings.
impl<E: LatticeElement> Serialize for Family<E> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.elements.iter().map(|e| e.encode()))
    }
}

impl<'a, E> IntoIterator for &'a Family<E> {
    type Item = &'a E;
    type IntoIter = std::slice::Iter<'a, E>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

/// A family of either kind, as read from a family file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyFamily {
    Subsets(Family<SubsetHandle>),
    Subspaces(Family<SubspaceHandle>),
}

impl AnyFamily {
    pub fn ambient(&self) -> &Ambient {
        match self {
            AnyFamily::Subsets(f) => f.ambient(),
            AnyFamily::Subspaces(f) => f.ambient(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyFamily::Subsets(f) => f.len(),
            AnyFamily::Subspaces(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encodings(&self) -> Vec<String> {
        match self {
            AnyFamily::Subsets(f) => f.encodings(),
            AnyFamily::Subspaces(f) => f.encodings(),
        }
    }

    pub fn profile(&self) -> ProfileVector {
        match self {
            AnyFamily::Subsets(f) => f.profile(),
            AnyFamily::Subspaces(f) => f.profile(),
        }
    }
}

impl From<Family<SubsetHandle>> for AnyFamily {
    fn from(f: Family<SubsetHandle>) -> Self {
        AnyFamily::Subsets(f)
    }
}

impl From<Family<SubspaceHandle>> for AnyFamily {
    fn from(f: Family<SubspaceHandle>) -> Self {
        AnyFamily::Subspaces(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field;
    use crate::subspace_lattice::enumerate_subspaces;

    #[test]
    fn dedup_and_profile() {
        let a = SubsetHandle::from_elements(4, &[1, 2]).unwrap();
        let b = SubsetHandle::from_elements(4, &[3]).unwrap();
        let fam = Family::new(Ambient::sets(4), [a, b, a]).unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.profile().counts, vec![0, 1, 1, 0, 0]);
        assert_eq!(fam.profile().total(), 2);
        assert!(fam.profile().is_feasible(fam.ambient()));
        assert_eq!(fam.uniform_rank(), None);
        assert!(fam.contains(&a));
        assert_eq!(fam.without(0).len(), 1);
    }

    #[test]
    fn rejects_foreign_elements() {
        let a = SubsetHandle::from_elements(5, &[1]).unwrap();
        assert!(Family::new(Ambient::sets(4), [a]).is_err());
        let f2 = make_field(2).unwrap();
        let f3 = make_field(3).unwrap();
        let line: Vec<_> = enumerate_subspaces(&f3, 3, 1).unwrap().take(1).collect();
        assert!(Family::new(Ambient::subspaces(&f2, 3), line).is_err());
    }

    #[test]
    fn full_level_profile_is_feasible_and_tight() {
        let f = make_field(3).unwrap();
        let lvl: Vec<_> = enumerate_subspaces(&f, 3, 1).unwrap().collect();
        let fam = Family::new(Ambient::subspaces(&f, 3), lvl).unwrap();
        assert_eq!(fam.profile().counts, vec![0, 13, 0, 0]);
        assert!(fam.profile().is_feasible(fam.ambient()));
        let over = ProfileVector {
            counts: vec![0, 14, 0, 0],
        };
        assert!(!over.is_feasible(fam.ambient()));
    }
}
