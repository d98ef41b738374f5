//! The two lattices: subsets of `[n]` and subspaces of `F_q^n`.
//!
//! Both element types implement [`LatticeElement`], so property checks and
//! searches are written once. Ranks are set sizes or subspace dimensions; the
//! meet is intersection and the join is union or span. Both lattices are
//! modular, so `rank(a ∧ b) + rank(a ∨ b) = rank(a) + rank(b)`.

mod enumerate;
mod family;
mod format;
pub mod gf2;
mod matrix;
mod subset;
mod subspace;

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigUint;

use crate::finite_field::FieldSpec;
use crate::qcombinatorics::{binomial, gaussian_binomial};

pub use enumerate::{
    enumerate_all_subspaces, enumerate_subsets, enumerate_subspaces, enumerate_subspaces_capped,
    SubspaceIter, DEFAULT_ENUMERATION_CAP,
};
pub use family::{AnyFamily, Family, ProfileVector};
pub use format::{parse_family, write_family, FAMILY_HEADER};
pub use matrix::MatrixGF;
pub use subset::SubsetHandle;
pub use subspace::{canonicalize, contains, intersect_dim, span_dim, span_dim_all, SubspaceHandle};

/// The ambient structure a family lives in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ambient {
    Sets { n: usize },
    Subspaces { field: FieldSpec, n: usize },
}

impl Ambient {
    pub fn sets(n: usize) -> Self {
        Ambient::Sets { n }
    }

    pub fn subspaces(field: &FieldSpec, n: usize) -> Self {
        Ambient::Subspaces {
            field: field.clone(),
            n,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Ambient::Sets { n } | Ambient::Subspaces { n, .. } => *n,
        }
    }

    pub fn q(&self) -> Option<u32> {
        match self {
            Ambient::Sets { .. } => None,
            Ambient::Subspaces { field, .. } => Some(field.q()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Ambient::Sets { .. } => "subsets",
            Ambient::Subspaces { .. } => "subspaces",
        }
    }

    /// Number of rank-`i` elements: `C(n, i)` or `[n, i]_q`.
    pub fn level_size(&self, i: usize) -> BigUint {
        match self {
            Ambient::Sets { n } => binomial(*n as u64, i as u64),
            Ambient::Subspaces { field, n } => gaussian_binomial(*n as u64, i as u64, field.q() as u64),
        }
    }

    /// Number of rank-`i` elements above a fixed rank-`r` element.
    pub fn star_size(&self, r: usize, i: usize) -> BigUint {
        if i < r {
            return BigUint::from(0u32);
        }
        match self {
            Ambient::Sets { n } => binomial((n - r) as u64, (i - r) as u64),
            Ambient::Subspaces { field, n } => {
                gaussian_binomial((n - r) as u64, (i - r) as u64, field.q() as u64)
            }
        }
    }
}

/// An element of one of the two lattices.
pub trait LatticeElement: Clone + Eq + Ord + Hash + Debug + Send + Sync + 'static {
    fn ambient(&self) -> Ambient;
    /// Size of the set, or dimension of the subspace.
    fn rank(&self) -> usize;
    /// Rank of the meet (intersection).
    fn meet_rank(&self, other: &Self) -> usize;
    fn meet(&self, other: &Self) -> Self;
    fn join(&self, other: &Self) -> Self;
    /// The canonical text encoding used by the family file format.
    fn encode(&self) -> String;

    /// Rank of the join (union or span).
    fn join_rank(&self, other: &Self) -> usize {
        self.rank() + other.rank() - self.meet_rank(other)
    }

    /// Whether `other` is contained in `self`.
    fn contains(&self, other: &Self) -> bool {
        self.meet_rank(other) == other.rank()
    }

    /// Whether the two elements meet only in the bottom element.
    fn is_disjoint(&self, other: &Self) -> bool {
        self.meet_rank(other) == 0
    }
}

/// Meet of a nonempty sequence of elements.
pub fn meet_all<'a, E: LatticeElement>(items: impl IntoIterator<Item = &'a E>) -> Option<E> {
    let mut it = items.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, x| acc.meet(x)))
}

/// Join of a nonempty sequence of elements.
pub fn join_all<'a, E: LatticeElement>(items: impl IntoIterator<Item = &'a E>) -> Option<E> {
    let mut it = items.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, x| acc.join(x)))
}
