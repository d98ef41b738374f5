use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

use super::{Ambient, LatticeElement};

/// A subset of `[n]`, `n <= 64`, as one machine word. Bit `i` is element `i + 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubsetHandle {
    n: u8,
    bits: u64,
}

impl SubsetHandle {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n > 64 {
            return Err(Error::RangeError(format!("ground set size {n} exceeds 64")));
        }
        if n < 64 && bits >> n != 0 {
            return Err(Error::RangeError(format!("bits {bits:#x} outside [{n}]")));
        }
        Ok(SubsetHandle { n: n as u8, bits })
    }

    /// From 1-based element labels.
    pub fn from_elements(n: usize, elements: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &e in elements {
            if e == 0 || e > n {
                return Err(Error::RangeError(format!("element {e} outside [{n}]")));
            }
            bits |= 1 << (e - 1);
        }
        SubsetHandle::new(n, bits)
    }

    pub fn empty(n: usize) -> Self {
        SubsetHandle { n: n as u8, bits: 0 }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// 1-based members in increasing order.
    pub fn elements(&self) -> Vec<usize> {
        (0..self.n as usize).filter(|i| self.bits >> i & 1 == 1).map(|i| i + 1).collect()
    }
}

impl LatticeElement for SubsetHandle {
    fn ambient(&self) -> Ambient {
        Ambient::sets(self.n as usize)
    }

    fn rank(&self) -> usize {
        self.len()
    }

    fn meet_rank(&self, other: &Self) -> usize {
        (self.bits & other.bits).count_ones() as usize
    }

    fn join_rank(&self, other: &Self) -> usize {
        (self.bits | other.bits).count_ones() as usize
    }

    fn meet(&self, other: &Self) -> Self {
        SubsetHandle {
            n: self.n,
            bits: self.bits & other.bits,
        }
    }

    fn join(&self, other: &Self) -> Self {
        SubsetHandle {
            n: self.n,
            bits: self.bits | other.bits,
        }
    }

    fn contains(&self, other: &Self) -> bool {
        other.bits & !self.bits == 0
    }

    fn encode(&self) -> String {
        (0..self.n as usize)
            .map(|i| if self.bits >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

/// Lexicographic order of the 0/1 encodings.
impl Ord for SubsetHandle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            let diff = self.bits ^ other.bits;
            if diff == 0 {
                Ordering::Equal
            } else if self.bits & (diff & diff.wrapping_neg()) == 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for SubsetHandle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SubsetHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let els: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", els.join(","))
    }
}
