use std::ops::RangeInclusive;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::finite_field::FieldSpec;
use crate::qcombinatorics::gaussian_binomial;

use super::{SubsetHandle, SubspaceHandle};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Streams the `k`-dimensional subspaces of `F_q^n`.
///
/// Pivot sets come in lexicographic order; within one pivot set the free RREF
/// cells (row-major) form a base-q counter whose least significant digit is
/// the last free cell.
pub struct SubspaceIter {
    field: FieldSpec,
    n: usize,
    k: usize,
    pivots: Vec<usize>,
    free: Vec<usize>,
    counter: Vec<u8>,
    done: bool,
}

impl SubspaceIter {
    fn new(field: &FieldSpec, n: usize, k: usize) -> Self {
        let pivots: Vec<usize> = (0..k).collect();
        let mut it = SubspaceIter {
            field: field.clone(),
            n,
            k,
            pivots,
            free: Vec::new(),
            counter: Vec::new(),
            done: k > n,
        };
        it.reset_free();
        it
    }

    fn reset_free(&mut self) {
        self.free.clear();
        for (r, &p) in self.pivots.iter().enumerate() {
            for c in p + 1..self.n {
                if !self.pivots.contains(&c) {
                    self.free.push(r * self.n + c);
                }
            }
        }
        self.counter = vec![0; self.free.len()];
    }

    fn current(&self) -> SubspaceHandle {
        let mut rows = vec![0u8; self.k * self.n];
        for (r, &p) in self.pivots.iter().enumerate() {
            rows[r * self.n + p] = 1;
        }
        for (&cell, &v) in self.free.iter().zip(&self.counter) {
            rows[cell] = v;
        }
        SubspaceHandle::from_rref_parts(&self.field, self.n, rows, self.pivots.clone())
    }

    fn advance(&mut self) {
        let q = self.field.q() as u16;
        for d in self.counter.iter_mut().rev() {
            if (*d as u16) + 1 < q {
                *d += 1;
                return;
            }
            *d = 0;
        }
        if !next_combination(&mut self.pivots, self.n) {
            self.done = true;
            return;
        }
        self.reset_free();
    }
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

impl Iterator for SubspaceIter {
    type Item = SubspaceHandle;

    fn next(&mut self) -> Option<SubspaceHandle> {
        if self.done {
            return None;
        }
        let out = self.current();
        self.advance();
        Some(out)
    }
}

/// All `k`-dimensional subspaces of `F_q^n`, refusing more than `cap` of them.
pub fn enumerate_subspaces_capped(field: &FieldSpec, n: usize, k: usize, cap: u64) -> Result<SubspaceIter> {
    if k > n {
        return Err(Error::RangeError(format!("dimension {k} exceeds ambient {n}")));
    }
    let count = gaussian_binomial(n as u64, k as u64, field.q() as u64);
    if count > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            count: count.to_string(),
            cap,
        });
    }
    Ok(SubspaceIter::new(field, n, k))
}

pub fn enumerate_subspaces(field: &FieldSpec, n: usize, k: usize) -> Result<SubspaceIter> {
    enumerate_subspaces_capped(field, n, k, DEFAULT_ENUMERATION_CAP)
}

/// Every subspace with dimension in `dims`, by increasing dimension.
pub fn enumerate_all_subspaces(
    field: &FieldSpec,
    n: usize,
    dims: RangeInclusive<usize>,
    cap: u64,
) -> Result<Vec<SubspaceHandle>> {
    let mut total = BigUint::from(0u32);
    for k in dims.clone() {
        total += gaussian_binomial(n as u64, k as u64, field.q() as u64);
    }
    if total > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            count: total.to_string(),
            cap,
        });
    }
    let mut out = Vec::new();
    for k in dims {
        out.extend(enumerate_subspaces_capped(field, n, k, cap)?);
    }
    Ok(out)
}

/// All `k`-subsets of `[n]` in colex order.
pub fn enumerate_subsets(n: usize, k: usize) -> Result<impl Iterator<Item = SubsetHandle>> {
    if n > 64 || k > n {
        return Err(Error::RangeError(format!("need 0 <= k <= n <= 64, got n={n} k={k}")));
    }
    let limit: u128 = 1u128 << n;
    let mut cur: Option<u128> = Some(if k == 0 { 0 } else { (1u128 << k) - 1 });
    Ok(std::iter::from_fn(move || {
        let x = cur?;
        cur = if x == 0 {
            None
        } else {
            // Gosper's hack: next integer with the same popcount.
            let low = x & x.wrapping_neg();
            let ripple = x + low;
            let next = (((ripple ^ x) >> 2) / low) | ripple;
            (next < limit).then_some(next)
        };
        Some(SubsetHandle::new(n, x as u64).expect("within [n]"))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field;
    use crate::subspace_lattice::LatticeElement;
    use std::collections::HashSet;

    #[test]
    fn lines_of_gf2_squared() {
        let f = make_field(2).unwrap();
        let lines: Vec<_> = enumerate_subspaces(&f, 2, 1).unwrap().collect();
        let codes: Vec<String> = lines.iter().map(|l| l.encode()).collect();
        // Pivot {0}: free cell counter 0,1; then pivot {1}.
        assert_eq!(codes, vec!["10", "11", "01"]);
    }

    #[test]
    fn trivial_subspace_is_unique() {
        for q in [2, 3, 4] {
            let f = make_field(q).unwrap();
            for n in 0..4 {
                let all: Vec<_> = enumerate_subspaces(&f, n, 0).unwrap().collect();
                assert_eq!(all.len(), 1);
                assert_eq!(all[0].dim(), 0);
            }
        }
    }

    #[test]
    fn planes_of_gf2_fourth_are_distinct_and_canonical() {
        let f = make_field(2).unwrap();
        let all: Vec<_> = enumerate_subspaces(&f, 4, 2).unwrap().collect();
        assert_eq!(all.len(), 35);
        let set: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), 35);
        for s in &all {
            let again = SubspaceHandle::from_generators(&f, 4, s.rref_entries().to_vec());
            assert_eq!(&again, s);
        }
    }

    #[test]
    fn cap_is_enforced_with_exact_count() {
        let f = make_field(2).unwrap();
        match enumerate_subspaces_capped(&f, 4, 2, 34) {
            Err(Error::CapExceeded { count, cap }) => {
                assert_eq!(count, "35");
                assert_eq!(cap, 34);
            }
            _ => panic!("expected cap error"),
        }
        assert!(enumerate_subspaces(&f, 3, 4).is_err());
    }

    #[test]
    fn gf256_counter_wraps_correctly() {
        let f = make_field(256).unwrap();
        assert_eq!(enumerate_subspaces(&f, 2, 1).unwrap().count(), 257);
    }

    #[test]
    fn subsets_in_colex_order() {
        let v: Vec<u64> = enumerate_subsets(4, 2).unwrap().map(|s| s.bits()).collect();
        assert_eq!(v, vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        let e: Vec<_> = enumerate_subsets(5, 0).unwrap().collect();
        assert_eq!(e.len(), 1);
        assert!(e[0].is_empty());
        let f: Vec<_> = enumerate_subsets(5, 5).unwrap().collect();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].len(), 5);
        assert_eq!(enumerate_subsets(64, 64).unwrap().count(), 1);
        assert_eq!(enumerate_subsets(64, 1).unwrap().count(), 64);
        assert!(enumerate_subsets(3, 4).is_err());
    }
}
