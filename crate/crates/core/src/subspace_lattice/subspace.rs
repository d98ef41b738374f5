use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::finite_field::FieldSpec;

use super::matrix::{rank, rref_in_place, MatrixGF};
use super::{Ambient, LatticeElement};

/// A subspace of `F_q^n` stored as its reduced row echelon basis.
///
/// Two handles are equal exactly when their RREF matrices agree entry-wise,
/// and that happens exactly when they span the same subspace.
#[derive(Clone)]
pub struct SubspaceHandle {
    field: FieldSpec,
    n: usize,
    rows: Vec<u8>,
    pivots: Vec<usize>,
}

impl SubspaceHandle {
    pub(crate) fn from_rref_parts(field: &FieldSpec, n: usize, rows: Vec<u8>, pivots: Vec<usize>) -> Self {
        debug_assert_eq!(rows.len(), pivots.len() * n);
        SubspaceHandle {
            field: field.clone(),
            n,
            rows,
            pivots,
        }
    }

    /// Canonical handle of the row space of arbitrary generator rows
    /// (row-major codes, `n` per row).
    pub(crate) fn from_generators(field: &FieldSpec, n: usize, mut entries: Vec<u8>) -> Self {
        let pivots = rref_in_place(field, n, &mut entries);
        SubspaceHandle {
            field: field.clone(),
            n,
            rows: entries,
            pivots,
        }
    }

    /// Convenience constructor from rows of element codes.
    pub fn from_rows<R: AsRef<[u32]>>(field: &FieldSpec, n: usize, rows: &[R]) -> Result<Self> {
        let m = MatrixGF::from_rows(field, n, rows)?;
        canonicalize(field, n, &m)
    }

    pub fn zero(field: &FieldSpec, n: usize) -> Self {
        SubspaceHandle::from_rref_parts(field, n, Vec::new(), Vec::new())
    }

    pub fn full(field: &FieldSpec, n: usize) -> Self {
        let mut rows = vec![0u8; n * n];
        for i in 0..n {
            rows[i * n + i] = 1;
        }
        SubspaceHandle::from_rref_parts(field, n, rows, (0..n).collect())
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// The RREF basis as a `dim x n` matrix.
    pub fn rref(&self) -> MatrixGF {
        MatrixGF::new(&self.field, self.dim(), self.n, self.rows.clone()).expect("valid rref")
    }

    pub fn rref_entries(&self) -> &[u8] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }

    fn check_same_ambient(&self, other: &Self) -> Result<()> {
        if self.field != other.field || self.n != other.n {
            return Err(Error::AmbientMismatch(format!(
                "GF({})^{} vs GF({})^{}",
                self.field.q(),
                self.n,
                other.field.q(),
                other.n
            )));
        }
        Ok(())
    }

    fn stacked(&self, other: &Self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.rows.len() + other.rows.len());
        buf.extend_from_slice(&self.rows);
        buf.extend_from_slice(&other.rows);
        buf
    }

    pub fn span(&self, other: &Self) -> Result<Self> {
        self.check_same_ambient(other)?;
        Ok(SubspaceHandle::from_generators(&self.field, self.n, self.stacked(other)))
    }

    /// Intersection basis by a kernel computation: rows `[a_i | a_i]` and
    /// `[b_j | 0]` are reduced on the left block; rows whose left block
    /// vanishes carry vectors of `a ∩ b` on the right.
    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_same_ambient(other)?;
        let n = self.n;
        let (da, db) = (self.dim(), other.dim());
        if da == 0 || db == 0 {
            return Ok(SubspaceHandle::zero(&self.field, n));
        }
        let w = 2 * n;
        let mut buf = vec![0u8; (da + db) * w];
        for i in 0..da {
            buf[i * w..i * w + n].copy_from_slice(self.row(i));
            buf[i * w + n..(i + 1) * w].copy_from_slice(self.row(i));
        }
        for j in 0..db {
            let r = da + j;
            buf[r * w..r * w + n].copy_from_slice(other.row(j));
        }
        let pivots = rref_in_place(&self.field, w, &mut buf);
        let mut gens = Vec::new();
        for (r, &p) in pivots.iter().enumerate() {
            if p >= n {
                gens.extend_from_slice(&buf[r * w + n..(r + 1) * w]);
            }
        }
        Ok(SubspaceHandle::from_generators(&self.field, n, gens))
    }

    /// Every vector of the subspace, as code rows. Exponential; test support.
    pub fn vectors(&self) -> Vec<Vec<u8>> {
        let q = self.field.q() as usize;
        let k = self.dim();
        let total = q.pow(k as u32);
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut v = vec![0u8; self.n];
            let mut c = idx;
            for i in 0..k {
                let coef = (c % q) as u8;
                c /= q;
                if coef == 0 {
                    continue;
                }
                for (x, &r) in v.iter_mut().zip(self.row(i)) {
                    *x = self.field.add_code(*x, self.field.mul_code(coef, r));
                }
            }
            out.push(v);
        }
        out
    }
}

/// Canonical subspace spanned by the rows of `generators`.
pub fn canonicalize(field: &FieldSpec, n: usize, generators: &MatrixGF) -> Result<SubspaceHandle> {
    if generators.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: generators.cols(),
        });
    }
    if generators.field() != field {
        return Err(Error::AmbientMismatch(format!(
            "matrix over GF({}) canonicalized in GF({})",
            generators.field().q(),
            field.q()
        )));
    }
    Ok(SubspaceHandle::from_generators(field, n, generators.entries().to_vec()))
}

/// `dim(a ∩ b)`, computed as `dim a + dim b - dim span(a ∪ b)`.
pub fn intersect_dim(a: &SubspaceHandle, b: &SubspaceHandle) -> Result<usize> {
    Ok(a.dim() + b.dim() - span_dim(a, b)?)
}

pub fn span_dim(a: &SubspaceHandle, b: &SubspaceHandle) -> Result<usize> {
    a.check_same_ambient(b)?;
    Ok(rank(&a.field, a.n, &a.stacked(b)))
}

/// Dimension of the span of any number of subspaces.
pub fn span_dim_all(items: &[&SubspaceHandle]) -> Result<usize> {
    let Some(first) = items.first() else {
        return Ok(0);
    };
    let mut buf = Vec::new();
    for s in items {
        first.check_same_ambient(s)?;
        buf.extend_from_slice(&s.rows);
    }
    Ok(rank(&first.field, first.n, &buf))
}

/// Whether `b ⊆ a`, decided by `rank(a ∪ b) = dim a`.
pub fn contains(a: &SubspaceHandle, b: &SubspaceHandle) -> Result<bool> {
    Ok(span_dim(a, b)? == a.dim())
}

fn digit_char(d: u8) -> char {
    std::char::from_digit(d as u32, 36).expect("digit below 36")
}

impl LatticeElement for SubspaceHandle {
    fn ambient(&self) -> Ambient {
        Ambient::subspaces(&self.field, self.n)
    }

    fn rank(&self) -> usize {
        self.dim()
    }

    fn meet_rank(&self, other: &Self) -> usize {
        debug_assert!(self.n == other.n && self.field == other.field);
        self.dim() + other.dim() - rank(&self.field, self.n, &self.stacked(other))
    }

    fn join_rank(&self, other: &Self) -> usize {
        rank(&self.field, self.n, &self.stacked(other))
    }

    fn meet(&self, other: &Self) -> Self {
        self.intersection(other).expect("same ambient")
    }

    fn join(&self, other: &Self) -> Self {
        self.span(other).expect("same ambient")
    }

    fn encode(&self) -> String {
        if self.dim() == 0 {
            return "-".to_string();
        }
        let wide = self.field.q() > 36;
        let rows: Vec<String> = (0..self.dim())
            .map(|i| {
                if wide {
                    self.row(i).iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
                } else {
                    self.row(i).iter().map(|&d| digit_char(d)).collect()
                }
            })
            .collect();
        rows.join(";")
    }
}

impl PartialEq for SubspaceHandle {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.field == other.field && self.rows == other.rows
    }
}

impl Eq for SubspaceHandle {}

impl Hash for SubspaceHandle {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.q().hash(state);
        self.n.hash(state);
        self.rows.hash(state);
    }
}

/// Lexicographic order of the encodings: row sequences compared row by row,
/// a proper prefix first.
impl Ord for SubspaceHandle {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.field.q(), self.n)
            .cmp(&(other.field.q(), other.n))
            .then_with(|| self.rows.cmp(&other.rows))
    }
}

impl PartialOrd for SubspaceHandle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SubspaceHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.encode())
    }
}

impl fmt::Display for SubspaceHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field;
    use std::collections::HashSet;

    fn point_set(s: &SubspaceHandle) -> HashSet<Vec<u8>> {
        s.vectors().into_iter().collect()
    }

    #[test]
    fn canonicalize_gf2_example() {
        let f = make_field(2).unwrap();
        let m = MatrixGF::from_rows(&f, 4, &[[1, 1, 0, 0], [0, 1, 1, 0]]).unwrap();
        let s = canonicalize(&f, 4, &m).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.rref_entries(), &[1, 0, 1, 0, 0, 1, 1, 0]);
        assert_eq!(s.pivots(), &[0, 1]);
        // Oracle: the row spaces coincide as point sets.
        let gens: HashSet<Vec<u8>> = [vec![0, 0, 0, 0], vec![1, 1, 0, 0], vec![0, 1, 1, 0], vec![1, 0, 1, 0]]
            .into_iter()
            .collect();
        assert_eq!(point_set(&s), gens);
    }

    #[test]
    fn zero_matrix_gives_trivial_subspace() {
        for q in [2, 3, 4, 5] {
            let f = make_field(q).unwrap();
            let s = canonicalize(&f, 3, &MatrixGF::zero(&f, 2, 3)).unwrap();
            assert_eq!(s.dim(), 0);
            assert!(s.rref_entries().is_empty());
            assert_eq!(s, SubspaceHandle::zero(&f, 3));
        }
    }

    #[test]
    fn scalar_multiple_row_collapses() {
        let f = make_field(3).unwrap();
        let s = SubspaceHandle::from_rows(&f, 3, &[[1, 2, 0], [2, 4 % 3, 0]]).unwrap();
        assert_eq!(s.dim(), 1);
    }

    #[test]
    fn wrong_column_count_is_rejected() {
        let f = make_field(2).unwrap();
        let m = MatrixGF::from_rows(&f, 3, &[[1, 0, 0]]).unwrap();
        assert!(matches!(canonicalize(&f, 4, &m), Err(Error::DimensionMismatch { .. })));
        let f3 = make_field(3).unwrap();
        assert!(matches!(canonicalize(&f3, 3, &m), Err(Error::AmbientMismatch(_))));
    }

    #[test]
    fn intersection_examples() {
        let f = make_field(2).unwrap();
        let a = SubspaceHandle::from_rows(&f, 4, &[[1, 0, 0, 0], [0, 1, 0, 0]]).unwrap();
        let b = SubspaceHandle::from_rows(&f, 4, &[[0, 1, 0, 0], [0, 0, 1, 0]]).unwrap();
        assert_eq!(intersect_dim(&a, &b).unwrap(), 1);
        // Brute force: common nonzero vectors form one line.
        let common: Vec<_> = point_set(&a).intersection(&point_set(&b)).cloned().collect();
        assert_eq!(common.len(), 2);
        let meet = a.intersection(&b).unwrap();
        assert_eq!(meet, SubspaceHandle::from_rows(&f, 4, &[[0, 1, 0, 0]]).unwrap());
        assert_eq!(intersect_dim(&a, &a).unwrap(), 2);

        let l1 = SubspaceHandle::from_rows(&f, 2, &[[0, 1]]).unwrap();
        let l2 = SubspaceHandle::from_rows(&f, 2, &[[1, 1]]).unwrap();
        assert_eq!(intersect_dim(&l1, &l2).unwrap(), 0);
        assert_eq!(span_dim(&l1, &l2).unwrap(), 2);
    }

    #[test]
    fn three_lines_of_a_plane_span_the_plane() {
        let f = make_field(2).unwrap();
        let lines: Vec<_> = [[1, 0, 0], [0, 1, 0], [1, 1, 0]]
            .iter()
            .map(|r| SubspaceHandle::from_rows(&f, 3, &[*r]).unwrap())
            .collect();
        let refs: Vec<&SubspaceHandle> = lines.iter().collect();
        assert_eq!(span_dim_all(&refs).unwrap(), 2);
        assert_eq!(span_dim(&lines[0], &lines[0]).unwrap(), 1);
    }

    #[test]
    fn containment() {
        let f = make_field(2).unwrap();
        let plane = SubspaceHandle::from_rows(&f, 3, &[[1, 0, 0], [0, 1, 0]]).unwrap();
        let line = SubspaceHandle::from_rows(&f, 3, &[[1, 1, 0]]).unwrap();
        assert!(contains(&plane, &line).unwrap());
        assert!(!contains(&line, &plane).unwrap());
        assert!(contains(&plane, &plane).unwrap());
        assert!(contains(&SubspaceHandle::full(&f, 3), &line).unwrap());
        let other = SubspaceHandle::from_rows(&f, 4, &[[1, 1, 0, 0]]).unwrap();
        assert!(matches!(contains(&plane, &other), Err(Error::AmbientMismatch(_))));
        assert!(matches!(intersect_dim(&plane, &other), Err(Error::AmbientMismatch(_))));
    }

    #[test]
    fn intersection_over_gf9_matches_point_sets() {
        let f = make_field(9).unwrap();
        let a = SubspaceHandle::from_rows(&f, 3, &[[1, 0, 3], [0, 1, 5]]).unwrap();
        let b = SubspaceHandle::from_rows(&f, 3, &[[1, 2, 0], [0, 0, 1]]).unwrap();
        let meet = a.intersection(&b).unwrap();
        let expect: HashSet<_> = point_set(&a).intersection(&point_set(&b)).cloned().collect();
        assert_eq!(point_set(&meet), expect);
        assert_eq!(meet.dim(), intersect_dim(&a, &b).unwrap());
    }

    #[test]
    fn encoding() {
        let f = make_field(3).unwrap();
        let s = SubspaceHandle::from_rows(&f, 3, &[[1, 0, 2], [0, 1, 1]]).unwrap();
        assert_eq!(s.encode(), "102;011");
        assert_eq!(SubspaceHandle::zero(&f, 3).encode(), "-");
    }
}
