use crate::error::{Error, Result};
use crate::finite_field::{FieldElement, FieldSpec};

use super::gf2;

/// A dense matrix over GF(q), row-major element codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixGF {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
}

impl MatrixGF {
    pub fn new(field: &FieldSpec, rows: usize, cols: usize, entries: Vec<u8>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&x| x as u32 >= field.q()) {
            return Err(Error::ElementOutOfRange {
                code: bad as u32,
                q: field.q(),
            });
        }
        Ok(MatrixGF {
            field: field.clone(),
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from rows of element codes.
    pub fn from_rows<R: AsRef<[u32]>>(field: &FieldSpec, cols: usize, rows: &[R]) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            for &x in r {
                entries.push(field.element(x)?.code());
            }
        }
        MatrixGF::new(field, rows.len(), cols, entries)
    }

    pub fn zero(field: &FieldSpec, rows: usize, cols: usize) -> Self {
        MatrixGF {
            field: field.clone(),
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        FieldElement::from_raw(self.entries[r * self.cols + c])
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rank(&self) -> usize {
        rank(&self.field, self.cols, &self.entries)
    }

    /// Multiplies `self` (r x m) by `other` (m x c).
    pub fn mul(&self, other: &MatrixGF) -> Result<MatrixGF> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let f = &self.field;
        let mut out = vec![0u8; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entries[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.entries[k * other.cols + j];
                    let o = &mut out[i * other.cols + j];
                    *o = f.add_code(*o, f.mul_code(a, b));
                }
            }
        }
        MatrixGF::new(f, self.rows, other.cols, out)
    }
}

/// Gauss-Jordan elimination of a row-major buffer in place. Zero rows are
/// dropped from the buffer; returns the pivot columns.
pub(crate) fn rref_in_place(field: &FieldSpec, cols: usize, entries: &mut Vec<u8>) -> Vec<usize> {
    if cols == 0 {
        entries.clear();
        return Vec::new();
    }
    if field.q() == 2 && cols <= 64 {
        let mut packed: Vec<u64> = entries.chunks(cols).map(gf2::pack).collect();
        let piv = gf2::rref(&mut packed, cols);
        entries.clear();
        for r in packed {
            gf2::unpack(r, cols, entries);
        }
        return piv;
    }
    let nrows = entries.len() / cols;
    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        if rank == nrows {
            break;
        }
        let Some(found) = (rank..nrows).find(|&r| entries[r * cols + col] != 0) else {
            continue;
        };
        if found != rank {
            for j in 0..cols {
                entries.swap(found * cols + j, rank * cols + j);
            }
        }
        let inv = field.inv_code(entries[rank * cols + col]);
        if inv != 1 {
            for j in col..cols {
                let x = &mut entries[rank * cols + j];
                *x = field.mul_code(*x, inv);
            }
        }
        for r in 0..nrows {
            if r == rank {
                continue;
            }
            let factor = entries[r * cols + col];
            if factor == 0 {
                continue;
            }
            let nf = field.neg_code(factor);
            for j in col..cols {
                let p = entries[rank * cols + j];
                if p != 0 {
                    let x = entries[r * cols + j];
                    entries[r * cols + j] = field.add_code(x, field.mul_code(nf, p));
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    entries.truncate(rank * cols);
    pivots
}

/// Rank of the row space of a row-major buffer.
pub(crate) fn rank(field: &FieldSpec, cols: usize, entries: &[u8]) -> usize {
    if cols == 0 {
        return 0;
    }
    if field.q() == 2 && cols <= 64 {
        let packed: Vec<u64> = entries.chunks(cols).map(gf2::pack).collect();
        return gf2::rank(&packed);
    }
    let mut buf = entries.to_vec();
    rref_in_place(field, cols, &mut buf).len()
}
