//! Bit-packed row reduction over GF(2). A row is one `u64`; column `j` is bit `j`.

/// Reduces `rows` to reduced row echelon form in place, drops zero rows and
/// returns the pivot columns. Pivots are the lowest set bit of each row.
pub fn rref(rows: &mut Vec<u64>, ncols: usize) -> Vec<usize> {
    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..ncols {
        let bit = 1u64 << col;
        let Some(found) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, found);
        let pivot_row = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= pivot_row;
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    pivots
}

/// Rank of the row space, without keeping the reduced form.
pub fn rank(rows: &[u64]) -> usize {
    // Echelon basis keyed by lowest set bit.
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for &row in rows {
        let mut v = row;
        while v != 0 {
            let low = v.trailing_zeros() as usize;
            if basis[low] == 0 {
                basis[low] = v;
                rank += 1;
                break;
            }
            v ^= basis[low];
        }
    }
    rank
}

pub fn pack(row: &[u8]) -> u64 {
    row.iter()
        .enumerate()
        .fold(0u64, |acc, (j, &x)| acc | (((x & 1) as u64) << j))
}

pub fn unpack(row: u64, ncols: usize, out: &mut Vec<u8>) {
    out.extend((0..ncols).map(|j| ((row >> j) & 1) as u8));
}
