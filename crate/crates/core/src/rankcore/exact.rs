//! Exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Clears denominators row by row, giving an integer matrix with the same
/// row space. Returns the matrix and the product of the row scale factors.
fn integer_rows(rows: &[Vec<BigRational>]) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut scale = BigInt::one();
    let ints = rows
        .iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            scale *= &lcm;
            row.iter().map(|q| q.numer() * (&lcm / q.denom())).collect()
        })
        .collect();
    (ints, scale)
}

/// Fraction-free (Bareiss) elimination on an integer matrix in place.
/// Returns the pivot count and the number of row swaps performed.
fn bareiss(a: &mut [Vec<BigInt>]) -> (usize, usize) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut swaps = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        if p != rank {
            a.swap(p, rank);
            swaps += 1;
        }
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = pivot_row[col].clone();
        for row in rest.iter_mut() {
            let factor = row[col].clone();
            for j in col + 1..cols {
                let v = &pivot * &row[j] - &factor * &pivot_row[j];
                // exact by Sylvester's identity
                row[j] = v / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    (rank, swaps)
}

/// Rank by fraction-free Gaussian elimination.
pub fn rank(rows: &[Vec<BigRational>]) -> usize {
    let (mut ints, _) = integer_rows(rows);
    bareiss(&mut ints).0
}

/// Determinant of a square rational matrix.
pub fn determinant(rows: &[Vec<BigRational>]) -> BigRational {
    let n = rows.len();
    assert!(
        rows.iter().all(|r| r.len() == n),
        "determinant needs a square matrix"
    );
    if n == 0 {
        return BigRational::one();
    }
    let (mut ints, scale) = integer_rows(rows);
    let (rank, swaps) = bareiss(&mut ints);
    if rank < n {
        return BigRational::zero();
    }
    let mut det = ints[n - 1][n - 1].clone();
    if swaps % 2 == 1 {
        det = -det;
    }
    BigRational::new(det, scale)
}

/// Basis of `{ c : A c = 0 }` via reduced row echelon form over the rationals.
pub fn nullspace(rows: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = rows.to_vec();
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][col].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
        pivots.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[i][f].clone();
            }
            v
        })
        .collect()
}
