//! Exact linear algebra over the rationals for small integer systems.
//!
//! Rank uses fraction-free (Bareiss) elimination. Every intermediate entry is
//! a minor of the input, so for ternary inputs of width 16 the Hadamard bound
//! keeps products inside `i128`; overflow is still checked and falls back to
//! arbitrary precision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

trait ExactInt: Clone + PartialEq {
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// `(a*d - b*c) / div`, exact by the Bareiss invariant.
    fn cross_div(a: &Self, d: &Self, b: &Self, c: &Self, div: &Self) -> Option<Self>;
}

impl ExactInt for i128 {
    fn from_i64(v: i64) -> Self {
        i128::from(v)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn cross_div(a: &Self, d: &Self, b: &Self, c: &Self, div: &Self) -> Option<Self> {
        let num = a.checked_mul(*d)?.checked_sub(b.checked_mul(*c)?)?;
        debug_assert_eq!(num % div, 0);
        Some(num / div)
    }
}

impl ExactInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn cross_div(a: &Self, d: &Self, b: &Self, c: &Self, div: &Self) -> Option<Self> {
        Some((a * d - b * c) / div)
    }
}

fn bareiss_rank<T: ExactInt>(rows: &[Vec<i64>]) -> Option<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&v| T::from_i64(v)).collect()).collect();
    let mut rank = 0;
    let mut prev = T::from_i64(1);
    for col in 0..ncols {
        if rank == m.len() {
            break;
        }
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(p, rank);
        let (head, tail) = m.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut() {
            for c in col + 1..ncols {
                row[c] = T::cross_div(&pivot_row[col], &row[c], &row[col], &pivot_row[c], &prev)?;
            }
            row[col] = T::from_i64(0);
        }
        prev = pivot_row[col].clone();
        rank += 1;
    }
    Some(rank)
}

/// Rank over Q of a set of integer row vectors of equal length.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    bareiss_rank::<i128>(rows).unwrap_or_else(|| bareiss_rank::<BigInt>(rows).expect("bigint elimination is total"))
}

/// Finds rational `x` with `Σ x_i · columns[i] = target`, or `None` when the
/// target is outside their span. Free variables are set to zero.
pub fn solve(columns: &[Vec<i64>], target: &[i64]) -> Option<Vec<BigRational>> {
    let n = columns.len();
    let m = target.len();
    let mut aug: Vec<Vec<BigRational>> = (0..m)
        .map(|r| {
            columns
                .iter()
                .map(|c| BigRational::from_integer(BigInt::from(c[r])))
                .chain(std::iter::once(BigRational::from_integer(BigInt::from(target[r]))))
                .collect()
        })
        .collect();

    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        let Some(p) = (row..m).find(|&r| !aug[r][col].is_zero()) else {
            continue;
        };
        aug.swap(p, row);
        let inv = aug[row][col].recip();
        for v in aug[row].iter_mut() {
            *v *= &inv;
        }
        let pivot = aug[row].clone();
        for (r, other) in aug.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for (v, pv) in other.iter_mut().zip(&pivot) {
                *v -= &f * pv;
            }
        }
        pivots.push(col);
        row += 1;
    }
    if aug[row..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = aug[r][n].clone();
    }
    Some(x)
}
