//! Exact rank by fraction-free (Bareiss) elimination.
//!
//! Every finite `f64` is a dyadic rational, so a matrix of floats is scaled to
//! an integer matrix without loss. Elimination runs in `i128` and switches to
//! `BigInt` on the first overflow.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use super::DerivativeOperator;
use crate::error::{PqcError, Result};

/// Rank of `df` over exact arithmetic. Only available for operators built
/// with [`DerivativeOperator::from_exact_spectrum`].
pub fn exact_rank(op: &DerivativeOperator) -> Result<usize> {
    if !op.is_exact() {
        return Err(PqcError::NotExact);
    }
    exact_rank_matrix(op.matrix())
}

/// Exact rank of a complex matrix whose entries are taken as the dyadic
/// rationals they represent.
pub fn exact_rank_matrix(m: &DMatrix<Complex64>) -> Result<usize> {
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(PqcError::NonFinite);
    }
    let (r, c) = m.shape();
    if m.iter().all(|z| z.im == 0.0) {
        let rows: Vec<Vec<f64>> = (0..r).map(|i| (0..c).map(|j| m[(i, j)].re).collect()).collect();
        return Ok(integer_rank(to_integers(&rows)));
    }
    // [[B, −C], [C, B]] has twice the rank of B + iC.
    let mut rows = vec![vec![0.0; 2 * c]; 2 * r];
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            rows[i][j] = z.re;
            rows[i][j + c] = -z.im;
            rows[i + r][j] = z.im;
            rows[i + r][j + c] = z.re;
        }
    }
    Ok(integer_rank(to_integers(&rows)) / 2)
}

/// Scales all entries by a common power of two so they become integers.
fn to_integers(rows: &[Vec<f64>]) -> Vec<Vec<BigInt>> {
    let decode = |x: f64| -> Option<(i64, i32)> {
        if x == 0.0 {
            return None;
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1 } else { -1 };
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & 0xf_ffff_ffff_ffff;
        let (mant, exp) = if exp == 0 { (frac << 1, -1075) } else { (frac | (1 << 52), exp - 1075) };
        Some((sign * mant as i64, exp))
    };
    let min_exp = rows.iter().flatten().filter_map(|&x| decode(x)).map(|(_, e)| e).min().unwrap_or(0);
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|&x| match decode(x) {
                    None => BigInt::zero(),
                    Some((m, e)) => BigInt::from(m) << ((e - min_exp) as usize),
                })
                .collect()
        })
        .collect()
}

fn integer_rank(rows: Vec<Vec<BigInt>>) -> usize {
    let small: Option<Vec<Vec<i128>>> = rows.iter().map(|row| row.iter().map(|x| x.to_i128()).collect()).collect();
    match small {
        Some(a) => match bareiss_i128(a) {
            Ok(rank) => rank,
            Err(state) => bareiss_big(state),
        },
        None => bareiss_big(State { a: rows, prev: BigInt::from(1), rank: 0, col: 0, next_row: None }),
    }
}

/// Elimination state at the start of a pivot step. `next_row` is set when a
/// step was interrupted part-way: rows below it still need the update.
struct State<T> {
    a: Vec<Vec<T>>,
    prev: T,
    rank: usize,
    col: usize,
    next_row: Option<usize>,
}

fn bareiss_i128(mut a: Vec<Vec<i128>>) -> std::result::Result<usize, State<BigInt>> {
    let n_rows = a.len();
    let n_cols = a.first().map_or(0, Vec::len);
    let mut prev: i128 = 1;
    let mut rank = 0;
    let mut buf = vec![0i128; n_cols];
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(piv) = (rank..n_rows).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, piv);
        let pivot = a[rank][col];
        for i in rank + 1..n_rows {
            let lead = a[i][col];
            let mut ok = true;
            for j in col + 1..n_cols {
                let v =
                    pivot.checked_mul(a[i][j]).zip(lead.checked_mul(a[rank][j])).and_then(|(x, y)| x.checked_sub(y));
                match v {
                    Some(v) => buf[j] = v / prev,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                let a = a.into_iter().map(|row| row.into_iter().map(BigInt::from).collect()).collect();
                return Err(State { a, prev: BigInt::from(prev), rank, col, next_row: Some(i) });
            }
            a[i][col + 1..].copy_from_slice(&buf[col + 1..]);
            a[i][col] = 0;
        }
        prev = pivot;
        rank += 1;
    }
    Ok(rank)
}

fn bareiss_big(state: State<BigInt>) -> usize {
    let State { mut a, mut prev, mut rank, col: start, mut next_row } = state;
    let n_rows = a.len();
    let n_cols = a.first().map_or(0, Vec::len);
    for col in start..n_cols {
        if rank == n_rows {
            break;
        }
        let first = match next_row.take() {
            Some(i) => i,
            None => {
                let Some(piv) = (rank..n_rows).find(|&i| !a[i][col].is_zero()) else { continue };
                a.swap(rank, piv);
                rank + 1
            }
        };
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = &pivot_row[col];
        for row in rest.iter_mut().skip(first - rank - 1) {
            if row[col].is_zero() {
                // the update reduces to a scaling by pivot / prev
                for j in col + 1..n_cols {
                    if !row[j].is_zero() {
                        row[j] = &row[j] * pivot / &prev;
                    }
                }
                continue;
            }
            let lead = row[col].clone();
            for j in col + 1..n_cols {
                row[j] = (pivot * &row[j] - &lead * &pivot_row[j]) / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = pivot.clone();
        rank += 1;
    }
    rank
}
