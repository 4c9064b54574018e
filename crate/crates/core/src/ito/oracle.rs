//! Brute-force best sparse code for small instances.

use crate::error::{check_dim, Error, Result};
use crate::ito::PursuitResult;
use crate::linalg::{axpy, dot, norm, Matrix};
use crate::scalar::Scalar;

/// Largest number of candidate supports the oracle will enumerate.
pub const ORACLE_MAX_SUPPORTS: u128 = 100_000;
const CD_TOL: f64 = 1e-10;
const CD_MAX_SWEEPS: usize = 200_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Least squares of `x` on the rows in `support` by (projected) coordinate
/// descent. Returns coefficients aligned with `support` and the residual.
fn solve_support<T: Scalar>(dict: &Matrix<T>, x: &[T], support: &[usize], nonneg: bool) -> (Vec<T>, Vec<T>) {
    let mut alpha = vec![T::zero(); support.len()];
    let mut residual = x.to_vec();
    let sq: Vec<T> = support.iter().map(|&j| dot(dict.row(j), dict.row(j))).collect();
    for _ in 0..CD_MAX_SWEEPS {
        let mut biggest = T::zero();
        for (p, &j) in support.iter().enumerate() {
            if sq[p] <= T::zero() {
                continue;
            }
            let row = dict.row(j);
            let mut next = alpha[p] + dot(row, &residual) / sq[p];
            if nonneg && next < T::zero() {
                next = T::zero();
            }
            let delta = next - alpha[p];
            if delta != T::zero() {
                axpy(-delta, row, &mut residual);
                alpha[p] = next;
            }
            biggest = biggest.max(delta.abs());
        }
        if biggest <= T::of(CD_TOL) {
            break;
        }
    }
    (alpha, residual)
}

/// Global best over every support of size `min(target_k, d_feat)`; smaller
/// supports are covered since coefficients may settle at zero.
pub fn exhaustive_oracle<T: Scalar>(
    dict: &Matrix<T>,
    x: &[T],
    target_k: usize,
    nonneg: bool,
) -> Result<PursuitResult<T>> {
    check_dim("oracle: x", dict.cols(), x.len())?;
    if !x.iter().all(|v| v.is_finite()) || !dict.all_finite() {
        return Err(Error::Numerical("oracle input contains non-finite values".into()));
    }
    let d_feat = dict.rows();
    let k = target_k.min(d_feat);
    let count = binomial(d_feat, k);
    if count > ORACLE_MAX_SUPPORTS {
        return Err(Error::Guard(format!(
            "exhaustive search over C({d_feat}, {k}) = {count} supports exceeds the limit of {ORACLE_MAX_SUPPORTS}"
        )));
    }

    let mut best_coeffs = vec![T::zero(); d_feat];
    let mut best_norm = norm(x);
    let mut idx: Vec<usize> = (0..k).collect();
    if k > 0 {
        loop {
            let (alpha, residual) = solve_support(dict, x, &idx, nonneg);
            let r = norm(&residual);
            if r < best_norm {
                best_norm = r;
                best_coeffs = vec![T::zero(); d_feat];
                for (&j, &a) in idx.iter().zip(&alpha) {
                    best_coeffs[j] = a;
                }
            }
            // Next combination in lexicographic order.
            let mut pos = k;
            while pos > 0 && idx[pos - 1] == d_feat - k + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            for q in pos..k {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    let support = (0..d_feat).filter(|&j| best_coeffs[j] != T::zero()).collect();
    Ok(PursuitResult {
        coeffs: best_coeffs,
        support,
        residual_norms: vec![best_norm],
    })
}
