//! Gradient pursuit with an optional nonnegativity constraint.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot, norm, Matrix};
use crate::scalar::Scalar;

/// Selection stops once the best available correlation is at or below this.
pub const CORRELATION_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PursuitResult<T> {
    /// Dense coefficient vector, length `d_feat`.
    pub coeffs: Vec<T>,
    /// Selected features in selection order, minus any later clamped to zero.
    pub support: Vec<usize>,
    /// Residual norm after each selection.
    pub residual_norms: Vec<T>,
}

/// Index of the best-correlated atom; ties go to the lowest index.
fn select<T: Scalar>(corr: &[T], nonneg: bool) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, &c) in corr.iter().enumerate() {
        let score = if nonneg { c } else { c.abs() };
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((i, score));
        }
    }
    best
}

/// Greedy sparse code for `x` against the rows of `dict`, at most
/// `target_k` selections.
pub fn gradient_pursuit<T: Scalar>(
    dict: &Matrix<T>,
    x: &[T],
    target_k: usize,
    nonneg: bool,
) -> Result<PursuitResult<T>> {
    check_dim("pursuit: x", dict.cols(), x.len())?;
    if !x.iter().all(|v| v.is_finite()) || !dict.all_finite() {
        return Err(Error::Numerical("pursuit input contains non-finite values".into()));
    }
    let d_feat = dict.rows();
    let mut coeffs = vec![T::zero(); d_feat];
    let mut in_support = vec![false; d_feat];
    let mut support: Vec<usize> = Vec::new();
    let mut residual = x.to_vec();
    let mut residual_norms = Vec::new();
    let floor = T::of(CORRELATION_FLOOR);

    for _ in 0..target_k {
        let corr = dict.matvec(&residual)?;
        let Some((pick, score)) = select(&corr, nonneg) else {
            break;
        };
        if score <= floor {
            break;
        }
        if !in_support[pick] {
            in_support[pick] = true;
            support.push(pick);
        }

        // Line search along the restricted gradient; under nonneg, a step
        // that would push a coefficient negative is cut short, that
        // coefficient pinned at zero, and the search redone without it.
        let mut moving: Vec<usize> = support.clone();
        loop {
            let corr = dict.matvec(&residual)?;
            let g: Vec<T> = moving.iter().map(|&j| corr[j]).collect();
            let mut dir = vec![T::zero(); dict.cols()];
            for (&j, &gj) in moving.iter().zip(&g) {
                axpy(gj, dict.row(j), &mut dir);
            }
            let denom = dot(&dir, &dir);
            if denom <= T::zero() {
                break;
            }
            let mut step = dot(&g, &g) / denom;
            let mut clamp: Option<usize> = None;
            if nonneg {
                for (pos, (&j, &gj)) in moving.iter().zip(&g).enumerate() {
                    if gj < T::zero() {
                        let cap = coeffs[j] / -gj;
                        if cap < step {
                            step = cap;
                            clamp = Some(pos);
                        }
                    }
                }
            }
            for (&j, &gj) in moving.iter().zip(&g) {
                coeffs[j] += step * gj;
            }
            axpy(-step, &dir, &mut residual);
            match clamp {
                Some(pos) => {
                    let j = moving.remove(pos);
                    coeffs[j] = T::zero();
                    if moving.is_empty() {
                        break;
                    }
                }
                None => break,
            }
        }
        if nonneg {
            support.retain(|&j| {
                let keep = coeffs[j] > T::zero();
                if !keep {
                    in_support[j] = false;
                }
                keep
            });
            // Pinning at exactly zero can leave a rounding-level change in
            // the residual, so rebuild it from the coefficients.
            residual = x.to_vec();
            for &j in &support {
                axpy(-coeffs[j], dict.row(j), &mut residual);
            }
        }
        residual_norms.push(norm(&residual));
    }
    Ok(PursuitResult {
        coeffs,
        support,
        residual_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_top_k() {
        let id = Matrix::<f64>::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let res = gradient_pursuit(&id, &[3.0, 1.0, 2.0], 2, true).unwrap();
        let mut s = res.support.clone();
        s.sort();
        assert_eq!(s, vec![0, 2]);
        assert!((res.coeffs[0] - 3.0).abs() < 1e-12);
        assert!((res.coeffs[2] - 2.0).abs() < 1e-12);
        assert_eq!(res.coeffs[1], 0.0);
        assert!((res.residual_norms.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_atom_signal() {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                let mut v = vec![0.1 * i as f64; 4];
                v[i % 4] += 1.0;
                let n = norm(&v);
                v.iter().map(|a| a / n).collect()
            })
            .collect();
        let dict = Matrix::from_rows(&rows).unwrap();
        let x: Vec<f64> = dict.row(5).iter().map(|v| 2.0 * v).collect();
        let res = gradient_pursuit(&dict, &x, 1, true).unwrap();
        assert!((res.coeffs[5] - 2.0).abs() < 1e-9);
        assert!(res.residual_norms[0] < 1e-9);
    }

    #[test]
    fn ties_pick_lowest_index() {
        let dict = Matrix::<f64>::from_rows(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        let res = gradient_pursuit(&dict, &[1.0, 0.0], 1, true).unwrap();
        assert_eq!(res.support, vec![0]);
    }

    #[test]
    fn negative_correlations_ignored_under_nonneg() {
        let dict = Matrix::<f64>::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let res = gradient_pursuit(&dict, &[-1.0, -2.0], 2, true).unwrap();
        assert!(res.support.is_empty());
        assert!(res.coeffs.iter().all(|&c| c == 0.0));
        let free = gradient_pursuit(&dict, &[-1.0, -2.0], 2, false).unwrap();
        assert_eq!(free.support, vec![1, 0]);
        assert!((free.coeffs[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nan() {
        let dict = Matrix::<f64>::from_rows(&[[1.0, 0.0]]).unwrap();
        assert!(matches!(gradient_pursuit(&dict, &[f64::NAN, 0.0], 1, true), Err(Error::Numerical(_))));
    }
}
