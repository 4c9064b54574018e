//! Inference-time optimization: sparse codes found by pursuit against a
//! fixed decoder, with the encoder ignored entirely.

mod oracle;
mod pursuit;

pub use oracle::{exhaustive_oracle, ORACLE_MAX_SUPPORTS};
pub use pursuit::{gradient_pursuit, PursuitResult, CORRELATION_FLOOR};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{sub, Matrix};
use crate::metrics::{l0, loss_recovered, mse_of, relative_bias_gamma, EvaluationHost, Splice};
use crate::sae::Decoder;
use crate::scalar::Scalar;

/// One point on the sparsity sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ItoPoint {
    pub target_k: usize,
    pub l0: f64,
    pub mse: f64,
    pub loss_recovered: f64,
    pub gamma: f64,
}

/// Codes every row of `inputs` by nonnegative pursuit on `x − b_dec`.
pub fn ito_encode<T: Scalar>(
    decoder: Decoder<'_, T>,
    inputs: &Matrix<T>,
    target_k: usize,
) -> Result<Matrix<T>> {
    let rows: Vec<Result<Vec<T>>> = (0..inputs.rows())
        .into_par_iter()
        .map(|r| {
            let centered = sub(inputs.row(r), decoder.b_dec);
            Ok(gradient_pursuit(decoder.w_dec, &centered, target_k, true)?.coeffs)
        })
        .collect();
    let mut out = Matrix::zeros(inputs.rows(), decoder.d_feat());
    for (r, row) in rows.into_iter().enumerate() {
        out.row_mut(r).copy_from_slice(&row?);
    }
    Ok(out)
}

pub fn ito_sweep<T: Scalar>(
    decoder: Decoder<'_, T>,
    eval_set: &Matrix<T>,
    target_ks: &[usize],
    host: &EvaluationHost<T>,
) -> Result<Vec<ItoPoint>> {
    if eval_set.rows() == 0 {
        return Err(Error::Contract("ito sweep over an empty evaluation set".into()));
    }
    let mut points = Vec::with_capacity(target_ks.len());
    for &k in target_ks {
        let codes = ito_encode(decoder, eval_set, k)?;
        let mut recons = Matrix::zeros(eval_set.rows(), decoder.d_act());
        for r in 0..codes.rows() {
            recons.row_mut(r).copy_from_slice(&decoder.decode(codes.row(r))?);
        }
        let gamma = match relative_bias_gamma(eval_set, &recons) {
            Ok(g) => g.gamma,
            Err(Error::Degenerate(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        points.push(ItoPoint {
            target_k: k,
            l0: l0(&codes)?,
            mse: mse_of(eval_set, &recons)?,
            loss_recovered: loss_recovered(host, eval_set, Splice::Outputs(&recons))?,
            gamma,
        });
    }
    Ok(points)
}
