//! Adam with bias correction, plus the decoder-norm constraint helpers.

use crate::error::Result;
use crate::linalg::{axpy, dot, Matrix};
use crate::sae::{renormalize_decoder, ParamTensors, Sae};
use crate::scalar::Scalar;
use crate::training::GradientSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.0,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moments shaped like the parameters, plus the step count
/// used for bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: Sae<T>,
    pub v: Sae<T>,
    pub t: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &Sae<T>) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }
}

/// One Adam update of a flat tensor at (1-based) step `t`.
pub fn adam_update<T: Scalar>(
    param: &mut [T],
    grad: &[T],
    m: &mut [T],
    v: &mut [T],
    t: u64,
    lr: f64,
    hp: &AdamParams,
) {
    let b1 = T::of(hp.beta1);
    let b2 = T::of(hp.beta2);
    let c1 = T::one() - T::of(hp.beta1.powi(t as i32));
    let c2 = T::one() - T::of(hp.beta2.powi(t as i32));
    let lr = T::of(lr);
    let eps = T::of(hp.eps);
    for i in 0..param.len() {
        let g = grad[i];
        m[i] = b1 * m[i] + (T::one() - b1) * g;
        v[i] = b2 * v[i] + (T::one() - b2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        param[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

pub fn adam_step<T: Scalar>(
    params: &mut Sae<T>,
    grads: &GradientSet<T>,
    state: &mut AdamState<T>,
    lr_effective: f64,
    hp: &AdamParams,
) {
    state.t += 1;
    let t = state.t;
    let grads = grads.0.tensors();
    let ms = state.m.tensors_mut();
    let vs = state.v.tensors_mut();
    for ((((_, p), (_, g)), (_, m)), (_, v)) in
        params.tensors_mut().into_iter().zip(grads).zip(ms).zip(vs)
    {
        adam_update(p, g, m, v, t, lr_effective, hp);
    }
}

/// Removes from each decoder-row gradient its component along that row,
/// so a step cannot change row norms to first order. Rows are assumed unit.
pub fn project_decoder_grads<T: Scalar>(w_dec: &Matrix<T>, grad: &mut Matrix<T>) {
    for i in 0..w_dec.rows() {
        let row = w_dec.row(i);
        let along = dot(grad.row(i), row);
        axpy(-along, row, grad.row_mut(i));
    }
}

/// Projection before the step, renormalization after.
pub fn constrained_step<T: Scalar>(
    params: &mut Sae<T>,
    grads: &mut GradientSet<T>,
    state: &mut AdamState<T>,
    lr_effective: f64,
    hp: &AdamParams,
) -> Result<()> {
    project_decoder_grads(params.w_dec(), grads.0.w_dec_mut());
    adam_step(params, grads, state, lr_effective, hp);
    renormalize_decoder(params)
}
