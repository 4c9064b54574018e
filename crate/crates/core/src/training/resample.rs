//! Dead-feature resampling.
//!
//! A feature that stayed silent for `dead_window` consecutive steps gets a
//! new decoder direction pointing at a poorly reconstructed input (sampled
//! with probability proportional to its squared loss), an encoder row along
//! the same direction at 0.2× the mean alive encoder norm, zeroed biases and
//! fresh optimizer moments. The caller restarts the post-resample LR ramp.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{Error, Result};
use crate::linalg::{norm, scale_in_place, Matrix};
use crate::rng::{self, Rng};
use crate::sae::Sae;
use crate::scalar::Scalar;
use crate::training::AdamState;

/// Encoder rows of resampled features are scaled to this fraction of the
/// mean alive encoder-row norm.
pub const RESAMPLE_ENCODER_SCALE: f64 = 0.2;

/// Recent inputs with their reconstruction losses.
#[derive(Clone, Debug)]
pub struct LossBuffer<T> {
    pub inputs: Matrix<T>,
    pub losses: Vec<T>,
}

/// Features silent for at least `dead_window` steps as of `step`.
pub fn dead_features(last_active: &[usize], step: usize, dead_window: usize) -> Vec<usize> {
    last_active
        .iter()
        .enumerate()
        .filter(|&(_, &last)| step.saturating_sub(last) >= dead_window)
        .map(|(i, _)| i)
        .collect()
}

/// Resamples `dead` in place and zeroes their optimizer moments. Returns the count.
pub fn resample_features<T: Scalar>(
    params: &mut Sae<T>,
    adam: &mut AdamState<T>,
    dead: &[usize],
    buffer: &LossBuffer<T>,
    rng: &mut Rng,
) -> Result<usize> {
    if dead.is_empty() {
        return Ok(0);
    }
    let d_feat = params.w_dec().rows();
    let d_act = params.w_dec().cols();
    let mut is_dead = vec![false; d_feat];
    for &i in dead {
        is_dead[i] = true;
    }
    let encoder = encoder_rows(params);
    let alive_norms: Vec<T> = (0..d_feat)
        .filter(|&i| !is_dead[i])
        .map(|i| norm(encoder.row(i)))
        .collect();
    if alive_norms.is_empty() {
        return Err(Error::Resample(format!(
            "all {d_feat} features are dead; nothing to calibrate the encoder scale against"
        )));
    }
    let target_norm = T::of(RESAMPLE_ENCODER_SCALE) * alive_norms.iter().copied().sum::<T>()
        / T::of(alive_norms.len() as f64);

    let weights: Vec<f64> = buffer.losses.iter().map(|l| l.f64() * l.f64()).collect();
    let sampler = WeightedIndex::new(&weights).ok();
    let b_dec = params.b_dec().to_vec();

    for &i in dead {
        let pick = match &sampler {
            Some(s) => s.sample(rng),
            None => rand::Rng::random_range(rng, 0..buffer.inputs.rows()),
        };
        let mut dir: Vec<T> = buffer
            .inputs
            .row(pick)
            .iter()
            .zip(&b_dec)
            .map(|(&x, &b)| x - b)
            .collect();
        let n = norm(&dir);
        if n > T::zero() && n.is_finite() {
            scale_in_place(T::one() / n, &mut dir);
        } else {
            dir = rng::unit_sphere(rng, d_act);
        }
        let mut enc = dir.clone();
        scale_in_place(target_norm, &mut enc);
        reset_feature(params, i, &dir, &enc);
        for moments in [&mut adam.m, &mut adam.v] {
            let zero = vec![T::zero(); d_act];
            reset_feature(moments, i, &zero, &zero);
        }
    }
    Ok(dead.len())
}

fn encoder_rows<T: Scalar>(params: &Sae<T>) -> Matrix<T> {
    match params {
        Sae::Baseline(s) => s.w_enc.clone(),
        Sae::Gated(s) => s.w_gate.clone(),
    }
}

/// Writes feature `i`'s decoder row and encoder row(s), zeroing its biases
/// and `r_mag`. Applied to parameters and, with zero rows, to moments.
fn reset_feature<T: Scalar>(p: &mut Sae<T>, i: usize, dec: &[T], enc: &[T]) {
    match p {
        Sae::Baseline(s) => {
            s.w_dec.row_mut(i).copy_from_slice(dec);
            s.w_enc.row_mut(i).copy_from_slice(enc);
            s.b_enc[i] = T::zero();
        }
        Sae::Gated(s) => {
            s.w_dec.row_mut(i).copy_from_slice(dec);
            s.w_gate.row_mut(i).copy_from_slice(enc);
            if let Some(w) = s.w_mag_untied.as_mut() {
                w.row_mut(i).copy_from_slice(enc);
            }
            s.b_gate[i] = T::zero();
            s.b_mag[i] = T::zero();
            s.r_mag[i] = T::zero();
        }
    }
}
