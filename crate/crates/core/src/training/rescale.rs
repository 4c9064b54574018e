//! Post-hoc magnitude correction for a frozen baseline: learn a positive
//! per-feature scale and a shift on the encoder pre-activations while the
//! set of active features stays the one the frozen encoder chose.

use crate::data::ActivationSource;
use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;
use crate::sae::{Autoencoder, BaselineSae, Decoder, EncodeOutput};
use crate::scalar::Scalar;
use crate::training::adam::{adam_update, AdamParams};

#[derive(Clone, Debug, PartialEq)]
pub struct RescaleShift<T> {
    /// The scale is `exp(log_scale)`, so it is positive by construction.
    pub log_scale: Vec<T>,
    pub shift: Vec<T>,
}

impl<T: Scalar> RescaleShift<T> {
    pub fn identity(d_feat: usize) -> Self {
        Self {
            log_scale: vec![T::zero(); d_feat],
            shift: vec![T::zero(); d_feat],
        }
    }

    pub fn scale(&self) -> Vec<T> {
        self.log_scale.iter().map(|v| v.exp()).collect()
    }

    /// `1[p > 0] · ReLU(scale ⊙ p + shift)` for pre-activations `p`.
    pub fn apply(&self, pre: &[T]) -> Result<Vec<T>> {
        check_dim("rescale: d_feat", self.shift.len(), pre.len())?;
        Ok(pre
            .iter()
            .zip(self.log_scale.iter().zip(&self.shift))
            .map(|(&p, (&ls, &c))| {
                if p > T::zero() {
                    (ls.exp() * p + c).max(T::zero())
                } else {
                    T::zero()
                }
            })
            .collect())
    }
}

/// A frozen baseline with a fitted rescale-shift in front of its decoder.
#[derive(Clone, Copy, Debug)]
pub struct RescaledSae<'a, T> {
    pub base: &'a BaselineSae<T>,
    pub correction: &'a RescaleShift<T>,
}

impl<T: Scalar> Autoencoder<T> for RescaledSae<'_, T> {
    fn d_act(&self) -> usize {
        self.base.w_dec.cols()
    }

    fn d_feat(&self) -> usize {
        self.base.w_dec.rows()
    }

    fn encode(&self, x: &[T]) -> Result<EncodeOutput<T>> {
        let pre = self.base.pre_activations(x)?;
        Ok(EncodeOutput {
            features: self.correction.apply(&pre)?,
            pre_gate: None,
            mag_acts: None,
            gate_mask: Some(pre.iter().map(|&p| p > T::zero()).collect()),
        })
    }

    fn decoder(&self) -> Decoder<'_, T> {
        self.base.decoder()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RescaleConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub steps: usize,
}

impl Default for RescaleConfig {
    fn default() -> Self {
        Self {
            lr: 1e-2,
            batch_size: 1024,
            steps: 2000,
        }
    }
}

/// Mean squared reconstruction error of the corrected model on one batch,
/// with gradients for `(log_scale, shift)`.
pub fn rescale_loss_grads<T: Scalar>(
    frozen: &BaselineSae<T>,
    rs: &RescaleShift<T>,
    batch: &crate::linalg::Matrix<T>,
) -> Result<(T, Vec<T>, Vec<T>)> {
    let d_feat = frozen.w_dec.rows();
    check_dim("rescale: batch width", frozen.w_dec.cols(), batch.cols())?;
    if batch.rows() == 0 {
        return Err(Error::Contract("rescale fit on an empty batch".into()));
    }
    let n = T::of(batch.rows() as f64);
    let scale = rs.scale();
    let mut g_log = vec![T::zero(); d_feat];
    let mut g_shift = vec![T::zero(); d_feat];
    let mut loss = T::zero();
    for x in batch.iter_rows() {
        let pre = frozen.pre_activations(x)?;
        let feats = rs.apply(&pre)?;
        let recon = frozen.decoder().decode(&feats)?;
        let resid: Vec<T> = recon.iter().zip(x).map(|(&r, &v)| r - v).collect();
        loss += dot(&resid, &resid) / n;
        for i in 0..d_feat {
            if feats[i] > T::zero() {
                let d_feat_i = T::of(2.0) * dot(frozen.w_dec.row(i), &resid) / n;
                g_shift[i] += d_feat_i;
                g_log[i] += d_feat_i * scale[i] * pre[i];
            }
        }
    }
    Ok((loss, g_log, g_shift))
}

/// Fits the correction with Adam at a constant learning rate.
pub fn rescale_shift_fit<T: Scalar>(
    frozen: &BaselineSae<T>,
    source: &mut impl ActivationSource<T>,
    cfg: &RescaleConfig,
) -> Result<RescaleShift<T>> {
    check_dim("rescale: source width", frozen.w_dec.cols(), source.d_act())?;
    if cfg.batch_size == 0 || !(cfg.lr > 0.0) {
        return Err(Error::Config("rescale fit needs batch_size > 0 and lr > 0".into()));
    }
    let d_feat = frozen.w_dec.rows();
    let hp = AdamParams::default();
    let mut rs = RescaleShift::identity(d_feat);
    let (mut m_log, mut v_log) = (vec![T::zero(); d_feat], vec![T::zero(); d_feat]);
    let (mut m_sh, mut v_sh) = (vec![T::zero(); d_feat], vec![T::zero(); d_feat]);
    for t in 1..=cfg.steps {
        let batch = source.next_batch(cfg.batch_size)?;
        let (loss, g_log, g_shift) = rescale_loss_grads(frozen, &rs, &batch)?;
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("rescale fit: non-finite loss at step {t}")));
        }
        adam_update(&mut rs.log_scale, &g_log, &mut m_log, &mut v_log, t as u64, cfg.lr, &hp);
        adam_update(&mut rs.shift, &g_shift, &mut m_sh, &mut v_sh, t as u64, cfg.lr, &hp);
    }
    Ok(rs)
}
