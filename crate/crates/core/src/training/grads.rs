//! Losses and hand-derived backward passes.
//!
//! All terms are averaged over the batch. ReLU and Heaviside derivatives are
//! taken as zero at the kink.
//!
//! Gated loss, per example:
//!
//! ```text
//! L = ‖x − x̂(f̃(x))‖² + λ‖ReLU(π_gate(x))‖₁ + ‖x − x̂_frozen(ReLU(π_gate(x)))‖²
//! ```
//!
//! The binarized gate is a constant in the first term. The auxiliary third
//! term sees the decoder as frozen: it sends nothing to `w_dec` or `b_dec`,
//! including through the `x − b_dec` centering, unless the
//! `unfreeze_decoder` ablation is on.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot, norm, Matrix};
use crate::sae::{BaselineSae, GatedSae, Sae};
use crate::scalar::{relu, Scalar};
use crate::training::TrainConfig;

/// Per-parameter gradients, shaped exactly like the bundle they came from.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet<T>(pub Sae<T>);

impl<T: Scalar> GradientSet<T> {
    pub fn zeros_like(params: &Sae<T>) -> Self {
        GradientSet(params.zeros_like())
    }

    pub fn baseline(&self) -> Option<&BaselineSae<T>> {
        self.0.as_baseline()
    }

    pub fn gated(&self) -> Option<&GatedSae<T>> {
        self.0.as_gated()
    }

    pub fn w_dec(&self) -> &Matrix<T> {
        self.0.w_dec()
    }

    pub fn b_dec(&self) -> &[T] {
        self.0.b_dec()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown<T> {
    pub total: T,
    pub recon: T,
    pub sparsity: T,
    /// Gated only.
    pub aux: Option<T>,
}

impl<T: Scalar> LossBreakdown<T> {
    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
            && self.recon.is_finite()
            && self.sparsity.is_finite()
            && self.aux.is_none_or(|a| a.is_finite())
    }
}

impl<T: Scalar> std::fmt::Display for LossBreakdown<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "total={} recon={} sparsity={}",
            self.total, self.recon, self.sparsity
        )?;
        if let Some(a) = self.aux {
            write!(f, " aux={a}")?;
        }
        Ok(())
    }
}

/// Loss knobs shared by both architectures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossOptions {
    pub lambda: f64,
    pub normalize_recon_by_input_norm: bool,
    /// Lets the auxiliary gated term train the decoder.
    pub unfreeze_decoder: bool,
    /// Pins `r_mag`: its gradient is reported as zero.
    pub pin_rmag: bool,
    /// Which loss terms contribute to the gradient. Loss values always
    /// include every term.
    pub grad_terms: Terms,
}

/// Selects loss terms; `aux` is ignored by the baseline architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Terms {
    pub recon: bool,
    pub sparsity: bool,
    pub aux: bool,
}

impl Terms {
    pub const ALL: Terms = Terms {
        recon: true,
        sparsity: true,
        aux: true,
    };

    pub const fn only_recon() -> Self {
        Terms { recon: true, sparsity: false, aux: false }
    }

    pub const fn only_sparsity() -> Self {
        Terms { recon: false, sparsity: true, aux: false }
    }

    pub const fn only_aux() -> Self {
        Terms { recon: false, sparsity: false, aux: true }
    }
}

impl Default for Terms {
    fn default() -> Self {
        Terms::ALL
    }
}

impl LossOptions {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            normalize_recon_by_input_norm: false,
            unfreeze_decoder: false,
            pin_rmag: false,
            grad_terms: Terms::ALL,
        }
    }

    pub fn from_config(cfg: &TrainConfig) -> Self {
        Self {
            lambda: cfg.lambda,
            normalize_recon_by_input_norm: cfg.normalize_recon_by_input_norm,
            unfreeze_decoder: cfg.ablation.unfreeze_decoder,
            pin_rmag: cfg.ablation.no_rmag || cfg.ablation.untied_encoders,
            grad_terms: Terms::ALL,
        }
    }
}

/// By-products of a forward pass that training needs besides the loss.
#[derive(Clone, Debug)]
pub struct BatchStats<T> {
    /// `fired[i]`: feature `i` was strictly positive on some example.
    pub fired: Vec<bool>,
    /// Unscaled `‖x − x̂‖²` per example.
    pub example_recon: Vec<T>,
    /// Sum over examples of the count of active features.
    pub active_total: usize,
}

pub struct Evaluation<T> {
    pub loss: LossBreakdown<T>,
    pub grads: Option<GradientSet<T>>,
    pub stats: BatchStats<T>,
}

fn recon_scale<T: Scalar>(batch: &Matrix<T>, opts: &LossOptions) -> Result<T> {
    if !opts.normalize_recon_by_input_norm {
        return Ok(T::one());
    }
    let mean_norm = batch.iter_rows().map(norm).sum::<T>() / T::of(batch.rows() as f64);
    if mean_norm > T::zero() {
        Ok(T::one() / mean_norm)
    } else {
        Err(Error::Degenerate(
            "mean input norm is zero; cannot normalize reconstruction loss".into(),
        ))
    }
}

#[inline]
fn term_coef<T: Scalar>(enabled: bool, coef: T) -> T {
    if enabled {
        coef
    } else {
        T::zero()
    }
}

fn check_batch<T: Scalar>(batch: &Matrix<T>, d_act: usize) -> Result<()> {
    check_dim("loss: batch width", d_act, batch.cols())?;
    if batch.rows() == 0 {
        return Err(Error::Contract("loss on an empty batch".into()));
    }
    Ok(())
}

/// Loss (and optionally gradients) for either architecture.
pub fn evaluate<T: Scalar>(
    params: &Sae<T>,
    batch: &Matrix<T>,
    opts: &LossOptions,
    want_grads: bool,
) -> Result<Evaluation<T>> {
    match params {
        Sae::Baseline(s) => baseline_pass(s, batch, opts, want_grads),
        Sae::Gated(s) => gated_pass(s, batch, opts, want_grads),
    }
}

pub fn baseline_loss<T: Scalar>(
    sae: &BaselineSae<T>,
    batch: &Matrix<T>,
    lambda: f64,
) -> Result<LossBreakdown<T>> {
    Ok(baseline_pass(sae, batch, &LossOptions::new(lambda), false)?.loss)
}

pub fn baseline_grads<T: Scalar>(
    sae: &BaselineSae<T>,
    batch: &Matrix<T>,
    lambda: f64,
) -> Result<GradientSet<T>> {
    Ok(baseline_pass(sae, batch, &LossOptions::new(lambda), true)?
        .grads
        .expect("requested"))
}

pub fn gated_loss<T: Scalar>(
    sae: &GatedSae<T>,
    batch: &Matrix<T>,
    lambda: f64,
) -> Result<LossBreakdown<T>> {
    Ok(gated_pass(sae, batch, &LossOptions::new(lambda), false)?.loss)
}

pub fn gated_grads<T: Scalar>(
    sae: &GatedSae<T>,
    batch: &Matrix<T>,
    opts: &LossOptions,
) -> Result<GradientSet<T>> {
    Ok(gated_pass(sae, batch, opts, true)?.grads.expect("requested"))
}

fn baseline_pass<T: Scalar>(
    sae: &BaselineSae<T>,
    batch: &Matrix<T>,
    opts: &LossOptions,
    want_grads: bool,
) -> Result<Evaluation<T>> {
    let d_act = sae.w_dec.cols();
    let d_feat = sae.w_dec.rows();
    check_batch(batch, d_act)?;
    let n = T::of(batch.rows() as f64);
    let lambda = T::of(opts.lambda);
    let scale = recon_scale(batch, opts)?;
    let terms = opts.grad_terms;
    let recon_coef = term_coef(terms.recon, T::of(2.0) * scale / n);
    let sparse_coef = term_coef(terms.sparsity, lambda / n);

    let mut grads = want_grads.then(|| BaselineSae {
        w_enc: Matrix::zeros(d_feat, d_act),
        b_enc: vec![T::zero(); d_feat],
        w_dec: Matrix::zeros(d_feat, d_act),
        b_dec: vec![T::zero(); d_act],
    });
    let mut stats = BatchStats {
        fired: vec![false; d_feat],
        example_recon: Vec::with_capacity(batch.rows()),
        active_total: 0,
    };
    let (mut recon_sum, mut l1_sum) = (T::zero(), T::zero());

    let mut centered = vec![T::zero(); d_act];
    let mut pre = vec![T::zero(); d_feat];
    let mut feats = vec![T::zero(); d_feat];
    let mut err = vec![T::zero(); d_act];
    let mut g_c = vec![T::zero(); d_act];

    for x in batch.iter_rows() {
        for j in 0..d_act {
            centered[j] = x[j] - sae.b_dec[j];
        }
        err.copy_from_slice(&sae.b_dec);
        for i in 0..d_feat {
            pre[i] = dot(sae.w_enc.row(i), &centered) + sae.b_enc[i];
            feats[i] = relu(pre[i]);
            if feats[i] > T::zero() {
                axpy(feats[i], sae.w_dec.row(i), &mut err);
                stats.fired[i] = true;
                stats.active_total += 1;
                l1_sum += feats[i];
            }
        }
        for j in 0..d_act {
            err[j] -= x[j];
        }
        let e2 = dot(&err, &err);
        stats.example_recon.push(e2);
        recon_sum += e2;

        let Some(g) = grads.as_mut() else { continue };
        // dL/dx̂ = 2·s·e / B
        let g_out: Vec<T> = err.iter().map(|&e| recon_coef * e).collect();
        axpy(T::one(), &g_out, &mut g.b_dec);
        g_c.iter_mut().for_each(|v| *v = T::zero());
        for i in 0..d_feat {
            if pre[i] <= T::zero() {
                continue;
            }
            axpy(feats[i], &g_out, g.w_dec.row_mut(i));
            let g_pre = dot(sae.w_dec.row(i), &g_out) + sparse_coef;
            axpy(g_pre, &centered, g.w_enc.row_mut(i));
            g.b_enc[i] += g_pre;
            axpy(g_pre, sae.w_enc.row(i), &mut g_c);
        }
        // centering x − b_dec
        axpy(-T::one(), &g_c, &mut g.b_dec);
    }

    let recon = scale * recon_sum / n;
    let sparsity = lambda * l1_sum / n;
    Ok(Evaluation {
        loss: LossBreakdown {
            total: recon + sparsity,
            recon,
            sparsity,
            aux: None,
        },
        grads: grads.map(|g| GradientSet(Sae::Baseline(g))),
        stats,
    })
}

fn gated_pass<T: Scalar>(
    sae: &GatedSae<T>,
    batch: &Matrix<T>,
    opts: &LossOptions,
    want_grads: bool,
) -> Result<Evaluation<T>> {
    let d_act = sae.w_dec.cols();
    let d_feat = sae.w_dec.rows();
    check_batch(batch, d_act)?;
    let n = T::of(batch.rows() as f64);
    let lambda = T::of(opts.lambda);
    let two = T::of(2.0);
    let scale = recon_scale(batch, opts)?;
    let w_mag = sae.w_mag();
    let tied = sae.w_mag_untied.is_none();
    let rho: Vec<T> = sae.r_mag.iter().map(|r| r.exp()).collect();
    let terms = opts.grad_terms;
    let recon_coef = term_coef(terms.recon, two * scale / n);
    let aux_coef = term_coef(terms.aux, two * scale / n);
    let g_sparse_i = term_coef(terms.sparsity, lambda / n);

    let mut grads = want_grads.then(|| sae.clone()).map(|mut g| {
        for (_, t) in crate::sae::ParamTensors::tensors_mut(&mut g) {
            t.iter_mut().for_each(|v| *v = T::zero());
        }
        g
    });
    let mut stats = BatchStats {
        fired: vec![false; d_feat],
        example_recon: Vec::with_capacity(batch.rows()),
        active_total: 0,
    };
    let (mut recon_sum, mut l1_sum, mut aux_sum) = (T::zero(), T::zero(), T::zero());

    let mut centered = vec![T::zero(); d_act];
    let mut pre_gate = vec![T::zero(); d_feat];
    let mut pre_mag = vec![T::zero(); d_feat];
    let mut feats = vec![T::zero(); d_feat];
    let mut err = vec![T::zero(); d_act];
    let mut err_aux = vec![T::zero(); d_act];
    let mut g_c = vec![T::zero(); d_act];

    for x in batch.iter_rows() {
        for j in 0..d_act {
            centered[j] = x[j] - sae.b_dec[j];
        }
        err.copy_from_slice(&sae.b_dec);
        err_aux.copy_from_slice(&sae.b_dec);
        for i in 0..d_feat {
            pre_gate[i] = dot(sae.w_gate.row(i), &centered) + sae.b_gate[i];
            pre_mag[i] = dot(w_mag.row(i), &centered) + sae.b_mag[i];
            let open = pre_gate[i] > T::zero();
            feats[i] = if open { relu(pre_mag[i]) } else { T::zero() };
            if feats[i] > T::zero() {
                axpy(feats[i], sae.w_dec.row(i), &mut err);
                stats.fired[i] = true;
                stats.active_total += 1;
            }
            if open {
                axpy(pre_gate[i], sae.w_dec.row(i), &mut err_aux);
                l1_sum += pre_gate[i];
            }
        }
        for j in 0..d_act {
            err[j] -= x[j];
            err_aux[j] -= x[j];
        }
        let e2 = dot(&err, &err);
        stats.example_recon.push(e2);
        recon_sum += e2;
        aux_sum += dot(&err_aux, &err_aux);

        let Some(g) = grads.as_mut() else { continue };
        let g_out: Vec<T> = err.iter().map(|&e| recon_coef * e).collect();
        let g_aux: Vec<T> = err_aux.iter().map(|&e| aux_coef * e).collect();
        axpy(T::one(), &g_out, &mut g.b_dec);
        if opts.unfreeze_decoder {
            axpy(T::one(), &g_aux, &mut g.b_dec);
        }
        g_c.iter_mut().for_each(|v| *v = T::zero());
        for i in 0..d_feat {
            if pre_gate[i] <= T::zero() {
                continue;
            }
            // Reconstruction term through the magnitude path; the gate is constant.
            if pre_mag[i] > T::zero() {
                axpy(feats[i], &g_out, g.w_dec.row_mut(i));
                let g_mag = dot(sae.w_dec.row(i), &g_out);
                g.b_mag[i] += g_mag;
                axpy(g_mag, w_mag.row(i), &mut g_c);
                if tied {
                    axpy(g_mag * rho[i], &centered, g.w_gate.row_mut(i));
                    if !opts.pin_rmag {
                        g.r_mag[i] += g_mag * dot(w_mag.row(i), &centered);
                    }
                } else if let Some(wm) = g.w_mag_untied.as_mut() {
                    axpy(g_mag, &centered, wm.row_mut(i));
                }
            }
            // Sparsity and auxiliary terms through ReLU(π_gate).
            let g_aux_i = dot(sae.w_dec.row(i), &g_aux);
            axpy(g_aux_i + g_sparse_i, &centered, g.w_gate.row_mut(i));
            g.b_gate[i] += g_aux_i + g_sparse_i;
            if opts.unfreeze_decoder {
                axpy(pre_gate[i], &g_aux, g.w_dec.row_mut(i));
                axpy(g_aux_i + g_sparse_i, sae.w_gate.row(i), &mut g_c);
            } else {
                axpy(g_sparse_i, sae.w_gate.row(i), &mut g_c);
            }
        }
        axpy(-T::one(), &g_c, &mut g.b_dec);
    }

    let recon = scale * recon_sum / n;
    let sparsity = lambda * l1_sum / n;
    let aux = scale * aux_sum / n;
    Ok(Evaluation {
        loss: LossBreakdown {
            total: recon + sparsity + aux,
            recon,
            sparsity,
            aux: Some(aux),
        },
        grads: grads.map(|g| GradientSet(Sae::Gated(g))),
        stats,
    })
}
