//! The two built-in demonstrations: one-dimensional shrinkage, and the
//! ReLU vs JumpReLU readout comparison on the 1-D mixture.

use std::fmt::Write as _;

use crate::data::{jump_relu_readout, readout_mse, relu_readout, toy1d_sample, MatrixSource, Toy1dParams};
use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};
use crate::sae::{Autoencoder, BaselineSae, GatedSae, Sae};
use crate::training::{
    rescale_shift_fit, run, RescaleConfig, RescaledSae, TrainConfig, Trainer,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ShrinkageConfig {
    pub lambda: f64,
    pub steps: usize,
    pub lr: f64,
    pub rescale_steps: usize,
    pub rescale_lr: f64,
}

impl Default for ShrinkageConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            steps: 20_000,
            lr: 1e-4,
            rescale_steps: 20_000,
            rescale_lr: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShrinkageReport {
    pub baseline_activation: f64,
    pub baseline_reconstruction: f64,
    pub rescaled_reconstruction: f64,
    pub gated_activation: f64,
    pub gated_reconstruction: f64,
    /// Largest `|‖w_dec row‖ − 1|` seen across the runs.
    pub max_row_norm_deviation: f64,
}

impl ShrinkageReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("model,feature_activation,reconstruction\n");
        let _ = writeln!(s, "baseline,{},{}", self.baseline_activation, self.baseline_reconstruction);
        let _ = writeln!(s, "baseline+rescale-shift,,{}", self.rescaled_reconstruction);
        let _ = writeln!(s, "gated,{},{}", self.gated_activation, self.gated_reconstruction);
        s
    }
}

fn unit(v: f64) -> Result<Matrix<f64>> {
    Matrix::from_vec(1, 1, vec![v])
}

fn constant_source() -> Result<MatrixSource<f64>> {
    MatrixSource::new(unit(1.0)?, 1, 0)
}

fn max_norm_dev(sae: &Sae<f64>) -> f64 {
    sae.w_dec()
        .iter_rows()
        .map(|r| (norm(r) - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Trains on the constant input `x = 1` with the decoder pinned at 1 and
/// reports what each model reconstructs.
pub fn shrinkage_demo(cfg: &ShrinkageConfig) -> Result<ShrinkageReport> {
    let train_cfg = TrainConfig {
        lambda: cfg.lambda,
        lr: cfg.lr,
        batch_size: 1,
        total_steps: cfg.steps,
        warmup_steps: 0,
        resample_every: None,
        freeze_decoder: true,
        ..TrainConfig::default()
    };
    let x = [1.0];

    let baseline = Sae::Baseline(BaselineSae {
        w_enc: unit(1.0)?,
        b_enc: vec![0.0],
        w_dec: unit(1.0)?,
        b_dec: vec![0.0],
    });
    let out = run(Trainer::from_params(baseline, &train_cfg)?, &mut constant_source()?, None, |_| Ok(()))?;
    let base_params = out.params;
    let baseline_activation = base_params.encode(&x)?.features[0];
    let baseline_reconstruction = base_params.reconstruct(&x)?[0];
    let mut dev = max_norm_dev(&base_params);

    let frozen = base_params
        .as_baseline()
        .ok_or_else(|| Error::Contract("expected a baseline".into()))?
        .clone();
    let rs = rescale_shift_fit(
        &frozen,
        &mut constant_source()?,
        &RescaleConfig {
            lr: cfg.rescale_lr,
            batch_size: 1,
            steps: cfg.rescale_steps,
        },
    )?;
    let rescaled = RescaledSae {
        base: &frozen,
        correction: &rs,
    };
    let rescaled_reconstruction = rescaled.reconstruct(&x)?[0];

    let gated = Sae::Gated(GatedSae {
        w_gate: unit(1.0)?,
        b_gate: vec![0.0],
        r_mag: vec![0.0],
        b_mag: vec![0.0],
        w_dec: unit(1.0)?,
        b_dec: vec![0.0],
        w_mag_untied: None,
    });
    let out = run(Trainer::from_params(gated, &train_cfg)?, &mut constant_source()?, None, |_| Ok(()))?;
    let gated_activation = out.params.encode(&x)?.features[0];
    let gated_reconstruction = out.params.reconstruct(&x)?[0];
    dev = dev.max(max_norm_dev(&out.params));

    Ok(ShrinkageReport {
        baseline_activation,
        baseline_reconstruction,
        rescaled_reconstruction,
        gated_activation,
        gated_reconstruction,
        max_row_norm_deviation: dev,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Toy1dReport {
    pub samples: usize,
    pub above_threshold: usize,
    pub relu_mse: f64,
    pub jump_relu_mse: f64,
}

impl Toy1dReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("readout,t,m,d,samples_above_threshold,mse\n");
        let _ = writeln!(s, "relu,1,2,,{},{}", self.above_threshold, self.relu_mse);
        let _ = writeln!(s, "jump_relu,1,1,0,{},{}", self.above_threshold, self.jump_relu_mse);
        s
    }
}

/// Scores `ReLU(t=1, m=2)` and `JumpReLU(t=1, m=1, d=0)` on the on-samples
/// whose value exceeds 1.
pub fn toy1d_demo(samples: usize, params: Toy1dParams, seed: u64) -> Result<Toy1dReport> {
    let data = toy1d_sample(samples, params, seed)?;
    let keep = |s: &crate::data::Toy1dSample| s.is_on && s.value > 1.0;
    let above_threshold = data.iter().filter(|s| keep(s)).count();
    let none = || Error::Degenerate("no on-samples above the threshold".into());
    let relu_mse = readout_mse(&data, keep, |v| relu_readout(v, 1.0, 2.0)).ok_or_else(none)?;
    let jump_relu_mse =
        readout_mse(&data, keep, |v| jump_relu_readout(v, 1.0, 1.0, 0.0)).ok_or_else(none)?;
    Ok(Toy1dReport {
        samples,
        above_threshold,
        relu_mse,
        jump_relu_mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy1d_jump_relu_is_exact() {
        let r = toy1d_demo(10_000, Toy1dParams::default(), 1).unwrap();
        assert_eq!(r.jump_relu_mse, 0.0);
        assert!(r.relu_mse > 0.0);
        assert!(r.above_threshold > 0);
    }
}
