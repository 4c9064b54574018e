//! The training loop.

use std::collections::VecDeque;

use crate::data::ActivationSource;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::{dead_fraction, Evaluator, MetricsRecord};
use crate::rng::{stream, substream, Rng};
use crate::sae::{init_params, ArchKind, ParamTensors, Sae};
use crate::scalar::Scalar;
use crate::training::adam::{adam_step, constrained_step, AdamParams, AdamState};
use crate::training::config::TrainConfig;
use crate::training::grads::{evaluate, LossBreakdown, LossOptions};
use crate::training::resample::{dead_features, resample_features, LossBuffer};
use crate::training::schedule::LrSchedule;

/// Which model to build and how wide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub kind: ArchKind,
    pub d_act: usize,
    pub d_feat: usize,
}

/// Everything besides the parameters that a run carries between steps.
#[derive(Clone, Debug)]
pub struct TrainState<T> {
    /// Completed optimizer steps.
    pub step: usize,
    pub adam: AdamState<T>,
    /// Step at which each feature last fired, or was last (re)initialized.
    pub last_active: Vec<usize>,
    pub schedule: LrSchedule,
    pub rng: Rng,
    /// Per-step firing flags for the trailing dead window.
    pub history: VecDeque<Vec<bool>>,
}

#[derive(Clone, Debug)]
pub struct StepReport<T> {
    pub step: usize,
    pub loss: LossBreakdown<T>,
    pub lr: f64,
    pub resampled: usize,
}

pub struct Trainer<T> {
    pub params: Sae<T>,
    pub state: TrainState<T>,
    cfg: TrainConfig,
    opts: LossOptions,
    hp: AdamParams,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(arch: Architecture, cfg: &TrainConfig) -> Result<Self> {
        if cfg.ablation.untied_encoders && arch.kind != ArchKind::GatedUntied {
            return Err(Error::Config(
                "the untied-encoders ablation needs the gated-untied architecture".into(),
            ));
        }
        let params = init_params(arch.kind, arch.d_act, arch.d_feat, cfg.seed)?;
        Self::from_params(params, cfg)
    }

    pub fn from_params(params: Sae<T>, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if !params.all_finite() {
            return Err(Error::Numerical("initial parameters contain non-finite values".into()));
        }
        let mut opts = LossOptions::from_config(cfg);
        opts.pin_rmag |= params.kind() == ArchKind::GatedUntied;
        let d_feat = params.w_dec().rows();
        let state = TrainState {
            step: 0,
            adam: AdamState::new(&params),
            last_active: vec![0; d_feat],
            schedule: LrSchedule {
                warmup_steps: cfg.warmup_steps,
                resample_lr_factor: cfg.resample_lr_factor,
                resample_warmup_steps: cfg.resample_warmup_steps,
                last_resample: None,
            },
            rng: substream(cfg.seed, stream::RESAMPLE),
            history: VecDeque::with_capacity(cfg.dead_window),
        };
        Ok(Self {
            params,
            state,
            cfg: cfg.clone(),
            opts,
            hp: AdamParams {
                beta1: cfg.beta1,
                beta2: cfg.beta2,
                eps: cfg.eps,
            },
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn loss_options(&self) -> &LossOptions {
        &self.opts
    }

    /// One optimizer step on `batch`, followed by resampling when due.
    pub fn step(&mut self, batch: &Matrix<T>) -> Result<StepReport<T>> {
        let step = self.state.step;
        let eval = evaluate(&self.params, batch, &self.opts, true)?;
        if !eval.loss.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite loss at step {step}: {}",
                eval.loss
            )));
        }
        let mut grads = eval.grads.expect("gradients requested");
        if self.cfg.freeze_decoder {
            for (name, g) in grads.0.tensors_mut() {
                if name == "w_dec" || name == "b_dec" {
                    g.fill(T::zero());
                }
            }
        }
        let lr = self.cfg.lr * self.state.schedule.multiplier(step);
        if self.cfg.freeze_decoder {
            // Renormalizing an untouched unit row would still perturb it by rounding.
            adam_step(&mut self.params, &grads, &mut self.state.adam, lr, &self.hp);
        } else {
            constrained_step(&mut self.params, &mut grads, &mut self.state.adam, lr, &self.hp)
                .map_err(|e| match e {
                    Error::Numerical(msg) => {
                        Error::Numerical(format!("{msg} at step {step}: {}", eval.loss))
                    }
                    other => other,
                })?;
        }
        if !self.params.all_finite() {
            return Err(Error::Numerical(format!(
                "parameters became non-finite at step {step}: {}",
                eval.loss
            )));
        }

        for (i, &fired) in eval.stats.fired.iter().enumerate() {
            if fired {
                self.state.last_active[i] = step;
            }
        }
        if self.state.history.len() == self.cfg.dead_window {
            self.state.history.pop_front();
        }
        self.state.history.push_back(eval.stats.fired);
        self.state.step = step + 1;

        let mut resampled = 0;
        let now = self.state.step;
        if let Some(every) = self.cfg.resample_every {
            if now.is_multiple_of(every) && now < self.cfg.total_steps {
                let dead = dead_features(&self.state.last_active, now, self.cfg.dead_window);
                if !dead.is_empty() {
                    let buffer = LossBuffer {
                        inputs: batch.clone(),
                        losses: eval.stats.example_recon,
                    };
                    resampled = resample_features(
                        &mut self.params,
                        &mut self.state.adam,
                        &dead,
                        &buffer,
                        &mut self.state.rng,
                    )?;
                    for &i in &dead {
                        self.state.last_active[i] = now;
                    }
                    self.state.schedule.last_resample = Some(now);
                }
            }
        }
        Ok(StepReport {
            step,
            loss: eval.loss,
            lr,
            resampled,
        })
    }

    /// Dead fraction over whatever part of the window has elapsed.
    pub fn dead_fraction(&self) -> f64 {
        let hist: Vec<Vec<bool>> = self.state.history.iter().cloned().collect();
        if hist.is_empty() {
            return 0.0;
        }
        dead_fraction(&hist, hist.len()).unwrap_or(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutput<T> {
    pub params: Sae<T>,
    pub metrics: Vec<MetricsRecord>,
    pub losses: Vec<LossBreakdown<T>>,
    pub resampled: usize,
}

pub fn train<T: Scalar>(
    arch: Architecture,
    source: &mut impl ActivationSource<T>,
    cfg: &TrainConfig,
    evaluator: Option<&Evaluator<T>>,
) -> Result<TrainOutput<T>> {
    let trainer = Trainer::new(arch, cfg)?;
    run(trainer, source, evaluator, |_| Ok(()))
}

/// Drives `trainer` to `total_steps`, calling `after_step` after each step.
pub fn run<T: Scalar>(
    mut trainer: Trainer<T>,
    source: &mut impl ActivationSource<T>,
    evaluator: Option<&Evaluator<T>>,
    mut after_step: impl FnMut(&Trainer<T>) -> Result<()>,
) -> Result<TrainOutput<T>> {
    let cfg = trainer.cfg.clone();
    let mut metrics = Vec::new();
    let mut losses = Vec::with_capacity(cfg.total_steps);
    let mut resampled = 0;
    while trainer.state.step < cfg.total_steps {
        let batch = source.next_batch(cfg.batch_size)?;
        let report = trainer.step(&batch)?;
        resampled += report.resampled;
        losses.push(report.loss);
        let done = trainer.state.step;
        if let Some(ev) = evaluator {
            let due = cfg.metrics_every.is_some_and(|m| done.is_multiple_of(m));
            if due || done == cfg.total_steps {
                metrics.push(ev.evaluate(
                    &trainer.params,
                    done,
                    Some(cfg.lambda),
                    trainer.dead_fraction(),
                )?);
            }
        }
        after_step(&trainer)?;
    }
    Ok(TrainOutput {
        params: trainer.params,
        metrics,
        losses,
        resampled,
    })
}
