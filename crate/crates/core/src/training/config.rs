//! Training hyperparameters and the flat `key = value` config format.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Architecture ablations. `untied_encoders` also drops `r_mag`, which the
/// untied magnitude weights make redundant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ablation {
    pub unfreeze_decoder: bool,
    pub no_rmag: bool,
    pub untied_encoders: bool,
}

impl Ablation {
    /// Parses a CLI ablation name (`unfreeze-decoder`, `no-rmag`, `untied-encoders`).
    pub fn enable(&mut self, name: &str) -> Result<()> {
        match name.replace('_', "-").as_str() {
            "unfreeze-decoder" => self.unfreeze_decoder = true,
            "no-rmag" => self.no_rmag = true,
            "untied-encoders" => self.untied_encoders = true,
            "none" => {}
            other => return Err(Error::Config(format!("unknown ablation `{other}`"))),
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// L1 coefficient.
    pub lambda: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub total_steps: usize,
    /// Linear warm-up length at the start of training.
    pub warmup_steps: usize,
    pub resample_every: Option<usize>,
    /// A feature silent for this many consecutive steps is dead.
    pub dead_window: usize,
    pub resample_lr_factor: f64,
    pub resample_warmup_steps: usize,
    pub ablation: Ablation,
    /// Divide reconstruction terms by the batch mean of `‖x‖₂`.
    pub normalize_recon_by_input_norm: bool,
    /// Hold `w_dec` and `b_dec` fixed (used by the one-dimensional demos).
    pub freeze_decoder: bool,
    pub metrics_every: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            lr: 3e-4,
            beta1: 0.0,
            beta2: 0.999,
            eps: 1e-8,
            batch_size: 4096,
            total_steps: 10_000,
            warmup_steps: 1000,
            resample_every: Some(10_000),
            dead_window: 2000,
            resample_lr_factor: 0.1,
            resample_warmup_steps: 1000,
            ablation: Ablation::default(),
            normalize_recon_by_input_norm: false,
            freeze_decoder: false,
            metrics_every: None,
            seed: 0,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

fn parse_opt(key: &str, value: &str) -> Result<Option<usize>> {
    match value {
        "none" | "" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl TrainConfig {
    /// Applies one assignment. Returns `Ok(false)` for keys this struct does not own.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key.replace('-', "_").as_str() {
            "lambda" => self.lambda = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "beta1" => self.beta1 = parse(key, value)?,
            "beta2" => self.beta2 = parse(key, value)?,
            "eps" => self.eps = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "total_steps" => self.total_steps = parse(key, value)?,
            "warmup_steps" => self.warmup_steps = parse(key, value)?,
            "resample_every" => self.resample_every = parse_opt(key, value)?,
            "dead_window" => self.dead_window = parse(key, value)?,
            "resample_lr_factor" => self.resample_lr_factor = parse(key, value)?,
            "resample_warmup_steps" => self.resample_warmup_steps = parse(key, value)?,
            "unfreeze_decoder" => self.ablation.unfreeze_decoder = parse_bool(key, value)?,
            "no_rmag" => self.ablation.no_rmag = parse_bool(key, value)?,
            "untied_encoders" => self.ablation.untied_encoders = parse_bool(key, value)?,
            "normalize_recon_by_input_norm" => {
                self.normalize_recon_by_input_norm = parse_bool(key, value)?
            }
            "freeze_decoder" => self.freeze_decoder = parse_bool(key, value)?,
            "metrics_every" => self.metrics_every = parse_opt(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must lie in [0, 1)".into());
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.dead_window == 0 || self.resample_warmup_steps == 0 {
            return bad("dead_window and resample_warmup_steps must be positive".into());
        }
        if self.resample_every == Some(0) || self.metrics_every == Some(0) {
            return bad("resample_every and metrics_every must be positive when set".into());
        }
        if !(self.resample_lr_factor > 0.0 && self.resample_lr_factor <= 1.0) {
            return bad("resample_lr_factor must lie in (0, 1]".into());
        }
        Ok(())
    }

    /// Serializes every field as `key = value` lines, parseable by [`parse_kv`].
    pub fn to_kv(&self) -> String {
        let opt = |v: Option<usize>| v.map_or("none".to_string(), |v| v.to_string());
        let mut s = String::new();
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "lr = {}", self.lr);
        let _ = writeln!(s, "beta1 = {}", self.beta1);
        let _ = writeln!(s, "beta2 = {}", self.beta2);
        let _ = writeln!(s, "eps = {}", self.eps);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "total_steps = {}", self.total_steps);
        let _ = writeln!(s, "warmup_steps = {}", self.warmup_steps);
        let _ = writeln!(s, "resample_every = {}", opt(self.resample_every));
        let _ = writeln!(s, "dead_window = {}", self.dead_window);
        let _ = writeln!(s, "resample_lr_factor = {}", self.resample_lr_factor);
        let _ = writeln!(s, "resample_warmup_steps = {}", self.resample_warmup_steps);
        let _ = writeln!(s, "unfreeze_decoder = {}", self.ablation.unfreeze_decoder);
        let _ = writeln!(s, "no_rmag = {}", self.ablation.no_rmag);
        let _ = writeln!(s, "untied_encoders = {}", self.ablation.untied_encoders);
        let _ = writeln!(
            s,
            "normalize_recon_by_input_norm = {}",
            self.normalize_recon_by_input_norm
        );
        let _ = writeln!(s, "freeze_decoder = {}", self.freeze_decoder);
        let _ = writeln!(s, "metrics_every = {}", opt(self.metrics_every));
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
