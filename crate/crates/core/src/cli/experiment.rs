//! Experiment configuration and the data/evaluation plumbing shared by the
//! subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::data::{
    gen_ground_truth, read_all_activations, ActivationSource, GroundTruthModel, MagnitudeDist,
    MatrixSource, SyntheticSource,
};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::{EvaluationHost, Evaluator, DEFAULT_CLASSES, DEFAULT_LOGIT_SCALE};
use crate::sae::ArchKind;
use crate::training::{parse_kv, TrainConfig};

pub fn parse_arch(s: &str) -> Result<ArchKind> {
    match s.trim().replace('_', "-").as_str() {
        "baseline" => Ok(ArchKind::Baseline),
        "gated" => Ok(ArchKind::Gated),
        "gated-untied" => Ok(ArchKind::GatedUntied),
        other => Err(Error::Config(format!(
            "unknown architecture `{other}` (expected baseline, gated or gated-untied)"
        ))),
    }
}

/// Where activations come from: a generator, or a GDAC file.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSpec {
    pub path: Option<PathBuf>,
    pub d_act: usize,
    pub d_true: usize,
    pub fire_prob: f64,
    pub noise_std: f64,
    pub magnitude_low: f64,
    pub magnitude_high: f64,
    pub bias_scale: f64,
    pub data_seed: u64,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            path: None,
            d_act: 16,
            d_true: 32,
            fire_prob: 0.05,
            noise_std: 0.01,
            magnitude_low: 0.5,
            magnitude_high: 1.5,
            bias_scale: 0.0,
            data_seed: 0,
        }
    }
}

impl DataSpec {
    pub fn model(&self) -> Result<GroundTruthModel<f64>> {
        let dist = if self.magnitude_low == self.magnitude_high {
            MagnitudeDist::Constant(self.magnitude_low)
        } else {
            MagnitudeDist::Uniform {
                low: self.magnitude_low,
                high: self.magnitude_high,
            }
        };
        let model = gen_ground_truth(
            self.d_act,
            self.d_true,
            self.fire_prob,
            dist,
            self.noise_std,
            self.data_seed,
        )?;
        Ok(if self.bias_scale > 0.0 {
            model.with_random_bias(self.bias_scale)
        } else {
            model
        })
    }

    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "data" => self.path = (value != "none" && !value.is_empty()).then(|| PathBuf::from(value)),
            "d_act" => self.d_act = parse(key, value)?,
            "d_true" => self.d_true = parse(key, value)?,
            "fire_prob" => self.fire_prob = parse(key, value)?,
            "noise_std" => self.noise_std = parse(key, value)?,
            "magnitude_low" => self.magnitude_low = parse(key, value)?,
            "magnitude_high" => self.magnitude_high = parse(key, value)?,
            "bias_scale" => self.bias_scale = parse(key, value)?,
            "data_seed" => self.data_seed = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn to_kv(&self, s: &mut String) {
        let path = self.path.as_ref().map_or("none".into(), |p| p.display().to_string());
        let _ = writeln!(s, "data = {path}");
        let _ = writeln!(s, "d_act = {}", self.d_act);
        let _ = writeln!(s, "d_true = {}", self.d_true);
        let _ = writeln!(s, "fire_prob = {}", self.fire_prob);
        let _ = writeln!(s, "noise_std = {}", self.noise_std);
        let _ = writeln!(s, "magnitude_low = {}", self.magnitude_low);
        let _ = writeln!(s, "magnitude_high = {}", self.magnitude_high);
        let _ = writeln!(s, "bias_scale = {}", self.bias_scale);
        let _ = writeln!(s, "data_seed = {}", self.data_seed);
    }

    /// Reads the generator sidecar written next to a GDAC file, if any.
    pub fn from_sidecar(path: &Path) -> Result<Option<Self>> {
        let side = sidecar_path(path);
        let text = match fs::read_to_string(&side) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&side, e)),
        };
        let mut spec = DataSpec {
            path: Some(path.to_path_buf()),
            ..DataSpec::default()
        };
        for (k, v) in parse_kv(&text)? {
            if k == "rows" || k == "seed" {
                if k == "seed" {
                    spec.data_seed = parse(&k, &v)?;
                }
                continue;
            }
            spec.set(&k, &v)?;
        }
        Ok(Some(spec))
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

/// Everything a train, sweep, eval or ito run is parameterized by.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub archs: Vec<ArchKind>,
    pub d_feat: usize,
    pub data: DataSpec,
    pub eval_rows: usize,
    pub host_seed: u64,
    pub host_classes: usize,
    pub host_logit_scale: f64,
    pub checkpoint_every: Option<usize>,
    pub shuffle_buffer: usize,
    pub lambdas: Vec<f64>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            archs: vec![ArchKind::Gated],
            d_feat: 48,
            data: DataSpec::default(),
            eval_rows: 4096,
            host_seed: 0,
            host_classes: DEFAULT_CLASSES,
            host_logit_scale: DEFAULT_LOGIT_SCALE,
            checkpoint_every: None,
            shuffle_buffer: 65_536,
            lambdas: Vec::new(),
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        if key == "eval_every" {
            return self.set("metrics_every", value);
        }
        if key == "ablation" {
            return self.train.ablation.enable(value);
        }
        if self.train.set(&key, value)? || self.data.set(&key, value)? {
            return Ok(());
        }
        match key.as_str() {
            "arch" => {
                self.archs = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(parse_arch)
                    .collect::<Result<_>>()?
            }
            "d_feat" => self.d_feat = parse(&key, value)?,
            "eval_rows" => self.eval_rows = parse(&key, value)?,
            "host_seed" => self.host_seed = parse(&key, value)?,
            "host_classes" => self.host_classes = parse(&key, value)?,
            "host_logit_scale" => self.host_logit_scale = parse(&key, value)?,
            "checkpoint_every" => {
                self.checkpoint_every = match value.trim() {
                    "none" | "" => None,
                    v => Some(parse(&key, v)?),
                }
            }
            "shuffle_buffer" => self.shuffle_buffer = parse(&key, value)?,
            "lambdas" => {
                self.lambdas = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|v| parse(&key, v))
                    .collect::<Result<_>>()?
            }
            "out" => self.out = PathBuf::from(value.trim()),
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                Error::Config(format!("config file {} not found", path.display()))
            }
            _ => Error::io(path, e),
        })?;
        for (k, v) in parse_kv(&text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.archs.is_empty() {
            return Err(Error::Config("no architecture selected".into()));
        }
        if self.d_feat == 0 || self.eval_rows == 0 {
            return Err(Error::Config("d_feat and eval_rows must be positive".into()));
        }
        if self.checkpoint_every == Some(0) {
            return Err(Error::Config("checkpoint_every must be positive when set".into()));
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("sweep lambda {l} must be positive")));
            }
            if self.lambdas[..i].contains(&l) {
                return Err(Error::Config(format!("sweep lambda {l} listed twice")));
            }
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        let mut s = self.train.to_kv();
        let archs: Vec<&str> = self.archs.iter().map(|a| a.name()).collect();
        let _ = writeln!(s, "arch = {}", archs.join(","));
        let _ = writeln!(s, "d_feat = {}", self.d_feat);
        self.data.to_kv(&mut s);
        let _ = writeln!(s, "eval_rows = {}", self.eval_rows);
        let _ = writeln!(s, "host_seed = {}", self.host_seed);
        let _ = writeln!(s, "host_classes = {}", self.host_classes);
        let _ = writeln!(s, "host_logit_scale = {}", self.host_logit_scale);
        let ck = self.checkpoint_every.map_or("none".into(), |v| v.to_string());
        let _ = writeln!(s, "checkpoint_every = {ck}");
        let _ = writeln!(s, "shuffle_buffer = {}", self.shuffle_buffer);
        let lambdas: Vec<String> = self.lambdas.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(s, "lambdas = {}", lambdas.join(","));
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }
}

/// Training batches from either a generator or a file.
pub enum DataSource {
    Synthetic(SyntheticSource<f64>),
    File(MatrixSource<f64>),
}

impl ActivationSource<f64> for DataSource {
    fn d_act(&self) -> usize {
        match self {
            DataSource::Synthetic(s) => s.d_act(),
            DataSource::File(s) => s.d_act(),
        }
    }

    fn next_batch(&mut self, rows: usize) -> Result<Matrix<f64>> {
        match self {
            DataSource::Synthetic(s) => s.next_batch(rows),
            DataSource::File(s) => s.next_batch(rows),
        }
    }
}

/// Training stream plus held-out evaluation data.
pub struct Prepared {
    pub source: DataSource,
    pub evaluator: Evaluator<f64>,
    pub d_act: usize,
}

fn load_file(path: &Path) -> Result<Matrix<f64>> {
    if !path.exists() {
        return Err(Error::Config(format!("activation file {} not found", path.display())));
    }
    read_all_activations(path)
}

/// Splits a file into training rows and a trailing held-out block, or sets
/// up a generator with a disjoint evaluation stream.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let (source, eval_set, truth) = match &cfg.data.path {
        None => {
            let model = cfg.data.model()?;
            let eval = model.sample_eval(cfg.eval_rows).data;
            let truth = model.directions.clone();
            (DataSource::Synthetic(SyntheticSource::new(model)), eval, Some(truth))
        }
        Some(path) => {
            let all = load_file(path)?;
            if all.rows() <= cfg.eval_rows {
                return Err(Error::Config(format!(
                    "{} has {} rows; need more than eval_rows = {}",
                    path.display(),
                    all.rows(),
                    cfg.eval_rows
                )));
            }
            let split = all.rows() - cfg.eval_rows;
            let d = all.cols();
            let train = Matrix::from_vec(split, d, all.as_slice()[..split * d].to_vec())?;
            let eval = Matrix::from_vec(cfg.eval_rows, d, all.as_slice()[split * d..].to_vec())?;
            let truth = match DataSpec::from_sidecar(path)? {
                Some(spec) if spec.d_act == d => Some(spec.model()?.directions),
                _ => None,
            };
            let src = MatrixSource::new(train, cfg.shuffle_buffer, cfg.train.seed)?;
            (DataSource::File(src), eval, truth)
        }
    };
    let d_act = eval_set.cols();
    let host = EvaluationHost::new(
        &eval_set,
        cfg.host_classes,
        cfg.host_logit_scale,
        1.0,
        cfg.host_seed,
    )?;
    Ok(Prepared {
        source,
        evaluator: Evaluator::new(eval_set, host, truth),
        d_act,
    })
}
