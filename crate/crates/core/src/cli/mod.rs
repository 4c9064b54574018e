//! The `gdict` command line.

pub mod demos;
pub mod experiment;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{write_activations, Toy1dParams};
use crate::error::{Error, Result};
use crate::ito::{exhaustive_oracle, gradient_pursuit};
use crate::linalg::{sub, Matrix};
use crate::metrics::{
    pareto_frontier, write_metrics_csv, MetricsRecord, Splice, METRICS_HEADER,
};
use crate::sae::{load_checkpoint, save_checkpoint, ArchKind, Autoencoder, Sae};
use crate::training::{run, Architecture, Trainer};

pub use demos::{shrinkage_demo, toy1d_demo, ShrinkageConfig, ShrinkageReport, Toy1dReport};
pub use experiment::{parse_arch, prepare, sidecar_path, DataSpec, ExperimentConfig, Prepared};

/// Caps the sweep worker pool.
pub const THREADS_ENV: &str = "GDICT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gdict", version, about = "Baseline and gated sparse autoencoders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic activation file.
    GenData(GenDataArgs),
    /// Train one SAE.
    Train(ExperimentArgs),
    /// Train one SAE per (architecture, lambda) and extract Pareto frontiers.
    Sweep(SweepArgs),
    /// Score a checkpoint on held-out data.
    Eval(EvalArgs),
    /// Replace the encoder with sparse pursuit over the checkpoint's decoder.
    Ito(ItoArgs),
    /// One-dimensional shrinkage demonstration.
    DemoShrinkage(ShrinkageArgs),
    /// ReLU vs JumpReLU readouts on the 1-D mixture.
    DemoToy1d(Toy1dArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub d_act: usize,
    #[arg(long)]
    pub d_true: usize,
    #[arg(long)]
    pub rows: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub fire_prob: f64,
    #[arg(long, default_value_t = 0.01)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 0.5)]
    pub magnitude_low: f64,
    #[arg(long, default_value_t = 1.5)]
    pub magnitude_high: f64,
    #[arg(long, default_value_t = 0.0)]
    pub bias_scale: f64,
    #[arg(long, default_value_t = 8192)]
    pub chunk_rows: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Flags mirroring the configuration keys. Unset flags leave the file (or
/// default) value alone.
#[derive(Debug, Args, Default)]
pub struct ExperimentArgs {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub arch: Vec<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub total_steps: Option<usize>,
    #[arg(long)]
    pub warmup_steps: Option<usize>,
    /// Steps between resampling checks, or `none`.
    #[arg(long)]
    pub resample_every: Option<String>,
    #[arg(long)]
    pub dead_window: Option<usize>,
    #[arg(long)]
    pub resample_lr_factor: Option<f64>,
    #[arg(long)]
    pub resample_warmup_steps: Option<usize>,
    /// unfreeze-decoder, no-rmag or untied-encoders; repeatable.
    #[arg(long)]
    pub ablation: Vec<String>,
    #[arg(long)]
    pub normalize_recon_by_input_norm: Option<bool>,
    #[arg(long)]
    pub freeze_decoder: Option<bool>,
    #[arg(long, alias = "eval-every")]
    pub metrics_every: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub d_feat: Option<usize>,
    /// GDAC activation file; without it data is generated.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub d_act: Option<usize>,
    #[arg(long)]
    pub d_true: Option<usize>,
    #[arg(long)]
    pub fire_prob: Option<f64>,
    #[arg(long)]
    pub noise_std: Option<f64>,
    #[arg(long)]
    pub data_seed: Option<u64>,
    #[arg(long)]
    pub eval_rows: Option<usize>,
    #[arg(long)]
    pub host_seed: Option<u64>,
    #[arg(long)]
    pub host_classes: Option<usize>,
    #[arg(long)]
    pub host_logit_scale: Option<f64>,
    #[arg(long)]
    pub checkpoint_every: Option<String>,
    #[arg(long)]
    pub shuffle_buffer: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! push_flags {
    ($out:ident, $args:ident; $($field:ident),* $(,)?) => {
        $(
            if let Some(v) = &$args.$field {
                $out.push((stringify!($field).to_string(), v.to_string()));
            }
        )*
    };
}

impl ExperimentArgs {
    fn assignments(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if !self.arch.is_empty() {
            out.push(("arch".into(), self.arch.join(",")));
        }
        push_flags!(out, self;
            lambda, lr, beta1, beta2, eps, batch_size, total_steps, warmup_steps,
            resample_every, dead_window, resample_lr_factor, resample_warmup_steps,
            normalize_recon_by_input_norm, freeze_decoder, metrics_every, seed, d_feat,
            d_act, d_true, fire_prob, noise_std, data_seed, eval_rows, host_seed,
            host_classes, host_logit_scale, checkpoint_every, shuffle_buffer,
        );
        if let Some(p) = &self.data {
            out.push(("data".into(), p.display().to_string()));
        }
        if let Some(p) = &self.out {
            out.push(("out".into(), p.display().to_string()));
        }
        for a in &self.ablation {
            out.push(("ablation".into(), a.clone()));
        }
        out
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (k, v) in self.assignments() {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// L1 coefficients to sweep.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    /// Worker threads; `GDICT_THREADS` caps it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpliceArg {
    Sae,
    Identity,
    Zero,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, value_enum, default_value_t = SpliceArg::Sae)]
    pub splice: SpliceArg,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Debug, Args)]
pub struct ItoArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long = "target-k", value_delimiter = ',', required = true)]
    pub target_k: Vec<usize>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub nonneg: bool,
    /// Exhaustive search instead of pursuit; small dictionaries only.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Debug, Args)]
pub struct ShrinkageArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Toy1dArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub p_on: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Contract(_) | Error::Dimension { .. } | Error::Guard(_) => 2,
        Error::Numerical(_) | Error::Degenerate(_) | Error::Resample(_) => 3,
        Error::Io { .. } | Error::Format { .. } => 4,
    }
}

pub fn run_cli(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData(a) => cmd_gen_data(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Ito(a) => cmd_ito(&a),
        Command::DemoShrinkage(a) => cmd_demo_shrinkage(&a),
        Command::DemoToy1d(a) => cmd_demo_toy1d(&a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn cmd_gen_data(a: &GenDataArgs) -> Result<()> {
    let spec = DataSpec {
        path: None,
        d_act: a.d_act,
        d_true: a.d_true,
        fire_prob: a.fire_prob,
        noise_std: a.noise_std,
        magnitude_low: a.magnitude_low,
        magnitude_high: a.magnitude_high,
        bias_scale: a.bias_scale,
        data_seed: a.seed,
    };
    let model = spec.model()?;
    let chunk = a.chunk_rows.max(1) as u64;
    let mut batches = Vec::new();
    let mut done = 0u64;
    let mut index = 0u64;
    while done < a.rows {
        let n = chunk.min(a.rows - done);
        batches.push(model.sample_indexed(n as usize, index).data.cast::<f32>());
        done += n;
        index += 1;
    }
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_activations(&a.out, a.d_act, &batches)?;
    let side = format!(
        "# generator settings for {}\nrows = {}\nseed = {}\nd_act = {}\nd_true = {}\nfire_prob = {}\nnoise_std = {}\nmagnitude_low = {}\nmagnitude_high = {}\nbias_scale = {}\nchunk_rows = {}\n",
        a.out.display(),
        a.rows,
        a.seed,
        a.d_act,
        a.d_true,
        a.fire_prob,
        a.noise_std,
        a.magnitude_low,
        a.magnitude_high,
        a.bias_scale,
        a.chunk_rows,
    );
    write_file(&sidecar_path(&a.out), side)?;
    eprintln!("wrote {} rows × {} to {}", a.rows, a.d_act, a.out.display());
    Ok(())
}

/// Outcome of one training job.
#[derive(Clone, Debug)]
pub struct JobResult {
    pub arch: ArchKind,
    pub d_feat: usize,
    pub lambda: f64,
    pub params: Sae<f64>,
    pub metrics: Vec<MetricsRecord>,
}

/// Trains one model as configured and writes its outputs under `dir`.
pub fn train_job(cfg: &ExperimentConfig, arch: ArchKind, d_feat: usize, dir: &Path) -> Result<JobResult> {
    create_dir(dir)?;
    write_file(&dir.join("config.txt"), cfg.to_kv())?;
    let mut prepared = prepare(cfg)?;
    let trainer = Trainer::new(
        Architecture {
            kind: arch,
            d_act: prepared.d_act,
            d_feat,
        },
        &cfg.train,
    )?;
    let every = cfg.checkpoint_every;
    let out = run(trainer, &mut prepared.source, Some(&prepared.evaluator), |t| {
        if let Some(e) = every {
            let step = t.state.step;
            if step % e == 0 {
                save_checkpoint(dir.join(format!("checkpoint_{step:08}.gsae")), &t.params)?;
            }
        }
        Ok(())
    })?;
    save_checkpoint(dir.join("final.gsae"), &out.params)?;
    write_metrics_csv(&dir.join("metrics.csv"), &out.metrics)?;
    Ok(JobResult {
        arch,
        d_feat,
        lambda: cfg.train.lambda,
        params: out.params,
        metrics: out.metrics,
    })
}

fn cmd_train(a: &ExperimentArgs) -> Result<()> {
    let cfg = a.resolve()?;
    if cfg.archs.len() != 1 {
        return Err(Error::Config("train takes exactly one --arch".into()));
    }
    let res = train_job(&cfg, cfg.archs[0], cfg.d_feat, &cfg.out)?;
    if let Some(m) = res.metrics.last() {
        println!("{METRICS_HEADER}");
        println!("{}", record_line(m));
    }
    Ok(())
}

fn record_line(m: &MetricsRecord) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.serialize(m).expect("in-memory csv");
    let bytes = w.into_inner().expect("in-memory csv");
    String::from_utf8_lossy(&bytes).trim_end().to_string()
}

/// Feature count for `arch` in a sweep: when both families are present the
/// baseline gets half again as many features as the gated model.
pub fn sweep_width(archs: &[ArchKind], arch: ArchKind, d_feat: usize) -> usize {
    let has_gated = archs.iter().any(|&a| a != ArchKind::Baseline);
    if arch == ArchKind::Baseline && has_gated && archs.contains(&ArchKind::Baseline) {
        (3 * d_feat).div_ceil(2)
    } else {
        d_feat
    }
}

/// Worker count: the flag (or all cores), capped by `GDICT_THREADS`.
pub fn worker_count(flag: Option<usize>) -> usize {
    let base = flag.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0);
    cap.map_or(base, |c| base.min(c)).max(1)
}

fn lambda_tag(l: f64) -> String {
    format!("{l:e}").replace('-', "m")
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let mut cfg = a.experiment.resolve()?;
    if !a.lambdas.is_empty() {
        cfg.lambdas = a.lambdas.clone();
        cfg.validate()?;
    }
    if cfg.lambdas.len() < 2 {
        return Err(Error::Config("a sweep needs at least two lambda values".into()));
    }
    create_dir(&cfg.out)?;
    write_file(&cfg.out.join("config.txt"), cfg.to_kv())?;

    let jobs: Vec<(ArchKind, f64)> = cfg
        .archs
        .iter()
        .flat_map(|&arch| cfg.lambdas.iter().map(move |&l| (arch, l)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(a.threads))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<JobResult>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(arch, lambda)| {
                let mut job_cfg = cfg.clone();
                job_cfg.train.lambda = lambda;
                let width = sweep_width(&cfg.archs, arch, cfg.d_feat);
                let dir = cfg.out.join(format!("{}_lambda_{}", arch.name(), lambda_tag(lambda)));
                job_cfg.out = dir.clone();
                train_job(&job_cfg, arch, width, &dir)
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut first_error: Option<Error> = None;
    let mut finals: Vec<(ArchKind, MetricsRecord)> = Vec::new();
    for ((arch, lambda), r) in jobs.iter().zip(results) {
        match r {
            Ok(job) => {
                if let Some(m) = job.metrics.last() {
                    finals.push((*arch, m.clone()));
                }
            }
            Err(e) => {
                failures.push(format!("{} lambda={lambda}: {e}", arch.name()));
                first_error.get_or_insert(e);
            }
        }
    }
    for &arch in &cfg.archs {
        let rows: Vec<MetricsRecord> = finals
            .iter()
            .filter(|(a, _)| *a == arch)
            .map(|(_, m)| m.clone())
            .collect();
        write_metrics_csv(&cfg.out.join(format!("sweep_{}.csv", arch.name())), &rows)?;
        if !rows.is_empty() {
            let front = pareto_frontier(&rows);
            write_metrics_csv(&cfg.out.join(format!("pareto_{}.csv", arch.name())), &front)?;
        }
    }
    if !failures.is_empty() {
        write_file(&cfg.out.join("failures.txt"), failures.join("\n") + "\n")?;
        for f in &failures {
            eprintln!("run failed: {f}");
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn load_model(path: &Path) -> Result<Sae<f64>> {
    if !path.exists() {
        return Err(Error::Config(format!("checkpoint {} not found", path.display())));
    }
    load_checkpoint(path)
}

/// Resolves data settings for scoring a checkpoint: a file's sidecar fills
/// in the generator, and `d_act` follows the checkpoint.
fn eval_config(a: &ExperimentArgs, sae: &Sae<f64>) -> Result<ExperimentConfig> {
    let mut cfg = a.resolve()?;
    if let Some(path) = cfg.data.path.clone() {
        if let Some(spec) = DataSpec::from_sidecar(&path)? {
            cfg.data = spec;
        }
    } else if a.d_act.is_none() {
        cfg.data.d_act = sae.d_act();
    }
    Ok(cfg)
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let sae = load_model(&a.checkpoint)?;
    let cfg = eval_config(&a.experiment, &sae)?;
    let prepared = prepare(&cfg)?;
    let ev = &prepared.evaluator;
    let mut record = ev.evaluate(&sae, 0, None, f64::NAN)?;
    record.dead_fraction = eval_dead_fraction(&crate::metrics::encode_all(&sae, &ev.eval_set)?);
    match a.splice {
        SpliceArg::Sae => {}
        SpliceArg::Identity => {
            record.loss_recovered = crate::metrics::loss_recovered(&ev.host, &ev.eval_set, Splice::Identity)?
        }
        SpliceArg::Zero => {
            record.loss_recovered = crate::metrics::loss_recovered(&ev.host, &ev.eval_set, Splice::Zero)?
        }
    }
    println!("{METRICS_HEADER}");
    println!("{}", record_line(&record));
    if a.experiment.out.is_some() {
        create_dir(&cfg.out)?;
        write_metrics_csv(&cfg.out.join("eval.csv"), std::slice::from_ref(&record))?;
    }
    Ok(())
}

/// Fraction of features that never fire anywhere in the evaluation set.
fn eval_dead_fraction(features: &Matrix<f64>) -> f64 {
    let d = features.cols();
    if d == 0 {
        return 0.0;
    }
    let dead = (0..d)
        .filter(|&j| features.iter_rows().all(|r| r[j] <= 0.0))
        .count();
    dead as f64 / d as f64
}

#[derive(Debug, Serialize)]
struct ItoRow {
    target_k: usize,
    step: usize,
    lambda: Option<f64>,
    l0: f64,
    mse: f64,
    loss_recovered: f64,
    gamma: f64,
    dead_fraction: f64,
    dict_recovery: Option<f64>,
    wallclock_s: f64,
}

/// Sorted, deduplicated budgets plus the duplicates that were dropped.
pub fn normalize_target_ks(ks: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut sorted = ks.to_vec();
    sorted.sort_unstable();
    let mut dupes = Vec::new();
    let mut out: Vec<usize> = Vec::with_capacity(sorted.len());
    for k in sorted {
        if out.last() == Some(&k) {
            dupes.push(k);
        } else {
            out.push(k);
        }
    }
    (out, dupes)
}

fn cmd_ito(a: &ItoArgs) -> Result<()> {
    let sae = load_model(&a.checkpoint)?;
    let cfg = eval_config(&a.experiment, &sae)?;
    let prepared = prepare(&cfg)?;
    let ev = &prepared.evaluator;
    let (ks, dupes) = normalize_target_ks(&a.target_k);
    if !dupes.is_empty() {
        eprintln!("warning: duplicate target-k values ignored: {dupes:?}");
    }
    let dec = sae.decoder();
    let mut rows = Vec::new();
    for &k in &ks {
        let coded: Vec<Result<Vec<f64>>> = (0..ev.eval_set.rows())
            .into_par_iter()
            .map(|r| {
                let centered = sub(ev.eval_set.row(r), dec.b_dec);
                let res = if a.oracle {
                    exhaustive_oracle(dec.w_dec, &centered, k, a.nonneg)?
                } else {
                    gradient_pursuit(dec.w_dec, &centered, k, a.nonneg)?
                };
                Ok(res.coeffs)
            })
            .collect();
        let mut codes = Matrix::zeros(ev.eval_set.rows(), dec.d_feat());
        let mut recons = Matrix::zeros(ev.eval_set.rows(), dec.d_act());
        for (r, c) in coded.into_iter().enumerate() {
            let c = c?;
            recons.row_mut(r).copy_from_slice(&dec.decode(&c)?);
            codes.row_mut(r).copy_from_slice(&c);
        }
        let m = ev.record(&codes, &recons, dec.w_dec, 0, None, eval_dead_fraction(&codes))?;
        rows.push(ItoRow {
            target_k: k,
            step: m.step,
            lambda: m.lambda,
            l0: m.l0,
            mse: m.mse,
            loss_recovered: m.loss_recovered,
            gamma: m.gamma,
            dead_fraction: m.dead_fraction,
            dict_recovery: m.dict_recovery,
            wallclock_s: m.wallclock_s,
        });
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).expect("in-memory csv");
    }
    let body = String::from_utf8_lossy(&w.into_inner().expect("in-memory csv")).into_owned();
    let text = format!("target_k,{METRICS_HEADER}\n{body}");
    print!("{text}");
    if a.experiment.out.is_some() {
        create_dir(&cfg.out)?;
        write_file(&cfg.out.join("ito.csv"), text)?;
    }
    Ok(())
}

fn cmd_demo_shrinkage(a: &ShrinkageArgs) -> Result<()> {
    let report = shrinkage_demo(&ShrinkageConfig {
        lambda: a.lambda,
        steps: a.steps,
        lr: a.lr,
        rescale_steps: a.steps,
        rescale_lr: a.lr,
    })?;
    println!("reconstruction of x = 1 with lambda = {}:", a.lambda);
    println!("  baseline               {:.6} (feature {:.6})", report.baseline_reconstruction, report.baseline_activation);
    println!("  baseline+rescale-shift {:.6}", report.rescaled_reconstruction);
    println!("  gated                  {:.6} (feature {:.6})", report.gated_reconstruction, report.gated_activation);
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write_file(&dir.join("shrinkage.csv"), report.to_csv())?;
    }
    Ok(())
}

fn cmd_demo_toy1d(a: &Toy1dArgs) -> Result<()> {
    let params = Toy1dParams {
        p_on: a.p_on,
        ..Toy1dParams::default()
    };
    let report = toy1d_demo(a.samples, params, a.seed)?;
    println!("on-samples above 1: {} of {}", report.above_threshold, report.samples);
    println!("  ReLU(t=1, m=2)          mse {:.6}", report.relu_mse);
    println!("  JumpReLU(t=1, m=1, d=0) mse {:.6}", report.jump_relu_mse);
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write_file(&dir.join("toy1d.csv"), report.to_csv())?;
    }
    Ok(())
}
