//! Independent reference losses and a finite-difference gradient oracle.
//!
//! Nothing here calls the crate's loss or gradient code; the references are
//! written straight from the loss definitions.

#![allow(dead_code)]

use gated_dict::linalg::Matrix;
use gated_dict::rng::{standard_normal, substream, Rng};
use gated_dict::sae::{BaselineSae, GatedSae, ParamTensors, Sae};
use gated_dict::training::GradientSet;

pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize, scale: f64) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| scale * standard_normal::<f64>(rng)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn gaussian_vec(rng: &mut Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * standard_normal::<f64>(rng)).collect()
}

pub fn random_baseline(seed: u64, d_act: usize, d_feat: usize) -> BaselineSae<f64> {
    let mut rng = substream(seed, 100);
    BaselineSae {
        w_enc: gaussian_matrix(&mut rng, d_feat, d_act, 1.0),
        b_enc: gaussian_vec(&mut rng, d_feat, 0.3),
        w_dec: gaussian_matrix(&mut rng, d_feat, d_act, 1.0),
        b_dec: gaussian_vec(&mut rng, d_act, 0.3),
    }
}

pub fn random_gated(seed: u64, d_act: usize, d_feat: usize, untied: bool) -> GatedSae<f64> {
    let mut rng = substream(seed, 101);
    let w_gate = gaussian_matrix(&mut rng, d_feat, d_act, 1.0);
    let b_gate = gaussian_vec(&mut rng, d_feat, 0.3);
    let r_mag = if untied { vec![0.0; d_feat] } else { gaussian_vec(&mut rng, d_feat, 0.3) };
    let b_mag = gaussian_vec(&mut rng, d_feat, 0.3);
    let w_dec = gaussian_matrix(&mut rng, d_feat, d_act, 1.0);
    let b_dec = gaussian_vec(&mut rng, d_act, 0.3);
    let w_mag_untied = untied.then(|| gaussian_matrix(&mut rng, d_feat, d_act, 1.0));
    GatedSae { w_gate, b_gate, r_mag, b_mag, w_dec, b_dec, w_mag_untied }
}

pub fn random_batch(seed: u64, rows: usize, d_act: usize) -> Matrix<f64> {
    gaussian_matrix(&mut substream(seed, 102), rows, d_act, 1.0)
}

fn row_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relu(v: f64) -> f64 {
    if v > 0.0 { v } else { 0.0 }
}

/// `mean(‖x − x̂‖² + λ‖f‖₁)` for the baseline.
pub fn ref_baseline_loss(s: &BaselineSae<f64>, batch: &Matrix<f64>, lambda: f64) -> f64 {
    let (d_feat, d_act) = (s.w_dec.rows(), s.w_dec.cols());
    let mut total = 0.0;
    for x in batch.iter_rows() {
        let c: Vec<f64> = (0..d_act).map(|j| x[j] - s.b_dec[j]).collect();
        let f: Vec<f64> = (0..d_feat).map(|i| relu(row_dot(s.w_enc.row(i), &c) + s.b_enc[i])).collect();
        let mut err = 0.0;
        for j in 0..d_act {
            let xh = s.b_dec[j] + (0..d_feat).map(|i| f[i] * s.w_dec.get(i, j)).sum::<f64>();
            err += (x[j] - xh).powi(2);
        }
        total += err + lambda * f.iter().sum::<f64>();
    }
    total / batch.rows() as f64
}

/// Gated loss terms `(recon, sparsity, aux)`. The auxiliary term reads
/// the decoder (and its centering bias) from `frozen`, so perturbing the
/// live parameters leaves that dependence out.
pub fn ref_gated_terms(
    s: &GatedSae<f64>,
    frozen: (&Matrix<f64>, &[f64]),
    batch: &Matrix<f64>,
    lambda: f64,
) -> (f64, f64, f64) {
    let (d_feat, d_act) = (s.w_dec.rows(), s.w_dec.cols());
    let (fw, fb) = frozen;
    let w_mag: Vec<Vec<f64>> = (0..d_feat)
        .map(|i| match &s.w_mag_untied {
            Some(w) => w.row(i).to_vec(),
            None => s.w_gate.row(i).iter().map(|v| v * s.r_mag[i].exp()).collect(),
        })
        .collect();
    let (mut recon, mut sparsity, mut aux) = (0.0, 0.0, 0.0);
    for x in batch.iter_rows() {
        let c: Vec<f64> = (0..d_act).map(|j| x[j] - s.b_dec[j]).collect();
        let cf: Vec<f64> = (0..d_act).map(|j| x[j] - fb[j]).collect();
        let mut xh = s.b_dec.clone();
        let mut xa = fb.to_vec();
        for i in 0..d_feat {
            let pi = row_dot(s.w_gate.row(i), &c) + s.b_gate[i];
            let pi_f = row_dot(s.w_gate.row(i), &cf) + s.b_gate[i];
            let mag = relu(row_dot(&w_mag[i], &c) + s.b_mag[i]);
            let f = if pi > 0.0 { mag } else { 0.0 };
            for j in 0..d_act {
                xh[j] += f * s.w_dec.get(i, j);
                xa[j] += relu(pi_f) * fw.get(i, j);
            }
            sparsity += lambda * relu(pi);
        }
        recon += (0..d_act).map(|j| (x[j] - xh[j]).powi(2)).sum::<f64>();
        aux += (0..d_act).map(|j| (x[j] - xa[j]).powi(2)).sum::<f64>();
    }
    let n = batch.rows() as f64;
    (recon / n, sparsity / n, aux / n)
}

/// Sign pattern of every kinked quantity; a coordinate whose ±10h nudge
/// changes it is too close to a kink for central differences.
pub fn kink_pattern(sae: &Sae<f64>, batch: &Matrix<f64>) -> Vec<bool> {
    let mut out = Vec::new();
    for x in batch.iter_rows() {
        match sae {
            Sae::Baseline(s) => {
                let pre = s.pre_activations(x).unwrap();
                out.extend(pre.iter().map(|&p| p > 0.0));
            }
            Sae::Gated(s) => {
                let c: Vec<f64> = x.iter().zip(&s.b_dec).map(|(a, b)| a - b).collect();
                let w_mag = s.w_mag();
                for i in 0..s.w_gate.rows() {
                    out.push(row_dot(s.w_gate.row(i), &c) + s.b_gate[i] > 0.0);
                    out.push(row_dot(w_mag.row(i), &c) + s.b_mag[i] > 0.0);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default)]
pub struct FdReport {
    pub max_rel_err: f64,
    pub checked: usize,
    pub skipped: usize,
    pub worst: String,
}

/// Central differences on every coordinate of `params` except tensors in
/// `skip_tensors`, compared with `analytic`.
pub fn fd_check(
    params: &Sae<f64>,
    analytic: &GradientSet<f64>,
    batch: &Matrix<f64>,
    skip_tensors: &[&str],
    h: f64,
    loss: impl Fn(&Sae<f64>) -> f64,
) -> FdReport {
    let base_pattern = kink_pattern(params, batch);
    let grads: Vec<(&str, Vec<f64>)> = analytic
        .0
        .tensors()
        .into_iter()
        .map(|(n, t)| (n, t.to_vec()))
        .collect();
    let mut report = FdReport::default();
    for (t_idx, (name, g)) in grads.iter().enumerate() {
        if skip_tensors.contains(name) {
            continue;
        }
        for k in 0..g.len() {
            let nudged = |delta: f64| {
                let mut p = params.clone();
                p.tensors_mut()[t_idx].1[k] += delta;
                p
            };
            if kink_pattern(&nudged(10.0 * h), batch) != base_pattern
                || kink_pattern(&nudged(-10.0 * h), batch) != base_pattern
            {
                report.skipped += 1;
                continue;
            }
            let numeric = (loss(&nudged(h)) - loss(&nudged(-h))) / (2.0 * h);
            let a = g[k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            report.checked += 1;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst = format!("{name}[{k}]: analytic {a:e}, numeric {numeric:e}");
            }
        }
    }
    report
}
