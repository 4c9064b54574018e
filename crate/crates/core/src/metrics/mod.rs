//! Evaluation metrics.

mod host;
mod record;

pub use host::{
    loss_recovered, loss_recovered_from_ce, EvaluationHost, Splice, DEFAULT_CLASSES,
    DEFAULT_LOGIT_SCALE,
};
pub use record::{pareto_frontier, read_metrics_csv, write_metrics_csv, MetricsRecord, METRICS_HEADER};

use std::time::Instant;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::sae::{Autoencoder, Sae};
use crate::scalar::Scalar;

/// Mean count of strictly positive activations per example.
pub fn l0<T: Scalar>(features: &Matrix<T>) -> Result<f64> {
    if features.rows() == 0 {
        return Err(Error::Contract("l0 over an empty evaluation set".into()));
    }
    let active = features.as_slice().iter().filter(|&&v| v > T::zero()).count();
    Ok(active as f64 / features.rows() as f64)
}

/// Feature activations for every row of `inputs`.
pub fn encode_all<T: Scalar>(sae: &impl Autoencoder<T>, inputs: &Matrix<T>) -> Result<Matrix<T>> {
    let mut out = Matrix::zeros(inputs.rows(), sae.d_feat());
    for (r, x) in inputs.iter_rows().enumerate() {
        out.row_mut(r).copy_from_slice(&sae.encode(x)?.features);
    }
    Ok(out)
}

pub fn reconstruct_all<T: Scalar>(sae: &impl Autoencoder<T>, inputs: &Matrix<T>) -> Result<Matrix<T>> {
    let mut out = Matrix::zeros(inputs.rows(), sae.d_act());
    for (r, x) in inputs.iter_rows().enumerate() {
        out.row_mut(r).copy_from_slice(&sae.reconstruct(x)?);
    }
    Ok(out)
}

/// Mean of `‖x − x̂‖²` over paired rows.
pub fn mse_of<T: Scalar>(inputs: &Matrix<T>, recons: &Matrix<T>) -> Result<f64> {
    check_dim("mse: rows", inputs.rows(), recons.rows())?;
    check_dim("mse: cols", inputs.cols(), recons.cols())?;
    if inputs.rows() == 0 {
        return Err(Error::Contract("mse over an empty evaluation set".into()));
    }
    let total: f64 = inputs
        .iter_rows()
        .zip(recons.iter_rows())
        .map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a.f64() - b.f64()).powi(2)).sum::<f64>())
        .sum();
    Ok(total / inputs.rows() as f64)
}

pub fn mse<T: Scalar>(sae: &impl Autoencoder<T>, inputs: &Matrix<T>) -> Result<f64> {
    mse_of(inputs, &reconstruct_all(sae, inputs)?)
}

/// Relative reconstruction bias and the moments it is built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaReport {
    /// `E‖x̂‖² / E[x̂·x]`.
    pub gamma: f64,
    /// `2E‖x̂‖² / (E‖x̂‖² + E‖x‖² − E‖x̂ − x‖²)`.
    pub gamma_analytic: f64,
    pub mean_recon_sq: f64,
    pub mean_input_sq: f64,
    pub mean_error_sq: f64,
    pub mean_dot: f64,
}

/// Agreement demanded between the two expressions for γ.
pub const GAMMA_IDENTITY_RTOL: f64 = 1e-9;

/// `γ = argmin_γ' E‖x̂/γ' − x‖²`, computed two ways and cross-checked.
pub fn relative_bias_gamma<T: Scalar>(inputs: &Matrix<T>, recons: &Matrix<T>) -> Result<GammaReport> {
    check_dim("gamma: rows", inputs.rows(), recons.rows())?;
    check_dim("gamma: cols", inputs.cols(), recons.cols())?;
    let n = inputs.rows();
    if n == 0 {
        return Err(Error::Contract("gamma over an empty evaluation set".into()));
    }
    let (mut rr, mut xx, mut ee, mut rx) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in inputs.iter_rows().zip(recons.iter_rows()) {
        for (a, b) in x.iter().zip(y) {
            let (a, b) = (a.f64(), b.f64());
            rr += b * b;
            xx += a * a;
            ee += (b - a) * (b - a);
            rx += a * b;
        }
    }
    let nf = n as f64;
    let (rr, xx, ee, rx) = (rr / nf, xx / nf, ee / nf, rx / nf);
    if rx == 0.0 {
        return Err(Error::Degenerate("E[x̂·x] is zero; gamma undefined".into()));
    }
    let gamma = rr / rx;
    let gamma_analytic = 2.0 * rr / (rr + xx - ee);
    let scale = gamma.abs().max(gamma_analytic.abs()).max(f64::MIN_POSITIVE);
    if (gamma - gamma_analytic).abs() > GAMMA_IDENTITY_RTOL * scale {
        return Err(Error::Numerical(format!(
            "gamma expressions disagree: {gamma} vs {gamma_analytic}"
        )));
    }
    Ok(GammaReport {
        gamma,
        gamma_analytic,
        mean_recon_sq: rr,
        mean_input_sq: xx,
        mean_error_sq: ee,
        mean_dot: rx,
    })
}

pub fn relative_bias_gamma_sae<T: Scalar>(
    sae: &impl Autoencoder<T>,
    inputs: &Matrix<T>,
) -> Result<GammaReport> {
    relative_bias_gamma(inputs, &reconstruct_all(sae, inputs)?)
}

/// Greedy one-to-one matching of true directions to learned rows by
/// descending |cosine|; returns the mean matched |cosine|.
pub fn dict_recovery<T: Scalar>(learned: &Matrix<T>, truth: &Matrix<T>) -> Result<f64> {
    check_dim("dict_recovery: d_act", truth.cols(), learned.cols())?;
    if learned.rows() == 0 || truth.rows() == 0 {
        return Err(Error::Contract("dict_recovery needs nonempty dictionaries".into()));
    }
    let mut pairs = Vec::with_capacity(learned.rows() * truth.rows());
    for (i, t) in truth.iter_rows().enumerate() {
        let tn = norm(t).f64();
        for (j, l) in learned.iter_rows().enumerate() {
            let denom = tn * norm(l).f64();
            let cos = if denom > 0.0 { (dot(t, l).f64() / denom).abs() } else { 0.0 };
            pairs.push((cos, i, j));
        }
    }
    // Stable order on ties: lower indices first.
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_truth = vec![false; truth.rows()];
    let mut used_learned = vec![false; learned.rows()];
    let target = truth.rows().min(learned.rows());
    let (mut sum, mut matched) = (0.0, 0);
    for (cos, i, j) in pairs {
        if matched == target {
            break;
        }
        if !used_truth[i] && !used_learned[j] {
            used_truth[i] = true;
            used_learned[j] = true;
            sum += cos;
            matched += 1;
        }
    }
    Ok(sum / matched as f64)
}

/// Fraction of features silent on every step of the trailing `window`.
/// `history[t][i]` says whether feature `i` fired at step `t`.
pub fn dead_fraction(history: &[Vec<bool>], window: usize) -> Result<f64> {
    if window == 0 || history.len() < window {
        return Err(Error::Contract(format!(
            "dead_fraction needs {window} steps of history, have {}",
            history.len()
        )));
    }
    let recent = &history[history.len() - window..];
    let d_feat = recent[0].len();
    if d_feat == 0 {
        return Ok(0.0);
    }
    let dead = (0..d_feat)
        .filter(|&i| recent.iter().all(|step| !step[i]))
        .count();
    Ok(dead as f64 / d_feat as f64)
}

/// Held-out data plus everything needed to score an SAE on it.
#[derive(Clone, Debug)]
pub struct Evaluator<T> {
    pub eval_set: Matrix<T>,
    pub host: EvaluationHost<T>,
    /// Ground-truth directions, when the data is synthetic.
    pub truth: Option<Matrix<T>>,
    started: Instant,
}

impl<T: Scalar> Evaluator<T> {
    pub fn new(eval_set: Matrix<T>, host: EvaluationHost<T>, truth: Option<Matrix<T>>) -> Self {
        Self {
            eval_set,
            host,
            truth,
            started: Instant::now(),
        }
    }

    pub fn evaluate(
        &self,
        sae: &Sae<T>,
        step: usize,
        lambda: Option<f64>,
        dead_fraction: f64,
    ) -> Result<MetricsRecord> {
        let feats = encode_all(sae, &self.eval_set)?;
        let mut recons = Matrix::zeros(self.eval_set.rows(), sae.d_act());
        let dec = sae.decoder();
        for r in 0..feats.rows() {
            recons.row_mut(r).copy_from_slice(&dec.decode(feats.row(r))?);
        }
        self.record(&feats, &recons, sae.w_dec(), step, lambda, dead_fraction)
    }

    /// Scores precomputed activations and reconstructions.
    pub fn record(
        &self,
        features: &Matrix<T>,
        recons: &Matrix<T>,
        w_dec: &Matrix<T>,
        step: usize,
        lambda: Option<f64>,
        dead_fraction: f64,
    ) -> Result<MetricsRecord> {
        let gamma = match relative_bias_gamma(&self.eval_set, recons) {
            Ok(g) => g.gamma,
            Err(Error::Degenerate(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        Ok(MetricsRecord {
            step,
            lambda,
            l0: l0(features)?,
            mse: mse_of(&self.eval_set, recons)?,
            loss_recovered: loss_recovered(&self.host, &self.eval_set, Splice::Outputs(recons))?,
            gamma,
            dead_fraction,
            dict_recovery: self
                .truth
                .as_ref()
                .map(|t| dict_recovery(w_dec, t))
                .transpose()?,
            wallclock_s: self.started.elapsed().as_secs_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, unit_sphere};

    #[test]
    fn l0_cases() {
        let zeros = Matrix::<f64>::zeros(3, 4);
        assert_eq!(l0(&zeros).unwrap(), 0.0);
        let one_each = Matrix::from_rows(&[[0.0, 2.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(l0(&one_each).unwrap(), 1.0);
        let two_four = Matrix::from_rows(&[[1.0, 1.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0]]).unwrap();
        assert_eq!(l0(&two_four).unwrap(), 3.0);
        let scaled = two_four.map(|v| v * 7.5);
        assert_eq!(l0(&scaled).unwrap(), 3.0);
    }

    #[test]
    fn mse_cases() {
        let x = Matrix::from_rows(&[[1.0]]).unwrap();
        assert_eq!(mse_of(&x, &x).unwrap(), 0.0);
        let half = Matrix::from_rows(&[[0.5]]).unwrap();
        assert_eq!(mse_of(&x, &half).unwrap(), 0.25);
    }

    #[test]
    fn gamma_hand_cases() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [-3.0, 0.5]]).unwrap();
        assert!((relative_bias_gamma(&x, &x).unwrap().gamma - 1.0).abs() < 1e-15);
        let half = x.map(|v| 0.5 * v);
        assert!((relative_bias_gamma(&x, &half).unwrap().gamma - 0.5).abs() < 1e-15);
        let p = Matrix::from_rows(&[[1.0, 0.0]]).unwrap();
        let q = Matrix::from_rows(&[[0.5, 0.5]]).unwrap();
        assert!((relative_bias_gamma(&p, &q).unwrap().gamma - 1.0).abs() < 1e-15);
        let zero = Matrix::zeros(1, 2);
        assert!(matches!(relative_bias_gamma(&p, &zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn dict_recovery_perfect_and_orthogonal() {
        let truth = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 0.6, 0.8]]).unwrap();
        let shuffled = Matrix::from_rows(&[[0.0, -0.6, -0.8], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
        assert!((dict_recovery(&shuffled, &truth).unwrap() - 1.0).abs() < 1e-9);
        let t2 = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let orth = Matrix::from_rows(&[[0.0, 0.0, 1.0]]).unwrap();
        assert!(dict_recovery(&orth, &t2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dict_recovery_of_random_rows_is_low() {
        // Monte-Carlo reference: the expected best |cos| between a fixed unit
        // vector and ~64 random ones in 64 dimensions sits around 0.25, and
        // greedy matching of 8 truths can only do worse on average.
        let mut rng = substream(5, 0);
        let truth_rows: Vec<Vec<f64>> = (0..8).map(|_| unit_sphere(&mut rng, 64)).collect();
        let learned_rows: Vec<Vec<f64>> = (0..8).map(|_| unit_sphere(&mut rng, 64)).collect();
        let truth = Matrix::from_rows(&truth_rows).unwrap();
        let learned = Matrix::from_rows(&learned_rows).unwrap();
        assert!(dict_recovery(&learned, &truth).unwrap() < 0.3);
    }

    #[test]
    fn dead_fraction_cases() {
        let all = vec![vec![true, true]; 4];
        let none = vec![vec![false, false]; 4];
        let half = vec![vec![true, false]; 4];
        assert_eq!(dead_fraction(&all, 3).unwrap(), 0.0);
        assert_eq!(dead_fraction(&none, 3).unwrap(), 1.0);
        assert_eq!(dead_fraction(&half, 3).unwrap(), 0.5);
        assert!(dead_fraction(&half, 5).is_err());
    }
}
