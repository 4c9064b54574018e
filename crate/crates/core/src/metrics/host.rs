//! Synthetic downstream model used to score spliced reconstructions.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{norm_sq, Matrix};
use crate::rng::{standard_normal, stream, substream};
use crate::scalar::Scalar;

pub const DEFAULT_CLASSES: usize = 32;
/// Typical logit spread for an input of average norm.
pub const DEFAULT_LOGIT_SCALE: f64 = 4.0;

/// A frozen random readout `V × d_act` with labels drawn once from its own
/// softmax on clean inputs.
#[derive(Clone, Debug)]
pub struct EvaluationHost<T> {
    pub w_host: Matrix<T>,
    pub labels: Vec<usize>,
    pub temperature: f64,
}

/// What gets fed to the host in place of the clean activation.
#[derive(Clone, Copy, Debug)]
pub enum Splice<'a, T> {
    Identity,
    Zero,
    Outputs(&'a Matrix<T>),
}

impl<T: Scalar> EvaluationHost<T> {
    /// Readout entries are Gaussian, scaled so that a row dotted with an
    /// input of RMS norm has standard deviation `logit_scale`.
    pub fn new(
        eval_set: &Matrix<T>,
        n_classes: usize,
        logit_scale: f64,
        temperature: f64,
        seed: u64,
    ) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::Config(format!("host needs at least 2 classes, got {n_classes}")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::Config(format!("host temperature must be positive, got {temperature}")));
        }
        if eval_set.rows() == 0 {
            return Err(Error::Contract("host needs a nonempty evaluation set".into()));
        }
        let mean_sq = eval_set
            .iter_rows()
            .map(|x| norm_sq(x).f64())
            .sum::<f64>()
            / eval_set.rows() as f64;
        let rms = mean_sq.sqrt();
        let scale = if rms > 0.0 { logit_scale / rms } else { logit_scale };

        let mut rng = substream(seed, stream::HOST);
        let data = (0..n_classes * eval_set.cols())
            .map(|_| T::of(scale * standard_normal::<f64>(&mut rng)))
            .collect();
        let w_host = Matrix::from_vec(n_classes, eval_set.cols(), data)?;

        let mut host = Self {
            w_host,
            labels: Vec::new(),
            temperature,
        };
        let mut rng = substream(seed, stream::LABELS);
        let mut labels = Vec::with_capacity(eval_set.rows());
        for x in eval_set.iter_rows() {
            let probs = host.probabilities(x)?;
            let dist = WeightedIndex::new(&probs)
                .map_err(|e| Error::Numerical(format!("host softmax: {e}")))?;
            labels.push(dist.sample(&mut rng));
        }
        host.labels = labels;
        Ok(host)
    }

    pub fn n_classes(&self) -> usize {
        self.w_host.rows()
    }

    fn logits(&self, x: &[T]) -> Result<Vec<f64>> {
        Ok(self
            .w_host
            .matvec(x)?
            .into_iter()
            .map(|v| v.f64() / self.temperature)
            .collect())
    }

    fn probabilities(&self, x: &[T]) -> Result<Vec<f64>> {
        let logits = self.logits(x)?;
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        Ok(exps.into_iter().map(|e| e / total).collect())
    }

    fn example_ce(&self, x: &[T], label: usize) -> Result<f64> {
        let logits = self.logits(x)?;
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        Ok(lse - logits[label])
    }

    /// Mean cross-entropy against the stored labels with `splice` applied.
    pub fn cross_entropy(&self, eval_set: &Matrix<T>, splice: Splice<'_, T>) -> Result<f64> {
        check_dim("host: eval rows vs labels", self.labels.len(), eval_set.rows())?;
        check_dim("host: d_act", self.w_host.cols(), eval_set.cols())?;
        let zero = vec![T::zero(); eval_set.cols()];
        let mut total = 0.0;
        for (r, (x, &label)) in eval_set.iter_rows().zip(&self.labels).enumerate() {
            let input = match splice {
                Splice::Identity => x,
                Splice::Zero => zero.as_slice(),
                Splice::Outputs(m) => {
                    check_dim("host: spliced rows", eval_set.rows(), m.rows())?;
                    m.row(r)
                }
            };
            total += self.example_ce(input, label)?;
        }
        Ok(total / eval_set.rows() as f64)
    }
}

/// `1 − (CE(φ) − CE(Id)) / (CE(ζ) − CE(Id))`.
pub fn loss_recovered_from_ce(ce_spliced: f64, ce_identity: f64, ce_zero: f64) -> Result<f64> {
    let span = ce_zero - ce_identity;
    if span == 0.0 {
        return Err(Error::Degenerate(
            "host cross-entropy is identical with clean and zeroed inputs".into(),
        ));
    }
    Ok(1.0 - (ce_spliced - ce_identity) / span)
}

pub fn loss_recovered<T: Scalar>(
    host: &EvaluationHost<T>,
    eval_set: &Matrix<T>,
    splice: Splice<'_, T>,
) -> Result<f64> {
    let ce_id = host.cross_entropy(eval_set, Splice::Identity)?;
    let ce_zero = host.cross_entropy(eval_set, Splice::Zero)?;
    let ce = match splice {
        Splice::Identity => ce_id,
        Splice::Zero => ce_zero,
        Splice::Outputs(_) => host.cross_entropy(eval_set, splice)?,
    };
    loss_recovered_from_ce(ce, ce_id, ce_zero)
}
