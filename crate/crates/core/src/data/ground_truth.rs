//! Synthetic activations from a known sparse linear model.
//!
//! Each sample is `bias + Σ cᵢ dᵢ + ε` where the unit directions `dᵢ`
//! outnumber the activation dimension and each coefficient `cᵢ` is nonzero
//! with probability `fire_prob`.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{axpy, Matrix};
use crate::rng::{self, stream, Rng};
use crate::scalar::Scalar;

/// Distribution of a firing feature's coefficient. Support is strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MagnitudeDist {
    Uniform { low: f64, high: f64 },
    Constant(f64),
}

impl Default for MagnitudeDist {
    fn default() -> Self {
        MagnitudeDist::Uniform {
            low: 0.5,
            high: 1.5,
        }
    }
}

impl MagnitudeDist {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MagnitudeDist::Uniform { low, high } => low > 0.0 && high >= low && high.is_finite(),
            MagnitudeDist::Constant(v) => v > 0.0 && v.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "magnitude distribution {self:?} must have positive finite support"
            )))
        }
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            MagnitudeDist::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            MagnitudeDist::Constant(v) => v,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundTruthModel<T> {
    pub d_act: usize,
    pub d_true: usize,
    /// `d_true × d_act`, unit-norm rows.
    pub directions: Matrix<T>,
    pub fire_prob: f64,
    pub magnitude_dist: MagnitudeDist,
    pub noise_std: f64,
    pub bias: Vec<T>,
    pub seed: u64,
}

/// Per-row list of `(feature, coefficient)` pairs for the firing features.
pub type SparseCoeffs<T> = Vec<Vec<(usize, T)>>;

#[derive(Clone, Debug)]
pub struct ActivationBatch<T> {
    pub data: Matrix<T>,
    pub ground_truth_coeffs: Option<SparseCoeffs<T>>,
}

impl<T: Scalar> ActivationBatch<T> {
    pub fn new(data: Matrix<T>) -> Self {
        Self {
            data,
            ground_truth_coeffs: None,
        }
    }

    pub fn rows(&self) -> usize {
        self.data.rows()
    }
}

/// Draws a ground-truth dictionary with rows uniform on the unit sphere.
/// The bias starts at zero; see [`GroundTruthModel::with_random_bias`].
pub fn gen_ground_truth<T: Scalar>(
    d_act: usize,
    d_true: usize,
    fire_prob: f64,
    magnitude_dist: MagnitudeDist,
    noise_std: f64,
    seed: u64,
) -> Result<GroundTruthModel<T>> {
    if d_act < 1 {
        return Err(Error::Config("d_act must be at least 1".into()));
    }
    if d_true <= d_act {
        return Err(Error::Config(format!(
            "d_true ({d_true}) must exceed d_act ({d_act})"
        )));
    }
    if !(fire_prob > 0.0 && fire_prob < 1.0) {
        return Err(Error::Config(format!(
            "fire_prob must lie in (0, 1), got {fire_prob}"
        )));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::Config(format!(
            "noise_std must be nonnegative, got {noise_std}"
        )));
    }
    magnitude_dist.validate()?;

    let mut rng = rng::substream(seed, stream::DIRECTIONS);
    let mut directions = Matrix::zeros(d_true, d_act);
    for i in 0..d_true {
        let v = rng::unit_sphere::<T>(&mut rng, d_act);
        directions.row_mut(i).copy_from_slice(&v);
    }
    Ok(GroundTruthModel {
        d_act,
        d_true,
        directions,
        fire_prob,
        magnitude_dist,
        noise_std,
        bias: vec![T::zero(); d_act],
        seed,
    })
}

impl<T: Scalar> GroundTruthModel<T> {
    /// Replaces the bias with an isotropic Gaussian draw of the given scale.
    pub fn with_random_bias(mut self, scale: f64) -> Self {
        let mut rng = rng::substream(self.seed, stream::BIAS);
        for b in &mut self.bias {
            *b = T::of(scale) * rng::standard_normal::<T>(&mut rng);
        }
        self
    }

    /// Noise-free activations for explicit coefficients.
    pub fn synthesize(&self, coeffs: &[(usize, T)]) -> Result<Vec<T>> {
        let mut x = self.bias.clone();
        for &(i, c) in coeffs {
            if i >= self.d_true {
                return Err(Error::Contract(format!(
                    "feature index {i} out of range for {} true features",
                    self.d_true
                )));
            }
            axpy(c, self.directions.row(i), &mut x);
        }
        Ok(x)
    }

    fn sample_with(&self, batch_size: usize, rng: &mut Rng) -> ActivationBatch<T> {
        let mut data = Matrix::zeros(batch_size, self.d_act);
        let mut coeffs = Vec::with_capacity(batch_size);
        for r in 0..batch_size {
            let mut active = Vec::new();
            for i in 0..self.d_true {
                if rng.random::<f64>() < self.fire_prob {
                    active.push((i, T::of(self.magnitude_dist.sample(rng))));
                }
            }
            let row = data.row_mut(r);
            row.copy_from_slice(&self.bias);
            for &(i, c) in &active {
                axpy(c, self.directions.row(i), row);
            }
            if self.noise_std > 0.0 {
                for v in row.iter_mut() {
                    *v += T::of(self.noise_std) * rng::standard_normal::<T>(rng);
                }
            }
            coeffs.push(active);
        }
        ActivationBatch {
            data,
            ground_truth_coeffs: Some(coeffs),
        }
    }

    /// Batch number `index` of this model's own seed; batch streams are disjoint.
    pub fn sample_indexed(&self, batch_size: usize, index: u64) -> ActivationBatch<T> {
        self.sample_with(batch_size, &mut rng::batch_stream(self.seed, index))
    }

    /// Held-out rows from a stream no training batch ever uses.
    pub fn sample_eval(&self, rows: usize) -> ActivationBatch<T> {
        self.sample_with(rows, &mut rng::substream(self.seed, stream::EVAL))
    }
}

/// Samples `batch_size` rows deterministically from `seed`.
pub fn sample_batch<T: Scalar>(
    model: &GroundTruthModel<T>,
    batch_size: usize,
    seed: u64,
) -> ActivationBatch<T> {
    model.sample_with(batch_size, &mut rng::batch_stream(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    fn model(d_act: usize, d_true: usize, p: f64, noise: f64, seed: u64) -> GroundTruthModel<f64> {
        gen_ground_truth(d_act, d_true, p, MagnitudeDist::default(), noise, seed).unwrap()
    }

    #[test]
    fn deterministic_unit_directions() {
        let a = model(2, 4, 0.1, 0.0, 7);
        let b = model(2, 4, 0.1, 0.0, 7);
        assert_eq!(a.directions, b.directions);
        for r in a.directions.iter_rows() {
            assert!((norm(r) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn one_dimensional_directions_are_signs() {
        let m = model(1, 2, 0.1, 0.0, 3);
        for r in m.directions.iter_rows() {
            assert!(r[0] == 1.0 || r[0] == -1.0, "{}", r[0]);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            gen_ground_truth::<f64>(8, 4, 0.1, MagnitudeDist::default(), 0.0, 1),
            Err(Error::Config(_))
        ));
        assert!(gen_ground_truth::<f64>(2, 4, 1.0, MagnitudeDist::default(), 0.0, 1).is_err());
        assert!(gen_ground_truth::<f64>(0, 4, 0.5, MagnitudeDist::default(), 0.0, 1).is_err());
    }

    #[test]
    fn zero_coefficients_give_bias() {
        let m = model(3, 5, 0.2, 0.0, 1).with_random_bias(1.0);
        // fire_prob is tiny so nearly every row is pure bias; check those rows.
        let tiny = GroundTruthModel {
            fire_prob: 1e-12,
            ..m.clone()
        };
        let batch = sample_batch(&tiny, 50, 9);
        for r in batch.data.iter_rows() {
            assert_eq!(r, &m.bias[..]);
        }
    }

    #[test]
    fn one_hot_coefficient_adds_direction() {
        let m = model(3, 5, 0.2, 0.0, 1).with_random_bias(0.5);
        let x = m.synthesize(&[(2, 1.0)]).unwrap();
        for j in 0..3 {
            assert!((x[j] - (m.bias[j] + m.directions.get(2, j))).abs() < 1e-15);
        }
    }

    #[test]
    fn mean_active_count_matches_binomial() {
        let m = model(8, 32, 0.1, 0.0, 11);
        let batch = sample_batch(&m, 10_000, 5);
        let coeffs = batch.ground_truth_coeffs.unwrap();
        let total: usize = coeffs.iter().map(|r| r.len()).sum();
        let mean = total as f64 / 10_000.0;
        assert!((mean - 3.2).abs() < 0.2, "mean active {mean}");
    }

    #[test]
    fn noiseless_rows_lie_in_affine_span() {
        let m = model(3, 6, 0.3, 0.0, 4).with_random_bias(0.3);
        let batch = sample_batch(&m, 200, 2);
        let coeffs = batch.ground_truth_coeffs.as_ref().unwrap();
        for (r, c) in batch.data.iter_rows().zip(coeffs) {
            let rebuilt = m.synthesize(c).unwrap();
            let resid: f64 = r.iter().zip(&rebuilt).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(resid.sqrt() < 1e-9);
        }
    }
}
