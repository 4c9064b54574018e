//! One-dimensional mixture used to contrast ReLU and JumpReLU readouts.
//!
//! A single feature is on with probability `p_on`; when on, the projection
//! onto the encoder direction is `N(mu_on, sigma_on²)`, otherwise it is
//! interference noise `N(0, sigma_off²)`.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{self, stream};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Toy1dSample {
    pub value: f64,
    pub is_on: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Toy1dParams {
    pub p_on: f64,
    pub mu_on: f64,
    pub sigma_on: f64,
    pub sigma_off: f64,
}

impl Default for Toy1dParams {
    fn default() -> Self {
        // N(2, 1/4) when on: variance 1/4, so sigma 0.5.
        Self {
            p_on: 0.5,
            mu_on: 2.0,
            sigma_on: 0.5,
            sigma_off: 1.0,
        }
    }
}

pub fn toy1d_sample(n: usize, params: Toy1dParams, seed: u64) -> Result<Vec<Toy1dSample>> {
    let Toy1dParams {
        p_on,
        mu_on,
        sigma_on,
        sigma_off,
    } = params;
    if n < 1 {
        return Err(Error::Config("toy1d needs at least one sample".into()));
    }
    if !(0.0..=1.0).contains(&p_on) {
        return Err(Error::Config(format!("p_on must lie in [0, 1], got {p_on}")));
    }
    if !(sigma_on >= 0.0 && sigma_off >= 0.0) {
        return Err(Error::Config("toy1d standard deviations must be nonnegative".into()));
    }
    let mut rng = rng::substream(seed, stream::TOY1D);
    Ok((0..n)
        .map(|_| {
            let is_on = rng.random::<f64>() < p_on;
            let z: f64 = rng::standard_normal(&mut rng);
            let value = if is_on { mu_on + sigma_on * z } else { sigma_off * z };
            Toy1dSample { value, is_on }
        })
        .collect())
}

/// ReLU readout with threshold `t` and slope `m`: `1[v > t]·m·(v − t)`.
pub fn relu_readout(v: f64, t: f64, m: f64) -> f64 {
    if v > t {
        m * (v - t)
    } else {
        0.0
    }
}

/// JumpReLU readout: threshold `t`, slope `m`, origin `d ≤ t`: `1[v > t]·m·(v − d)`.
pub fn jump_relu_readout(v: f64, t: f64, m: f64, d: f64) -> f64 {
    if v > t {
        m * (v - d)
    } else {
        0.0
    }
}

/// Mean squared reconstruction error of `readout` over `samples` that pass `keep`.
/// Returns `None` when no sample is kept.
pub fn readout_mse(
    samples: &[Toy1dSample],
    keep: impl Fn(&Toy1dSample) -> bool,
    readout: impl Fn(f64) -> f64,
) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in samples.iter().filter(|s| keep(s)) {
        sum += (readout(s.value) - s.value).powi(2);
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_mixture_statistics() {
        let s = toy1d_sample(100_000, Toy1dParams::default(), 1).unwrap();
        let on: Vec<f64> = s.iter().filter(|s| s.is_on).map(|s| s.value).collect();
        let frac = on.len() as f64 / s.len() as f64;
        // 3σ binomial band at n = 1e5 is ±0.0047.
        assert!((frac - 0.5).abs() < 0.01, "on fraction {frac}");
        let mean = on.iter().sum::<f64>() / on.len() as f64;
        assert!((mean - 2.0).abs() < 0.02, "on mean {mean}");
    }

    #[test]
    fn degenerate_mixture_is_constant() {
        let params = Toy1dParams {
            p_on: 1.0,
            sigma_on: 0.0,
            ..Toy1dParams::default()
        };
        let s = toy1d_sample(100, params, 3).unwrap();
        assert!(s.iter().all(|s| s.is_on && s.value == 2.0));
    }

    #[test]
    fn readouts() {
        assert_eq!(relu_readout(2.0, 1.0, 2.0), 2.0);
        assert_eq!(relu_readout(1.5, 1.0, 2.0), 1.0);
        assert_eq!(relu_readout(0.5, 1.0, 2.0), 0.0);
        assert_eq!(jump_relu_readout(1.5, 1.0, 1.0, 0.0), 1.5);
        assert_eq!(jump_relu_readout(1.0, 1.0, 1.0, 0.0), 0.0);
    }
}
