//! Gated encoder and its JumpReLU reading.
//!
//! The gate path decides *which* features fire (`w_gate (x − b_dec) + b_gate > 0`),
//! the magnitude path decides *how much* (`ReLU(w_mag (x − b_dec) + b_mag)`).
//! With tied weights `w_mag[i] = exp(r_mag[i]) · w_gate[i]` and the whole
//! encoder collapses to one linear map followed by a JumpReLU with threshold
//! `θ = b_mag − exp(r_mag) ⊙ b_gate`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, sub, Matrix};
use crate::sae::{Autoencoder, Decoder, EncodeOutput, ParamTensors};
use crate::scalar::{relu, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tying {
    Tied,
    Untied,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GatedSae<T> {
    pub w_gate: Matrix<T>,
    pub b_gate: Vec<T>,
    /// Log-scale tying the magnitude path to the gate path.
    pub r_mag: Vec<T>,
    pub b_mag: Vec<T>,
    pub w_dec: Matrix<T>,
    pub b_dec: Vec<T>,
    /// Independent magnitude weights; `Some` iff untied.
    pub w_mag_untied: Option<Matrix<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpReluView<T> {
    pub w_mag: Matrix<T>,
    pub b_mag: Vec<T>,
    pub theta: Vec<T>,
}

impl<T: Scalar> GatedSae<T> {
    pub fn tying(&self) -> Tying {
        if self.w_mag_untied.is_some() {
            Tying::Untied
        } else {
            Tying::Tied
        }
    }

    fn require_tied(&self, op: &str) -> Result<()> {
        match self.tying() {
            Tying::Tied => Ok(()),
            Tying::Untied => Err(Error::Contract(format!("{op} requires tied weights"))),
        }
    }

    /// Row `i` is `exp(r_mag[i]) · w_gate[i]`.
    pub fn materialize_w_mag(&self) -> Result<Matrix<T>> {
        self.require_tied("materialize_w_mag")?;
        let mut w = self.w_gate.clone();
        for (i, &r) in self.r_mag.iter().enumerate() {
            let s = r.exp();
            w.row_mut(i).iter_mut().for_each(|v| *v *= s);
        }
        Ok(w)
    }

    /// Magnitude weights in use: materialized when tied, stored when untied.
    pub fn w_mag(&self) -> Matrix<T> {
        match &self.w_mag_untied {
            Some(w) => w.clone(),
            None => self.materialize_w_mag().expect("tied"),
        }
    }

    /// `θ = b_mag − exp(r_mag) ⊙ b_gate`.
    pub fn jumprelu_theta(&self) -> Result<Vec<T>> {
        self.require_tied("jumprelu_theta")?;
        Ok(self
            .b_mag
            .iter()
            .zip(&self.r_mag)
            .zip(&self.b_gate)
            .map(|((&bm, &r), &bg)| bm - r.exp() * bg)
            .collect())
    }

    pub fn jumprelu_view(&self) -> Result<JumpReluView<T>> {
        Ok(JumpReluView {
            w_mag: self.materialize_w_mag()?,
            b_mag: self.b_mag.clone(),
            theta: self.jumprelu_theta()?,
        })
    }

    pub fn gated_encode(&self, x: &[T]) -> Result<EncodeOutput<T>> {
        check_dim("gated_encode: x", self.w_gate.cols(), x.len())?;
        let centered = sub(x, &self.b_dec);
        let w_mag = self.w_mag();
        let d_feat = self.w_gate.rows();
        let mut pre_gate = Vec::with_capacity(d_feat);
        let mut gate_mask = Vec::with_capacity(d_feat);
        let mut mag_acts = Vec::with_capacity(d_feat);
        let mut features = Vec::with_capacity(d_feat);
        for i in 0..d_feat {
            let pg = dot(self.w_gate.row(i), &centered) + self.b_gate[i];
            let open = pg > T::zero();
            let mag = relu(dot(w_mag.row(i), &centered) + self.b_mag[i]);
            pre_gate.push(pg);
            gate_mask.push(open);
            mag_acts.push(mag);
            features.push(if open { mag } else { T::zero() });
        }
        Ok(EncodeOutput {
            features,
            pre_gate: Some(pre_gate),
            mag_acts: Some(mag_acts),
            gate_mask: Some(gate_mask),
        })
    }
}

/// `z = w_mag (x − b_dec) + b_mag`; keeps `z[i]` iff `z[i] > θ[i]` and `z[i] > 0`.
pub fn jumprelu_encode<T: Scalar>(view: &JumpReluView<T>, x: &[T], b_dec: &[T]) -> Result<Vec<T>> {
    check_dim("jumprelu_encode: x", view.w_mag.cols(), x.len())?;
    check_dim("jumprelu_encode: b_dec", view.w_mag.cols(), b_dec.len())?;
    let centered = sub(x, b_dec);
    Ok(view
        .w_mag
        .iter_rows()
        .zip(&view.b_mag)
        .zip(&view.theta)
        .map(|((r, &b), &theta)| {
            let z = dot(r, &centered) + b;
            if z > theta && z > T::zero() {
                z
            } else {
                T::zero()
            }
        })
        .collect())
}

impl<T: Scalar> Autoencoder<T> for GatedSae<T> {
    fn d_act(&self) -> usize {
        self.w_dec.cols()
    }

    fn d_feat(&self) -> usize {
        self.w_dec.rows()
    }

    fn encode(&self, x: &[T]) -> Result<EncodeOutput<T>> {
        self.gated_encode(x)
    }

    fn decoder(&self) -> Decoder<'_, T> {
        Decoder {
            w_dec: &self.w_dec,
            b_dec: &self.b_dec,
        }
    }
}

impl<T: Scalar> ParamTensors<T> for GatedSae<T> {
    fn tensors(&self) -> Vec<(&'static str, &[T])> {
        let mut v: Vec<(&'static str, &[T])> = vec![
            ("w_gate", self.w_gate.as_slice()),
            ("b_gate", &self.b_gate),
            ("r_mag", &self.r_mag),
            ("b_mag", &self.b_mag),
        ];
        if let Some(w) = &self.w_mag_untied {
            v.push(("w_mag_untied", w.as_slice()));
        }
        v.push(("w_dec", self.w_dec.as_slice()));
        v.push(("b_dec", &self.b_dec));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        let mut v: Vec<(&'static str, &mut [T])> = vec![
            ("w_gate", self.w_gate.as_mut_slice()),
            ("b_gate", &mut self.b_gate),
            ("r_mag", &mut self.r_mag),
            ("b_mag", &mut self.b_mag),
        ];
        if let Some(w) = &mut self.w_mag_untied {
            v.push(("w_mag_untied", w.as_mut_slice()));
        }
        v.push(("w_dec", self.w_dec.as_mut_slice()));
        v.push(("b_dec", &mut self.b_dec));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_gated(w_gate: f64, b_gate: f64, r_mag: f64, b_mag: f64) -> GatedSae<f64> {
        GatedSae {
            w_gate: Matrix::from_vec(1, 1, vec![w_gate]).unwrap(),
            b_gate: vec![b_gate],
            r_mag: vec![r_mag],
            b_mag: vec![b_mag],
            w_dec: Matrix::from_vec(1, 1, vec![1.0]).unwrap(),
            b_dec: vec![0.0],
            w_mag_untied: None,
        }
    }

    #[test]
    fn open_gate_passes_magnitude() {
        let out = scalar_gated(1.0, -1.0, 0.0, 0.0).gated_encode(&[2.0]).unwrap();
        assert_eq!(out.pre_gate, Some(vec![1.0]));
        assert_eq!(out.mag_acts, Some(vec![2.0]));
        assert_eq!(out.features, vec![2.0]);
    }

    #[test]
    fn closed_gate_discards_magnitude() {
        let out = scalar_gated(1.0, -1.0, 0.0, 0.0).gated_encode(&[0.5]).unwrap();
        assert_eq!(out.pre_gate, Some(vec![-0.5]));
        assert_eq!(out.mag_acts, Some(vec![0.5]));
        assert_eq!(out.features, vec![0.0]);
    }

    #[test]
    fn gate_at_exactly_zero_is_closed() {
        let out = scalar_gated(1.0, -1.0, 0.0, 0.0).gated_encode(&[1.0]).unwrap();
        assert_eq!(out.pre_gate, Some(vec![0.0]));
        assert_eq!(out.gate_mask, Some(vec![false]));
        assert_eq!(out.features, vec![0.0]);
    }

    #[test]
    fn materialized_magnitudes() {
        let ln2 = std::f64::consts::LN_2;
        let mut g = scalar_gated(1.0, 0.0, 0.0, 0.0);
        g.w_gate = Matrix::from_rows(&[[0.4, 0.6], [1.0, -1.0], [3.0, 5.0]]).unwrap();
        g.r_mag = vec![-ln2, ln2, 0.0];
        let w = g.materialize_w_mag().unwrap();
        assert!((w.get(0, 0) - 0.2).abs() < 1e-15 && (w.get(0, 1) - 0.3).abs() < 1e-15);
        assert!((w.get(1, 0) - 2.0).abs() < 1e-15 && (w.get(1, 1) + 2.0).abs() < 1e-15);
        assert_eq!(w.row(2), g.w_gate.row(2));
    }

    #[test]
    fn theta_hand_cases() {
        assert_eq!(scalar_gated(1.0, -1.0, 0.0, 0.0).jumprelu_theta().unwrap(), vec![1.0]);
        assert_eq!(scalar_gated(1.0, 0.0, 0.7, 2.5).jumprelu_theta().unwrap(), vec![2.5]);
        let t = scalar_gated(1.0, 1.0, std::f64::consts::LN_2, 3.0).jumprelu_theta().unwrap();
        assert!((t[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn untied_rejects_tied_only_ops() {
        let mut g = scalar_gated(1.0, 0.0, 0.0, 0.0);
        g.w_mag_untied = Some(Matrix::from_vec(1, 1, vec![2.0]).unwrap());
        assert!(matches!(g.materialize_w_mag(), Err(Error::Contract(_))));
        assert!(g.jumprelu_theta().is_err());
        assert_eq!(g.gated_encode(&[1.0]).unwrap().features, vec![2.0]);
    }

    #[test]
    fn jumprelu_gap_and_zero_threshold() {
        let view = JumpReluView {
            w_mag: Matrix::from_vec(1, 1, vec![1.0]).unwrap(),
            b_mag: vec![0.0],
            theta: vec![1.0],
        };
        assert_eq!(jumprelu_encode(&view, &[2.0], &[0.0]).unwrap(), vec![2.0]);
        assert_eq!(jumprelu_encode(&view, &[0.5], &[0.0]).unwrap(), vec![0.0]);
        let relu_view = JumpReluView {
            theta: vec![0.0],
            ..view
        };
        for z in [-1.0, 0.0, 0.3, 4.0] {
            assert_eq!(jumprelu_encode(&relu_view, &[z], &[0.0]).unwrap(), vec![relu(z)]);
        }
    }
}
