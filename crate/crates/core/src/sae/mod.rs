//! SAE parameter bundles and forward passes.
//!
//! Dictionary elements are stored as the *rows* of `w_dec` (`d_feat × d_act`),
//! so "unit-norm decoder columns" in the usual matrix notation corresponds to
//! unit-norm rows here.

pub mod baseline;
pub mod checkpoint;
pub mod gated;
pub mod init;

pub use baseline::{baseline_encode, BaselineSae};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use gated::{jumprelu_encode, GatedSae, JumpReluView, Tying};
pub use init::{init_params, renormalize_decoder, renormalize_rows};

use crate::error::{check_dim, Result};
use crate::linalg::{axpy, Matrix};
use crate::scalar::Scalar;

/// Which architecture a parameter bundle implements. The discriminants are
/// the checkpoint `kind` byte.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArchKind {
    Baseline = 0,
    Gated = 1,
    GatedUntied = 2,
}

impl ArchKind {
    pub fn name(self) -> &'static str {
        match self {
            ArchKind::Baseline => "baseline",
            ArchKind::Gated => "gated",
            ArchKind::GatedUntied => "gated-untied",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodeOutput<T> {
    pub features: Vec<T>,
    pub pre_gate: Option<Vec<T>>,
    pub mag_acts: Option<Vec<T>>,
    pub gate_mask: Option<Vec<bool>>,
}

/// Borrowed view of the decoder half of an SAE.
#[derive(Clone, Copy, Debug)]
pub struct Decoder<'a, T> {
    pub w_dec: &'a Matrix<T>,
    pub b_dec: &'a [T],
}

impl<'a, T: Scalar> Decoder<'a, T> {
    pub fn decode(&self, features: &[T]) -> Result<Vec<T>> {
        decode(self.w_dec, self.b_dec, features)
    }

    pub fn d_feat(&self) -> usize {
        self.w_dec.rows()
    }

    pub fn d_act(&self) -> usize {
        self.w_dec.cols()
    }
}

/// `b_dec + Σᵢ features[i] · w_dec[i]`.
pub fn decode<T: Scalar>(w_dec: &Matrix<T>, b_dec: &[T], features: &[T]) -> Result<Vec<T>> {
    check_dim("decode: features", w_dec.rows(), features.len())?;
    check_dim("decode: b_dec", w_dec.cols(), b_dec.len())?;
    let mut out = b_dec.to_vec();
    for (i, &f) in features.iter().enumerate() {
        if f != T::zero() {
            axpy(f, w_dec.row(i), &mut out);
        }
    }
    Ok(out)
}

pub trait Autoencoder<T: Scalar> {
    fn d_act(&self) -> usize;
    fn d_feat(&self) -> usize;
    fn encode(&self, x: &[T]) -> Result<EncodeOutput<T>>;
    fn decoder(&self) -> Decoder<'_, T>;

    fn reconstruct(&self, x: &[T]) -> Result<Vec<T>> {
        let out = self.encode(x)?;
        self.decoder().decode(&out.features)
    }
}

/// Named parameter tensors in checkpoint order.
pub trait ParamTensors<T> {
    fn tensors(&self) -> Vec<(&'static str, &[T])>;
    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])>;
}

/// Either architecture's parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Sae<T> {
    Baseline(BaselineSae<T>),
    Gated(GatedSae<T>),
}

impl<T: Scalar> Sae<T> {
    pub fn kind(&self) -> ArchKind {
        match self {
            Sae::Baseline(_) => ArchKind::Baseline,
            Sae::Gated(g) => match g.tying() {
                Tying::Tied => ArchKind::Gated,
                Tying::Untied => ArchKind::GatedUntied,
            },
        }
    }

    pub fn w_dec(&self) -> &Matrix<T> {
        match self {
            Sae::Baseline(s) => &s.w_dec,
            Sae::Gated(s) => &s.w_dec,
        }
    }

    pub fn w_dec_mut(&mut self) -> &mut Matrix<T> {
        match self {
            Sae::Baseline(s) => &mut s.w_dec,
            Sae::Gated(s) => &mut s.w_dec,
        }
    }

    pub fn b_dec(&self) -> &[T] {
        match self {
            Sae::Baseline(s) => &s.b_dec,
            Sae::Gated(s) => &s.b_dec,
        }
    }

    /// Same shapes, every entry zero. Used for gradients and optimizer moments.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, t) in z.tensors_mut() {
            t.iter_mut().for_each(|v| *v = T::zero());
        }
        z
    }

    pub fn as_baseline(&self) -> Option<&BaselineSae<T>> {
        match self {
            Sae::Baseline(s) => Some(s),
            Sae::Gated(_) => None,
        }
    }

    pub fn as_gated(&self) -> Option<&GatedSae<T>> {
        match self {
            Sae::Gated(s) => Some(s),
            Sae::Baseline(_) => None,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}

impl<T: Scalar> Autoencoder<T> for Sae<T> {
    fn d_act(&self) -> usize {
        self.w_dec().cols()
    }

    fn d_feat(&self) -> usize {
        self.w_dec().rows()
    }

    fn encode(&self, x: &[T]) -> Result<EncodeOutput<T>> {
        match self {
            Sae::Baseline(s) => s.encode(x),
            Sae::Gated(s) => s.encode(x),
        }
    }

    fn decoder(&self) -> Decoder<'_, T> {
        Decoder {
            w_dec: self.w_dec(),
            b_dec: self.b_dec(),
        }
    }
}

impl<T: Scalar> ParamTensors<T> for Sae<T> {
    fn tensors(&self) -> Vec<(&'static str, &[T])> {
        match self {
            Sae::Baseline(s) => s.tensors(),
            Sae::Gated(s) => s.tensors(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        match self {
            Sae::Baseline(s) => s.tensors_mut(),
            Sae::Gated(s) => s.tensors_mut(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decode_zero_and_basis() {
        let w = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let b = [0.5, -0.5];
        assert_eq!(decode(&w, &b, &[0.0; 3]).unwrap(), vec![0.5, -0.5]);
        assert_eq!(decode(&w, &b, &[0.0, 1.0, 0.0]).unwrap(), vec![3.5, 3.5]);
        assert!(decode(&w, &b, &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn decode_is_affine(
            w in prop::collection::vec(-2.0f64..2.0, 12),
            b in prop::collection::vec(-1.0f64..1.0, 3),
            f1 in prop::collection::vec(0.0f64..2.0, 4),
            f2 in prop::collection::vec(0.0f64..2.0, 4),
        ) {
            let w = Matrix::from_vec(4, 3, w).unwrap();
            let sum: Vec<f64> = f1.iter().zip(&f2).map(|(a, c)| a + c).collect();
            let lhs = decode(&w, &b, &sum).unwrap();
            let d1 = decode(&w, &b, &f1).unwrap();
            let d2 = decode(&w, &b, &f2).unwrap();
            for j in 0..3 {
                let rhs = (d1[j] - b[j]) + (d2[j] - b[j]);
                prop_assert!((lhs[j] - b[j] - rhs).abs() < 1e-12);
            }
        }
    }
}
