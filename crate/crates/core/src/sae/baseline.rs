use crate::error::{check_dim, Result};
use crate::linalg::{dot, sub, Matrix};
use crate::sae::{Autoencoder, Decoder, EncodeOutput, ParamTensors};
use crate::scalar::{relu, Scalar};

/// ReLU encoder `f(x) = ReLU(w_enc (x − b_dec) + b_enc)` with linear decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineSae<T> {
    /// `d_feat × d_act`.
    pub w_enc: Matrix<T>,
    pub b_enc: Vec<T>,
    /// `d_feat × d_act`; row `i` is dictionary element `i`.
    pub w_dec: Matrix<T>,
    pub b_dec: Vec<T>,
}

impl<T: Scalar> BaselineSae<T> {
    /// Encoder pre-activations `w_enc (x − b_dec) + b_enc`.
    pub fn pre_activations(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim("baseline_encode: x", self.w_enc.cols(), x.len())?;
        let centered = sub(x, &self.b_dec);
        Ok(self
            .w_enc
            .iter_rows()
            .zip(&self.b_enc)
            .map(|(r, &b)| dot(r, &centered) + b)
            .collect())
    }
}

pub fn baseline_encode<T: Scalar>(sae: &BaselineSae<T>, x: &[T]) -> Result<EncodeOutput<T>> {
    let features = sae.pre_activations(x)?.into_iter().map(relu).collect();
    Ok(EncodeOutput {
        features,
        pre_gate: None,
        mag_acts: None,
        gate_mask: None,
    })
}

impl<T: Scalar> Autoencoder<T> for BaselineSae<T> {
    fn d_act(&self) -> usize {
        self.w_dec.cols()
    }

    fn d_feat(&self) -> usize {
        self.w_dec.rows()
    }

    fn encode(&self, x: &[T]) -> Result<EncodeOutput<T>> {
        baseline_encode(self, x)
    }

    fn decoder(&self) -> Decoder<'_, T> {
        Decoder {
            w_dec: &self.w_dec,
            b_dec: &self.b_dec,
        }
    }
}

impl<T: Scalar> ParamTensors<T> for BaselineSae<T> {
    fn tensors(&self) -> Vec<(&'static str, &[T])> {
        vec![
            ("w_enc", self.w_enc.as_slice()),
            ("b_enc", &self.b_enc),
            ("w_dec", self.w_dec.as_slice()),
            ("b_dec", &self.b_dec),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        vec![
            ("w_enc", self.w_enc.as_mut_slice()),
            ("b_enc", &mut self.b_enc),
            ("w_dec", self.w_dec.as_mut_slice()),
            ("b_dec", &mut self.b_dec),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_sae(w_enc: f64, b_enc: f64, b_dec: f64) -> BaselineSae<f64> {
        BaselineSae {
            w_enc: Matrix::from_vec(1, 1, vec![w_enc]).unwrap(),
            b_enc: vec![b_enc],
            w_dec: Matrix::from_vec(1, 1, vec![1.0]).unwrap(),
            b_dec: vec![b_dec],
        }
    }

    #[test]
    fn identity_path_and_clamp() {
        assert_eq!(baseline_encode(&scalar_sae(1.0, 0.0, 0.0), &[1.0]).unwrap().features, vec![1.0]);
        assert_eq!(baseline_encode(&scalar_sae(1.0, -2.0, 0.0), &[1.0]).unwrap().features, vec![0.0]);
    }

    #[test]
    fn pre_encoder_bias_is_subtracted() {
        let sae = BaselineSae {
            w_enc: Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(),
            b_enc: vec![0.0, 0.0],
            w_dec: Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(),
            b_dec: vec![1.0, 1.0],
        };
        let out = baseline_encode(&sae, &[2.0, 1.0]).unwrap();
        assert_eq!(out.features, vec![1.0, 0.0]);
        assert!(out.gate_mask.is_none() && out.pre_gate.is_none());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(baseline_encode(&scalar_sae(1.0, 0.0, 0.0), &[1.0, 2.0]).is_err());
    }
}
