//! Parameter initialization and decoder row normalization.

use crate::error::{Error, Result};
use crate::linalg::{norm, scale_in_place, Matrix};
use crate::rng::{self, stream};
use crate::sae::{ArchKind, BaselineSae, GatedSae, Sae};
use crate::scalar::Scalar;

/// Decoder rows uniform on the sphere, encoder directions copied from the
/// decoder, all biases and `r_mag` zero. Every kind draws the decoder from the
/// same sub-stream, so one seed gives one dictionary regardless of kind.
pub fn init_params<T: Scalar>(kind: ArchKind, d_act: usize, d_feat: usize, seed: u64) -> Result<Sae<T>> {
    if d_act < 1 || d_feat < 1 {
        return Err(Error::Config(format!(
            "d_act and d_feat must be positive (got {d_act}, {d_feat})"
        )));
    }
    let mut rng = rng::substream(seed, stream::INIT);
    let mut w_dec = Matrix::zeros(d_feat, d_act);
    for i in 0..d_feat {
        let v = rng::unit_sphere::<T>(&mut rng, d_act);
        w_dec.row_mut(i).copy_from_slice(&v);
    }
    let zeros = || vec![T::zero(); d_feat];
    Ok(match kind {
        ArchKind::Baseline => Sae::Baseline(BaselineSae {
            w_enc: w_dec.clone(),
            b_enc: zeros(),
            w_dec,
            b_dec: vec![T::zero(); d_act],
        }),
        ArchKind::Gated | ArchKind::GatedUntied => Sae::Gated(GatedSae {
            w_gate: w_dec.clone(),
            b_gate: zeros(),
            r_mag: zeros(),
            b_mag: zeros(),
            w_mag_untied: (kind == ArchKind::GatedUntied).then(|| w_dec.clone()),
            w_dec,
            b_dec: vec![T::zero(); d_act],
        }),
    })
}

/// Scales every row of `m` to unit L2 norm.
pub fn renormalize_rows<T: Scalar>(m: &mut Matrix<T>) -> Result<()> {
    for i in 0..m.rows() {
        let n = norm(m.row(i));
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Numerical(format!(
                "decoder row {i} has norm {n}; cannot normalize"
            )));
        }
        scale_in_place(T::one() / n, m.row_mut(i));
    }
    Ok(())
}

pub fn renormalize_decoder<T: Scalar>(params: &mut Sae<T>) -> Result<()> {
    renormalize_rows(params.w_dec_mut())
}
