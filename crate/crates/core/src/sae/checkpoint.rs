//! `GSAE` checkpoints.
//!
//! Layout (little-endian): magic `GSAE`, version `u32 = 1`, kind `u8`
//! (0 baseline, 1 gated-tied, 2 gated-untied), `d_act: u32`, `d_feat: u32`,
//! then every parameter tensor as `f64` in [`ParamTensors`] order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sae::{ArchKind, ParamTensors, Sae};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"GSAE";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 17;

pub fn encode_checkpoint<T: Scalar>(sae: &Sae<T>) -> Vec<u8> {
    let d_act = sae.w_dec().cols() as u32;
    let d_feat = sae.w_dec().rows() as u32;
    let tensors = sae.tensors();
    let n: usize = tensors.iter().map(|(_, t)| t.len()).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(sae.kind() as u8);
    out.extend_from_slice(&d_act.to_le_bytes());
    out.extend_from_slice(&d_feat.to_le_bytes());
    for (_, t) in tensors {
        for &v in t {
            out.extend_from_slice(&v.f64().to_le_bytes());
        }
    }
    out
}

pub fn decode_checkpoint<T: Scalar>(bytes: &[u8]) -> Result<Sae<T>> {
    let fmt = |offset: usize, message: String| Error::Format {
        offset: offset as u64,
        message,
    };
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(fmt(0, "missing GSAE magic".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(fmt(
            bytes.len(),
            format!("expected {HEADER_LEN}-byte header, found {} bytes", bytes.len()),
        ));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(fmt(4, format!("unsupported version {version}")));
    }
    let kind = match bytes[8] {
        0 => ArchKind::Baseline,
        1 => ArchKind::Gated,
        2 => ArchKind::GatedUntied,
        k => return Err(fmt(8, format!("unknown kind {k}"))),
    };
    let d_act = u32_at(9) as usize;
    let d_feat = u32_at(13) as usize;
    if d_act == 0 || d_feat == 0 {
        return Err(fmt(9, "zero dimension".into()));
    }

    let mut sae = crate::sae::init_params::<T>(kind, d_act, d_feat, 0)?;
    let expected = HEADER_LEN
        + 8 * sae
            .tensors()
            .iter()
            .map(|(_, t)| t.len())
            .sum::<usize>();
    if bytes.len() != expected {
        return Err(fmt(
            bytes.len().min(expected),
            format!("expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    let mut values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().unwrap())));
    for (_, t) in sae.tensors_mut() {
        for v in t.iter_mut() {
            *v = values.next().expect("length checked");
        }
    }
    Ok(sae)
}

pub fn save_checkpoint<T: Scalar>(path: impl AsRef<Path>, sae: &Sae<T>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(sae)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint<T: Scalar>(path: impl AsRef<Path>) -> Result<Sae<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sae::init_params;
    use proptest::prelude::*;

    fn perturbed(kind: ArchKind, seed: u64) -> Sae<f64> {
        let mut s = init_params::<f64>(kind, 3, 5, seed).unwrap();
        for (k, (_, t)) in s.tensors_mut().into_iter().enumerate() {
            for (j, v) in t.iter_mut().enumerate() {
                *v += (k * 31 + j) as f64 * 1e-3 - 0.01;
            }
        }
        s
    }

    #[test]
    fn header_layout() {
        let bytes = encode_checkpoint(&perturbed(ArchKind::GatedUntied, 1));
        assert_eq!(&bytes[..4], b"GSAE");
        assert_eq!(bytes[8], 2);
        assert_eq!(u32::from_le_bytes(bytes[9..13].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[13..17].try_into().unwrap()), 5);
        // w_gate 15, b_gate 5, r_mag 5, b_mag 5, w_mag 15, w_dec 15, b_dec 3.
        assert_eq!(bytes.len(), 17 + 8 * 63);
    }

    #[test]
    fn truncated_checkpoint_rejected() {
        let bytes = encode_checkpoint(&perturbed(ArchKind::Baseline, 1));
        assert!(matches!(
            decode_checkpoint::<f64>(&bytes[..bytes.len() - 8]),
            Err(Error::Format { .. })
        ));
        assert!(decode_checkpoint::<f64>(b"XXXX").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(seed: u64, kind in 0u8..3) {
            let kind = [ArchKind::Baseline, ArchKind::Gated, ArchKind::GatedUntied][kind as usize];
            let s = perturbed(kind, seed);
            let back: Sae<f64> = decode_checkpoint(&encode_checkpoint(&s)).unwrap();
            prop_assert_eq!(encode_checkpoint(&back), encode_checkpoint(&s));
            prop_assert_eq!(back, s);
        }
    }
}
