//! Baseline and gated sparse autoencoders for dictionary learning.
//!
//! The crate covers synthetic superposition data ([`data`]), the two SAE
//! architectures and their JumpReLU reading ([`sae`]), hand-derived backward
//! passes and the training recipe ([`training`]), evaluation metrics
//! ([`metrics`]) and inference-time sparse coding with gradient pursuit
//! ([`ito`]). Everything numeric is generic over [`Scalar`]; the aliases
//! below fix `f64`, the precision used by the `gdict` binary and the
//! checkpoint format.

pub mod cli;
pub mod data;
pub mod error;
pub mod ito;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod sae;
pub mod scalar;
pub mod training;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use scalar::Scalar;

pub type MatrixF64 = linalg::Matrix<f64>;
pub type BaselineSaeF64 = sae::BaselineSae<f64>;
pub type GatedSaeF64 = sae::GatedSae<f64>;
pub type SaeF64 = sae::Sae<f64>;
pub type GroundTruthModelF64 = data::GroundTruthModel<f64>;
pub type GradientSetF64 = training::GradientSet<f64>;
pub type TrainStateF64 = training::TrainState<f64>;
pub type MatrixF32 = linalg::Matrix<f32>;
pub type SaeF32 = sae::Sae<f32>;
