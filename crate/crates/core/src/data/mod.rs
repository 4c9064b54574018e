//! Synthetic activation generators, activation files and shuffled streams.

pub mod format;
pub mod ground_truth;
pub mod shuffle;
pub mod source;
pub mod toy1d;

pub use format::{read_activations, read_all_activations, write_activations, ActivationReader};
pub use ground_truth::{
    gen_ground_truth, sample_batch, ActivationBatch, GroundTruthModel, MagnitudeDist, SparseCoeffs,
};
pub use shuffle::{shuffled_stream, ShuffledStream};
pub use source::{ActivationSource, MatrixSource, SyntheticSource};
pub use toy1d::{jump_relu_readout, readout_mse, relu_readout, toy1d_sample, Toy1dParams, Toy1dSample};
