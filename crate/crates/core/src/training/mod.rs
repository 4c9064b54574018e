//! Losses, gradients, optimizer and the training loop.

pub mod adam;
pub mod config;
pub mod grads;
pub mod rescale;
pub mod resample;
pub mod schedule;
pub mod trainer;

pub use adam::{adam_step, adam_update, constrained_step, project_decoder_grads, AdamParams, AdamState};
pub use config::{parse_kv, Ablation, TrainConfig};
pub use grads::{
    baseline_grads, baseline_loss, evaluate, gated_grads, gated_loss, BatchStats, Evaluation,
    GradientSet, LossBreakdown, LossOptions, Terms,
};
pub use rescale::{rescale_loss_grads, rescale_shift_fit, RescaleConfig, RescaleShift, RescaledSae};
pub use resample::{dead_features, resample_features, LossBuffer, RESAMPLE_ENCODER_SCALE};
pub use schedule::{lr_schedule, LrSchedule};
pub use trainer::{run, train, Architecture, StepReport, TrainOutput, TrainState, Trainer};
