//! The bias-free EKGNet CNN: layers, forward/backward passes, noise-aware training.

pub mod adam;
pub mod checkpoint;
pub mod layers;
pub mod loss;
pub mod network;
pub mod noise;
pub mod params;
pub mod train;

pub use adam::{adam_step, lr_at, AdamState};
pub use checkpoint::{ArchInfo, Checkpoint, CheckpointMeta};
pub use loss::{cross_entropy, cross_entropy_grad, distill_loss, distill_loss_grad};
pub use network::{
    argmax, backward, forward, predict_class, predict_logits, softmax, ForwardCache,
};
pub use noise::{
    apply_output_leakage, sample_noisy_weights, NoiseGradient, NoiseModel, WeightSample,
};
pub use params::{arch, ModelParams, TENSOR_NAMES};
pub use train::{
    balanced_accuracy, history_csv, train, EpochRecord, TeacherLogits, TrainConfig, TrainOutcome,
};
