//! 6-bit weight quantization and post-quantization fine-tuning.

mod codebook;
mod finetune;
mod model;

pub use codebook::{build_codebook, Codebook};
pub use finetune::{finetune, Direction, FinetuneOutcome, FinetuneStep};
pub use model::{decode, quantize, QuantTensor, QuantizedModel, WeightRef};

/// Default weight resolution.
pub const BITS: u32 = 6;
