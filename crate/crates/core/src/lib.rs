//! Hardware-aware ECG arrhythmia classification.

pub mod analog;
pub mod beat;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod quant;
pub mod synth;
pub mod wfdb;

pub use beat::{Beat, BeatSource, Task, BEAT_LEN};
pub use error::{Error, Result};
