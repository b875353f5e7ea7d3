//! Beat extraction: resample to 125 Hz, cut 10 s windows, min-max normalize,
//! find R-peaks, segment 1.2 T beats, and build balanced splits.

mod extract;
mod rpeak;
mod split;

pub use extract::{
    extract_beats, extract_record, BeatLabeler, ExtractStats, PipelineConfig, WindowContext,
};
pub use rpeak::{find_rpeaks, RPEAK_THRESHOLD};
pub use split::{split_and_oversample, Split, SplitConfig, SplitManifest};

use crate::error::{Error, Result};

/// Target sampling rate of the pipeline.
pub const TARGET_FS: f64 = 125.0;
/// Samples per 10 s window at 125 Hz.
pub const WINDOW_LEN: usize = 1250;

/// Hardware input range in volts.
pub const V_MIN: f64 = 0.6;
pub const V_MAX: f64 = 0.7;

/// Linear-interpolation resampling from `fs_in` to `fs_out`.
///
/// Output sample `j` is the input interpolated at time `j / fs_out`; positions
/// past the final input sample hold its value.
pub fn resample(signal: &[f64], fs_in: f64, fs_out: f64) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::invalid("cannot resample an empty signal"));
    }
    if !(fs_in > 0.0 && fs_out > 0.0) {
        return Err(Error::invalid(format!(
            "non-positive sampling rate ({fs_in} -> {fs_out})"
        )));
    }
    if fs_out > fs_in {
        return Err(Error::invalid(format!(
            "upsampling {fs_in} -> {fs_out} Hz is not supported"
        )));
    }
    if fs_in == fs_out {
        return Ok(signal.to_vec());
    }
    let n_out = (signal.len() as f64 * fs_out / fs_in).round() as usize;
    let ratio = fs_in / fs_out;
    let last = signal.len() - 1;
    Ok((0..n_out)
        .map(|j| {
            let pos = j as f64 * ratio;
            let i = pos.floor() as usize;
            if i >= last {
                return signal[last];
            }
            let frac = pos - i as f64;
            signal[i] + frac * (signal[i + 1] - signal[i])
        })
        .collect())
}

/// Consecutive non-overlapping 1250-sample windows; the remainder is dropped.
pub fn window_10s(signal: &[f64]) -> Vec<&[f64]> {
    signal.chunks_exact(WINDOW_LEN).collect()
}

/// Min-max normalized window. `degenerate` is set for constant input,
/// in which case the samples are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub samples: Vec<f64>,
    pub degenerate: bool,
}

pub fn normalize(window: &[f64]) -> Normalized {
    let (min, max) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = max - min;
    if window.is_empty() || !(range > 0.0) || !range.is_finite() {
        return Normalized {
            samples: vec![0.0; window.len()],
            degenerate: true,
        };
    }
    Normalized {
        samples: window.iter().map(|v| (v - min) / range).collect(),
        degenerate: false,
    }
}

/// Maps model-domain samples in [0, 1] onto the 0.6-0.7 V hardware input range.
pub fn scale_to_voltage(beat: &[f64]) -> Result<Vec<f64>> {
    beat.iter()
        .map(|&x| {
            if (0.0..=1.0).contains(&x) {
                Ok(V_MIN + (V_MAX - V_MIN) * x)
            } else {
                Err(Error::invalid(format!("sample {x} outside [0, 1]")))
            }
        })
        .collect()
}
