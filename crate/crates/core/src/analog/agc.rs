//! Automatic gain control by an ascending gain sweep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgcResult {
    pub gain: f64,
    /// No gain reached the target; `gain` is the largest available.
    pub saturated: bool,
}

/// Picks the first gain of the ascending `ladder` whose amplified
/// peak-to-valley amplitude reaches `target`.
pub fn agc(signal: &[f64], target: f64, ladder: &[f64]) -> Result<AgcResult> {
    if ladder.is_empty() {
        return Err(Error::invalid("empty gain ladder"));
    }
    if ladder.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::invalid("gain ladder must be strictly ascending"));
    }
    let peak = signal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let valley = signal.iter().copied().fold(f64::INFINITY, f64::min);
    let swing = if signal.is_empty() {
        0.0
    } else {
        peak - valley
    };
    let needed = target * (1.0 - 1e-12);
    for &g in ladder {
        if swing * g >= needed {
            return Ok(AgcResult {
                gain: g,
                saturated: false,
            });
        }
    }
    Ok(AgcResult {
        gain: *ladder.last().expect("non-empty ladder"),
        saturated: true,
    })
}
