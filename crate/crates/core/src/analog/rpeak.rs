//! Gradient-threshold R-peak detector with a Schmitt-trigger comparator.

use serde::{Deserialize, Serialize};

/// Samples at 125 S/s in 0.2 s.
pub const REFRACTORY_SAMPLES: usize = 25;

/// Default `high` threshold as a fraction of the calibration window's largest rise.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hysteresis {
    /// The comparator switches high when the gradient exceeds this.
    pub high: f64,
    /// The comparator switches low when the gradient falls below this.
    pub low: f64,
}

impl Hysteresis {
    /// `high` at `fraction` of the largest sample-to-sample rise in `window`,
    /// `low` at half of `high`.
    pub fn calibrate(window: &[f64], fraction: f64) -> Self {
        let max_grad = window.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
        let high = fraction * max_grad;
        Self {
            high,
            low: high / 2.0,
        }
    }
}

/// Returns the sample indices at which R-peak events fire. The comparator
/// follows `gradient[i] = x[i] - x[i-1]`; an event fires on the second of two
/// consecutive high outputs, and no event fires within `refractory` samples
/// of the previous one.
pub fn hardware_rpeak_detect(
    samples: &[f64],
    thresholds: Hysteresis,
    refractory: usize,
) -> Vec<usize> {
    let mut events: Vec<usize> = Vec::new();
    let mut high = false;
    let mut run = 0usize;
    for i in 1..samples.len() {
        let g = samples[i] - samples[i - 1];
        if g > thresholds.high {
            high = true;
        } else if g < thresholds.low {
            high = false;
        }
        run = if high { run + 1 } else { 0 };
        if run == 2 && events.last().map_or(true, |&e| i - e >= refractory) {
            events.push(i);
        }
    }
    events
}
