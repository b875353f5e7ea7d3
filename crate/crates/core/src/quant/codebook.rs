use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Uniform symmetric grid of `2^bits` analog weight levels over `[-w_max, w_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub bits: u32,
    pub w_max: f64,
    pub levels: Vec<f64>,
    pub step: f64,
}

impl Codebook {
    pub fn new(w_max: f64, bits: u32) -> Result<Self> {
        if !(w_max > 0.0) || !w_max.is_finite() {
            return Err(Error::invalid(format!(
                "codebook range must be positive and finite, got {w_max}"
            )));
        }
        if !(1..=16).contains(&bits) {
            return Err(Error::Config(format!("unsupported bit width {bits}")));
        }
        let top = (1u32 << bits) - 1;
        let t = f64::from(top);
        // (2k - top) / top is exactly antisymmetric in k, so the grid is symmetric about 0
        let levels = (0..=top)
            .map(|k| w_max * (2.0 * f64::from(k) - t) / t)
            .collect();
        Ok(Self {
            bits,
            w_max,
            levels,
            step: 2.0 * w_max / t,
        })
    }

    pub fn max_code(&self) -> u16 {
        (self.levels.len() - 1) as u16
    }

    /// Nearest level; an exact midpoint goes to the lower code.
    pub fn encode(&self, w: f64) -> u16 {
        let max = self.max_code();
        let pos = (w + self.w_max) / self.step;
        if !(pos > 0.0) {
            return 0;
        }
        let lo = (pos.floor() as u64).min(u64::from(max)) as u16;
        if lo == max {
            return max;
        }
        let d_lo = w - self.levels[lo as usize];
        let d_hi = self.levels[lo as usize + 1] - w;
        if d_lo <= d_hi {
            lo
        } else {
            lo + 1
        }
    }

    pub fn level(&self, code: u16) -> Result<f64> {
        self.levels
            .get(code as usize)
            .copied()
            .ok_or_else(|| Error::invalid(format!("code {code} outside 0..={}", self.max_code())))
    }
}

/// One global codebook spanning the largest weight magnitude of the model.
pub fn build_codebook(params: &ModelParams, bits: u32) -> Result<Codebook> {
    params.validate()?;
    let w_max = params.max_abs();
    if w_max == 0.0 {
        return Err(Error::invalid(
            "cannot build a codebook for an all-zero model",
        ));
    }
    Codebook::new(w_max, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let cb = Codebook::new(0.63, 6).unwrap();
        assert_eq!(cb.levels.len(), 64);
        assert!((cb.step - 0.02).abs() < 1e-15);
        assert_eq!(cb.levels[0], -0.63);
        assert_eq!(cb.levels[63], 0.63);
        for k in 0..64 {
            assert_eq!(cb.levels[k], -cb.levels[63 - k]);
        }
        for pair in cb.levels.windows(2) {
            assert!((pair[1] - pair[0] - cb.step).abs() < 1e-12);
        }
    }

    #[test]
    fn encode_rules() {
        let cb = Codebook::new(0.63, 6).unwrap();
        for (k, &l) in cb.levels.iter().enumerate() {
            assert_eq!(cb.encode(l) as usize, k);
        }
        let mid = 0.5 * (cb.levels[10] + cb.levels[11]);
        assert_eq!(cb.encode(mid), 10);
        assert_eq!(cb.encode(-5.0), 0);
        assert_eq!(cb.encode(5.0), 63);
        assert!(cb.level(64).is_err());
    }

    #[test]
    fn all_zero_model_rejected() {
        assert!(build_codebook(&ModelParams::zeros(4), 6).is_err());
    }
}
