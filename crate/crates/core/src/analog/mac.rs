//! Behavioral sequential multiply-accumulate unit.
//!
//! The accumulator starts at `v_ref` and adds
//! `gain * (w + eta_w + m) * ((x - input_center) + eta_x) + leakage_per_step`
//! per step, where `eta_w` and `eta_x` are fresh Gaussian draws and `m` is a
//! static per-weight mismatch.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MacConfig {
    /// Accumulator baseline (V).
    pub v_ref: f64,
    /// Current-to-voltage conversion factor.
    pub gain: f64,
    /// Weight-path noise as a fraction of `weight_range`.
    pub sigma_w_rel: f64,
    /// Input-path noise as a fraction of `input_range`.
    pub sigma_in_rel: f64,
    /// Static per-weight mismatch as a fraction of `weight_range`.
    pub sigma_kernel_rel: f64,
    /// Added on every accumulation step (V).
    pub leakage_per_step: f64,
    /// Input voltage treated as zero signal (V).
    pub input_center: f64,
    /// Full-scale input span (V).
    pub input_range: f64,
    /// Full-scale span of the weight DAC (V); weight noise scales with it.
    pub weight_range: f64,
    /// Mean and standard deviation of noise added to the output nodes (V).
    pub output_leakage: Option<(f64, f64)>,
    /// Adds `gain * (input_center - 0.6 V) * sum(w)` to each conv1 output so
    /// a 0.6 V input behaves as zero signal.
    pub conv1_offset_compensation: bool,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self {
            v_ref: 0.5,
            gain: 1.0,
            sigma_w_rel: 0.0036,
            sigma_in_rel: 0.0062,
            sigma_kernel_rel: 0.0002,
            leakage_per_step: 0.0,
            input_center: 0.65,
            input_range: 0.1,
            weight_range: 1.0,
            output_leakage: Some((0.0005, 0.0001)),
            conv1_offset_compensation: true,
        }
    }
}

impl MacConfig {
    /// Same operating point with every noise and leakage source off.
    pub fn noiseless(&self) -> Self {
        Self {
            sigma_w_rel: 0.0,
            sigma_in_rel: 0.0,
            sigma_kernel_rel: 0.0,
            leakage_per_step: 0.0,
            output_leakage: None,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [self.sigma_w_rel, self.sigma_in_rel, self.sigma_kernel_rel];
        if sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::Config(
                "noise sigmas must be finite and non-negative".into(),
            ));
        }
        if !(self.gain > 0.0) {
            return Err(Error::Config("gain must be positive".into()));
        }
        if !(self.weight_range > 0.0) || !(self.input_range > 0.0) {
            return Err(Error::Config(
                "weight_range and input_range must be positive".into(),
            ));
        }
        if let Some((_, sd)) = self.output_leakage {
            if !(sd >= 0.0) {
                return Err(Error::Config(
                    "output leakage sd must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn sigma_w(&self) -> f64 {
        self.sigma_w_rel * self.weight_range
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_in_rel * self.input_range
    }

    pub fn sigma_kernel(&self) -> f64 {
        self.sigma_kernel_rel * self.weight_range
    }
}

/// Zero-mean Gaussian draw that consumes no randomness when `sd == 0`.
pub(crate) fn gauss<R: Rng + ?Sized>(sd: f64, rng: &mut R) -> f64 {
    if sd > 0.0 {
        Normal::new(0.0, sd).expect("finite sd").sample(rng)
    } else {
        0.0
    }
}

/// Draws static mismatch offsets for `n` weights.
pub fn draw_mismatch<R: Rng + ?Sized>(n: usize, cfg: &MacConfig, rng: &mut R) -> Vec<f64> {
    let sd = cfg.sigma_kernel();
    (0..n).map(|_| gauss(sd, rng)).collect()
}

/// Accumulates over inputs that are already centered (signal deviations).
pub fn mac_centered<R: Rng + ?Sized>(
    weights: &[f64],
    centered: &[f64],
    mismatch: Option<&[f64]>,
    cfg: &MacConfig,
    rng: &mut R,
) -> Result<f64> {
    if weights.len() != centered.len() || mismatch.is_some_and(|m| m.len() != weights.len()) {
        return Err(Error::Shape(format!(
            "MAC with {} weights and {} inputs",
            weights.len(),
            centered.len()
        )));
    }
    let (sw, sx) = (cfg.sigma_w(), cfg.sigma_x());
    let mut acc = cfg.v_ref;
    for (i, (&w, &x)) in weights.iter().zip(centered).enumerate() {
        let m = mismatch.map_or(0.0, |m| m[i]);
        let w_eff = w + m + gauss(sw, rng);
        let x_eff = x + gauss(sx, rng);
        acc += cfg.gain * w_eff * x_eff + cfg.leakage_per_step;
    }
    Ok(acc)
}

/// One sequential MAC over input voltages. Mismatch is drawn fresh for
/// every call, as if each call ran on a different kernel position.
pub fn mac_sequence<R: Rng + ?Sized>(
    weights: &[f64],
    inputs: &[f64],
    cfg: &MacConfig,
    rng: &mut R,
) -> Result<f64> {
    let centered: Vec<f64> = inputs.iter().map(|x| x - cfg.input_center).collect();
    let mismatch = draw_mismatch(weights.len(), cfg, rng);
    mac_centered(weights, &centered, Some(&mismatch), cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_dot_product() {
        let cfg = MacConfig {
            v_ref: 0.0,
            gain: 1.0,
            ..MacConfig::default().noiseless()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = [0.2, -0.4, 0.1];
        let x = [0.70, 0.60, 0.65];
        let got = mac_sequence(&w, &x, &cfg, &mut rng).unwrap();
        let expected = 0.2 * 0.05 + (-0.4) * (-0.05) + 0.1 * 0.0;
        assert!((got - expected).abs() < 1e-15);
        let zero =
            mac_sequence(&[0.0; 3], &x, &MacConfig::default().noiseless(), &mut rng).unwrap();
        assert_eq!(zero, 0.5);
        assert!(mac_sequence(&w, &x[..2], &cfg, &mut rng).is_err());
    }

    #[test]
    fn permutation_invariant_when_noiseless() {
        let cfg = MacConfig::default().noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..12).map(|_| rng.gen_range(0.6..0.7)).collect();
        let a = mac_sequence(&w, &x, &cfg, &mut rng).unwrap();
        let (wr, xr): (Vec<f64>, Vec<f64>) = w
            .iter()
            .rev()
            .zip(x.iter().rev())
            .map(|(a, b)| (*a, *b))
            .unzip();
        let b = mac_sequence(&wr, &xr, &cfg, &mut rng).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}
