//! Monte Carlo NRMSE characterization of a single MAC step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mac::{mac_sequence, MacConfig};
use crate::error::{Error, Result};

pub const MIN_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NrmseCi {
    pub weight_path: Interval,
    pub input_path: Interval,
    pub kernel: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationReport {
    pub cfg: MacConfig,
    pub trials: usize,
    pub seed: u64,
    pub nrmse_weight_path: f64,
    pub nrmse_input_path: f64,
    pub nrmse_kernel: f64,
    /// 95% intervals from the sampling distribution of the mean squared error.
    pub ci: NrmseCi,
}

struct Sweep {
    nrmse: f64,
    ci: Interval,
}

/// RMSE of `trials` single-step outputs against the ideal product, divided by
/// the full-scale output range of the sweep.
fn sweep(
    cfg: &MacConfig,
    trials: usize,
    rng: &mut ChaCha8Rng,
    range: f64,
    mut operands: impl FnMut(&mut ChaCha8Rng) -> (f64, f64),
) -> Result<Sweep> {
    let mut sse = 0.0;
    for _ in 0..trials {
        let (w, x) = operands(rng);
        let ideal = cfg.v_ref + cfg.gain * w * (x - cfg.input_center);
        let got = mac_sequence(&[w], &[x], cfg, rng)?;
        sse += (got - ideal).powi(2);
    }
    let mse = sse / trials as f64;
    let half = 1.96 * (2.0 / trials as f64).sqrt();
    Ok(Sweep {
        nrmse: mse.sqrt() / range,
        ci: Interval {
            lo: (mse * (1.0 - half)).max(0.0).sqrt() / range,
            hi: (mse * (1.0 + half)).sqrt() / range,
        },
    })
}

/// Characterizes each non-ideality with only that source enabled:
/// weights swept at a fixed full-scale input, inputs swept at a fixed
/// full-scale weight, and fresh kernel positions at a fixed operating point.
pub fn characterize_mac(
    cfg: &MacConfig,
    trials: usize,
    seed: u64,
) -> Result<CharacterizationReport> {
    cfg.validate()?;
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!(
            "at least {MIN_TRIALS} trials required, got {trials}"
        )));
    }
    let quiet = MacConfig {
        sigma_w_rel: 0.0,
        sigma_in_rel: 0.0,
        sigma_kernel_rel: 0.0,
        leakage_per_step: 0.0,
        output_leakage: None,
        ..cfg.clone()
    };
    let w_max = cfg.weight_range / 2.0;
    let x_hi = cfg.input_center + cfg.input_range / 2.0;
    let x_lo = cfg.input_center - cfg.input_range / 2.0;
    let weight_span = cfg.gain * cfg.weight_range * (x_hi - cfg.input_center).abs();
    let input_span = cfg.gain * w_max * cfg.input_range;

    let stream = |k: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(k);
        r
    };
    let w_cfg = MacConfig {
        sigma_w_rel: cfg.sigma_w_rel,
        ..quiet.clone()
    };
    let weight = sweep(&w_cfg, trials, &mut stream(1), weight_span, |r| {
        (r.gen_range(-w_max..=w_max), x_hi)
    })?;
    let x_cfg = MacConfig {
        sigma_in_rel: cfg.sigma_in_rel,
        ..quiet.clone()
    };
    let input = sweep(&x_cfg, trials, &mut stream(2), input_span, |r| {
        (w_max, r.gen_range(x_lo..=x_hi))
    })?;
    let k_cfg = MacConfig {
        sigma_kernel_rel: cfg.sigma_kernel_rel,
        ..quiet
    };
    let kernel = sweep(&k_cfg, trials, &mut stream(3), weight_span, |_| {
        (w_max / 2.0, x_hi)
    })?;

    Ok(CharacterizationReport {
        cfg: cfg.clone(),
        trials,
        seed,
        nrmse_weight_path: weight.nrmse,
        nrmse_input_path: input.nrmse,
        nrmse_kernel: kernel.nrmse,
        ci: NrmseCi {
            weight_path: weight.ci,
            input_path: input.ci,
            kernel: kernel.ci,
        },
    })
}
