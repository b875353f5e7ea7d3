//! Hardware noise model used during training.
//!
//! Each weight (in volts) is perturbed as `w + sigma(w) * eps` with
//! `sigma(w) = a2 w^2 + a1 w + a0` and `eps ~ N(0, 1)`; the logits receive
//! additive leakage drawn from `N(leakage_mean, leakage_sd^2)`.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::params::ModelParams;

/// How the weight-noise reparameterization is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseGradient {
    /// `d w~/d w = 1 + sigma'(w) * eps`.
    Reparameterized,
    /// Treat `sigma` as a constant: `d w~/d w = 1`.
    StraightThrough,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// `(a2, a1, a0)` in volts.
    pub sigma_coeffs: [f64; 3],
    pub leakage_mean: f64,
    /// Standard deviation of the output leakage.
    pub leakage_sd: f64,
    pub weight_noise: bool,
    pub output_leakage: bool,
    pub gradient: NoiseGradient,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_coeffs: [0.0021090, 0.0002000, 0.002355],
            leakage_mean: 0.0005,
            leakage_sd: 0.0001,
            weight_noise: true,
            output_leakage: true,
            gradient: NoiseGradient::Reparameterized,
        }
    }
}

impl NoiseModel {
    /// All noise switched off.
    pub fn disabled() -> Self {
        Self {
            weight_noise: false,
            output_leakage: false,
            ..Self::default()
        }
    }

    pub fn sigma(&self, w: f64) -> f64 {
        let [a2, a1, a0] = self.sigma_coeffs;
        a2 * w * w + a1 * w + a0
    }

    pub fn sigma_prime(&self, w: f64) -> f64 {
        let [a2, a1, _] = self.sigma_coeffs;
        2.0 * a2 * w + a1
    }

    /// Perturbs weights with the given standard-normal draws (same shapes as `params`).
    pub fn perturb(&self, params: &ModelParams, eps: &ModelParams) -> ModelParams {
        params.zip_map(eps, |w, e| w + self.sigma(w) * e)
    }

    /// Maps gradients with respect to the perturbed weights back to the clean weights.
    pub fn chain_gradient(
        &self,
        clean: &ModelParams,
        eps: &ModelParams,
        grad_noisy: &ModelParams,
    ) -> ModelParams {
        match self.gradient {
            NoiseGradient::StraightThrough => grad_noisy.clone(),
            NoiseGradient::Reparameterized => {
                let factor = clean.zip_map(eps, |w, e| 1.0 + self.sigma_prime(w) * e);
                grad_noisy.zip_map(&factor, |g, f| g * f)
            }
        }
    }
}

/// A draw of weight noise: the standard-normal `eps` and the perturbed weights.
#[derive(Debug, Clone)]
pub struct WeightSample {
    pub eps: ModelParams,
    pub weights: ModelParams,
}

/// Draws `w~ = w + sigma(w) * eps` with independent `eps` per weight.
/// With weight noise disabled `eps` is zero and the weights are unchanged.
pub fn sample_noisy_weights<R: Rng + ?Sized>(
    params: &ModelParams,
    noise: &NoiseModel,
    rng: &mut R,
) -> WeightSample {
    let mut eps = ModelParams::zeros(params.classes);
    if noise.weight_noise {
        eps.for_each_mut(|e| *e = StandardNormal.sample(rng));
    }
    WeightSample {
        weights: noise.perturb(params, &eps),
        eps,
    }
}

/// Adds leakage noise to each logit when enabled.
pub fn apply_output_leakage<R: Rng + ?Sized>(logits: &mut [f64], noise: &NoiseModel, rng: &mut R) {
    if !noise.output_leakage {
        return;
    }
    if noise.leakage_sd > 0.0 {
        let dist =
            Normal::new(noise.leakage_mean, noise.leakage_sd).expect("finite leakage parameters");
        for z in logits.iter_mut() {
            *z += dist.sample(rng);
        }
    } else {
        for z in logits.iter_mut() {
            *z += noise.leakage_mean;
        }
    }
}
