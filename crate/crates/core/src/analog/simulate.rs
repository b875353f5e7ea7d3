//! Monte Carlo accuracy of the simulated accelerator over noise seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forward::{AnalogNetwork, ChipMismatch};
use crate::beat::Beat;
use crate::error::Result;
use crate::metrics::{evaluate, Metrics};
use crate::pipeline::scale_to_voltage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub seeds: Vec<u64>,
    pub per_seed_balanced_accuracy: Vec<f64>,
    pub mean_balanced_accuracy: f64,
    /// Sample standard deviation across seeds (0 for a single seed).
    pub sd_balanced_accuracy: f64,
    /// Confusion matrices summed over seeds.
    pub confusion: Vec<Vec<u64>>,
}

/// One simulated chip: mismatch and per-inference noise all come from `seed`.
/// Beats are in the model domain and are mapped onto the input voltage range.
pub fn simulate_seed(net: &AnalogNetwork, beats: &[Beat], seed: u64) -> Result<Metrics> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chip = ChipMismatch::draw(net.classes(), &net.cfg, &mut rng);
    evaluate(
        |b| {
            let volts = scale_to_voltage(&b.samples)?;
            Ok(usize::from(
                net.forward(&volts, &chip, &mut rng)?.class_code,
            ))
        },
        beats,
        net.classes(),
    )
}

pub fn simulate(net: &AnalogNetwork, beats: &[Beat], seeds: &[u64]) -> Result<SimulationSummary> {
    let c = net.classes();
    let mut confusion = vec![vec![0u64; c]; c];
    let mut accs = Vec::with_capacity(seeds.len());
    for &s in seeds {
        let m = simulate_seed(net, beats, s)?;
        for (row, add) in confusion.iter_mut().zip(&m.confusion) {
            for (a, b) in row.iter_mut().zip(add) {
                *a += b;
            }
        }
        log::info!(
            "analog seed {s}: balanced accuracy {:.4}",
            m.balanced_accuracy
        );
        accs.push(m.balanced_accuracy);
    }
    let n = accs.len() as f64;
    let mean = accs.iter().sum::<f64>() / n;
    let sd = if accs.len() > 1 {
        (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SimulationSummary {
        seeds: seeds.to_vec(),
        per_seed_balanced_accuracy: accs,
        mean_balanced_accuracy: mean,
        sd_balanced_accuracy: sd,
        confusion,
    })
}
