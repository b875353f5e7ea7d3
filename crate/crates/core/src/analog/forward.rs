//! EKGNet dataflow executed through behavioral MAC units.
//!
//! Every node voltage is `v_ref` plus a positive multiple of the matching
//! float activation, so ReLU and max-pool act on the deviation from `v_ref`
//! and the final max function picks the same class as the float network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mac::{draw_mismatch, gauss, mac_centered, MacConfig};
use crate::error::{Error, Result};
use crate::model::arch::*;
use crate::model::{argmax, ModelParams};
use crate::pipeline::V_MIN;
use crate::quant::{decode, QuantizedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareOutput {
    /// 2-bit class code: index of the highest output node.
    pub class_code: u8,
    /// Output node voltages.
    pub node_voltages: Vec<f64>,
}

/// Static mismatch offsets of one simulated chip, one per weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipMismatch(pub ModelParams);

impl ChipMismatch {
    pub fn draw<R: Rng + ?Sized>(classes: usize, cfg: &MacConfig, rng: &mut R) -> Self {
        let n = ModelParams::zeros(classes).num_params();
        let flat = draw_mismatch(n, cfg, rng);
        Self(ModelParams::from_flat(classes, &flat).expect("matching parameter count"))
    }

    pub fn none(classes: usize) -> Self {
        Self(ModelParams::zeros(classes))
    }
}

/// A quantized model loaded into the simulated accelerator.
#[derive(Debug, Clone)]
pub struct AnalogNetwork {
    pub weights: ModelParams,
    pub cfg: MacConfig,
    /// Per-channel offset that removes the conv1 input-centering term.
    conv1_offset: Vec<f64>,
}

impl AnalogNetwork {
    pub fn new(qmodel: &QuantizedModel, cfg: &MacConfig) -> Result<Self> {
        cfg.validate()?;
        let weights = decode(qmodel)?;
        if weights.classes > 4 {
            return Err(Error::Shape(format!(
                "{} classes do not fit a 2-bit code",
                weights.classes
            )));
        }
        let cfg = cfg.clone();
        let shift = if cfg.conv1_offset_compensation {
            cfg.input_center - V_MIN
        } else {
            0.0
        };
        let conv1_offset = weights
            .conv1
            .chunks(KERNEL)
            .map(|k| cfg.gain * shift * k.iter().sum::<f64>())
            .collect();
        Ok(Self {
            weights,
            cfg,
            conv1_offset,
        })
    }

    pub fn classes(&self) -> usize {
        self.weights.classes
    }

    fn relu(&self, v: f64) -> f64 {
        self.cfg.v_ref + (v - self.cfg.v_ref).max(0.0)
    }

    /// Runs one beat given in volts.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        beat: &[f64],
        chip: &ChipMismatch,
        rng: &mut R,
    ) -> Result<HardwareOutput> {
        if beat.len() != INPUT_LEN {
            return Err(Error::Shape(format!(
                "beat has {} samples, expected {INPUT_LEN}",
                beat.len()
            )));
        }
        let cfg = &self.cfg;
        let w = &self.weights;
        let m = &chip.0;
        let centered: Vec<f64> = beat.iter().map(|x| x - cfg.input_center).collect();

        let mut c1 = vec![0.0; CONV1_LEN * CONV1_OUT];
        for t in 0..CONV1_LEN {
            let x = &centered[t * STRIDE..t * STRIDE + KERNEL];
            for co in 0..CONV1_OUT {
                let k = co * KERNEL..(co + 1) * KERNEL;
                let acc = mac_centered(&w.conv1[k.clone()], x, Some(&m.conv1[k]), cfg, rng)?;
                c1[t * CONV1_OUT + co] = self.relu(acc + self.conv1_offset[co]);
            }
        }

        let c1_dev: Vec<f64> = c1.iter().map(|v| v - cfg.v_ref).collect();
        let span = CONV1_OUT * KERNEL;
        let mut c2 = vec![0.0; CONV2_LEN];
        let mut window = vec![0.0; span];
        for (t, node) in c2.iter_mut().enumerate() {
            // reorder the time-major patch into the (channel, tap) order of the weights
            for ci in 0..CONV1_OUT {
                for k in 0..KERNEL {
                    window[ci * KERNEL + k] = c1_dev[(t * STRIDE + k) * CONV1_OUT + ci];
                }
            }
            let acc = mac_centered(&w.conv2, &window, Some(&m.conv2), cfg, rng)?;
            *node = self.relu(acc);
        }

        let pool: Vec<f64> = (0..POOL_LEN)
            .map(|t| {
                c2[t * POOL_STRIDE..t * POOL_STRIDE + POOL_KERNEL]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();

        let dense = |input: &[f64],
                     weights: &[f64],
                     mism: &[f64],
                     rows: usize,
                     rng: &mut R|
         -> Result<Vec<f64>> {
            let dev: Vec<f64> = input.iter().map(|v| v - cfg.v_ref).collect();
            let n = dev.len();
            (0..rows)
                .map(|r| {
                    mac_centered(
                        &weights[r * n..(r + 1) * n],
                        &dev,
                        Some(&mism[r * n..(r + 1) * n]),
                        cfg,
                        rng,
                    )
                })
                .collect()
        };
        let fc1 = dense(&pool, &w.fc1, &m.fc1, FC1_OUT, rng)?;
        let mut out = dense(&fc1, &w.fc2, &m.fc2, w.classes, rng)?;
        if let Some((mean, sd)) = cfg.output_leakage {
            for v in &mut out {
                *v += mean + gauss(sd, rng);
            }
        }
        Ok(HardwareOutput {
            class_code: argmax(&out) as u8,
            node_voltages: out,
        })
    }
}

/// One-shot inference: decodes `qmodel`, draws a chip and runs the beat.
pub fn analog_forward<R: Rng + ?Sized>(
    qmodel: &QuantizedModel,
    beat: &[f64],
    cfg: &MacConfig,
    rng: &mut R,
) -> Result<HardwareOutput> {
    let net = AnalogNetwork::new(qmodel, cfg)?;
    let chip = ChipMismatch::draw(net.classes(), &net.cfg, rng);
    net.forward(beat, &chip, rng)
}
