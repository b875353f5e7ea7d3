use super::params::ModelParams;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First/second moment estimates and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: ModelParams,
    pub v: ModelParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(classes: usize) -> Self {
        Self {
            m: ModelParams::zeros(classes),
            v: ModelParams::zeros(classes),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update with L2 decay folded into the gradient
/// (`g <- g + weight_decay * w`).
pub fn adam_step(
    state: &mut AdamState,
    params: &mut ModelParams,
    grads: &ModelParams,
    lr: f64,
    weight_decay: f64,
) {
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - BETA1.powi(t);
    let bc2 = 1.0 - BETA2.powi(t);
    let tensors = params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut().into_iter().zip(state.v.tensors_mut()));
    for ((w, g), (m, v)) in tensors {
        for i in 0..w.len() {
            let g = g[i] + weight_decay * w[i];
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            w[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
        }
    }
}

/// Step schedule: `lr0 * 0.5^floor(epoch / halve_every)`.
pub fn lr_at(epoch: usize, lr0: f64, halve_every: usize) -> f64 {
    if halve_every == 0 {
        return lr0;
    }
    lr0 * 0.5f64.powi((epoch / halve_every) as i32)
}
