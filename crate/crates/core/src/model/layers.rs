//! Bias-free layer primitives. Activations are time-major: `x[t * channels + c]`.

use crate::error::{Error, Result};

/// Output length of a valid (unpadded) sliding window.
pub fn out_len(len: usize, kernel: usize, stride: usize) -> Option<usize> {
    (len >= kernel && stride > 0).then(|| (len - kernel) / stride + 1)
}

/// Valid 1-D convolution without bias.
///
/// `input` is `len x c_in`, `weights` is `c_out x c_in x kernel`; the result is
/// `len' x c_out` with `len' = (len - kernel) / stride + 1`.
pub fn conv1d(
    input: &[f64],
    c_in: usize,
    weights: &[f64],
    c_out: usize,
    kernel: usize,
    stride: usize,
) -> Result<Vec<f64>> {
    if c_in == 0 || input.len() % c_in != 0 {
        return Err(Error::Shape(format!(
            "input of {} values is not a multiple of {c_in} channels",
            input.len()
        )));
    }
    if weights.len() != c_out * c_in * kernel {
        return Err(Error::Shape(format!(
            "conv weights have {} values, expected {c_out}x{c_in}x{kernel}",
            weights.len()
        )));
    }
    let len = input.len() / c_in;
    let l_out = out_len(len, kernel, stride)
        .ok_or_else(|| Error::Shape(format!("input length {len} shorter than kernel {kernel}")))?;
    let mut out = vec![0.0; l_out * c_out];
    for t in 0..l_out {
        let base = t * stride;
        for co in 0..c_out {
            let w = &weights[co * c_in * kernel..(co + 1) * c_in * kernel];
            let mut acc = 0.0;
            for ci in 0..c_in {
                for k in 0..kernel {
                    acc += w[ci * kernel + k] * input[(base + k) * c_in + ci];
                }
            }
            out[t * c_out + co] = acc;
        }
    }
    Ok(out)
}

/// Gradients of [`conv1d`] with respect to its weights and input.
pub(crate) fn conv1d_backward(
    input: &[f64],
    c_in: usize,
    weights: &[f64],
    c_out: usize,
    kernel: usize,
    stride: usize,
    d_out: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let l_out = d_out.len() / c_out;
    let mut d_w = vec![0.0; weights.len()];
    let mut d_in = vec![0.0; input.len()];
    for t in 0..l_out {
        let base = t * stride;
        for co in 0..c_out {
            let g = d_out[t * c_out + co];
            if g == 0.0 {
                continue;
            }
            for ci in 0..c_in {
                for k in 0..kernel {
                    let wi = co * c_in * kernel + ci * kernel + k;
                    let xi = (base + k) * c_in + ci;
                    d_w[wi] += g * input[xi];
                    d_in[xi] += g * weights[wi];
                }
            }
        }
    }
    (d_w, d_in)
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Single-channel max pooling. Ties resolve to the earliest index.
/// Returns the pooled values and the input index each came from.
pub fn maxpool1d(input: &[f64], kernel: usize, stride: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    let l_out = out_len(input.len(), kernel, stride).ok_or_else(|| {
        Error::Shape(format!(
            "input length {} shorter than pool kernel {kernel}",
            input.len()
        ))
    })?;
    let mut vals = Vec::with_capacity(l_out);
    let mut idx = Vec::with_capacity(l_out);
    for t in 0..l_out {
        let start = t * stride;
        let mut best = start;
        for i in start + 1..start + kernel {
            if input[i] > input[best] {
                best = i;
            }
        }
        vals.push(input[best]);
        idx.push(best);
    }
    Ok((vals, idx))
}

/// `weights` (`m x n`, row-major) times `input` (`n`).
pub fn dense(input: &[f64], weights: &[f64], m: usize) -> Result<Vec<f64>> {
    let n = input.len();
    if weights.len() != m * n {
        return Err(Error::Shape(format!(
            "dense weights have {} values, expected {m}x{n}",
            weights.len()
        )));
    }
    Ok(weights
        .chunks_exact(n.max(1))
        .take(m)
        .map(|row| row.iter().zip(input).map(|(w, x)| w * x).sum())
        .collect())
}

pub(crate) fn dense_backward(
    input: &[f64],
    weights: &[f64],
    d_out: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = input.len();
    let mut d_w = vec![0.0; weights.len()];
    let mut d_in = vec![0.0; n];
    for (j, &g) in d_out.iter().enumerate() {
        let row = &weights[j * n..(j + 1) * n];
        for i in 0..n {
            d_w[j * n + i] = g * input[i];
            d_in[i] += g * row[i];
        }
    }
    (d_w, d_in)
}
