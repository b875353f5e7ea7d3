use super::layers::{conv1d, conv1d_backward, dense, dense_backward, maxpool1d, relu};
use super::params::{arch::*, ModelParams};
use crate::error::{Error, Result};

/// Intermediate activations of one forward pass, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub input: Vec<f64>,
    /// `87 x 6`, time-major.
    pub conv1_pre: Vec<f64>,
    pub conv1_post: Vec<f64>,
    /// 41 values.
    pub conv2_pre: Vec<f64>,
    pub conv2_post: Vec<f64>,
    /// 18 pooled values and the conv2 index each came from.
    pub pool: Vec<f64>,
    pub pool_argmax: Vec<usize>,
    /// 12 values.
    pub fc1: Vec<f64>,
    pub logits: Vec<f64>,
}

/// conv(6,s2) -> ReLU -> conv(6,s2) -> ReLU -> maxpool(6,s2) -> fc(18->12) -> fc(12->C).
///
/// Returns raw logits; softmax belongs to the loss and to evaluation.
pub fn forward(params: &ModelParams, beat: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    if beat.len() != INPUT_LEN {
        return Err(Error::Shape(format!(
            "beat has {} samples, expected {INPUT_LEN}",
            beat.len()
        )));
    }
    let conv1_pre = conv1d(beat, 1, &params.conv1, CONV1_OUT, KERNEL, STRIDE)?;
    let conv1_post = relu(&conv1_pre);
    let conv2_pre = conv1d(
        &conv1_post,
        CONV1_OUT,
        &params.conv2,
        CONV2_OUT,
        KERNEL,
        STRIDE,
    )?;
    let conv2_post = relu(&conv2_pre);
    let (pool, pool_argmax) = maxpool1d(&conv2_post, POOL_KERNEL, POOL_STRIDE)?;
    let fc1 = dense(&pool, &params.fc1, FC1_OUT)?;
    let logits = dense(&fc1, &params.fc2, params.classes)?;
    let cache = ForwardCache {
        input: beat.to_vec(),
        conv1_pre,
        conv1_post,
        conv2_pre,
        conv2_post,
        pool,
        pool_argmax,
        fc1,
        logits: logits.clone(),
    };
    Ok((logits, cache))
}

/// Logits only.
pub fn predict_logits(params: &ModelParams, beat: &[f64]) -> Result<Vec<f64>> {
    forward(params, beat).map(|(l, _)| l)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict_class(params: &ModelParams, beat: &[f64]) -> Result<usize> {
    predict_logits(params, beat).map(|l| argmax(&l))
}

/// Numerically stable softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Gradients of a scalar loss with respect to the weights that produced `cache`.
pub fn backward(
    params: &ModelParams,
    cache: &ForwardCache,
    d_logits: &[f64],
) -> Result<ModelParams> {
    if d_logits.len() != params.classes || cache.logits.len() != params.classes {
        return Err(Error::Shape(format!(
            "upstream gradient has {} entries, model has {} classes",
            d_logits.len(),
            params.classes
        )));
    }
    if cache.input.len() != INPUT_LEN || cache.pool_argmax.len() != POOL_LEN {
        return Err(Error::Shape(
            "forward cache does not match the architecture".into(),
        ));
    }
    let (d_fc2, d_h1) = dense_backward(&cache.fc1, &params.fc2, d_logits);
    let (d_fc1, d_pool) = dense_backward(&cache.pool, &params.fc1, &d_h1);

    let mut d_conv2_post = vec![0.0; CONV2_LEN];
    for (&i, &g) in cache.pool_argmax.iter().zip(&d_pool) {
        d_conv2_post[i] += g;
    }
    let d_conv2_pre: Vec<f64> = d_conv2_post
        .iter()
        .zip(&cache.conv2_pre)
        .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
        .collect();
    let (d_conv2, d_conv1_post) = conv1d_backward(
        &cache.conv1_post,
        CONV1_OUT,
        &params.conv2,
        CONV2_OUT,
        KERNEL,
        STRIDE,
        &d_conv2_pre,
    );
    let d_conv1_pre: Vec<f64> = d_conv1_post
        .iter()
        .zip(&cache.conv1_pre)
        .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
        .collect();
    let (d_conv1, _) = conv1d_backward(
        &cache.input,
        1,
        &params.conv1,
        CONV1_OUT,
        KERNEL,
        STRIDE,
        &d_conv1_pre,
    );

    Ok(ModelParams {
        conv1: d_conv1,
        conv2: d_conv2,
        fc1: d_fc1,
        fc2: d_fc2,
        classes: params.classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_input_gives_uniform_softmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = ModelParams::init_uniform(4, 0.5, &mut rng);
        let (logits, _) = forward(&p, &[0.0; INPUT_LEN]).unwrap();
        assert_eq!(logits, vec![0.0; 4]);
        assert_eq!(softmax(&logits), vec![0.25; 4]);
    }

    #[test]
    fn dimension_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = ModelParams::init_uniform(2, 0.5, &mut rng);
        let (_, c) = forward(&p, &[0.3; INPUT_LEN]).unwrap();
        assert_eq!(c.conv1_pre.len(), 87 * 6);
        assert_eq!(c.conv2_pre.len(), 41);
        assert_eq!(c.pool.len(), 18);
        assert_eq!(c.fc1.len(), 12);
        assert_eq!(c.logits.len(), 2);
        assert!(forward(&p, &[0.3; 177]).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = ModelParams::init_uniform(4, 0.5, &mut rng);
        let x: Vec<f64> = (0..INPUT_LEN)
            .map(|i| (i as f64 * 0.1).sin().abs())
            .collect();
        let (_, c) = forward(&p, &x).unwrap();
        let g = backward(&p, &c, &[0.0; 4]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
        assert!(backward(&p, &c, &[0.0; 3]).is_err());
    }

    #[test]
    fn pool_gradient_lands_on_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut p = ModelParams::init_uniform(4, 0.5, &mut rng);
        p.conv1.iter_mut().for_each(|w| *w = w.abs());
        p.conv2.iter_mut().for_each(|w| *w = w.abs());
        let x: Vec<f64> = (0..INPUT_LEN)
            .map(|i| 0.5 + 0.5 * (i as f64 * 0.37).sin())
            .collect();
        let (_, c) = forward(&p, &x).unwrap();
        // fc1 gradient row j is d_h1[j] * pool; pool values come from the argmax positions
        for (t, &i) in c.pool_argmax.iter().enumerate() {
            assert_eq!(c.pool[t], c.conv2_post[i]);
            let w = &c.conv2_post[2 * t..2 * t + 6];
            assert!(w.iter().all(|&v| v <= c.conv2_post[i]));
        }
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1000.0, -1000.0, 3.0, 2.5]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&v| v >= 0.0));
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }
}
