use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed EKGNet dimensions.
pub mod arch {
    pub const INPUT_LEN: usize = 178;
    pub const KERNEL: usize = 6;
    pub const STRIDE: usize = 2;
    pub const CONV1_OUT: usize = 6;
    pub const CONV1_LEN: usize = 87;
    pub const CONV2_OUT: usize = 1;
    pub const CONV2_LEN: usize = 41;
    pub const POOL_KERNEL: usize = 6;
    pub const POOL_STRIDE: usize = 2;
    pub const POOL_LEN: usize = 18;
    pub const FC1_OUT: usize = 12;
}

use arch::*;

/// Tensor names in canonical order.
pub const TENSOR_NAMES: [&str; 4] = ["conv1", "conv2", "fc1", "fc2"];

/// The four bias-free weight tensors, flattened row-major:
/// conv1 `6x1x6`, conv2 `1x6x6`, fc1 `12x18`, fc2 `Cx12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub conv1: Vec<f64>,
    pub conv2: Vec<f64>,
    pub fc1: Vec<f64>,
    pub fc2: Vec<f64>,
    pub classes: usize,
}

impl ModelParams {
    pub fn zeros(classes: usize) -> Self {
        Self {
            conv1: vec![0.0; CONV1_OUT * KERNEL],
            conv2: vec![0.0; CONV2_OUT * CONV1_OUT * KERNEL],
            fc1: vec![0.0; FC1_OUT * POOL_LEN],
            fc2: vec![0.0; classes * FC1_OUT],
            classes,
        }
    }

    /// Uniform initialization in `[-scale, scale]`.
    pub fn init_uniform<R: Rng + ?Sized>(classes: usize, scale: f64, rng: &mut R) -> Self {
        let mut p = Self::zeros(classes);
        p.for_each_mut(|w| *w = rng.gen_range(-scale..=scale));
        p
    }

    /// Shapes of the tensors in [`TENSOR_NAMES`] order.
    pub fn shapes(classes: usize) -> [Vec<usize>; 4] {
        [
            vec![CONV1_OUT, 1, KERNEL],
            vec![CONV2_OUT, CONV1_OUT, KERNEL],
            vec![FC1_OUT, POOL_LEN],
            vec![classes, FC1_OUT],
        ]
    }

    pub fn tensors(&self) -> [&[f64]; 4] {
        [&self.conv1, &self.conv2, &self.fc1, &self.fc2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [
            &mut self.conv1,
            &mut self.conv2,
            &mut self.fc1,
            &mut self.fc2,
        ]
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> + '_ {
        self.conv1
            .iter()
            .chain(&self.conv2)
            .chain(&self.fc1)
            .chain(&self.fc2)
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(&mut f);
        }
    }

    /// Elementwise combination of two parameter sets with the same shapes.
    pub fn zip_map(&self, other: &ModelParams, mut f: impl FnMut(f64, f64) -> f64) -> ModelParams {
        let mut out = self.clone();
        for (dst, src) in out.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = f(*d, *s);
            }
        }
        out
    }

    pub fn flat(&self) -> Vec<f64> {
        self.iter().copied().collect()
    }

    pub fn from_flat(classes: usize, values: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(classes);
        if values.len() != p.num_params() {
            return Err(Error::Shape(format!(
                "{} values for a {}-parameter model",
                values.len(),
                p.num_params()
            )));
        }
        let mut it = values.iter();
        p.for_each_mut(|w| *w = *it.next().unwrap_or(&0.0));
        Ok(p)
    }

    /// Checks tensor sizes against the architecture and that every weight is finite.
    pub fn validate(&self) -> Result<()> {
        let expected = Self::zeros(self.classes);
        for (name, (a, b)) in TENSOR_NAMES
            .iter()
            .zip(self.tensors().iter().zip(expected.tensors()))
        {
            if a.len() != b.len() {
                return Err(Error::Shape(format!(
                    "{name} has {} values, expected {}",
                    a.len(),
                    b.len()
                )));
            }
        }
        if self.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite weight"));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, w| m.max(w.abs()))
    }
}
