//! JSON checkpoints with nested row-major tensors.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::params::{arch, ModelParams, TENSOR_NAMES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchInfo {
    pub input_len: usize,
    /// Output channels of conv1 and conv2.
    pub channels: Vec<usize>,
    pub kernel: usize,
    /// Strides of conv1, conv2 and the pooling layer.
    pub strides: Vec<usize>,
    pub fc_sizes: Vec<usize>,
    pub classes: usize,
}

impl ArchInfo {
    pub fn for_classes(classes: usize) -> Self {
        Self {
            input_len: arch::INPUT_LEN,
            channels: vec![arch::CONV1_OUT, arch::CONV2_OUT],
            kernel: arch::KERNEL,
            strides: vec![arch::STRIDE, arch::STRIDE, arch::POOL_STRIDE],
            fc_sizes: vec![arch::POOL_LEN, arch::FC1_OUT, classes],
            classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub config: Value,
    pub epoch: usize,
    pub val_metric: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub metadata: CheckpointMeta,
}

/// Nests a flat row-major buffer into JSON arrays of the given shape.
pub fn nest(values: &[f64], shape: &[usize]) -> Value {
    match shape {
        [] => json!(values.first().copied().unwrap_or(0.0)),
        [n] => json!(values[..*n]),
        [n, rest @ ..] => {
            let stride: usize = rest.iter().product();
            Value::Array(
                (0..*n)
                    .map(|i| nest(&values[i * stride..(i + 1) * stride], rest))
                    .collect(),
            )
        }
    }
}

/// Flattens nested JSON arrays, checking they have exactly `shape`.
pub fn unnest(value: &Value, shape: &[usize], out: &mut Vec<f64>) -> Result<()> {
    match shape {
        [] => {
            let v = value
                .as_f64()
                .ok_or_else(|| Error::Shape(format!("expected a number, found {value}")))?;
            out.push(v);
            Ok(())
        }
        [n, rest @ ..] => {
            let arr = value
                .as_array()
                .ok_or_else(|| Error::Shape("expected an array".into()))?;
            if arr.len() != *n {
                return Err(Error::Shape(format!(
                    "array of {} entries, expected {n}",
                    arr.len()
                )));
            }
            arr.iter().try_for_each(|v| unnest(v, rest, out))
        }
    }
}

impl Checkpoint {
    pub fn to_json(&self) -> Value {
        let shapes = ModelParams::shapes(self.params.classes);
        let tensors: serde_json::Map<String, Value> = TENSOR_NAMES
            .iter()
            .zip(self.params.tensors())
            .zip(shapes.iter())
            .map(|((name, t), shape)| (name.to_string(), nest(t, shape)))
            .collect();
        json!({
            "arch": ArchInfo::for_classes(self.params.classes),
            "tensors": tensors,
            "metadata": self.metadata,
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let arch: ArchInfo =
            serde_json::from_value(value.get("arch").cloned().unwrap_or(Value::Null))?;
        if arch != ArchInfo::for_classes(arch.classes) {
            return Err(Error::Shape(format!("unsupported architecture {arch:?}")));
        }
        let metadata: CheckpointMeta =
            serde_json::from_value(value.get("metadata").cloned().unwrap_or(Value::Null))?;
        let tensors = value
            .get("tensors")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Shape("missing tensors".into()))?;
        let mut params = ModelParams::zeros(arch.classes);
        let shapes = ModelParams::shapes(arch.classes);
        for ((name, dst), shape) in TENSOR_NAMES
            .iter()
            .zip(params.tensors_mut())
            .zip(shapes.iter())
        {
            let v = tensors
                .get(*name)
                .ok_or_else(|| Error::Shape(format!("missing tensor {name}")))?;
            let mut flat = Vec::with_capacity(dst.len());
            unnest(v, shape, &mut flat).map_err(|e| Error::Shape(format!("{name}: {e}")))?;
            *dst = flat;
        }
        params.validate()?;
        Ok(Self { params, metadata })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&serde_json::from_str(&text)?)
    }
}
