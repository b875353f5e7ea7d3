use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::codebook::Codebook;
use crate::error::{Error, Result};
use crate::model::checkpoint::ArchInfo;
use crate::model::{ModelParams, TENSOR_NAMES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantTensor {
    pub name: String,
    pub shape: Vec<usize>,
    /// Row-major codes.
    pub codes: Vec<u16>,
}

/// Integer weight codes plus the codebook that maps them to analog levels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedModel {
    pub codebook: Codebook,
    pub tensors: Vec<QuantTensor>,
    /// Class count when the tensors form an EKGNet model.
    pub classes: Option<usize>,
}

/// Location of a weight given by its flat index over all tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightRef {
    pub tensor: usize,
    pub index: usize,
}

impl QuantizedModel {
    /// A model made of arbitrary named tensors.
    pub fn from_tensors(codebook: Codebook, tensors: Vec<QuantTensor>) -> Result<Self> {
        let q = Self {
            codebook,
            tensors,
            classes: None,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let max = self.codebook.max_code();
        for t in &self.tensors {
            if t.shape.iter().product::<usize>() != t.codes.len() {
                return Err(Error::Shape(format!(
                    "{}: {} codes for shape {:?}",
                    t.name,
                    t.codes.len(),
                    t.shape
                )));
            }
            if let Some(c) = t.codes.iter().find(|&&c| c > max) {
                return Err(Error::invalid(format!(
                    "{}: code {c} outside 0..={max}",
                    t.name
                )));
            }
        }
        Ok(())
    }

    pub fn num_weights(&self) -> usize {
        self.tensors.iter().map(|t| t.codes.len()).sum()
    }

    pub fn locate(&self, weight_id: usize) -> Option<WeightRef> {
        let mut rest = weight_id;
        for (ti, t) in self.tensors.iter().enumerate() {
            if rest < t.codes.len() {
                return Some(WeightRef {
                    tensor: ti,
                    index: rest,
                });
            }
            rest -= t.codes.len();
        }
        None
    }

    pub fn code(&self, weight_id: usize) -> Option<u16> {
        self.locate(weight_id)
            .map(|r| self.tensors[r.tensor].codes[r.index])
    }

    pub fn set_code(&mut self, weight_id: usize, code: u16) -> Result<()> {
        if code > self.codebook.max_code() {
            return Err(Error::invalid(format!("code {code} outside codebook")));
        }
        let r = self.locate(weight_id).ok_or_else(|| {
            Error::invalid(format!(
                "weight {weight_id} outside 0..{}",
                self.num_weights()
            ))
        })?;
        self.tensors[r.tensor].codes[r.index] = code;
        Ok(())
    }

    /// All codes in flat order.
    pub fn codes(&self) -> Vec<u16> {
        self.tensors
            .iter()
            .flat_map(|t| t.codes.iter().copied())
            .collect()
    }

    /// Analog levels of every tensor.
    pub fn decode_tensors(&self) -> Result<Vec<Vec<f64>>> {
        self.tensors
            .iter()
            .map(|t| t.codes.iter().map(|&c| self.codebook.level(c)).collect())
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let mut codes = serde_json::Map::new();
        for t in &self.tensors {
            let flat: Vec<f64> = t.codes.iter().map(|&c| f64::from(c)).collect();
            let nested = crate::model::checkpoint::nest(&flat, &t.shape);
            codes.insert(t.name.clone(), to_int_json(nested));
        }
        let shapes: serde_json::Map<String, Value> = self
            .tensors
            .iter()
            .map(|t| (t.name.clone(), json!(t.shape)))
            .collect();
        let arch = match self.classes {
            Some(c) => serde_json::to_value(ArchInfo::for_classes(c)).unwrap_or(Value::Null),
            None => json!({ "shapes": shapes }),
        };
        json!({
            "bits": self.codebook.bits,
            "w_max": self.codebook.w_max,
            "order": self.tensors.iter().map(|t| t.name.clone()).collect::<Vec<_>>(),
            "shapes": shapes,
            "codes": codes,
            "arch": arch,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bits = v
            .get("bits")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Shape("missing bits".into()))? as u32;
        let w_max = v
            .get("w_max")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::Shape("missing w_max".into()))?;
        let codebook = Codebook::new(w_max, bits)?;
        let order: Vec<String> =
            serde_json::from_value(v.get("order").cloned().unwrap_or(Value::Null))?;
        let shapes: std::collections::HashMap<String, Vec<usize>> =
            serde_json::from_value(v.get("shapes").cloned().unwrap_or(Value::Null))?;
        let codes = v
            .get("codes")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Shape("missing codes".into()))?;
        let mut tensors = Vec::with_capacity(order.len());
        for name in order {
            let shape = shapes
                .get(&name)
                .cloned()
                .ok_or_else(|| Error::Shape(format!("missing shape for {name}")))?;
            let nested = codes
                .get(&name)
                .ok_or_else(|| Error::Shape(format!("missing codes for {name}")))?;
            let mut flat = Vec::new();
            crate::model::checkpoint::unnest(nested, &shape, &mut flat)?;
            let codes = flat
                .into_iter()
                .map(|c| {
                    if c >= 0.0 && c.fract() == 0.0 && c <= f64::from(u16::MAX) {
                        Ok(c as u16)
                    } else {
                        Err(Error::invalid(format!("{name}: non-integer code {c}")))
                    }
                })
                .collect::<Result<_>>()?;
            tensors.push(QuantTensor { name, shape, codes });
        }
        let classes = v
            .get("arch")
            .and_then(|a| a.get("classes"))
            .and_then(Value::as_u64)
            .map(|c| c as usize);
        let q = Self {
            codebook,
            tensors,
            classes,
        };
        q.validate()?;
        if classes.is_some() {
            decode(&q)?;
        }
        Ok(q)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&serde_json::from_str(&text)?)
    }
}

fn to_int_json(v: Value) -> Value {
    match v {
        Value::Array(a) => Value::Array(a.into_iter().map(to_int_json).collect()),
        Value::Number(n) => json!(n.as_f64().unwrap_or(0.0) as u64),
        other => other,
    }
}

/// Nearest-level codes for every weight of an EKGNet model.
pub fn quantize(params: &ModelParams, codebook: &Codebook) -> QuantizedModel {
    let shapes = ModelParams::shapes(params.classes);
    let tensors = TENSOR_NAMES
        .iter()
        .zip(params.tensors())
        .zip(shapes)
        .map(|((name, t), shape)| QuantTensor {
            name: name.to_string(),
            shape,
            codes: t.iter().map(|&w| codebook.encode(w)).collect(),
        })
        .collect();
    QuantizedModel {
        codebook: codebook.clone(),
        tensors,
        classes: Some(params.classes),
    }
}

/// Maps codes back to analog weight levels.
pub fn decode(q: &QuantizedModel) -> Result<ModelParams> {
    let classes = q
        .classes
        .ok_or_else(|| Error::Shape("quantized model has no EKGNet architecture".into()))?;
    if q.tensors.len() != TENSOR_NAMES.len()
        || q.tensors.iter().zip(TENSOR_NAMES).any(|(t, n)| t.name != n)
    {
        return Err(Error::Shape(
            "quantized tensors do not match conv1/conv2/fc1/fc2".into(),
        ));
    }
    let mut p = ModelParams::zeros(classes);
    for (dst, levels) in p.tensors_mut().into_iter().zip(q.decode_tensors()?) {
        if dst.len() != levels.len() {
            return Err(Error::Shape(format!(
                "{} levels for a {}-weight tensor",
                levels.len(),
                dst.len()
            )));
        }
        *dst = levels;
    }
    Ok(p)
}
