use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, lr_at, AdamState};
use super::loss::{cross_entropy_grad, distill_loss_grad};
use super::network::{backward, forward, predict_class};
use super::noise::{apply_output_leakage, sample_noisy_weights, NoiseModel};
use super::params::ModelParams;
use crate::beat::Beat;
use crate::error::{Error, Result};
use crate::metrics::evaluate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr0: f64,
    pub halve_every: usize,
    /// L2 coefficient added to the gradient.
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub distill_temperature: f64,
    /// Weight of the distillation term when teacher logits are supplied.
    pub distill_weight: f64,
    /// Weights start uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr0: 0.003,
            halve_every: 50,
            weight_decay: 1e-4,
            epochs: 150,
            batch_size: 128,
            distill_temperature: 1.5,
            distill_weight: 0.5,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0) {
            return Err(Error::Config("lr0 must be positive".into()));
        }
        if !(self.distill_temperature > 0.0) {
            return Err(Error::Config("distill_temperature must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.distill_weight) {
            return Err(Error::Config("distill_weight must lie in [0, 1]".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Teacher logits keyed by beat id (`record/window/peak`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TeacherLogits(pub HashMap<String, Vec<f64>>);

impl TeacherLogits {
    /// Reads `beat_id,logit_0,...,logit_{C-1}` rows; a header row is allowed.
    pub fn load_csv(path: impl AsRef<Path>, classes: usize) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
        let mut map = HashMap::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            if row.len() != classes + 1 {
                return Err(Error::Csv(format!(
                    "{}: row {} has {} columns, expected {}",
                    path.display(),
                    i + 1,
                    row.len(),
                    classes + 1
                )));
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                row.iter().skip(1).map(str::parse).collect();
            match parsed {
                Ok(logits) => {
                    map.insert(row[0].to_string(), logits);
                }
                Err(_) if i == 0 => {}
                Err(_) => {
                    return Err(Error::Csv(format!(
                        "{}: row {} non-numeric",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        Ok(TeacherLogits(map))
    }

    pub fn to_csv(&self, classes: usize) -> String {
        let mut keys: Vec<&String> = self.0.keys().collect();
        keys.sort();
        let mut s = String::from("beat_id");
        for c in 0..classes {
            let _ = write!(s, ",logit_{c}");
        }
        s.push('\n');
        for k in keys {
            s.push_str(k);
            for v in &self.0[k] {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_balanced_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the epoch with the best validation balanced accuracy.
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val: f64,
}

/// `epoch,lr,train_loss,val_balanced_acc` rows.
pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut s = String::from("epoch,lr,train_loss,val_balanced_acc\n");
    for r in history {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.epoch, r.lr, r.train_loss, r.val_balanced_acc
        );
    }
    s
}

/// Clean-weight balanced accuracy; NaN for an empty set.
pub fn balanced_accuracy(params: &ModelParams, beats: &[Beat]) -> Result<f64> {
    if beats.is_empty() {
        return Ok(f64::NAN);
    }
    Ok(evaluate(|b| predict_class(params, &b.samples), beats, params.classes)?.balanced_accuracy)
}

/// Loss and clean-weight gradient for one beat under one noise draw.
pub(crate) fn beat_loss_grad(
    params: &ModelParams,
    noise: &NoiseModel,
    cfg: &TrainConfig,
    beat: &Beat,
    teacher: Option<&[f64]>,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, ModelParams)> {
    let sample = sample_noisy_weights(params, noise, rng);
    let (mut logits, cache) = forward(&sample.weights, &beat.samples)?;
    apply_output_leakage(&mut logits, noise, rng);
    let (loss, d_logits) = match teacher {
        Some(t) if cfg.distill_weight > 0.0 => distill_loss_grad(
            &logits,
            t,
            beat.label,
            cfg.distill_temperature,
            cfg.distill_weight,
        )?,
        _ => cross_entropy_grad(&logits, beat.label)?,
    };
    let grad_noisy = backward(&sample.weights, &cache, &d_logits)?;
    Ok((loss, noise.chain_gradient(params, &sample.eps, &grad_noisy)))
}

/// Minibatch Adam under the noise model. Weight noise is drawn independently
/// for every beat of every batch. Without teacher logits the loss is plain
/// cross-entropy. Returns the best-validation parameters.
pub fn train(
    cfg: &TrainConfig,
    noise: &NoiseModel,
    classes: usize,
    train_beats: &[Beat],
    validation: &[Beat],
    teacher: Option<&TeacherLogits>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_beats.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let teacher_rows: Option<Vec<&[f64]>> = match teacher {
        Some(t) if cfg.distill_weight > 0.0 => Some(
            train_beats
                .iter()
                .map(|b| {
                    t.0.get(&b.id())
                        .filter(|l| l.len() == classes)
                        .map(Vec::as_slice)
                        .ok_or_else(|| {
                            Error::Training(format!("no teacher logits for beat {}", b.id()))
                        })
                })
                .collect::<Result<_>>()?,
        ),
        _ => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ModelParams::init_uniform(classes, cfg.init_scale, &mut rng);
    let mut adam = AdamState::new(classes);
    let mut order: Vec<usize> = (0..train_beats.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best = (params.clone(), 0usize, f64::NEG_INFINITY);

    for epoch in 0..cfg.epochs {
        let lr = lr_at(epoch, cfg.lr0, cfg.halve_every);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grad_sum = ModelParams::zeros(classes);
            let mut batch_loss = 0.0;
            for &i in batch {
                let t = teacher_rows.as_ref().map(|rows| rows[i]);
                let (loss, g) = beat_loss_grad(&params, noise, cfg, &train_beats[i], t, &mut rng)?;
                batch_loss += loss;
                grad_sum = grad_sum.zip_map(&g, |a, b| a + b);
            }
            if !batch_loss.is_finite() {
                return Err(Error::Training(format!("non-finite loss at epoch {epoch}")));
            }
            epoch_loss += batch_loss;
            let scale = 1.0 / batch.len() as f64;
            grad_sum.for_each_mut(|g| *g *= scale);
            adam_step(&mut adam, &mut params, &grad_sum, lr, cfg.weight_decay);
        }
        let train_loss = epoch_loss / train_beats.len() as f64;
        let val = balanced_accuracy(&params, validation)?;
        log::info!("epoch {epoch:>3} lr {lr:.6} loss {train_loss:.5} val {val:.4}");
        history.push(EpochRecord {
            epoch,
            lr,
            train_loss,
            val_balanced_acc: val,
        });
        // Without a validation set the last epoch wins.
        if val > best.2 || val.is_nan() {
            best = (params.clone(), epoch, val);
        }
    }
    if cfg.epochs == 0 {
        best.2 = balanced_accuracy(&params, validation)?;
    }
    Ok(TrainOutcome {
        params: best.0,
        history,
        best_epoch: best.1,
        best_val: best.2,
    })
}
