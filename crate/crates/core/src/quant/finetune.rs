use std::fmt::{self, Write as _};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::QuantizedModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
        })
    }
}

/// One trial of the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneStep {
    pub iteration: usize,
    pub weight_id: usize,
    pub direction: Direction,
    pub acc_before: f64,
    pub acc_after: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct FinetuneOutcome {
    pub model: QuantizedModel,
    /// Accepted accuracy before the first trial and after every trial.
    pub trace: Vec<f64>,
    pub log: Vec<FinetuneStep>,
}

impl FinetuneOutcome {
    pub fn final_accuracy(&self) -> f64 {
        *self.trace.last().expect("trace holds the initial accuracy")
    }

    /// `iteration,weight_id,direction,acc_before,acc_after,accepted` rows.
    pub fn log_csv(&self) -> String {
        let mut s = String::from("iteration,weight_id,direction,acc_before,acc_after,accepted\n");
        for r in &self.log {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.iteration, r.weight_id, r.direction, r.acc_before, r.acc_after, r.accepted
            );
        }
        s
    }
}

/// Random single-code search: each trial moves one uniformly chosen weight
/// one level up or down and keeps the move unless accuracy strictly drops.
/// A move past either end of the codebook changes nothing and is kept.
pub fn finetune<F, R>(
    qmodel: &QuantizedModel,
    mut eval: F,
    iterations: usize,
    rng: &mut R,
) -> Result<FinetuneOutcome>
where
    F: FnMut(&QuantizedModel) -> Result<f64>,
    R: Rng + ?Sized,
{
    let n = qmodel.num_weights();
    if n == 0 {
        return Err(Error::invalid("cannot fine-tune a model without weights"));
    }
    let max = qmodel.codebook.max_code();
    let mut model = qmodel.clone();
    let mut acc = eval(&model)?;
    let mut trace = Vec::with_capacity(iterations + 1);
    trace.push(acc);
    let mut log = Vec::with_capacity(iterations);
    for iteration in 1..=iterations {
        let weight_id = rng.gen_range(0..n);
        let direction = if rng.gen_bool(0.5) {
            Direction::Up
        } else {
            Direction::Down
        };
        let old = model.code(weight_id).expect("weight id in range");
        let new = match direction {
            Direction::Up if old < max => Some(old + 1),
            Direction::Down if old > 0 => Some(old - 1),
            _ => None,
        };
        let (acc_after, accepted) = match new {
            None => (acc, true),
            Some(code) => {
                model.set_code(weight_id, code)?;
                let a = eval(&model)?;
                if a < acc {
                    model.set_code(weight_id, old)?;
                    (a, false)
                } else {
                    (a, true)
                }
            }
        };
        log.push(FinetuneStep {
            iteration,
            weight_id,
            direction,
            acc_before: acc,
            acc_after,
            accepted,
        });
        if accepted {
            acc = acc_after;
        }
        log::debug!(
            "finetune {iteration}: w{weight_id} {direction} {acc_after:.4} accepted={accepted}"
        );
        trace.push(acc);
    }
    Ok(FinetuneOutcome { model, trace, log })
}
