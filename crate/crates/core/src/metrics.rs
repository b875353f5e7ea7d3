//! Confusion matrices and balanced accuracy.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beat::Beat;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    /// Recall per class; `None` for classes absent from the evaluated set.
    pub per_class_recall: Vec<Option<f64>>,
    /// Unweighted mean of the recalls of the classes present.
    pub balanced_accuracy: f64,
    pub plain_accuracy: f64,
    pub count: u64,
}

impl Metrics {
    pub fn from_confusion(confusion: Vec<Vec<u64>>) -> Result<Self> {
        let n = confusion.len();
        if n == 0 || confusion.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(
                "confusion matrix must be square and non-empty".into(),
            ));
        }
        let count: u64 = confusion.iter().flatten().sum();
        if count == 0 {
            return Err(Error::invalid("no beats evaluated"));
        }
        let per_class_recall: Vec<Option<f64>> = confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let support: u64 = row.iter().sum();
                (support > 0).then(|| row[i] as f64 / support as f64)
            })
            .collect();
        let present: Vec<f64> = per_class_recall.iter().flatten().copied().collect();
        let balanced_accuracy = present.iter().sum::<f64>() / present.len() as f64;
        let correct: u64 = (0..n).map(|i| confusion[i][i]).sum();
        Ok(Metrics {
            confusion,
            per_class_recall,
            balanced_accuracy,
            plain_accuracy: correct as f64 / count as f64,
            count,
        })
    }

    /// Confusion matrix as CSV with a `true\pred` header row.
    pub fn confusion_csv(&self, class_names: &[&str]) -> String {
        let mut s = String::from("true\\pred");
        for name in class_names {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for (name, row) in class_names.iter().zip(&self.confusion) {
            s.push_str(name);
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    /// Parses the output of [`Metrics::confusion_csv`]; `#` lines are ignored.
    pub fn confusion_from_csv(text: &str) -> Result<Vec<Vec<u64>>> {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                line.split(',')
                    .skip(1)
                    .map(|c| {
                        c.trim()
                            .parse::<u64>()
                            .map_err(|_| Error::Csv(format!("bad count `{c}`")))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn read_confusion_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<u64>>> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::confusion_from_csv(&text)
    }
}

/// Runs `predict` over labelled beats and tallies the confusion matrix.
pub fn evaluate<F>(mut predict: F, beats: &[Beat], num_classes: usize) -> Result<Metrics>
where
    F: FnMut(&Beat) -> Result<usize>,
{
    if beats.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty beat list"));
    }
    let mut confusion = vec![vec![0u64; num_classes]; num_classes];
    for b in beats {
        let p = predict(b)?;
        if b.label >= num_classes || p >= num_classes {
            return Err(Error::invalid(format!(
                "label {} / prediction {p} outside 0..{num_classes}",
                b.label
            )));
        }
        confusion[b.label][p] += 1;
    }
    Metrics::from_confusion(confusion)
}
