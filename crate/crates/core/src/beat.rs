//! Fixed-length heartbeats and the beats CSV format.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per extracted heartbeat.
pub const BEAT_LEN: usize = 178;

/// Classification task; fixes the number and names of classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Four arrhythmia classes N, S, V, Q.
    MitBih,
    /// Healthy vs myocardial infarction.
    Ptb,
}

impl Task {
    pub fn num_classes(self) -> usize {
        match self {
            Task::MitBih => 4,
            Task::Ptb => 2,
        }
    }

    pub fn class_names(self) -> &'static [&'static str] {
        match self {
            Task::MitBih => &["N", "S", "V", "Q"],
            Task::Ptb => &["Healthy", "MI"],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::MitBih => "mit-bih",
            Task::Ptb => "ptb",
        })
    }
}

/// Where a beat came from: (record, window, peak index within the window).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BeatSource {
    pub record: String,
    pub window: usize,
    pub peak: usize,
}

impl fmt::Display for BeatSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.record, self.window, self.peak)
    }
}

/// One extracted heartbeat. Samples are shared so oversampled copies are cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct Beat {
    pub samples: Arc<[f64]>,
    /// Class index within the task.
    pub label: usize,
    /// Nominal heartbeat period in samples at 125 Hz, when known.
    pub t_beat: Option<f64>,
    pub source: BeatSource,
}

impl Beat {
    pub fn new(
        samples: Vec<f64>,
        label: usize,
        t_beat: Option<f64>,
        source: BeatSource,
    ) -> Result<Self> {
        if samples.len() != BEAT_LEN {
            return Err(Error::Shape(format!(
                "beat has {} samples, expected {BEAT_LEN}",
                samples.len()
            )));
        }
        Ok(Beat {
            samples: samples.into(),
            label,
            t_beat,
            source,
        })
    }

    /// Stable identifier used to key teacher logits.
    pub fn id(&self) -> String {
        self.source.to_string()
    }
}

/// Per-class counts for `num_classes` classes.
pub fn class_counts(beats: &[Beat], num_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; num_classes];
    for b in beats {
        if let Some(c) = counts.get_mut(b.label) {
            *c += 1;
        }
    }
    counts
}

/// Reads rows of 178 sample values followed by an integer class label.
/// Lines starting with `#` are ignored.
pub fn load_beats_csv(path: impl AsRef<Path>, num_classes: usize) -> Result<Vec<Beat>> {
    let path = path.as_ref();
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    let mut beats = Vec::new();
    for (row_idx, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row_idx + 1;
        if row.len() != BEAT_LEN + 1 {
            return Err(Error::Csv(format!(
                "row {line}: {} columns, expected {}",
                row.len(),
                BEAT_LEN + 1
            )));
        }
        let samples = row
            .iter()
            .take(BEAT_LEN)
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Csv(format!("row {line}: non-numeric cell `{cell}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let label_cell = row[BEAT_LEN].trim();
        // Integer labels may be written as floats (`2.0`).
        let label = label_cell
            .parse::<usize>()
            .ok()
            .or_else(|| {
                label_cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0 && *v >= 0.0)
                    .map(|v| v as usize)
            })
            .ok_or_else(|| Error::Csv(format!("row {line}: bad label `{label_cell}`")))?;
        if label >= num_classes {
            return Err(Error::Csv(format!(
                "row {line}: label {label} outside 0..{num_classes}"
            )));
        }
        let source = BeatSource {
            record: stem.clone(),
            window: row_idx,
            peak: 0,
        };
        beats.push(Beat::new(samples, label, None, source)?);
    }
    Ok(beats)
}

/// Writes beats in the format read by [`load_beats_csv`].
pub fn write_beats_csv(path: impl AsRef<Path>, beats: &[Beat]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for b in beats {
        let mut line = String::with_capacity(BEAT_LEN * 8);
        for v in b.samples.iter() {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&b.label.to_string());
        line.push('\n');
        f.write_all(line.as_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    f.flush().map_err(|e| Error::io(path, e))
}
