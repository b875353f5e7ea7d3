use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::annotation::{parse_annotations, Annotation};
use super::header::{parse_header, RecordHeader};
use super::signal::{checksum, decode_format212};
use crate::error::{Error, Result};

/// A parsed recording: physical-unit signals plus annotations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Record {
    pub header: RecordHeader,
    /// `signals[channel][sample]` in mV.
    pub signals: Vec<Vec<f64>>,
    pub annotations: Vec<Annotation>,
}

impl Record {
    pub fn name(&self) -> &str {
        &self.header.record_name
    }

    pub fn sampling_rate(&self) -> f64 {
        self.header.sampling_rate
    }

    /// The channel labelled `lead`, falling back to channel 0.
    pub fn lead(&self, lead: &str) -> &[f64] {
        let ch = self.header.find_lead(lead).unwrap_or(0);
        &self.signals[ch]
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Treat a checksum mismatch as an error instead of a warning.
    pub strict_checksum: bool,
    /// Annotation file extension; `None` skips annotations.
    pub annotator: Option<String>,
    /// Whether a missing annotation file is an error.
    pub require_annotations: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            strict_checksum: false,
            annotator: Some("atr".into()),
            require_annotations: false,
        }
    }
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads `<prefix>.hea`, its signal file(s) and `<prefix>.atr`.
pub fn load_record(prefix: impl AsRef<Path>) -> Result<Record> {
    load_record_with(prefix, &LoadOptions::default())
}

pub fn load_record_with(prefix: impl AsRef<Path>, opts: &LoadOptions) -> Result<Record> {
    let prefix = prefix.as_ref();
    let hea_path = with_ext(prefix, "hea");
    let text = String::from_utf8(read(&hea_path)?)
        .map_err(|_| Error::invalid(format!("{} is not UTF-8", hea_path.display())))?;
    let header = parse_header(&text)?;
    let dir = prefix.parent().unwrap_or(Path::new(""));

    // Signals sharing a file are interleaved within it, in header order.
    let mut by_file: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in header.signals.iter().enumerate() {
        by_file.entry(s.file_name.as_str()).or_default().push(i);
    }
    let mut signals = vec![Vec::new(); header.num_signals];
    for (file, channels) in &by_file {
        let bytes = read(&dir.join(file))?;
        let frames = decode_format212(&bytes, channels.len(), header.num_samples)?;
        for (slot, &ch) in channels.iter().enumerate() {
            let spec = &header.signals[ch];
            let raw = frames.iter().map(|f| f[slot]);
            if let Some(expected) = spec.checksum {
                let actual = checksum(raw.clone());
                if actual != expected {
                    let err = Error::Checksum {
                        channel: ch,
                        expected,
                        actual,
                    };
                    if opts.strict_checksum {
                        return Err(err);
                    }
                    log::warn!("record {}: {err}", header.record_name);
                }
            }
            signals[ch] = raw.map(|v| spec.to_physical(v)).collect();
        }
    }

    let annotations = match &opts.annotator {
        Some(ext) => {
            let path = with_ext(prefix, ext);
            if path.exists() || opts.require_annotations {
                let anns = parse_annotations(&read(&path)?)?;
                validate_annotations(&anns, header.num_samples)?;
                anns
            } else {
                Vec::new()
            }
        }
        None => Vec::new(),
    };

    Ok(Record {
        header,
        signals,
        annotations,
    })
}

fn validate_annotations(anns: &[Annotation], num_samples: usize) -> Result<()> {
    for w in anns.windows(2) {
        if w[1].sample_index < w[0].sample_index {
            return Err(Error::Annotation(format!(
                "sample indices decrease ({} after {})",
                w[1].sample_index, w[0].sample_index
            )));
        }
    }
    if let Some(last) = anns.last() {
        if num_samples > 0 && last.sample_index >= num_samples as u64 {
            return Err(Error::Annotation(format!(
                "annotation at {} beyond {num_samples} samples",
                last.sample_index
            )));
        }
    }
    Ok(())
}
