//! Writes format-212 records for synthetic fixtures.

use std::fs;
use std::path::Path;

use super::annotation::{encode_annotations, Annotation};
use super::header::{format_header, RecordHeader, SignalSpec};
use super::signal::{checksum, encode_format212};
use crate::error::{Error, Result};

/// Quantizes mV signals (`signals[channel][sample]`) and writes
/// `<dir>/<name>.hea`, `.dat` and, when `annotations` is non-empty, `.atr`.
pub fn write_record(
    dir: &Path,
    name: &str,
    sampling_rate: f64,
    signals: &[(String, Vec<f64>)],
    gain: f64,
    baseline: i32,
    annotations: &[Annotation],
) -> Result<RecordHeader> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let num_samples = signals.first().map_or(0, |s| s.1.len());
    if signals.iter().any(|s| s.1.len() != num_samples) {
        return Err(Error::Shape("all channels must have equal length".into()));
    }
    let adc: Vec<Vec<i16>> = signals
        .iter()
        .map(|(_, mv)| {
            mv.iter()
                .map(|v| {
                    (v * gain + f64::from(baseline))
                        .round()
                        .clamp(-2048.0, 2047.0) as i16
                })
                .collect()
        })
        .collect();
    let dat_name = format!("{name}.dat");
    let specs = signals
        .iter()
        .zip(&adc)
        .map(|((desc, _), raw)| SignalSpec {
            file_name: dat_name.clone(),
            storage_format: 212,
            gain,
            baseline,
            units: "mV".into(),
            adc_resolution: 12,
            adc_zero: baseline,
            initial_value: raw.first().copied().map_or(0, i32::from),
            checksum: Some(checksum(raw.iter().copied())),
            block_size: 0,
            description: desc.clone(),
        })
        .collect();
    let header = RecordHeader {
        record_name: name.to_string(),
        num_signals: signals.len(),
        sampling_rate,
        num_samples,
        signals: specs,
        comments: Vec::new(),
    };
    let interleaved: Vec<i16> = (0..num_samples)
        .flat_map(|t| adc.iter().map(move |ch| ch[t]))
        .collect();
    let write = |file: String, bytes: &[u8]| {
        let path = dir.join(file);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
    };
    write(format!("{name}.hea"), format_header(&header).as_bytes())?;
    write(dat_name, &encode_format212(&interleaved))?;
    if !annotations.is_empty() {
        write(format!("{name}.atr"), &encode_annotations(annotations))?;
    }
    Ok(header)
}
