//! WFDB `.hea` header parsing.
//!
//! Record line: `NAME[/NSEG] NSIG [FS[/CFREQ[(BASE)]] [NSAMP [TIME [DATE]]]]`
//!
//! Signal line: `FILE FMT[xSPF][:SKEW][+OFFSET] [GAIN[(BASELINE)][/UNITS] [ADCRES [ADCZERO
//! [INITVAL [CKSUM [BLKSIZE [DESC...]]]]]]]`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ADC units per physical unit used when a header omits the gain or sets it to zero.
pub const DEFAULT_GAIN: f64 = 200.0;
const DEFAULT_FS: f64 = 250.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub file_name: String,
    /// Always 212 once parsed.
    pub storage_format: u16,
    /// ADC units per mV.
    pub gain: f64,
    pub baseline: i32,
    pub units: String,
    pub adc_resolution: u32,
    pub adc_zero: i32,
    pub initial_value: i32,
    /// 16-bit signed checksum of the raw samples, when the header provides one.
    pub checksum: Option<i16>,
    pub block_size: u32,
    pub description: String,
}

impl SignalSpec {
    /// Converts a raw ADC value to physical units (mV).
    pub fn to_physical(&self, adc: i16) -> f64 {
        (f64::from(adc) - f64::from(self.baseline)) / self.gain
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub record_name: String,
    pub num_signals: usize,
    pub sampling_rate: f64,
    pub num_samples: usize,
    pub signals: Vec<SignalSpec>,
    /// `#` comment lines, without the leading marker.
    pub comments: Vec<String>,
}

impl RecordHeader {
    /// Index of the first signal whose description matches `lead` (case-insensitive).
    pub fn find_lead(&self, lead: &str) -> Option<usize> {
        self.signals
            .iter()
            .position(|s| s.description.trim().eq_ignore_ascii_case(lead))
    }
}

fn header_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Header {
        line,
        msg: msg.into(),
    }
}

/// Parses the full text of a `.hea` file.
pub fn parse_header(text: &str) -> Result<RecordHeader> {
    let mut comments = Vec::new();
    let mut lines = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
        } else if !line.is_empty() {
            // Trailing comments on a record or signal line are not part of the grammar.
            let line = line.split('#').next().unwrap_or("").trim();
            lines.push((no + 1, line));
        }
    }

    let (rec_no, rec_line) = *lines
        .first()
        .ok_or_else(|| header_err(1, "missing record line"))?;
    let mut fields = rec_line.split_whitespace();
    let name_field = fields
        .next()
        .ok_or_else(|| header_err(rec_no, "empty record line"))?;
    if name_field.contains('/') {
        return Err(header_err(
            rec_no,
            "multi-segment records are not supported",
        ));
    }
    let num_signals: usize = fields
        .next()
        .ok_or_else(|| header_err(rec_no, "missing number of signals"))?
        .parse()
        .map_err(|_| header_err(rec_no, "number of signals is not an integer"))?;
    if num_signals == 0 {
        return Err(header_err(rec_no, "num_signals must be at least 1"));
    }
    let sampling_rate = match fields.next() {
        Some(f) => {
            let fs = f.split(['/', '(']).next().unwrap_or(f);
            fs.parse::<f64>()
                .map_err(|_| header_err(rec_no, format!("bad sampling frequency `{f}`")))?
        }
        None => DEFAULT_FS,
    };
    if !(sampling_rate > 0.0 && sampling_rate.is_finite()) {
        return Err(header_err(rec_no, "sampling_rate must be positive"));
    }
    let num_samples = match fields.next() {
        Some(f) => f
            .parse::<usize>()
            .map_err(|_| header_err(rec_no, format!("bad sample count `{f}`")))?,
        None => 0,
    };

    let signal_lines = &lines[1..];
    if signal_lines.len() != num_signals {
        return Err(header_err(
            rec_no,
            format!(
                "record declares {num_signals} signals but {} signal lines follow",
                signal_lines.len()
            ),
        ));
    }
    let signals = signal_lines
        .iter()
        .map(|&(no, line)| parse_signal_line(no, line))
        .collect::<Result<Vec<_>>>()?;

    Ok(RecordHeader {
        record_name: name_field.to_string(),
        num_signals,
        sampling_rate,
        num_samples,
        signals,
        comments,
    })
}

fn parse_int<T: std::str::FromStr>(no: usize, what: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| header_err(no, format!("bad {what} `{s}`")))
}

fn parse_signal_line(no: usize, line: &str) -> Result<SignalSpec> {
    let mut fields = line.split_whitespace();
    let file_name = fields
        .next()
        .ok_or_else(|| header_err(no, "empty signal line"))?
        .to_string();
    let fmt_field = fields
        .next()
        .ok_or_else(|| header_err(no, "missing storage format"))?;
    let fmt_digits: String = fmt_field.chars().take_while(char::is_ascii_digit).collect();
    let storage_format: u16 = parse_int(no, "storage format", &fmt_digits)?;
    if storage_format != 212 {
        return Err(Error::UnsupportedFormat(storage_format));
    }
    if let Some(rest) = fmt_field.strip_prefix(fmt_digits.as_str()) {
        if let Some(spf) = rest.strip_prefix('x') {
            let spf: String = spf.chars().take_while(char::is_ascii_digit).collect();
            if parse_int::<u32>(no, "samples per frame", &spf)? != 1 {
                return Err(header_err(no, "multi-frequency signals are not supported"));
            }
        }
    }

    let mut gain = DEFAULT_GAIN;
    let mut baseline: Option<i32> = None;
    let mut units = "mV".to_string();
    if let Some(g) = fields.next() {
        let (gain_part, units_part) = match g.split_once('/') {
            Some((a, b)) => (a, Some(b)),
            None => (g, None),
        };
        let (gain_str, base_str) = match gain_part.split_once('(') {
            Some((a, b)) => (a, Some(b.trim_end_matches(')'))),
            None => (gain_part, None),
        };
        gain = gain_str
            .parse::<f64>()
            .map_err(|_| header_err(no, format!("bad gain `{gain_str}`")))?;
        if gain == 0.0 {
            gain = DEFAULT_GAIN;
        }
        if let Some(b) = base_str {
            baseline = Some(parse_int(no, "baseline", b)?);
        }
        if let Some(u) = units_part {
            units = u.to_string();
        }
    }
    let adc_resolution = match fields.next() {
        Some(f) => parse_int(no, "ADC resolution", f)?,
        None => 12,
    };
    let adc_zero: i32 = match fields.next() {
        Some(f) => parse_int(no, "ADC zero", f)?,
        None => 0,
    };
    let initial_value: i32 = match fields.next() {
        Some(f) => parse_int(no, "initial value", f)?,
        None => adc_zero,
    };
    let checksum = match fields.next() {
        Some(f) => {
            let v: i64 = parse_int(no, "checksum", f)?;
            Some(v as u16 as i16)
        }
        None => None,
    };
    let block_size = match fields.next() {
        Some(f) => parse_int(no, "block size", f)?,
        None => 0,
    };
    let description = fields.collect::<Vec<_>>().join(" ");

    Ok(SignalSpec {
        file_name,
        storage_format,
        gain,
        baseline: baseline.unwrap_or(adc_zero),
        units,
        adc_resolution,
        adc_zero,
        initial_value,
        checksum,
        block_size,
        description,
    })
}

/// Renders a header in the grammar accepted by [`parse_header`].
pub fn format_header(header: &RecordHeader) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} {} {} {}\n",
        header.record_name, header.num_signals, header.sampling_rate, header.num_samples
    ));
    for s in &header.signals {
        out.push_str(&format!(
            "{} {} {}({})/{} {} {} {} {} {} {}\n",
            s.file_name,
            s.storage_format,
            s.gain,
            s.baseline,
            s.units,
            s.adc_resolution,
            s.adc_zero,
            s.initial_value,
            s.checksum.unwrap_or(0),
            s.block_size,
            s.description
        ));
    }
    for c in &header.comments {
        out.push_str(&format!("# {c}\n"));
    }
    out
}
