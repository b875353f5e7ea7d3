//! PhysioNet WFDB ingestion: headers, format-212 signals, MIT annotations,
//! and the AAMI class mapping.

mod aami;
mod annotation;
mod fixture;
mod header;
mod record;
mod signal;

pub use aami::{map_to_aami, AamiClass, AamiMapping, PtbClass, AAMI_TABLE};
pub use annotation::{
    code_to_symbol, encode_annotations, parse_annotations, symbol_to_code, Annotation,
};
pub use fixture::write_record;
pub use header::{format_header, parse_header, RecordHeader, SignalSpec, DEFAULT_GAIN};
pub use record::{load_record, load_record_with, LoadOptions, Record};
pub use signal::{checksum, decode_format212, encode_format212};

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Reads a `record_name,label` diagnosis table (PTB sidecar).
///
/// Rows with labels other than healthy/MI are ignored; a header row is allowed.
pub fn load_diagnosis_csv(path: impl AsRef<Path>) -> Result<HashMap<String, PtbClass>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    let mut out = HashMap::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        if row.len() != 2 {
            return Err(Error::Csv(format!(
                "{}: row {} needs 2 columns",
                path.display(),
                i + 1
            )));
        }
        match PtbClass::parse(&row[1]) {
            Some(class) => {
                out.insert(row[0].to_string(), class);
            }
            None if i == 0 => {} // header
            None => log::debug!("skipping record {} with label {}", &row[0], &row[1]),
        }
    }
    Ok(out)
}
