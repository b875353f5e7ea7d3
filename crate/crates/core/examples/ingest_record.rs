//! Writes a synthetic annotated recording in WFDB format 212, reads it back
//! and summarizes the header, samples and AAMI beat classes.
//!
//! Pass a record prefix (for example `data/mitdb/100`) to inspect a real one.

use std::collections::BTreeMap;

use ekgnet::synth::{arrhythmia_record, SynthConfig};
use ekgnet::wfdb::{format_header, load_record, map_to_aami, AamiMapping};

fn main() -> ekgnet::Result<()> {
    let prefix = match std::env::args().nth(1) {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            let dir = std::env::temp_dir().join("ekgnet-ingest-example");
            std::fs::create_dir_all(&dir).expect("temp dir");
            arrhythmia_record("900", &SynthConfig::default(), 7)?.write(&dir)?;
            dir.join("900")
        }
    };
    let record = load_record(&prefix)?;
    print!("{}", format_header(&record.header));
    println!(
        "{} channels x {} samples at {} Hz",
        record.signals.len(),
        record.header.num_samples,
        record.sampling_rate()
    );
    for (spec, signal) in record.header.signals.iter().zip(&record.signals) {
        let lo = signal.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = signal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "  {:<6} range {lo:+.3} .. {hi:+.3} {}",
            spec.description, spec.units
        );
    }

    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    for a in &record.annotations {
        let key = match map_to_aami(&a.symbol) {
            AamiMapping::Class(c) => format!("beat class {c:?}"),
            AamiMapping::Skip => format!("non-beat `{}`", a.symbol),
        };
        *classes.entry(key).or_default() += 1;
    }
    println!("{} annotations", record.annotations.len());
    for (class, n) in classes {
        println!("  {class:<24} {n}");
    }
    Ok(())
}
