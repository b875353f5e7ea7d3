//! Compares the comparator-based hardware R-peak detector (with automatic
//! gain control) against the software detector on synthetic 10 s windows.

use ekgnet::analog::{
    agc, hardware_rpeak_detect, Hysteresis, DEFAULT_THRESHOLD_FRACTION, REFRACTORY_SAMPLES,
};
use ekgnet::pipeline::{find_rpeaks, normalize, resample, window_10s, PipelineConfig};
use ekgnet::synth::{arrhythmia_record, SynthConfig};

/// 0.1 s at 125 S/s.
const TOLERANCE: usize = 12;

fn main() -> ekgnet::Result<()> {
    let rec = arrhythmia_record("rpeak", &SynthConfig::default(), 11)?;
    let signal = resample(&rec.signal, rec.sampling_rate, 125.0)?;
    let threshold = PipelineConfig::default().rpeak_threshold;
    let ladder = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0];
    let (mut matched, mut total) = (0usize, 0usize);
    for (i, window) in window_10s(&signal).into_iter().enumerate() {
        let gain = agc(window, 1.0, &ladder)?;
        let amplified: Vec<f64> = window.iter().map(|v| v * gain.gain).collect();
        let hw = hardware_rpeak_detect(
            &amplified,
            Hysteresis::calibrate(&amplified, DEFAULT_THRESHOLD_FRACTION),
            REFRACTORY_SAMPLES,
        );
        let sw = find_rpeaks(&normalize(window).samples, threshold);
        let hits = sw
            .iter()
            .filter(|&&p| hw.iter().any(|&h| h.abs_diff(p) <= TOLERANCE))
            .count();
        println!(
            "window {i:>2}: gain {:>4}  software {:>2}  hardware {:>2}  matched {hits:>2}",
            gain.gain,
            sw.len(),
            hw.len()
        );
        matched += hits;
        total += sw.len();
    }
    println!(
        "agreement {:.1}%",
        100.0 * matched as f64 / total.max(1) as f64
    );
    Ok(())
}
