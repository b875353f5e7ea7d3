//! Synthetic ECG records for fixtures, demos and offline tests.
//!
//! Beats are sums of Gaussian waves (P, Q, R, S, T and, for infarction,
//! an ST elevation) with per-beat jitter, baseline wander and white noise.
//! All classes share an R amplitude near 1 mV so the 0.9 peak threshold
//! sees every beat.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::beat::{Beat, Task};
use crate::error::{Error, Result};
use crate::pipeline::{extract_record, BeatLabeler, PipelineConfig};
use crate::wfdb::{write_record, Annotation, PtbClass, Record, RecordHeader, SignalSpec};

/// One Gaussian wave: amplitude (mV), centre relative to the R peak (s), width (s).
#[derive(Debug, Clone, Copy)]
struct Wave {
    amp: f64,
    mu: f64,
    sd: f64,
}

const fn w(amp: f64, mu: f64, sd: f64) -> Wave {
    Wave { amp, mu, sd }
}

const NORMAL: &[Wave] = &[
    w(0.15, -0.20, 0.025),
    w(-0.10, -0.030, 0.008),
    w(1.0, 0.0, 0.018),
    w(-0.20, 0.032, 0.010),
    w(0.30, 0.26, 0.045),
];
const SUPRAVENTRICULAR: &[Wave] = &[
    w(-0.08, -0.14, 0.020),
    w(-0.05, -0.030, 0.008),
    w(1.0, 0.0, 0.017),
    w(-0.12, 0.030, 0.010),
    w(0.18, 0.21, 0.040),
];
const VENTRICULAR: &[Wave] = &[
    w(1.0, 0.0, 0.025),
    w(-0.30, 0.075, 0.025),
    w(-0.35, 0.30, 0.060),
];
const PACED: &[Wave] = &[
    w(0.25, -0.05, 0.010),
    w(1.0, 0.0, 0.020),
    w(-0.30, 0.060, 0.020),
    w(0.45, 0.33, 0.060),
];
const INFARCT: &[Wave] = &[
    w(0.10, -0.20, 0.025),
    w(-0.25, -0.035, 0.012),
    w(1.0, 0.0, 0.018),
    w(-0.10, 0.032, 0.010),
    w(0.18, 0.12, 0.050),
    w(-0.25, 0.28, 0.050),
];

/// MIT-BIH symbols used for the four generated classes.
pub const MIT_SYMBOLS: [&str; 4] = ["N", "A", "V", "/"];

/// An in-memory synthetic single-lead recording.
#[derive(Debug, Clone)]
pub struct SynthRecord {
    pub name: String,
    pub sampling_rate: f64,
    pub lead: String,
    /// mV samples.
    pub signal: Vec<f64>,
    pub annotations: Vec<Annotation>,
    /// Record-level diagnosis for infarction records.
    pub diagnosis: Option<PtbClass>,
}

impl SynthRecord {
    /// Converts to a [`Record`] without going through files.
    pub fn to_record(&self) -> Record {
        let spec = SignalSpec {
            file_name: format!("{}.dat", self.name),
            storage_format: 212,
            gain: 200.0,
            baseline: 0,
            units: "mV".into(),
            adc_resolution: 12,
            adc_zero: 0,
            initial_value: 0,
            checksum: None,
            block_size: 0,
            description: self.lead.clone(),
        };
        Record {
            header: RecordHeader {
                record_name: self.name.clone(),
                num_signals: 1,
                sampling_rate: self.sampling_rate,
                num_samples: self.signal.len(),
                signals: vec![spec],
                comments: Vec::new(),
            },
            signals: vec![self.signal.clone()],
            annotations: self.annotations.clone(),
        }
    }

    /// Writes `.hea`/`.dat` (and `.atr` when annotated) into `dir`.
    pub fn write(&self, dir: &Path) -> Result<RecordHeader> {
        write_record(
            dir,
            &self.name,
            self.sampling_rate,
            &[(self.lead.clone(), self.signal.clone())],
            200.0,
            0,
            &self.annotations,
        )
    }

    /// Labeler matching how the record would be labelled after loading.
    pub fn labeler(&self) -> BeatLabeler {
        match self.diagnosis {
            Some(d) => BeatLabeler::Fixed(d.index()),
            None => BeatLabeler::from_annotations(&self.annotations, self.sampling_rate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seconds: f64,
    /// Relative frequency of N, S, V, Q beats in arrhythmia records.
    pub class_weights: Vec<f64>,
    /// White noise standard deviation (mV).
    pub noise_mv: f64,
    /// Baseline wander amplitude (mV).
    pub wander_mv: f64,
    /// Relative per-beat jitter of wave amplitudes and widths.
    pub jitter: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seconds: 120.0,
            class_weights: vec![0.4, 0.2, 0.2, 0.2],
            noise_mv: 0.005,
            wander_mv: 0.02,
            jitter: 0.08,
        }
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn add_wave(signal: &mut [f64], fs: f64, t_r: f64, wave: Wave, amp_scale: f64, sd_scale: f64) {
    let mu = t_r + wave.mu;
    let sd = wave.sd * sd_scale;
    let lo = ((mu - 5.0 * sd) * fs).floor().max(0.0) as usize;
    let hi = (((mu + 5.0 * sd) * fs).ceil().max(0.0) as usize).min(signal.len());
    for (i, s) in signal.iter_mut().enumerate().take(hi).skip(lo) {
        let z = (i as f64 / fs - mu) / sd;
        *s += wave.amp * amp_scale * (-0.5 * z * z).exp();
    }
}

fn add_beat<R: Rng>(
    signal: &mut [f64],
    fs: f64,
    t_r: f64,
    waves: &[Wave],
    severity: f64,
    jitter: f64,
    rng: &mut R,
) {
    for (k, wave) in waves.iter().enumerate() {
        let is_r = wave.mu == 0.0 && wave.amp == 1.0;
        let amp = if is_r {
            1.0 + 0.01 * normal(rng)
        } else {
            let base = if k > 0 && severity != 1.0 {
                severity
            } else {
                1.0
            };
            base * (1.0 + jitter * normal(rng))
        };
        let sd = 1.0 + jitter * normal(rng);
        add_wave(signal, fs, t_r, *wave, amp, sd.max(0.5));
    }
}

fn background<R: Rng>(n: usize, fs: f64, cfg: &SynthConfig, rng: &mut R) -> Vec<f64> {
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let freq = rng.gen_range(0.15..0.35);
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            cfg.wander_mv * (std::f64::consts::TAU * freq * t + phase).sin()
                + cfg.noise_mv * normal(rng)
        })
        .collect()
}

fn pick_class<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen_range(0.0..total);
    for (i, &wt) in weights.iter().enumerate() {
        if u < wt {
            return i;
        }
        u -= wt;
    }
    weights.len() - 1
}

/// A 360 Hz arrhythmia record with beat annotations (`N`, `A`, `V`, `/`)
/// preceded by a rhythm annotation.
pub fn arrhythmia_record(name: &str, cfg: &SynthConfig, seed: u64) -> Result<SynthRecord> {
    if cfg.class_weights.len() != 4
        || cfg.class_weights.iter().any(|w| *w < 0.0)
        || cfg.class_weights.iter().sum::<f64>() <= 0.0
    {
        return Err(Error::Config(
            "class_weights must be 4 non-negative values with a positive sum".into(),
        ));
    }
    let fs = 360.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (cfg.seconds * fs).round() as usize;
    let mut signal = background(n, fs, cfg, &mut rng);
    let base_rr: f64 = rng.gen_range(0.65..0.95);
    let mut rhythm = Annotation::new(0, "+").expect("rhythm symbol");
    rhythm.aux = Some(b"(N".to_vec());
    let mut annotations = vec![rhythm];
    let mut t = 0.3;
    let mut class = pick_class(&cfg.class_weights, &mut rng);
    while t < cfg.seconds - 0.5 {
        let waves = [NORMAL, SUPRAVENTRICULAR, VENTRICULAR, PACED][class];
        add_beat(&mut signal, fs, t, waves, 1.0, cfg.jitter, &mut rng);
        let sample = (t * fs).round() as u64;
        if sample > annotations.last().map_or(0, |a| a.sample_index) {
            annotations.push(Annotation::new(sample, MIT_SYMBOLS[class]).expect("beat symbol"));
        }
        let next = pick_class(&cfg.class_weights, &mut rng);
        let mut rr = base_rr * (1.0 + 0.03 * normal(&mut rng));
        if class == 2 {
            rr *= 1.25;
        }
        rr *= match next {
            1 => 0.7,
            2 => 0.8,
            _ => 1.0,
        };
        t += rr;
        class = next;
    }
    Ok(SynthRecord {
        name: name.to_string(),
        sampling_rate: fs,
        lead: "MLII".into(),
        signal,
        annotations,
        diagnosis: None,
    })
}

/// A 1000 Hz lead-II record of either diagnosis, without annotations.
pub fn infarction_record(
    name: &str,
    diagnosis: PtbClass,
    cfg: &SynthConfig,
    seed: u64,
) -> Result<SynthRecord> {
    let fs = 1000.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (cfg.seconds * fs).round() as usize;
    let mut signal = background(n, fs, cfg, &mut rng);
    let base_rr: f64 = rng.gen_range(0.7..1.0);
    let severity: f64 = rng.gen_range(0.6..1.0);
    let mut t = 0.3;
    while t < cfg.seconds - 0.5 {
        match diagnosis {
            PtbClass::Healthy => add_beat(&mut signal, fs, t, NORMAL, 1.0, cfg.jitter, &mut rng),
            PtbClass::Mi => add_beat(&mut signal, fs, t, INFARCT, severity, cfg.jitter, &mut rng),
        }
        t += base_rr * (1.0 + 0.03 * normal(&mut rng));
    }
    Ok(SynthRecord {
        name: name.to_string(),
        sampling_rate: fs,
        lead: "ii".into(),
        signal,
        annotations: Vec::new(),
        diagnosis: Some(diagnosis),
    })
}

/// `records` synthetic records for `task`; infarction records alternate
/// diagnoses starting with MI.
pub fn records(
    task: Task,
    records: usize,
    cfg: &SynthConfig,
    seed: u64,
) -> Result<Vec<SynthRecord>> {
    (0..records)
        .map(|i| {
            let s = seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(i as u64);
            match task {
                Task::MitBih => arrhythmia_record(&format!("s{}", 100 + i), cfg, s),
                Task::Ptb => {
                    let d = if i % 2 == 0 {
                        PtbClass::Mi
                    } else {
                        PtbClass::Healthy
                    };
                    infarction_record(&format!("p{:03}", i + 1), d, cfg, s)
                }
            }
        })
        .collect()
}

/// Writes records plus, for infarction records, a `diagnosis.csv` sidecar.
pub fn write_records(dir: &Path, recs: &[SynthRecord]) -> Result<()> {
    let mut diag = String::from("record,label\n");
    for r in recs {
        r.write(dir)?;
        if let Some(d) = r.diagnosis {
            diag.push_str(&format!(
                "{},{}\n",
                r.name,
                if d == PtbClass::Mi { "MI" } else { "Healthy" }
            ));
        }
    }
    if recs.iter().any(|r| r.diagnosis.is_some()) {
        let path = dir.join("diagnosis.csv");
        std::fs::write(&path, diag).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Runs the beat pipeline over freshly generated records until every class
/// has at least `per_class[c]` beats, then keeps exactly that many per class
/// (in generation order).
pub fn beat_pool(
    task: Task,
    per_class: &[usize],
    cfg: &SynthConfig,
    seed: u64,
) -> Result<Vec<Beat>> {
    let classes = task.num_classes();
    if per_class.len() != classes {
        return Err(Error::Config(format!(
            "{} class counts for a {classes}-class task",
            per_class.len()
        )));
    }
    let pcfg = PipelineConfig::default();
    let mut by_class: Vec<Vec<Beat>> = vec![Vec::new(); classes];
    let mut i = 0usize;
    while by_class.iter().zip(per_class).any(|(b, &n)| b.len() < n) {
        if i > 100_000 {
            return Err(Error::Config(
                "synthetic generator cannot fill the requested classes".into(),
            ));
        }
        let s = seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(i as u64);
        let rec = match task {
            Task::MitBih => arrhythmia_record(&format!("s{}", 100 + i), cfg, s)?,
            Task::Ptb => {
                // favour whichever class is furthest from its quota
                let need = |c: usize| {
                    per_class[c].saturating_sub(by_class[c].len()) as f64
                        / per_class[c].max(1) as f64
                };
                let d = if need(PtbClass::Mi.index()) >= need(PtbClass::Healthy.index()) {
                    PtbClass::Mi
                } else {
                    PtbClass::Healthy
                };
                infarction_record(&format!("p{:04}", i + 1), d, cfg, s)?
            }
        };
        let (beats, _) = extract_record(&rec.to_record(), &rec.labeler(), &pcfg)?;
        for b in beats {
            if by_class[b.label].len() < per_class[b.label] {
                by_class[b.label].push(b);
            }
        }
        i += 1;
    }
    Ok(by_class.into_iter().flatten().collect())
}

/// Record name to diagnosis for a set of infarction records.
pub fn diagnoses(recs: &[SynthRecord]) -> HashMap<String, PtbClass> {
    recs.iter()
        .filter_map(|r| r.diagnosis.map(|d| (r.name.clone(), d)))
        .collect()
}
