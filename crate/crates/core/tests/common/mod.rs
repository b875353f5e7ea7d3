//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ekgnet::beat::Beat;
use ekgnet::model::layers::{conv1d, dense, maxpool1d};
use ekgnet::model::{backward, cross_entropy_grad, forward, ModelParams, NoiseModel};
use ekgnet::pipeline::{split_and_oversample, Split, SplitConfig};
use ekgnet::quant::{finetune, Codebook, QuantTensor, QuantizedModel};
use ekgnet::synth::{arrhythmia_record, beat_pool, SynthConfig};
use ekgnet::wfdb::load_record;
use ekgnet::{Task, BEAT_LEN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Outcome of one acceptance check: a detail line or a failure reason.
pub type Check = std::result::Result<String, String>;

// ---------------------------------------------------------------- gradients

/// Cross-entropy computed from scratch with a log-sum-exp.
fn ce_oracle(logits: &[f64], label: usize) -> f64 {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    lse - logits[label]
}

/// Loss of the clean weights `w` under a fixed noise draw `eps`, with the
/// noisy weights built here from the quadratic noise law.
fn noisy_loss(
    flat_w: &[f64],
    eps: &[f64],
    noise: &NoiseModel,
    classes: usize,
    beat: &[f64],
    label: usize,
) -> f64 {
    let [a2, a1, a0] = noise.sigma_coeffs;
    let noisy: Vec<f64> = flat_w
        .iter()
        .zip(eps)
        .map(|(&w, &e)| w + (a2 * w * w + a1 * w + a0) * e)
        .collect();
    let p = ModelParams::from_flat(classes, &noisy).unwrap();
    ce_oracle(&forward(&p, beat).unwrap().0, label)
}

/// Worst relative error between analytic and central-difference gradients
/// over `triples` random (input, params, noise draw) triples.
pub fn gradient_check(triples: usize, seed: u64) -> Check {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = NoiseModel {
        output_leakage: false,
        ..NoiseModel::default()
    };
    let mut worst: f64 = 0.0;
    let mut components = 0usize;
    for triple in 0..triples {
        let classes = if triple % 2 == 0 { 4 } else { 2 };
        let beat: Vec<f64> = (0..BEAT_LEN).map(|_| rng.gen_range(0.0..1.0)).collect();
        let label = rng.gen_range(0..classes);
        let params = ModelParams::init_uniform(classes, 0.5, &mut rng);
        let flat = params.flat();
        let eps: Vec<f64> = (0..flat.len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let eps_p = ModelParams::from_flat(classes, &eps).unwrap();

        let noisy = noise.perturb(&params, &eps_p);
        let (logits, cache) = forward(&noisy, &beat).unwrap();
        let (_, d_logits) = cross_entropy_grad(&logits, label).unwrap();
        let analytic = noise
            .chain_gradient(
                &params,
                &eps_p,
                &backward(&noisy, &cache, &d_logits).unwrap(),
            )
            .flat();

        for i in 0..flat.len() {
            let mut plus = flat.clone();
            plus[i] += h;
            let mut minus = flat.clone();
            minus[i] -= h;
            let numeric = (noisy_loss(&plus, &eps, &noise, classes, &beat, label)
                - noisy_loss(&minus, &eps, &noise, classes, &beat, label))
                / (2.0 * h);
            let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
            let rel = (analytic[i] - numeric).abs() / denom;
            if rel > 1e-4 {
                return Err(format!(
                    "triple {triple} component {i}: analytic {:.6e} numeric {numeric:.6e} rel {rel:.2e}",
                    analytic[i]
                ));
            }
            worst = worst.max(rel);
            components += 1;
        }
    }
    Ok(format!(
        "{triples} triples, {components} components, worst relative error {worst:.2e}"
    ))
}

// ---------------------------------------------------------------- layer oracles

fn conv_oracle(x: &[Vec<f64>], w: &[Vec<Vec<f64>>], stride: usize) -> Vec<Vec<f64>> {
    let (len, kernel) = (x.len(), w[0][0].len());
    let l_out = (len - kernel) / stride + 1;
    let mut out = vec![vec![0.0; w.len()]; l_out];
    for (t, row) in out.iter_mut().enumerate() {
        for (co, filt) in w.iter().enumerate() {
            for (ci, taps) in filt.iter().enumerate() {
                for (k, tap) in taps.iter().enumerate() {
                    row[co] += tap * x[t * stride + k][ci];
                }
            }
        }
    }
    out
}

fn pool_oracle(x: &[f64], kernel: usize, stride: usize) -> Vec<f64> {
    (0..(x.len() - kernel) / stride + 1)
        .map(|t| {
            let mut m = f64::NEG_INFINITY;
            for v in &x[t * stride..t * stride + kernel] {
                if *v > m {
                    m = *v;
                }
            }
            m
        })
        .collect()
}

fn dense_oracle(x: &[f64], w: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    for i in 0..w.len() {
        for j in 0..x.len() {
            out[i] += w[i][j] * x[j];
        }
    }
    out
}

/// Largest deviation of conv1d, maxpool1d and dense from nested-loop
/// oracles over `instances` random small shapes each.
pub fn layer_oracles(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for inst in 0..instances {
        let c_in = rng.gen_range(1..4);
        let c_out = rng.gen_range(1..5);
        let kernel = rng.gen_range(1..7);
        let stride = rng.gen_range(1..4);
        let len = kernel + rng.gen_range(0..20);
        let x: Vec<Vec<f64>> = (0..len)
            .map(|_| (0..c_in).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let w: Vec<Vec<Vec<f64>>> = (0..c_out)
            .map(|_| {
                (0..c_in)
                    .map(|_| (0..kernel).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect()
            })
            .collect();
        let flat_x: Vec<f64> = x.iter().flatten().copied().collect();
        let flat_w: Vec<f64> = w.iter().flatten().flatten().copied().collect();
        let got =
            conv1d(&flat_x, c_in, &flat_w, c_out, kernel, stride).map_err(|e| e.to_string())?;
        let want: Vec<f64> = conv_oracle(&x, &w, stride).into_iter().flatten().collect();
        if got.len() != want.len() {
            return Err(format!(
                "conv instance {inst}: length {} vs {}",
                got.len(),
                want.len()
            ));
        }
        for (g, o) in got.iter().zip(&want) {
            worst = worst.max((g - o).abs());
        }

        let signal: Vec<f64> = (0..len + 5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pk = rng.gen_range(1..7).min(signal.len());
        let ps = rng.gen_range(1..4);
        let (pooled, _) = maxpool1d(&signal, pk, ps).map_err(|e| e.to_string())?;
        let want = pool_oracle(&signal, pk, ps);
        if pooled.len() != want.len() {
            return Err(format!(
                "pool instance {inst}: length {} vs {}",
                pooled.len(),
                want.len()
            ));
        }
        for (g, o) in pooled.iter().zip(&want) {
            worst = worst.max((g - o).abs());
        }

        let n = rng.gen_range(1..20);
        let m = rng.gen_range(1..13);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let wm: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let flat_wm: Vec<f64> = wm.iter().flatten().copied().collect();
        let got = dense(&v, &flat_wm, m).map_err(|e| e.to_string())?;
        for (g, o) in got.iter().zip(dense_oracle(&v, &wm)) {
            worst = worst.max((g - o).abs());
        }
    }
    if worst <= 1e-12 {
        Ok(format!(
            "{instances} instances per layer, max deviation {worst:.1e}"
        ))
    } else {
        Err(format!("max deviation {worst:.3e} exceeds 1e-12"))
    }
}

// ---------------------------------------------------------------- WFDB

/// Independent reading of an MIT annotation file: (sample, code) per
/// annotation, skipping SKIP/NUM/SUB/CHN/AUX pseudo-annotations.
pub fn annotation_oracle(bytes: &[u8]) -> Vec<(u64, u8)> {
    let mut out = Vec::new();
    let mut t: i64 = 0;
    let mut i = 0;
    while i + 1 < bytes.len() {
        let word = u16::from(bytes[i]) | (u16::from(bytes[i + 1]) << 8);
        i += 2;
        let (code, field) = ((word >> 10) as u8, i64::from(word & 0x3ff));
        match code {
            0 if field == 0 => break,
            59 => {
                let hi = i64::from(u16::from(bytes[i]) | (u16::from(bytes[i + 1]) << 8));
                let lo = i64::from(u16::from(bytes[i + 2]) | (u16::from(bytes[i + 3]) << 8));
                t += i64::from(((hi << 16) | lo) as i32);
                i += 4;
            }
            60..=62 => {}
            63 => i += (field as usize + 1) & !1,
            _ => {
                t += field;
                out.push((t as u64, code));
            }
        }
    }
    out
}

/// Compares our reader with the `wfdb` crate (header fields and every
/// decoded sample) and with the annotation oracle.
pub fn compare_with_reference(prefix: &Path) -> Check {
    let ours = load_record(prefix).map_err(|e| e.to_string())?;
    let reference = wfdb::Record::open(prefix).map_err(|e| format!("wfdb crate: {e}"))?;
    let meta = reference.metadata();
    let n = meta
        .num_samples
        .ok_or("reference header lacks a sample count")? as usize;
    if n != ours.header.num_samples || ours.signals.iter().any(|s| s.len() != n) {
        return Err(format!(
            "sample count {} vs reference {n}",
            ours.header.num_samples
        ));
    }
    if reference.signal_count() != ours.signals.len() {
        return Err(format!(
            "{} channels vs reference {}",
            ours.signals.len(),
            reference.signal_count()
        ));
    }
    if meta.sampling_frequency() != ours.sampling_rate() {
        return Err(format!(
            "fs {} vs reference {}",
            ours.sampling_rate(),
            meta.sampling_frequency()
        ));
    }
    for (ch, signal) in ours.signals.iter().enumerate() {
        let mut reader = reference.signal_reader(ch).map_err(|e| e.to_string())?;
        let adc = reader.read_samples(n).map_err(|e| e.to_string())?;
        if adc.len() != n {
            return Err(format!(
                "reference decoded {} samples on channel {ch}",
                adc.len()
            ));
        }
        for (i, (&a, &v)) in adc.iter().zip(signal).enumerate() {
            if reader.to_physical(a) != v {
                return Err(format!(
                    "channel {ch} sample {i}: {v} vs reference {}",
                    reader.to_physical(a)
                ));
            }
        }
    }
    let atr = with_ext(prefix, "atr");
    let oracle =
        annotation_oracle(&std::fs::read(&atr).map_err(|e| format!("{}: {e}", atr.display()))?);
    let mine: Vec<(u64, u8)> = ours
        .annotations
        .iter()
        .map(|a| (a.sample_index, a.code))
        .collect();
    if mine != oracle {
        return Err(format!(
            "{} annotations vs oracle {}",
            mine.len(),
            oracle.len()
        ));
    }
    Ok(format!(
        "{} channels x {n} samples identical, {} annotations identical",
        ours.signals.len(),
        mine.len()
    ))
}

pub fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes the bundled synthetic fixture (one annotated record) into `dir`.
pub fn write_fixture(dir: &Path, name: &str, seed: u64) -> PathBuf {
    arrhythmia_record(name, &SynthConfig::default(), seed)
        .unwrap()
        .write(dir)
        .unwrap();
    dir.join(name)
}

// ---------------------------------------------------------------- fine-tuning toy

/// A two-weight model whose accuracy is 0.5 at the start codes, 1.0 after
/// one specific move and 0.0 anywhere else. Every other move is rejected,
/// so each trial independently hits the optimum with probability 1/4.
pub fn rigged_success(iterations: usize, seed: u64) -> bool {
    let start = vec![30u16, 30];
    let q = QuantizedModel::from_tensors(
        Codebook::new(1.0, 6).unwrap(),
        vec![QuantTensor {
            name: "toy".into(),
            shape: vec![2],
            codes: start.clone(),
        }],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = finetune(
        &q,
        |m| {
            let c = m.codes();
            Ok(if c == start {
                0.5
            } else if c == [31, 30] {
                1.0
            } else {
                0.0
            })
        },
        iterations,
        &mut rng,
    )
    .unwrap();
    out.final_accuracy() == 1.0
}

/// Success counts over `reps` repetitions against the 1 - (3/4)^E law with a
/// three-sigma binomial band, for each budget E.
pub fn rigged_frequency(budgets: &[usize], reps: usize) -> Check {
    let mut detail = Vec::new();
    for &e in budgets {
        let p = 1.0 - 0.75f64.powi(e as i32);
        let hits = (0..reps)
            .filter(|&r| rigged_success(e, 1000 * e as u64 + r as u64))
            .count();
        let mean = reps as f64 * p;
        let band = 3.0 * (reps as f64 * p * (1.0 - p)).sqrt();
        if (hits as f64 - mean).abs() > band.max(0.5) {
            return Err(format!(
                "E={e}: {hits}/{reps} hits, expected {mean:.1} +- {band:.1}"
            ));
        }
        detail.push(format!(
            "E={e} {hits}/{reps} (expected {mean:.1} +- {band:.1})"
        ));
    }
    Ok(detail.join(", "))
}

// ---------------------------------------------------------------- data

/// A synthetic pool split with `test` beats and `target` training beats per class.
pub fn synthetic_split(
    task: Task,
    per_class: usize,
    test: usize,
    target: usize,
    seed: u64,
) -> Split {
    let c = task.num_classes();
    let pool = beat_pool(task, &vec![per_class; c], &SynthConfig::default(), seed).unwrap();
    split_and_oversample(
        &pool,
        &SplitConfig {
            test_counts: vec![test; c],
            oversample_target: target,
            val_fraction: 0.1,
            seed,
        },
    )
    .unwrap()
}

pub fn first_beats(beats: &[Beat], n: usize) -> Vec<Beat> {
    beats.iter().take(n).cloned().collect()
}
