//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 6, 7 and 13 use real data when `EKGNET_MITBIH_DIR` (MIT-BIH
//! records in format 212) or `EKGNET_PTB_DIR` (format-212 records plus a
//! `diagnosis.csv` sidecar) are set, and labelled synthetic surrogates
//! otherwise.

mod common;

use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use common::Check;
use ekgnet::analog::{characterize_mac, simulate, AnalogNetwork, ChipMismatch, MacConfig};
use ekgnet::beat::{class_counts, Beat};
use ekgnet::experiment::{DataSource, Experiment, ExperimentConfig};
use ekgnet::model::{
    argmax, balanced_accuracy, forward, predict_logits, train, ModelParams, NoiseModel,
    TrainConfig, TrainOutcome,
};
use ekgnet::pipeline::{scale_to_voltage, split_and_oversample, Split, SplitConfig};
use ekgnet::quant::{build_codebook, decode, finetune, quantize, QuantizedModel, BITS};
use ekgnet::synth::{beat_pool, SynthConfig};
use ekgnet::Task;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 3] = [0, 1, 2];

/// Beats for a task: real extraction when the data directory is set.
struct Source {
    label: String,
    beats: Vec<Beat>,
    split: Box<dyn Fn(u64) -> SplitConfig + Send + Sync>,
    train: TrainConfig,
}

fn real_experiment(task: Task) -> Option<Experiment> {
    let (var, diagnosis) = match task {
        Task::MitBih => ("EKGNET_MITBIH_DIR", None),
        Task::Ptb => ("EKGNET_PTB_DIR", Some("diagnosis.csv")),
    };
    let dir = PathBuf::from(std::env::var(var).ok()?);
    let data = DataSource::Wfdb {
        diagnosis_csv: diagnosis.map(|d| dir.join(d)),
        records_dir: dir,
        records: Vec::new(),
        strict_checksum: false,
    };
    Some(Experiment::new(ExperimentConfig::new(task, data), ".").expect("valid data directory"))
}

fn source(task: Task) -> &'static Source {
    static MIT: OnceLock<Source> = OnceLock::new();
    static PTB: OnceLock<Source> = OnceLock::new();
    let cell = match task {
        Task::MitBih => &MIT,
        Task::Ptb => &PTB,
    };
    cell.get_or_init(|| match real_experiment(task) {
        Some(exp) => {
            let beats = exp.extract().expect("extraction").beats;
            Source {
                label: format!("real data, {} beats", beats.len()),
                beats,
                split: Box::new(move |seed| SplitConfig::for_task(task, seed)),
                train: TrainConfig::default(),
            }
        }
        None => {
            let (pool, test, var) = match task {
                Task::MitBih => (vec![3000; 4], vec![800; 4], "EKGNET_MITBIH_DIR"),
                Task::Ptb => (vec![1600, 3200], vec![809, 2102], "EKGNET_PTB_DIR"),
            };
            let beats =
                beat_pool(task, &pool, &SynthConfig::default(), 100).expect("synthetic pool");
            Source {
                label: format!("synthetic surrogate, {var} not set"),
                beats,
                split: Box::new(move |seed| SplitConfig {
                    test_counts: test.clone(),
                    oversample_target: 4000,
                    val_fraction: 0.1,
                    seed,
                }),
                train: TrainConfig {
                    epochs: 30,
                    ..TrainConfig::default()
                },
            }
        }
    })
}

/// Split and trained model for each seed.
fn trained(task: Task) -> &'static Vec<(Split, TrainOutcome)> {
    static MIT: OnceLock<Vec<(Split, TrainOutcome)>> = OnceLock::new();
    static PTB: OnceLock<Vec<(Split, TrainOutcome)>> = OnceLock::new();
    let cell = match task {
        Task::MitBih => &MIT,
        Task::Ptb => &PTB,
    };
    cell.get_or_init(|| {
        let src = source(task);
        SEEDS
            .iter()
            .map(|&seed| {
                let split = split_and_oversample(&src.beats, &(src.split)(seed)).expect("split");
                let cfg = TrainConfig {
                    seed,
                    ..src.train.clone()
                };
                let outcome = train(
                    &cfg,
                    &NoiseModel::default(),
                    task.num_classes(),
                    &split.train,
                    &split.validation,
                    None,
                )
                .expect("training");
                (split, outcome)
            })
            .collect()
    })
}

fn quantized_mit() -> &'static QuantizedModel {
    static Q: OnceLock<QuantizedModel> = OnceLock::new();
    Q.get_or_init(|| {
        let p = &trained(Task::MitBih)[0].1.params;
        quantize(p, &build_codebook(p, BITS).expect("codebook"))
    })
}

fn finetuned_mit() -> &'static QuantizedModel {
    static Q: OnceLock<QuantizedModel> = OnceLock::new();
    Q.get_or_init(|| {
        let val = &trained(Task::MitBih)[0].0.validation;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        finetune(
            quantized_mit(),
            |m| balanced_accuracy(&decode(m)?, val),
            5000,
            &mut rng,
        )
        .expect("fine-tuning")
        .model
    })
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

// ---------------------------------------------------------------- criteria

fn c1_parameter_census() -> Check {
    let (mit, ptb) = (
        ModelParams::zeros(4).num_params(),
        ModelParams::zeros(2).num_params(),
    );
    if (mit, ptb) == (336, 312) {
        Ok(format!("MIT-BIH {mit} weights, PTB {ptb} weights"))
    } else {
        Err(format!("MIT-BIH {mit}, PTB {ptb}; expected 336 and 312"))
    }
}

fn c2_dimension_chain() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for c in [4, 2] {
        let p = ModelParams::init_uniform(c, 0.3, &mut rng);
        let (_, cache) = forward(&p, &vec![0.5; 178]).map_err(e)?;
        let lens = [
            cache.conv1_pre.len() / 6,
            cache.conv2_pre.len(),
            cache.pool.len(),
            cache.fc1.len(),
            cache.logits.len(),
        ];
        if lens != [87, 41, 18, 12, c] {
            return Err(format!("C={c}: lengths {lens:?}"));
        }
    }
    Ok("178 -> 87 -> 41 -> 18 -> 12 -> C for C = 4 and 2".into())
}

fn c3_gradients() -> Check {
    common::gradient_check(12, 3)
}

fn c4_layer_oracles() -> Check {
    common::layer_oracles(100, 4)
}

fn c5_wfdb() -> Check {
    let dir = tempfile::tempdir().map_err(e)?;
    let mut lines = vec![format!(
        "synthetic fixture: {}",
        common::compare_with_reference(&common::write_fixture(dir.path(), "fixture", 5))?
    )];
    match std::env::var("EKGNET_MITBIH_DIR") {
        Ok(d) => lines.push(format!(
            "record 100: {}",
            common::compare_with_reference(&PathBuf::from(d).join("100"))?
        )),
        Err(_) => lines.push("record 100 not checked (EKGNET_MITBIH_DIR not set)".into()),
    }
    Ok(lines.join("; "))
}

fn end_to_end(task: Task, gate: f64) -> Check {
    let runs = trained(task);
    let accs: Vec<f64> = runs
        .iter()
        .map(|(split, o)| balanced_accuracy(&o.params, &split.test))
        .collect::<ekgnet::Result<_>>()
        .map_err(e)?;
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let detail = format!(
        "{}; mean balanced test accuracy {} over seeds {:?} ({})",
        source(task).label,
        pct(mean),
        SEEDS,
        accs.iter().map(|a| pct(*a)).collect::<Vec<_>>().join(", ")
    );
    if mean >= gate {
        Ok(detail)
    } else {
        Err(format!("{detail}; gate {}", pct(gate)))
    }
}

fn c6_mitbih() -> Check {
    end_to_end(Task::MitBih, 0.90)
}

fn c7_ptb() -> Check {
    end_to_end(Task::Ptb, 0.89)
}

fn c8_quantization() -> Check {
    let (split, outcome) = &trained(Task::MitBih)[0];
    let float = balanced_accuracy(&outcome.params, &split.test).map_err(e)?;
    let naive = balanced_accuracy(&decode(quantized_mit()).map_err(e)?, &split.test).map_err(e)?;
    let tuned = balanced_accuracy(&decode(finetuned_mit()).map_err(e)?, &split.test).map_err(e)?;
    let gap = 100.0 * (float - tuned);
    let detail = format!(
        "{}; float {}, 6-bit {}, fine-tuned (E=5000) {}, gap {gap:.2} points",
        source(Task::MitBih).label,
        pct(float),
        pct(naive),
        pct(tuned)
    );
    if gap <= 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c9_analog_noise() -> Check {
    let test = &trained(Task::MitBih)[0].0.test;
    let q = finetuned_mit();
    let quiet = simulate(
        &AnalogNetwork::new(q, &MacConfig::default().noiseless()).map_err(e)?,
        test,
        &[0],
    )
    .map_err(e)?;
    let seeds: Vec<u64> = (0..10).collect();
    let noisy = simulate(
        &AnalogNetwork::new(q, &MacConfig::default()).map_err(e)?,
        test,
        &seeds,
    )
    .map_err(e)?;
    let drop = 100.0 * (quiet.mean_balanced_accuracy - noisy.mean_balanced_accuracy);
    let detail = format!(
        "noiseless {}, noisy {} +- {} over 10 seeds, drop {drop:.2} points",
        pct(quiet.mean_balanced_accuracy),
        pct(noisy.mean_balanced_accuracy),
        pct(noisy.sd_balanced_accuracy)
    );
    if drop <= 1.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c10_characterization() -> Check {
    let r = characterize_mac(&MacConfig::default(), 100_000, 0).map_err(e)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, got, want) in [
        ("weight path", r.nrmse_weight_path, 0.0036),
        ("input path", r.nrmse_input_path, 0.0062),
        ("kernel", r.nrmse_kernel, 0.0002),
    ] {
        let rel = got / want - 1.0;
        ok &= rel.abs() <= 0.2;
        parts.push(format!("{name} {got:.6} ({:+.1}%)", 100.0 * rel));
    }
    let detail = format!("10^5 trials: {}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c11_noiseless_equivalence() -> Check {
    let q = quantized_mit();
    let params = decode(q).map_err(e)?;
    let net = AnalogNetwork::new(q, &MacConfig::default().noiseless()).map_err(e)?;
    let chip = ChipMismatch::none(4);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let beats = common::first_beats(&trained(Task::MitBih)[0].0.test, 500);
    let mut agree = 0;
    for b in &beats {
        let hw = net
            .forward(&scale_to_voltage(&b.samples).map_err(e)?, &chip, &mut rng)
            .map_err(e)?;
        agree += usize::from(
            usize::from(hw.class_code) == argmax(&predict_logits(&params, &b.samples).map_err(e)?),
        );
    }
    let detail = format!("{agree}/{} beats agree", beats.len());
    if agree == beats.len() && beats.len() == 500 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c12_algorithm_properties() -> Check {
    let val = &trained(Task::MitBih)[0].0.validation;
    let q = quantized_mit();
    let eval = |m: &QuantizedModel| balanced_accuracy(&decode(m)?, val);
    for seed in 0..3 {
        let out = finetune(q, eval, 300, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(e)?;
        if let Some(i) = out.trace.windows(2).position(|p| p[1] < p[0]) {
            return Err(format!(
                "run {seed}: accepted accuracy fell at iteration {}",
                i + 1
            ));
        }
    }
    let same = finetune(q, eval, 0, &mut ChaCha8Rng::seed_from_u64(0)).map_err(e)?;
    if same.model != *q || same.trace.len() != 1 {
        return Err("E = 0 changed the model".into());
    }
    Ok(format!(
        "3 monotone runs, E = 0 is the identity, rigged toy: {}",
        common::rigged_frequency(&[1, 2, 4, 8], 100)?
    ))
}

fn split_check(task: Task, beats: &[Beat], label: &str) -> Check {
    let split = split_and_oversample(beats, &SplitConfig::for_task(task, 0)).map_err(e)?;
    let c = task.num_classes();
    let (test, train) = (class_counts(&split.test, c), class_counts(&split.train, c));
    let (want_test, want_train) = match task {
        Task::MitBih => (vec![800; 4], vec![88_069; 4]),
        Task::Ptb => (vec![809, 2102], vec![8_400; 2]),
    };
    if test != want_test || train != want_train {
        return Err(format!("{task}: test {test:?}, train {train:?}"));
    }
    let test_ids: HashSet<_> = split.test.iter().map(|b| &b.source).collect();
    if let Some(b) = split
        .train
        .iter()
        .chain(&split.validation)
        .find(|b| test_ids.contains(&b.source))
    {
        return Err(format!("{task}: beat {} in both test and train", b.id()));
    }
    Ok(format!(
        "{task} ({label}): test {} ({test:?}), train {} ({train:?}), disjoint",
        split.test.len(),
        split.train.len()
    ))
}

fn c13_split_integrity() -> Check {
    let mut parts = Vec::new();
    for (task, pool) in [(Task::MitBih, vec![1000; 4]), (Task::Ptb, vec![1000, 2500])] {
        let part = match real_experiment(task) {
            Some(_) => split_check(task, &source(task).beats, "real data")?,
            None => {
                let beats = beat_pool(task, &pool, &SynthConfig::default(), 7).map_err(e)?;
                split_check(task, &beats, "synthetic surrogate")?
            }
        };
        parts.push(part);
    }
    Ok(parts.join("; "))
}

fn c14_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(e)?;
    let mut cfg = ExperimentConfig::new(
        Task::MitBih,
        DataSource::Synthetic {
            records: 4,
            synth: SynthConfig::default(),
        },
    );
    cfg.split = Some(SplitConfig {
        test_counts: vec![30; 4],
        oversample_target: 300,
        val_fraction: 0.2,
        seed: 0,
    });
    cfg.train.epochs = 3;
    cfg.quant.finetune_iterations = 100;
    cfg.analog.noise_seeds = 3;
    cfg.seed = 11;
    let mut bytes = Vec::new();
    for run in ["a", "b"] {
        let exp = Experiment::new(cfg.clone(), dir.path())
            .map_err(e)?
            .with_out_dir(run);
        exp.run().map_err(e)?;
        bytes.push(std::fs::read(exp.out_dir().join("metrics.json")).map_err(e)?);
    }
    if bytes[0] == bytes[1] {
        Ok(format!(
            "two runs wrote identical metrics.json ({} bytes)",
            bytes[0].len()
        ))
    } else {
        Err("metrics.json differs between runs".into())
    }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Check); 14] = [
        (1, "parameter census", c1_parameter_census),
        (2, "dimension chain", c2_dimension_chain),
        (3, "gradient correctness", c3_gradients),
        (4, "layer oracles", c4_layer_oracles),
        (5, "WFDB parser", c5_wfdb),
        (6, "MIT-BIH end-to-end accuracy", c6_mitbih),
        (7, "PTB end-to-end accuracy", c7_ptb),
        (8, "quantization resilience", c8_quantization),
        (9, "analog-noise resilience", c9_analog_noise),
        (10, "MAC characterization", c10_characterization),
        (11, "noiseless equivalence", c11_noiseless_equivalence),
        (12, "fine-tuning properties", c12_algorithm_properties),
        (13, "split integrity", c13_split_integrity),
        (14, "determinism", c14_determinism),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {why} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 14 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
