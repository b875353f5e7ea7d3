//! Runs a quantized model through the behavioral analog accelerator:
//! node voltages for one beat, then Monte Carlo accuracy over noise seeds.

use ekgnet::analog::{simulate, AnalogNetwork, ChipMismatch, MacConfig};
use ekgnet::model::{balanced_accuracy, predict_logits, train, NoiseModel, TrainConfig};
use ekgnet::pipeline::{scale_to_voltage, split_and_oversample, SplitConfig};
use ekgnet::quant::{build_codebook, decode, quantize, BITS};
use ekgnet::synth::{beat_pool, SynthConfig};
use ekgnet::Task;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ekgnet::Result<()> {
    let c = Task::MitBih.num_classes();
    let pool = beat_pool(Task::MitBih, &vec![800; c], &SynthConfig::default(), 3)?;
    let split = split_and_oversample(
        &pool,
        &SplitConfig {
            test_counts: vec![200; c],
            oversample_target: 800,
            val_fraction: 0.1,
            seed: 3,
        },
    )?;
    let cfg = TrainConfig {
        epochs: 15,
        seed: 3,
        ..TrainConfig::default()
    };
    let params = train(
        &cfg,
        &NoiseModel::default(),
        c,
        &split.train,
        &split.validation,
        None,
    )?
    .params;
    let q = quantize(&params, &build_codebook(&params, BITS)?);

    let mac = MacConfig::default();
    let quiet = AnalogNetwork::new(&q, &mac.noiseless())?;
    let beat = &split.test[0];
    let volts = scale_to_voltage(&beat.samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let out = quiet.forward(&volts, &ChipMismatch::none(c), &mut rng)?;
    let logits = predict_logits(&decode(&q)?, &beat.samples)?;
    println!("beat label {}  class code {}", beat.label, out.class_code);
    for (v, l) in out.node_voltages.iter().zip(&logits) {
        println!("  node {v:.5} V   float logit {l:+.5}");
    }

    let noisy = AnalogNetwork::new(&q, &mac)?;
    let seeds: Vec<u64> = (0..10).collect();
    let s = simulate(&noisy, &split.test, &seeds)?;
    println!(
        "digital quantized {:.4}",
        balanced_accuracy(&decode(&q)?, &split.test)?
    );
    println!(
        "analog {:.4} +- {:.4} over {} seeds",
        s.mean_balanced_accuracy,
        s.sd_balanced_accuracy,
        seeds.len()
    );
    Ok(())
}
