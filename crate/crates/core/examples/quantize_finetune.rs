//! Quantizes a trained model to a symmetric 6-bit codebook and recovers the
//! lost accuracy with the greedy one-step code search.

use ekgnet::model::{balanced_accuracy, train, NoiseModel, TrainConfig};
use ekgnet::pipeline::{split_and_oversample, SplitConfig};
use ekgnet::quant::{build_codebook, decode, finetune, quantize, BITS};
use ekgnet::synth::{beat_pool, SynthConfig};
use ekgnet::Task;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ekgnet::Result<()> {
    let c = Task::MitBih.num_classes();
    let pool = beat_pool(Task::MitBih, &vec![1000; c], &SynthConfig::default(), 2)?;
    let split = split_and_oversample(
        &pool,
        &SplitConfig {
            test_counts: vec![200; c],
            oversample_target: 1000,
            val_fraction: 0.2,
            seed: 2,
        },
    )?;
    let cfg = TrainConfig {
        epochs: 15,
        seed: 2,
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

    let codebook = build_codebook(&params, BITS)?;
    let q = quantize(&params, &codebook);
    println!(
        "codebook: {} levels, w_max {:.4}, step {:.5}",
        codebook.levels.len(),
        codebook.w_max,
        codebook.step
    );

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ft = finetune(
        &q,
        |m| balanced_accuracy(&decode(m)?, &split.validation),
        1000,
        &mut rng,
    )?;
    let accepted = ft.log.iter().filter(|s| s.accepted).count();
    println!("fine-tuning kept {accepted} of {} moves", ft.log.len());

    println!("test balanced accuracy");
    println!(
        "  float      {:.4}",
        balanced_accuracy(&params, &split.test)?
    );
    println!(
        "  quantized  {:.4}",
        balanced_accuracy(&decode(&q)?, &split.test)?
    );
    println!(
        "  fine-tuned {:.4}",
        balanced_accuracy(&decode(&ft.model)?, &split.test)?
    );
    Ok(())
}
