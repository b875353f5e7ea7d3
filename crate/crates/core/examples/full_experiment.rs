//! End-to-end experiment on synthetic records: extraction, split, training,
//! quantization, fine-tuning and analog Monte Carlo, with every artifact
//! written to the output directory.

use ekgnet::experiment::{summarize, DataSource, Experiment, ExperimentConfig};
use ekgnet::pipeline::SplitConfig;
use ekgnet::synth::SynthConfig;
use ekgnet::Task;

fn main() -> ekgnet::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ekgnet-experiment"));
    let mut cfg = ExperimentConfig::new(
        Task::MitBih,
        DataSource::Synthetic {
            records: 12,
            synth: SynthConfig::default(),
        },
    );
    cfg.split = Some(SplitConfig {
        test_counts: vec![100; 4],
        oversample_target: 1200,
        val_fraction: 0.1,
        seed: 0,
    });
    cfg.train.epochs = 10;
    cfg.quant.finetune_iterations = 500;
    cfg.out_dir = out.clone();
    let report = Experiment::new(cfg, ".")?.run()?;
    print!("{}", summarize(&report));
    println!("artifacts in {}", out.display());
    Ok(())
}
