//! Trains the 336-weight network under the analog weight-noise model on a
//! synthetic four-class beat pool and reports test balanced accuracy.

use ekgnet::metrics::evaluate;
use ekgnet::model::{predict_class, train, NoiseModel, TrainConfig};
use ekgnet::pipeline::{split_and_oversample, SplitConfig};
use ekgnet::synth::{beat_pool, SynthConfig};
use ekgnet::Task;

fn main() -> ekgnet::Result<()> {
    let task = Task::MitBih;
    let c = task.num_classes();
    let pool = beat_pool(task, &vec![1000; c], &SynthConfig::default(), 1)?;
    let split = split_and_oversample(
        &pool,
        &SplitConfig {
            test_counts: vec![200; c],
            oversample_target: 1000,
            val_fraction: 0.1,
            seed: 1,
        },
    )?;
    let cfg = TrainConfig {
        epochs: 15,
        seed: 1,
        ..TrainConfig::default()
    };
    let outcome = train(
        &cfg,
        &NoiseModel::default(),
        c,
        &split.train,
        &split.validation,
        None,
    )?;
    for r in &outcome.history {
        println!(
            "epoch {:>3}  loss {:.4}  val {:.4}",
            r.epoch, r.train_loss, r.val_balanced_acc
        );
    }
    let m = evaluate(
        |b| predict_class(&outcome.params, &b.samples),
        &split.test,
        c,
    )?;
    println!(
        "{} parameters, best epoch {}",
        outcome.params.num_params(),
        outcome.best_epoch
    );
    println!("test balanced accuracy {:.4}", m.balanced_accuracy);
    print!("{}", m.confusion_csv(task.class_names()));
    Ok(())
}
