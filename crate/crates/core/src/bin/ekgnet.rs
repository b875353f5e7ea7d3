use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use ekgnet::analog::{characterize_mac, MacConfig, MIN_TRIALS};
use ekgnet::experiment::{summarize, Artifacts, Experiment, VERSION};
use ekgnet::{Error, Result};

/// Hardware-aware ECG beat classification toolkit.
#[derive(Debug, Parser)]
#[command(name = "ekgnet", version = VERSION, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Monte Carlo trials for `characterize-mac`.
    #[arg(long, global = true)]
    trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load WFDB records (or write synthetic ones) and summarize them.
    Ingest,
    /// Run the beat pipeline and write beats.csv.
    Extract,
    /// Split, train and write checkpoint.json.
    Train,
    /// Quantize checkpoint.json to 6-bit codes.
    Quantize,
    /// Fine-tune quantized.json with the greedy code search.
    Finetune,
    /// Monte Carlo analog inference over the noise seeds.
    Simulate,
    /// Measure MAC noise NRMSE per noise source.
    CharacterizeMac,
    /// Evaluate every model in the output directory on the test split.
    Eval,
    /// Full experiment: every stage in order.
    Run,
}

fn experiment(cli: &Cli) -> Result<Experiment> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <file> is required for this command".into()))?;
    let mut exp = Experiment::load(path)?;
    if let Some(seed) = cli.seed {
        exp = exp.with_seed(seed);
    }
    if let Some(out) = &cli.out {
        exp = exp.with_out_dir(std::env::current_dir().unwrap_or_default().join(out));
    }
    Ok(exp)
}

fn characterize(cli: &Cli) -> Result<()> {
    let (cfg, seed, art) = match &cli.config {
        Some(_) => {
            let exp = experiment(cli)?;
            let art = exp.artifacts()?;
            (exp.cfg.mac.clone(), exp.cfg.seed, Some(art))
        }
        None => {
            let seed = cli.seed.unwrap_or(0);
            let art = match &cli.out {
                Some(out) => Some(Artifacts::new(out, "none".into(), seed)?),
                None => None,
            };
            (MacConfig::default(), seed, art)
        }
    };
    let report = characterize_mac(&cfg, cli.trials.unwrap_or(MIN_TRIALS), seed)?;
    let value = serde_json::to_value(&report)?;
    if let Some(art) = art {
        art.json("characterization.json", value.clone())?;
    }
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    if let Command::CharacterizeMac = cli.command {
        return characterize(cli);
    }
    let exp = experiment(cli)?;
    let art = exp.artifacts()?;
    match cli.command {
        Command::Ingest => {
            let recs = exp.ingest_stage(&art)?;
            println!("ingested {} records into {}", recs.len(), art.dir.display());
        }
        Command::Extract => {
            let ex = exp.extract_stage(&art)?;
            println!(
                "extracted {} beats from {} records",
                ex.beats.len(),
                ex.records.len()
            );
        }
        Command::Train => {
            let t = exp.train_stage(&art)?;
            println!(
                "best epoch {} validation balanced accuracy {:.4}",
                t.best_epoch, t.best_val
            );
        }
        Command::Quantize => {
            let q = exp.quantize_stage(&art)?;
            println!(
                "quantized {} weights, w_max {:.6}",
                q.num_weights(),
                q.codebook.w_max
            );
        }
        Command::Finetune => {
            let ft = exp.finetune_stage(&art)?;
            println!(
                "validation balanced accuracy {:.4} -> {:.4}",
                ft.trace[0],
                ft.final_accuracy()
            );
        }
        Command::Simulate => {
            let s = exp.simulate_stage(&art)?;
            println!(
                "analog balanced accuracy {:.4} +- {:.4} over {} seeds",
                s.mean_balanced_accuracy,
                s.sd_balanced_accuracy,
                s.seeds.len()
            );
        }
        Command::Eval => {
            for (name, m) in exp.eval_stage(&art)? {
                println!("{name:<10} balanced accuracy {:.4}", m.balanced_accuracy);
            }
        }
        Command::Run => print!("{}", summarize(&exp.run()?)),
        Command::CharacterizeMac => unreachable!(),
    }
    Ok(())
}

fn error_line(kind: &str, stage: Option<&str>, message: &str) -> String {
    json!({
        "status": "error",
        "kind": kind,
        "stage": stage,
        "message": message.replace('\n', " "),
    })
    .to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!(
                "{}",
                error_line("usage", None, first.trim_start_matches("error: "))
            );
            return ExitCode::from(2);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let stage = match &e {
                Error::Stage { stage, .. } => Some(*stage),
                _ => None,
            };
            eprintln!("{}", error_line(e.kind(), stage, &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
