//! Experiment configuration and the end-to-end run: ingest, extract, split,
//! train, quantize, fine-tune and evaluate (float, quantized, analog).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analog::{simulate, AnalogNetwork, MacConfig, SimulationSummary};
use crate::beat::{class_counts, load_beats_csv, Beat, Task};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, Metrics};
use crate::model::{
    balanced_accuracy, history_csv, predict_class, train, Checkpoint, CheckpointMeta, ModelParams,
    NoiseModel, TeacherLogits, TrainConfig, TrainOutcome,
};
use crate::pipeline::{
    extract_record, split_and_oversample, BeatLabeler, ExtractStats, PipelineConfig, Split,
    SplitConfig,
};
use crate::quant::{build_codebook, decode, finetune, quantize, FinetuneOutcome, QuantizedModel};
use crate::synth::{self, SynthConfig};
use crate::wfdb::{load_diagnosis_csv, load_record_with, LoadOptions, PtbClass, Record};

/// Version string recorded in run logs.
pub const VERSION: &str = match option_env!("EKGNET_GIT_DESCRIBE") {
    Some(v) => v,
    None => env!("CARGO_PKG_VERSION"),
};

/// Where beats come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DataSource {
    /// WFDB records under `records_dir`; all `.hea` files when `records` is empty.
    Wfdb {
        records_dir: PathBuf,
        #[serde(default)]
        records: Vec<String>,
        /// `record,label` table for the infarction task.
        #[serde(default)]
        diagnosis_csv: Option<PathBuf>,
        #[serde(default)]
        strict_checksum: bool,
    },
    /// Pre-extracted beats (178 values plus a label per row).
    BeatsCsv { path: PathBuf },
    /// Records generated in memory.
    Synthetic {
        records: usize,
        #[serde(default)]
        synth: SynthConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantSettings {
    pub bits: u32,
    pub finetune_iterations: usize,
}

impl Default for QuantSettings {
    fn default() -> Self {
        Self {
            bits: crate::quant::BITS,
            finetune_iterations: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalogSettings {
    /// Number of simulated noise seeds.
    pub noise_seeds: usize,
}

impl Default for AnalogSettings {
    fn default() -> Self {
        Self { noise_seeds: 10 }
    }
}

/// Everything a run depends on. `seed` drives the split, training,
/// fine-tuning and the analog noise seeds (`seed`, `seed + 1`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub data: DataSource,
    /// Defaults to lead MLII for arrhythmia and lead ii for infarction.
    #[serde(default)]
    pub pipeline: Option<PipelineConfig>,
    /// Defaults to the task's standard counts.
    #[serde(default)]
    pub split: Option<SplitConfig>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub mac: MacConfig,
    #[serde(default)]
    pub quant: QuantSettings,
    #[serde(default)]
    pub analog: AnalogSettings,
    #[serde(default)]
    pub teacher_logits: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// A config with task defaults for everything but the data source.
    pub fn new(task: Task, data: DataSource) -> Self {
        Self {
            task,
            data,
            pipeline: None,
            split: None,
            train: TrainConfig::default(),
            noise: NoiseModel::default(),
            mac: MacConfig::default(),
            quant: QuantSettings::default(),
            analog: AnalogSettings::default(),
            teacher_logits: None,
            seed: 0,
            out_dir: default_out_dir(),
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        self.pipeline.clone().unwrap_or_else(|| PipelineConfig {
            lead: match self.task {
                Task::MitBih => "MLII".into(),
                Task::Ptb => "ii".into(),
            },
            ..PipelineConfig::default()
        })
    }

    pub fn split_config(&self) -> SplitConfig {
        let mut s = self
            .split
            .clone()
            .unwrap_or_else(|| SplitConfig::for_task(self.task, self.seed));
        s.seed = self.seed;
        s
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    pub fn analog_seeds(&self) -> Vec<u64> {
        (0..self.analog.noise_seeds as u64)
            .map(|k| self.seed.wrapping_add(k))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let split = self.split_config();
        if split.test_counts.len() != self.task.num_classes() {
            return Err(Error::Config(format!(
                "task {} has {} classes but split.test_counts has {} entries",
                self.task,
                self.task.num_classes(),
                split.test_counts.len()
            )));
        }
        self.train_config().validate()?;
        self.mac.validate()?;
        if self.analog.noise_seeds == 0 {
            return Err(Error::Config(
                "analog.noise_seeds must be at least 1".into(),
            ));
        }
        if let DataSource::Synthetic { synth, .. } = &self.data {
            if self.task == Task::MitBih && synth.class_weights.len() != 4 {
                return Err(Error::Config(
                    "synthetic class_weights must have 4 entries".into(),
                ));
            }
        }
        Ok(())
    }

    /// SHA-256 of the config JSON with `out_dir` removed, as hex.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("out_dir");
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }
}

/// Beats produced by the ingest/extract stages.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub beats: Vec<Beat>,
    pub stats: ExtractStats,
    pub records: Vec<RecordSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub id: String,
    pub sampling_rate: f64,
    pub num_signals: usize,
    pub num_samples: usize,
    pub annotations: usize,
    pub beats: usize,
}

impl RecordSummary {
    fn of(id: &str, r: &Record, beats: usize) -> Self {
        Self {
            id: id.to_string(),
            sampling_rate: r.sampling_rate(),
            num_signals: r.header.num_signals,
            num_samples: r.header.num_samples,
            annotations: r.annotations.len(),
            beats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub source: Vec<usize>,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneSummary {
    pub iterations: usize,
    pub accepted: usize,
    pub val_before: f64,
    pub val_after: f64,
}

/// Contents of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub seed: u64,
    pub task: Task,
    pub class_names: Vec<String>,
    pub parameters: usize,
    pub counts: SplitCounts,
    pub best_epoch: usize,
    pub best_val_balanced_accuracy: f64,
    pub float: Metrics,
    pub quantized: Metrics,
    pub finetuned: Metrics,
    pub finetune: FinetuneSummary,
    pub analog_noiseless: Metrics,
    pub analog: SimulationSummary,
}

/// Output directory writer that stamps every artifact with the config hash and seed.
pub struct Artifacts {
    pub dir: PathBuf,
    pub config_hash: String,
    pub seed: u64,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>, config_hash: String, seed: u64) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            dir,
            config_hash,
            seed,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Writes pretty JSON; objects gain `config_hash` and `seed` fields.
    pub fn json(&self, name: &str, value: Value) -> Result<PathBuf> {
        let mut value = value;
        if let Some(o) = value.as_object_mut() {
            o.insert("config_hash".into(), json!(self.config_hash));
            o.insert("seed".into(), json!(self.seed));
        }
        self.write(name, &(serde_json::to_string_pretty(&value)? + "\n"))
    }

    /// Writes CSV text behind a `#` provenance line.
    pub fn csv(&self, name: &str, text: &str) -> Result<PathBuf> {
        let stamped = format!(
            "# config_hash={} seed={}\n{text}",
            self.config_hash, self.seed
        );
        self.write(name, &stamped)
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// SHA-256 over beat samples and labels, as hex.
pub fn dataset_hash(beats: &[Beat]) -> String {
    let mut h = Sha256::new();
    for b in beats {
        for v in b.samples.iter() {
            h.update(v.to_le_bytes());
        }
        h.update((b.label as u64).to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// A config bound to the directory its relative paths are resolved against.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub base_dir: PathBuf,
}

impl Experiment {
    /// Validates the config and checks that every referenced input exists.
    pub fn new(cfg: ExperimentConfig, base_dir: impl Into<PathBuf>) -> Result<Self> {
        cfg.validate()?;
        let exp = Self {
            cfg,
            base_dir: base_dir.into(),
        };
        let mut inputs: Vec<&PathBuf> = Vec::new();
        match &exp.cfg.data {
            DataSource::Wfdb {
                records_dir,
                diagnosis_csv,
                ..
            } => inputs.extend(std::iter::once(records_dir).chain(diagnosis_csv)),
            DataSource::BeatsCsv { path } => inputs.push(path),
            DataSource::Synthetic { .. } => {}
        }
        inputs.extend(&exp.cfg.teacher_logits);
        for p in inputs {
            let full = exp.resolve(p);
            if !full.exists() {
                return Err(Error::io(
                    &full,
                    std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "referenced input does not exist",
                    ),
                ));
            }
        }
        Ok(exp)
    }

    /// Reads a JSON config; relative paths are taken from its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(cfg, base)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.cfg.seed = seed;
        self
    }

    pub fn with_out_dir(mut self, out: impl Into<PathBuf>) -> Self {
        self.cfg.out_dir = out.into();
        self
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.cfg.out_dir)
    }

    pub fn artifacts(&self) -> Result<Artifacts> {
        Artifacts::new(self.out_dir(), self.cfg.hash(), self.cfg.seed)
    }

    pub fn classes(&self) -> usize {
        self.cfg.task.num_classes()
    }

    /// Record ids (paths relative to the records directory, without extension).
    pub fn record_ids(&self) -> Result<Vec<String>> {
        let DataSource::Wfdb {
            records_dir,
            records,
            ..
        } = &self.cfg.data
        else {
            return Ok(Vec::new());
        };
        if !records.is_empty() {
            return Ok(records.clone());
        }
        let root = self.resolve(records_dir);
        let mut ids = Vec::new();
        collect_headers(&root, &root, &mut ids)?;
        ids.sort();
        if ids.is_empty() {
            return Err(Error::invalid(format!(
                "no .hea files under {}",
                root.display()
            )));
        }
        Ok(ids)
    }

    /// Loads every configured WFDB record.
    pub fn ingest(&self) -> Result<Vec<(String, Record)>> {
        let DataSource::Wfdb {
            records_dir,
            strict_checksum,
            ..
        } = &self.cfg.data
        else {
            return Err(Error::Config("ingest needs a wfdb data source".into()));
        };
        let root = self.resolve(records_dir);
        let opts = LoadOptions {
            strict_checksum: *strict_checksum,
            annotator: (self.cfg.task == Task::MitBih).then(|| "atr".to_string()),
            require_annotations: self.cfg.task == Task::MitBih,
        };
        self.record_ids()?
            .into_iter()
            .map(|id| load_record_with(root.join(&id), &opts).map(|r| (id, r)))
            .collect()
    }

    /// Ingests and runs the beat pipeline (or reads/generates beats).
    pub fn extract(&self) -> Result<Extraction> {
        let pcfg = self.cfg.pipeline();
        let mut out = Extraction {
            beats: Vec::new(),
            stats: ExtractStats::default(),
            records: Vec::new(),
        };
        match &self.cfg.data {
            DataSource::Wfdb { diagnosis_csv, .. } => {
                let diagnoses: Option<HashMap<String, PtbClass>> =
                    match (self.cfg.task, diagnosis_csv) {
                        (Task::Ptb, Some(p)) => Some(load_diagnosis_csv(self.resolve(p))?),
                        (Task::Ptb, None) => {
                            return Err(Error::Config(
                                "the ptb task needs data.diagnosis_csv".into(),
                            ))
                        }
                        _ => None,
                    };
                for (id, rec) in self.ingest()? {
                    let labeler = match &diagnoses {
                        None => {
                            BeatLabeler::from_annotations(&rec.annotations, rec.sampling_rate())
                        }
                        Some(d) => match d.get(&id).or_else(|| d.get(rec.name())) {
                            Some(class) => BeatLabeler::Fixed(class.index()),
                            None => {
                                log::warn!("record {id} has no diagnosis; skipped");
                                continue;
                            }
                        },
                    };
                    let (beats, stats) = extract_record(&rec, &labeler, &pcfg)?;
                    out.records.push(RecordSummary::of(&id, &rec, beats.len()));
                    out.stats.merge(&stats);
                    out.beats.extend(beats);
                }
            }
            DataSource::BeatsCsv { path } => {
                out.beats = load_beats_csv(self.resolve(path), self.classes())?;
                out.stats.beats = out.beats.len();
            }
            DataSource::Synthetic {
                records,
                synth: scfg,
            } => {
                for rec in synth::records(self.cfg.task, *records, scfg, self.cfg.seed)? {
                    let r = rec.to_record();
                    let (beats, stats) = extract_record(&r, &rec.labeler(), &pcfg)?;
                    out.records
                        .push(RecordSummary::of(&rec.name, &r, beats.len()));
                    out.stats.merge(&stats);
                    out.beats.extend(beats);
                }
            }
        }
        if out.beats.is_empty() {
            return Err(Error::invalid("no beats extracted"));
        }
        Ok(out)
    }

    pub fn split(&self, beats: &[Beat]) -> Result<Split> {
        split_and_oversample(beats, &self.cfg.split_config())
    }

    pub fn teacher(&self) -> Result<Option<TeacherLogits>> {
        self.cfg
            .teacher_logits
            .as_ref()
            .map(|p| TeacherLogits::load_csv(self.resolve(p), self.classes()))
            .transpose()
    }

    pub fn train(&self, split: &Split) -> Result<TrainOutcome> {
        let teacher = self.teacher()?;
        train(
            &self.cfg.train_config(),
            &self.cfg.noise,
            self.classes(),
            &split.train,
            &split.validation,
            teacher.as_ref(),
        )
    }

    pub fn checkpoint(&self, outcome: &TrainOutcome) -> Checkpoint {
        Checkpoint {
            params: outcome.params.clone(),
            metadata: CheckpointMeta {
                seed: self.cfg.seed,
                config: serde_json::to_value(self.cfg.train_config()).expect("config serializes"),
                epoch: outcome.best_epoch,
                val_metric: outcome.best_val,
                config_hash: Some(self.cfg.hash()),
            },
        }
    }

    pub fn quantize(&self, params: &ModelParams) -> Result<QuantizedModel> {
        Ok(quantize(
            params,
            &build_codebook(params, self.cfg.quant.bits)?,
        ))
    }

    /// Fine-tunes against validation balanced accuracy of the decoded weights.
    pub fn finetune(&self, q: &QuantizedModel, validation: &[Beat]) -> Result<FinetuneOutcome> {
        if validation.is_empty() {
            return Err(Error::invalid(
                "fine-tuning needs a non-empty validation set",
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        finetune(
            q,
            |m| balanced_accuracy(&decode(m)?, validation),
            self.cfg.quant.finetune_iterations,
            &mut rng,
        )
    }

    pub fn evaluate_params(&self, params: &ModelParams, beats: &[Beat]) -> Result<Metrics> {
        evaluate(|b| predict_class(params, &b.samples), beats, self.classes())
    }

    pub fn simulate(
        &self,
        q: &QuantizedModel,
        beats: &[Beat],
    ) -> Result<(Metrics, SimulationSummary)> {
        let quiet = AnalogNetwork::new(q, &self.cfg.mac.noiseless())?;
        let noiseless = simulate(&quiet, beats, &[self.cfg.seed])?;
        let noiseless = Metrics::from_confusion(noiseless.confusion)?;
        let net = AnalogNetwork::new(q, &self.cfg.mac)?;
        Ok((noiseless, simulate(&net, beats, &self.cfg.analog_seeds())?))
    }

    /// Runs every stage and writes all artifacts into the output directory.
    ///
    /// `status.json` reads `incomplete` with the failing stage if any stage fails.
    pub fn run(&self) -> Result<RunReport> {
        let art = self.artifacts()?;
        art.json("status.json", json!({"status": "running"}))?;
        let result = self.run_stages(&art);
        match &result {
            Ok(_) => art.json("status.json", json!({"status": "complete"}))?,
            Err(e) => {
                let stage = match e {
                    Error::Stage { stage, .. } => *stage,
                    _ => "setup",
                };
                art.json(
                    "status.json",
                    json!({"status": "incomplete", "stage": stage, "error": e.to_string()}),
                )?
            }
        };
        result
    }

    fn run_stages(&self, art: &Artifacts) -> Result<RunReport> {
        let started = std::time::Instant::now();
        let mut timings = serde_json::Map::new();
        let mut lap = |name: &str, t: &mut std::time::Instant| {
            timings.insert(name.to_string(), json!(t.elapsed().as_secs_f64()));
            *t = std::time::Instant::now();
        };
        let mut t = std::time::Instant::now();
        let classes = self.classes();
        let names: Vec<String> = self
            .cfg
            .task
            .class_names()
            .iter()
            .map(|s| s.to_string())
            .collect();

        let ex = stage("extract", self.extract())?;
        let source_counts = class_counts(&ex.beats, classes);
        art.json(
            "extract_stats.json",
            json!({"stats": ex.stats, "class_counts": source_counts, "records": ex.records}),
        )?;
        lap("extract", &mut t);

        let split = stage("split", self.split(&ex.beats))?;
        let manifest = split.manifest(self.cfg.seed, source_counts.clone());
        art.json("split_manifest.json", serde_json::to_value(&manifest)?)?;
        lap("split", &mut t);

        let outcome = stage("train", self.train(&split))?;
        stage(
            "train",
            self.checkpoint(&outcome).save(art.path("checkpoint.json")),
        )?;
        art.csv("history.csv", &history_csv(&outcome.history))?;
        lap("train", &mut t);

        let q = stage("quantize", self.quantize(&outcome.params))?;
        art.json("quantized.json", q.to_json())?;
        lap("quantize", &mut t);

        let ft = stage("finetune", self.finetune(&q, &split.validation))?;
        art.json("finetuned.json", ft.model.to_json())?;
        art.csv("finetune_log.csv", &ft.log_csv())?;
        lap("finetune", &mut t);

        let float = stage(
            "evaluate",
            self.evaluate_params(&outcome.params, &split.test),
        )?;
        let quantized = stage("evaluate", self.evaluate_params(&decode(&q)?, &split.test))?;
        let finetuned = stage(
            "evaluate",
            self.evaluate_params(&decode(&ft.model)?, &split.test),
        )?;
        let (analog_noiseless, analog) = stage("simulate", self.simulate(&ft.model, &split.test))?;
        let analog_metrics = Metrics::from_confusion(analog.confusion.clone())?;
        self.write_simulation(art, &split.test, &analog_noiseless, &analog)?;
        for (file, m) in [
            ("confusion_float.csv", &float),
            ("confusion_quantized.csv", &quantized),
            ("confusion_finetuned.csv", &finetuned),
            ("confusion_analog.csv", &analog_metrics),
        ] {
            self.write_confusion(art, file, m)?;
        }
        lap("evaluate", &mut t);

        let report = RunReport {
            config_hash: art.config_hash.clone(),
            seed: self.cfg.seed,
            task: self.cfg.task,
            class_names: names,
            parameters: outcome.params.num_params(),
            counts: SplitCounts {
                source: source_counts,
                train: manifest.train_counts,
                validation: manifest.validation_counts,
                test: manifest.test_counts,
            },
            best_epoch: outcome.best_epoch,
            best_val_balanced_accuracy: outcome.best_val,
            float,
            quantized,
            finetuned,
            finetune: FinetuneSummary {
                iterations: ft.log.len(),
                accepted: ft.log.iter().filter(|s| s.accepted).count(),
                val_before: ft.trace[0],
                val_after: ft.final_accuracy(),
            },
            analog_noiseless,
            analog,
        };
        art.json("metrics.json", serde_json::to_value(&report)?)?;
        art.json(
            "run.json",
            json!({
                "version": VERSION,
                "config": self.cfg,
                "timings_s": timings,
                "total_s": started.elapsed().as_secs_f64(),
            }),
        )?;
        Ok(report)
    }
}

/// Single-stage entry points used by the command-line tool. Each stage reads
/// what it needs from the output directory or recomputes it from the config.
impl Experiment {
    /// Loads (or generates) the records and writes `ingest.json`; synthetic
    /// records are also written as WFDB files under `records/`.
    pub fn ingest_stage(&self, art: &Artifacts) -> Result<Vec<RecordSummary>> {
        let summaries: Vec<RecordSummary> = match &self.cfg.data {
            DataSource::Synthetic {
                records,
                synth: scfg,
            } => {
                let recs = synth::records(self.cfg.task, *records, scfg, self.cfg.seed)?;
                synth::write_records(&art.path("records"), &recs)?;
                recs.iter()
                    .map(|r| RecordSummary::of(&r.name, &r.to_record(), 0))
                    .collect()
            }
            DataSource::Wfdb { .. } => self
                .ingest()?
                .iter()
                .map(|(id, r)| RecordSummary::of(id, r, 0))
                .collect(),
            DataSource::BeatsCsv { .. } => {
                return Err(Error::Config(
                    "ingest needs a wfdb or synthetic data source".into(),
                ))
            }
        };
        art.json("ingest.json", json!({ "records": summaries }))?;
        Ok(summaries)
    }

    /// Extracts beats and writes `beats.csv` and `extract_stats.json`.
    pub fn extract_stage(&self, art: &Artifacts) -> Result<Extraction> {
        let ex = self.extract()?;
        let mut text = String::new();
        for b in &ex.beats {
            for v in b.samples.iter() {
                let _ = write!(text, "{v},");
            }
            let _ = writeln!(text, "{}", b.label);
        }
        art.csv("beats.csv", &text)?;
        art.json(
            "extract_stats.json",
            json!({
                "stats": ex.stats,
                "class_counts": class_counts(&ex.beats, self.classes()),
                "records": ex.records,
            }),
        )?;
        Ok(ex)
    }

    /// Extraction followed by the split; writes `split_manifest.json`.
    pub fn split_stage(&self, art: &Artifacts) -> Result<Split> {
        let ex = stage("extract", self.extract())?;
        let split = stage("split", self.split(&ex.beats))?;
        let manifest = split.manifest(self.cfg.seed, class_counts(&ex.beats, self.classes()));
        art.json("split_manifest.json", serde_json::to_value(&manifest)?)?;
        Ok(split)
    }

    /// Trains and writes `checkpoint.json` and `history.csv`.
    pub fn train_stage(&self, art: &Artifacts) -> Result<TrainOutcome> {
        let split = self.split_stage(art)?;
        let outcome = stage("train", self.train(&split))?;
        self.checkpoint(&outcome)
            .save(art.path("checkpoint.json"))?;
        art.csv("history.csv", &history_csv(&outcome.history))?;
        Ok(outcome)
    }

    /// Quantizes `checkpoint.json` into `quantized.json`.
    pub fn quantize_stage(&self, art: &Artifacts) -> Result<QuantizedModel> {
        let ck = Checkpoint::load(art.path("checkpoint.json"))?;
        let q = stage("quantize", self.quantize(&ck.params))?;
        art.json("quantized.json", q.to_json())?;
        Ok(q)
    }

    /// Fine-tunes `quantized.json` into `finetuned.json` and `finetune_log.csv`.
    pub fn finetune_stage(&self, art: &Artifacts) -> Result<FinetuneOutcome> {
        let q = QuantizedModel::load(art.path("quantized.json"))?;
        let split = self.split_stage(art)?;
        let ft = stage("finetune", self.finetune(&q, &split.validation))?;
        art.json("finetuned.json", ft.model.to_json())?;
        art.csv("finetune_log.csv", &ft.log_csv())?;
        Ok(ft)
    }

    /// The fine-tuned model if present, else the plain quantized one.
    pub fn deployed_model(&self, art: &Artifacts) -> Result<QuantizedModel> {
        let ft = art.path("finetuned.json");
        if ft.exists() {
            QuantizedModel::load(ft)
        } else {
            QuantizedModel::load(art.path("quantized.json"))
        }
    }

    /// Monte Carlo analog inference on the test split; writes `simulation.json`.
    pub fn simulate_stage(&self, art: &Artifacts) -> Result<SimulationSummary> {
        let q = self.deployed_model(art)?;
        let split = self.split_stage(art)?;
        let (noiseless, summary) = stage("simulate", self.simulate(&q, &split.test))?;
        self.write_simulation(art, &split.test, &noiseless, &summary)?;
        Ok(summary)
    }

    fn write_simulation(
        &self,
        art: &Artifacts,
        test: &[Beat],
        noiseless: &Metrics,
        s: &SimulationSummary,
    ) -> Result<()> {
        art.json(
            "simulation.json",
            json!({
                "cfg": self.cfg.mac,
                "seeds": s.seeds,
                "dataset_hash": dataset_hash(test),
                "accuracy": {
                    "mean_balanced": s.mean_balanced_accuracy,
                    "sd_balanced": s.sd_balanced_accuracy,
                    "per_seed_balanced": s.per_seed_balanced_accuracy,
                    "noiseless_balanced": noiseless.balanced_accuracy,
                },
                "confusion": s.confusion,
            }),
        )?;
        Ok(())
    }

    fn write_confusion(&self, art: &Artifacts, file: &str, m: &Metrics) -> Result<()> {
        art.csv(file, &m.confusion_csv(self.cfg.task.class_names()))?;
        Ok(())
    }

    /// Evaluates every model present in the output directory on the test
    /// split; writes `eval.json` and a confusion CSV per model.
    pub fn eval_stage(&self, art: &Artifacts) -> Result<Vec<(String, Metrics)>> {
        let split = self.split_stage(art)?;
        let mut models: Vec<(String, ModelParams)> = Vec::new();
        let ck = art.path("checkpoint.json");
        if ck.exists() {
            models.push(("float".into(), Checkpoint::load(ck)?.params));
        }
        for (name, file) in [
            ("quantized", "quantized.json"),
            ("finetuned", "finetuned.json"),
        ] {
            let p = art.path(file);
            if p.exists() {
                models.push((name.into(), decode(&QuantizedModel::load(p)?)?));
            }
        }
        if models.is_empty() {
            return Err(Error::invalid(format!(
                "no checkpoint.json, quantized.json or finetuned.json in {}",
                art.dir.display()
            )));
        }
        let mut out = Vec::new();
        let mut report = serde_json::Map::new();
        for (name, params) in models {
            let m = stage("evaluate", self.evaluate_params(&params, &split.test))?;
            self.write_confusion(art, &format!("confusion_{name}.csv"), &m)?;
            report.insert(name.clone(), serde_json::to_value(&m)?);
            out.push((name, m));
        }
        art.json("eval.json", Value::Object(report))?;
        Ok(out)
    }
}

fn collect_headers(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_headers(root, &path, out)?;
        } else if path.extension().is_some_and(|e| e == "hea") {
            let rel = path.strip_prefix(root).unwrap_or(&path).with_extension("");
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

/// Human-readable summary of a report.
pub fn summarize(r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "task {} ({} parameters), seed {}",
        r.task, r.parameters, r.seed
    );
    let _ = writeln!(s, "test beats per class: {:?}", r.counts.test);
    let _ = writeln!(
        s,
        "float       balanced accuracy {:.4}",
        r.float.balanced_accuracy
    );
    let _ = writeln!(
        s,
        "quantized   balanced accuracy {:.4}",
        r.quantized.balanced_accuracy
    );
    let _ = writeln!(
        s,
        "fine-tuned  balanced accuracy {:.4}",
        r.finetuned.balanced_accuracy
    );
    let _ = writeln!(
        s,
        "analog      balanced accuracy {:.4} +- {:.4} over {} seeds (noiseless {:.4})",
        r.analog.mean_balanced_accuracy,
        r.analog.sd_balanced_accuracy,
        r.analog.seeds.len(),
        r.analog_noiseless.balanced_accuracy
    );
    s
}
