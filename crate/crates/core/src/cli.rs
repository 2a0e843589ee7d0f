//! Command-line front end: simulate, spectrum, dataset, train, evaluate and
//! diagnose.
//!
//! Every subcommand starts from a [`RunConfig`] (defaults, optionally read
//! from `--config`) and applies flag overrides on top. Artifacts go under
//! `--out`:
//!
//! | subcommand | files |
//! |------------|-------|
//! | `simulate` | `signals/<condition>/<channel>.csv` |
//! | `spectrum` | `spectra/<channel>.{fft,psd,periodogram}.csv`, `spectra/<machine>.park.csv` |
//! | `dataset`  | `dataset.csv`, `vibration.csv`, `manifest.json` |
//! | `train`    | `model_<kind>.json` |
//! | `evaluate` | `report_<kind>.txt`, `report_<kind>.json` |
//! | `diagnose` | printed only |

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dataset::{
    build_dataset, load_csv, load_vibration_csv, normalize, save_csv, save_vibration_csv, split,
    Dataset, Manifest, Scaler, SimulationSetup, MANIFEST_VERSION,
};
use crate::error::{Error, Result};
use crate::features::{Baseline, MachineSignals, Observation};
use crate::metrics::EvaluationReport;
use crate::mlc::{Criterion, ModelKind};
use crate::pipeline::{evaluate_bundle, train_bundle, Diagnosis, ModelBundle, RunConfig};
use crate::sigsim::{SignalRecord, Units};
use crate::spectral::{
    fft_magnitude, multitaper_psd, park_vector_spectrum, periodogram, PsdEstimate,
};

pub const DATASET_FILE: &str = "dataset.csv";
pub const VIBRATION_FILE: &str = "vibration.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "multifault",
    version,
    about = "Concurrent unbalance/misalignment diagnosis with severity grading"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON run configuration; missing fields take defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for simulation and splitting.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// brtree, chain or mlknn.
    #[arg(long, global = true, value_parser = parse_model_kind)]
    pub model: Option<ModelKind>,
    /// Tree split criterion: gini or entropy.
    #[arg(long, global = true, value_parser = parse_criterion)]
    pub criterion: Option<Criterion>,
    /// Depth limit of the binary-relevance trees.
    #[arg(long = "max-depth", global = true)]
    pub max_depth: Option<usize>,
    /// Neighbour count for ML-kNN.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Training fraction.
    #[arg(long, global = true)]
    pub split: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_model_kind(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_criterion(s: &str) -> std::result::Result<Criterion, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the eight channel signals of simulated observations.
    Simulate {
        /// Condition name; all conditions when omitted.
        #[arg(long)]
        condition: Option<String>,
        /// 0 is the undisturbed original; higher values add disturbances.
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
    /// Write FFT, multitaper, periodogram and Park-vector spectra.
    Spectrum {
        /// A `time_s,value` signal CSV; a simulated observation when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Sampling rate of `--input`; inferred from its time column when omitted.
        #[arg(long)]
        fs: Option<f64>,
        #[arg(long, default_value = "misalignment")]
        condition: String,
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
    /// Build the labeled dataset and its manifest.
    Dataset {
        /// Disturbed replicates per condition, in addition to the original.
        #[arg(long = "per-condition")]
        per_condition: Option<usize>,
    },
    /// Fit a multi-label model and the severity tree.
    Train {
        /// Dataset directory from `dataset`; simulated in memory when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Train every model kind.
        #[arg(long)]
        all: bool,
    },
    /// Score a model on the test partition.
    Evaluate {
        /// Dataset directory from `dataset`; simulated in memory when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Model bundle; `<out>/model_<kind>.json` if present, otherwise trained on the fly.
        #[arg(long)]
        bundle: Option<PathBuf>,
        /// Evaluate every model kind.
        #[arg(long)]
        all: bool,
    },
    /// Diagnose one observation.
    Diagnose {
        /// Model bundle; trained on the fly when absent.
        #[arg(long)]
        bundle: Option<PathBuf>,
        /// Dataset directory used when training on the fly.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Directory of channel CSVs as written by `simulate`.
        #[arg(long)]
        signals: Option<PathBuf>,
        /// Condition to simulate when no signals are given.
        #[arg(long, default_value = "healthy")]
        condition: String,
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
}

/// Loads the config and applies flag overrides.
pub fn resolve_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(m) = common.model {
        cfg.model.kind = m;
    }
    if let Some(c) = common.criterion {
        cfg.model.criterion = c;
    }
    if let Some(d) = common.max_depth {
        cfg.model.max_depth = Some(d);
    }
    if let Some(k) = common.k {
        cfg.model.knn_k = k;
    }
    if let Some(f) = common.split {
        cfg.train_fraction = f;
    }
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run_from_args<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::invalid(e.to_string()))?;
    run(&cli, out)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = resolve_config(&cli.common)?;
    create_dir(&cfg.out_dir)?;
    match &cli.command {
        Command::Simulate {
            condition,
            replicate,
        } => simulate(&cfg, condition.as_deref(), *replicate, out),
        Command::Spectrum {
            input,
            fs,
            condition,
            replicate,
        } => spectrum(&cfg, input.as_deref(), *fs, condition, *replicate, out),
        Command::Dataset { per_condition } => {
            let mut cfg = cfg;
            if let Some(p) = per_condition {
                cfg.per_condition = *p;
            }
            dataset(&cfg, out)
        }
        Command::Train { data, all } => {
            let parts = Partitions::obtain(&cfg, data.as_deref())?;
            for kind in kinds(&cfg, *all) {
                let bundle = parts.train(&cfg, kind)?;
                let path = cfg.out_dir.join(format!("model_{}.json", kind.as_str()));
                bundle.save(&path)?;
                writeln!(out, "wrote {}", path.display()).map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::Evaluate { data, bundle, all } => {
            let parts = Partitions::obtain(&cfg, data.as_deref())?;
            for kind in kinds(&cfg, *all) {
                let b = load_or_train(&cfg, &parts, kind, bundle.as_deref().filter(|_| !*all))?;
                let summary = evaluate(&b, &parts)?;
                let text = summary.render_text();
                let stem = cfg
                    .out_dir
                    .join(format!("report_{}", b.multilabel.kind().as_str()));
                write_file(&stem.with_extension("txt"), text.as_bytes())?;
                write_file(
                    &stem.with_extension("json"),
                    serde_json::to_string_pretty(&summary)?.as_bytes(),
                )?;
                write!(out, "{text}").map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::Diagnose {
            bundle,
            data,
            signals,
            condition,
            replicate,
        } => {
            let b = match bundle {
                Some(p) => ModelBundle::load(p)?,
                None => {
                    let parts = Partitions::obtain(&cfg, data.as_deref())?;
                    load_or_train(&cfg, &parts, cfg.model.kind, None)?
                }
            };
            let obs = match signals {
                Some(dir) => read_observation(&b.setup, dir)?,
                None => {
                    let cond = b
                        .setup
                        .scenarios
                        .iter()
                        .position(|s| s.name == *condition)
                        .ok_or_else(|| {
                            Error::invalid(format!("no condition named `{condition}`"))
                        })?;
                    let seed = SimulationSetup::observation_seed(cfg.seed, cond, *replicate);
                    b.setup
                        .simulate(&b.setup.scenarios[cond], seed, *replicate > 0)?
                }
            };
            let d = b.diagnose(&obs)?;
            writeln!(out, "{}", diagnosis_line(&d)).map_err(stdout_err)?;
            writeln!(out, "{}", serde_json::to_string(&d)?).map_err(stdout_err)?;
            Ok(())
        }
    }
}

fn kinds(cfg: &RunConfig, all: bool) -> Vec<ModelKind> {
    if all {
        ModelKind::ALL.to_vec()
    } else {
        vec![cfg.model.kind]
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn diagnosis_line(d: &Diagnosis) -> String {
    format!(
        "isUnbalance={} isMisalignment={} severity={} (chart: {}, vibration RMS {:.3}/{:.3} mm/s)",
        d.is_unbalance,
        d.is_misalignment,
        d.severity,
        d.chart_severity,
        d.vibration_rms_mm_s[0],
        d.vibration_rms_mm_s[1]
    )
}

fn simulate(
    cfg: &RunConfig,
    condition: Option<&str>,
    replicate: usize,
    out: &mut dyn Write,
) -> Result<()> {
    let setup = &cfg.setup;
    for (cond, scenario) in setup.scenarios.iter().enumerate() {
        if condition.is_some_and(|c| c != scenario.name) {
            continue;
        }
        let seed = SimulationSetup::observation_seed(cfg.seed, cond, replicate);
        let obs = setup.simulate(scenario, seed, replicate > 0)?;
        let dir = cfg.out_dir.join("signals").join(&scenario.name);
        create_dir(&dir)?;
        for sig in obs.channels() {
            sig.write_csv(&dir.join(format!("{}.csv", sig.channel_id)))?;
        }
        writeln!(out, "wrote {}", dir.display()).map_err(stdout_err)?;
    }
    if let Some(c) = condition {
        setup.scenario(c)?;
    }
    Ok(())
}

fn write_signal_spectra(
    cfg: &RunConfig,
    dir: &Path,
    sig: &SignalRecord,
    out: &mut dyn Write,
) -> Result<()> {
    let stem = sig.channel_id.replace(['/', '\\'], "_");
    fft_magnitude(sig)?.write_csv(&dir.join(format!("{stem}.fft.csv")))?;
    let psd = multitaper_psd(sig, cfg.setup.spectral.nw, cfg.setup.spectral.k)?;
    psd.write_csv(&dir.join(format!("{stem}.psd.csv")))?;
    periodogram(sig)?.write_csv(&dir.join(format!("{stem}.periodogram.csv")))?;
    let (f, _) = peak(&psd);
    writeln!(out, "{}: multitaper peak at {f:.2} Hz", sig.channel_id).map_err(stdout_err)?;
    Ok(())
}

fn peak(psd: &PsdEstimate) -> (f64, f64) {
    psd.freqs_hz
        .iter()
        .zip(&psd.power)
        .skip(1)
        .fold((0.0, f64::NEG_INFINITY), |best, (&f, &p)| {
            if p > best.1 {
                (f, p)
            } else {
                best
            }
        })
}

fn spectrum(
    cfg: &RunConfig,
    input: Option<&Path>,
    fs: Option<f64>,
    condition: &str,
    replicate: usize,
    out: &mut dyn Write,
) -> Result<()> {
    let dir = cfg.out_dir.join("spectra");
    create_dir(&dir)?;
    if let Some(path) = input {
        let fs = match fs {
            Some(f) => f,
            None => infer_fs(path)?,
        };
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "signal".into());
        let sig = SignalRecord::read_csv(path, &name, fs, Units::Ampere)?;
        return write_signal_spectra(cfg, &dir, &sig, out);
    }
    let setup = &cfg.setup;
    let cond = setup
        .scenarios
        .iter()
        .position(|s| s.name == condition)
        .ok_or_else(|| Error::invalid(format!("no condition named `{condition}`")))?;
    let seed = SimulationSetup::observation_seed(cfg.seed, cond, replicate);
    let obs = setup.simulate(&setup.scenarios[cond], seed, replicate > 0)?;
    for sig in obs.channels() {
        write_signal_spectra(cfg, &dir, sig, out)?;
    }
    for (m, cfg_m) in obs.machines.iter().zip(&setup.machines) {
        let [a, b, c] = &m.currents;
        let park = park_vector_spectrum(a, b, c)?;
        park.write_csv(&dir.join(format!("{}.park.csv", cfg_m.name)))?;
    }
    writeln!(out, "wrote {}", dir.display()).map_err(stdout_err)?;
    Ok(())
}

fn infer_fs(path: &Path) -> Result<f64> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut times = Vec::with_capacity(2);
    for rec in reader.records().take(2) {
        let rec = rec?;
        let t: f64 = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| {
                Error::invalid(format!("{}: cannot read time column", path.display()))
            })?;
        times.push(t);
    }
    match times.as_slice() {
        [a, b] if b > a => Ok(1.0 / (b - a)),
        _ => Err(Error::invalid(format!(
            "{}: cannot infer the sampling rate; pass --fs",
            path.display()
        ))),
    }
}

fn dataset(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let built = build_dataset(&cfg.setup, cfg.per_condition, cfg.seed)?;
    let (train_raw, test_raw) = split(&built.dataset, cfg.train_fraction, cfg.seed)?;
    let (scaler, _) = normalize(&train_raw)?;
    let scaled = scaler.apply(&built.dataset)?;
    let dir = &cfg.out_dir;
    save_csv(&scaled, &dir.join(DATASET_FILE))?;
    save_vibration_csv(&scaled, &dir.join(VIBRATION_FILE))?;
    Manifest {
        format_version: MANIFEST_VERSION,
        seed: cfg.seed,
        per_condition: cfg.per_condition,
        setup: cfg.setup.clone(),
        split_fraction: cfg.train_fraction,
        train_ids: train_raw.ids(),
        test_ids: test_raw.ids(),
        scaler,
        baseline: built.baseline,
    }
    .save(&dir.join(MANIFEST_FILE))?;
    writeln!(
        out,
        "wrote {} samples ({} train / {} test) to {}",
        scaled.len(),
        train_raw.len(),
        test_raw.len(),
        dir.display()
    )
    .map_err(stdout_err)?;
    Ok(())
}

/// Scaled train/test partitions with the scaler and baseline that produced them.
pub struct Partitions {
    pub train: Dataset,
    pub test: Dataset,
    pub scaler: Scaler,
    pub baseline: Baseline,
    pub setup: SimulationSetup,
    pub seed: u64,
}

impl Partitions {
    /// Reads a dataset directory when given, otherwise simulates in memory.
    pub fn obtain(cfg: &RunConfig, data: Option<&Path>) -> Result<Self> {
        match data {
            Some(dir) => Self::load(dir),
            None => {
                let built = build_dataset(&cfg.setup, cfg.per_condition, cfg.seed)?;
                let (train_raw, test_raw) = split(&built.dataset, cfg.train_fraction, cfg.seed)?;
                let (scaler, train) = normalize(&train_raw)?;
                Ok(Self {
                    test: scaler.apply(&test_raw)?,
                    train,
                    scaler,
                    baseline: built.baseline,
                    setup: cfg.setup.clone(),
                    seed: cfg.seed,
                })
            }
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = Manifest::load(&dir.join(MANIFEST_FILE))?;
        let mut ds = load_csv(&dir.join(DATASET_FILE))?;
        load_vibration_csv(&mut ds, &dir.join(VIBRATION_FILE))?;
        Ok(Self {
            train: ds.subset(&manifest.train_ids)?,
            test: ds.subset(&manifest.test_ids)?,
            scaler: manifest.scaler,
            baseline: manifest.baseline,
            setup: manifest.setup,
            seed: manifest.seed,
        })
    }

    pub fn train(&self, cfg: &RunConfig, kind: ModelKind) -> Result<ModelBundle> {
        let mut cfg = cfg.clone();
        cfg.model.kind = kind;
        cfg.setup = self.setup.clone();
        train_bundle(
            &cfg,
            &self.train,
            self.scaler.clone(),
            self.baseline.clone(),
        )
    }
}

fn load_or_train(
    cfg: &RunConfig,
    parts: &Partitions,
    kind: ModelKind,
    explicit: Option<&Path>,
) -> Result<ModelBundle> {
    if let Some(p) = explicit {
        return ModelBundle::load(p);
    }
    let default = cfg.out_dir.join(format!("model_{}.json", kind.as_str()));
    if default.exists() {
        log::info!("using {}", default.display());
        return ModelBundle::load(&default);
    }
    parts.train(cfg, kind)
}

/// Multi-label report plus severity-tree accuracy on one test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub seed: u64,
    pub test_ids: Vec<usize>,
    pub report: EvaluationReport,
    pub severity_accuracy: f64,
}

impl EvaluationSummary {
    pub fn render_text(&self) -> String {
        format!(
            "{}severity tree accuracy {:.4}\n",
            self.report.render_text(),
            self.severity_accuracy
        )
    }
}

pub fn evaluate(bundle: &ModelBundle, parts: &Partitions) -> Result<EvaluationSummary> {
    let (report, severity_accuracy) = evaluate_bundle(bundle, &parts.test)?;
    Ok(EvaluationSummary {
        seed: parts.seed,
        test_ids: parts.test.ids(),
        report,
        severity_accuracy,
    })
}

/// Reads `<channel_id>.csv` files for both machines from `dir`.
pub fn read_observation(setup: &SimulationSetup, dir: &Path) -> Result<Observation> {
    let fs = setup.timebase.fs_hz;
    let read = |name: &str, units: Units| -> Result<SignalRecord> {
        let path = dir.join(format!("{name}.csv"));
        if !path.exists() {
            return Err(Error::io(
                &path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "signal file not found"),
            ));
        }
        SignalRecord::read_csv(&path, name, fs, units)
    };
    let machine = |idx: usize| -> Result<MachineSignals> {
        let n = &setup.machines[idx].name;
        Ok(MachineSignals {
            currents: [
                read(&format!("{n}.ia"), Units::Ampere)?,
                read(&format!("{n}.ib"), Units::Ampere)?,
                read(&format!("{n}.ic"), Units::Ampere)?,
            ],
            vibration: read(&format!("{n}.vib"), Units::MmPerS)?,
        })
    };
    Ok(Observation {
        machines: [machine(0)?, machine(1)?],
    })
}
