use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use robarch::evo::sort_fronts;
use robarch::genome::Genome;
use robarch::micronet::{adv_train_supernet, read_checkpoint, train_standalone, write_checkpoint, Checkpoint, EpochLog};
use robarch::search::{
    hypervolume, read_archive, read_history, run_search, secondary_screening, write_archive, write_config, write_history, write_surrogate_data,
    ArchiveEntry, Evaluator, EvaluatorKind, MicronetEvaluator, Mode, RunFiles, SearchConfig, SyntheticEvaluator,
};
use robarch::surrogate::SurrogateKind;
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{manifest_path, RunManifest};

/// Environment variable naming the root under which default output
/// directories are created.
pub const OUT_ROOT_ENV: &str = "ROBARCH_OUT";

pub const CHECKPOINT_FILE: &str = "supernet.ckpt";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const FRONT_FILE: &str = "front.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const FINAL_LOG_FILE: &str = "final_train_log.csv";

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub surrogate: Option<SurrogateKind>,
    pub evaluator: Option<EvaluatorKind>,
    pub checkpoint: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut Config) -> Result<(), CliError> {
        if let Some(s) = self.seed {
            cfg.search.master_seed = s;
        }
        if let Some(m) = self.mode {
            cfg.search.mode = m;
        }
        if let Some(k) = self.surrogate {
            cfg.search.surrogate_kind = k;
        }
        if let Some(e) = self.evaluator {
            cfg.search.evaluator = e;
        }
        if let Some(c) = &self.checkpoint {
            cfg.driver.checkpoint = Some(c.clone());
        }
        cfg.search.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

pub fn default_out(command: &str) -> PathBuf {
    let root = std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
    root.join(command)
}

/// Writes the manifest, runs `body`, then records its outputs and exit code.
fn with_manifest(
    out: &Path,
    command: &str,
    config: serde_json::Map<String, serde_json::Value>,
    seed: u64,
    inputs: Vec<PathBuf>,
    body: impl FnOnce() -> Result<Vec<PathBuf>, CliError>,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = manifest_path(out, command);
    let mut manifest = RunManifest::start(command, config, seed, inputs);
    manifest.write(&path)?;
    match body() {
        Ok(outputs) => {
            manifest.outputs = outputs;
            manifest.finish(0, &path)
        }
        Err(e) => {
            manifest.finish(e.exit_code(), &path)?;
            Err(e)
        }
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn check_log(log: &[EpochLog]) -> Result<(), CliError> {
    match log.iter().find(|l| !(l.adv_loss.is_finite() && l.clean_val_err.is_finite() && l.adv_val_err.is_finite())) {
        Some(l) => Err(CliError::Numeric(format!("non-finite training log at epoch {}", l.epoch))),
        None => Ok(()),
    }
}

pub fn train_supernet(config: Option<&Path>, ov: &Overrides, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut cfg = Config::load(config)?;
    ov.apply(&mut cfg)?;
    let train = cfg.train_config();
    train.validate()?;
    let out = out.unwrap_or_else(|| default_out("train-supernet"));
    with_manifest(&out, "train-supernet", cfg.to_flat(), cfg.search.master_seed, Vec::new(), || {
        let (supernet, log) = adv_train_supernet(&train)?;
        check_log(&log)?;
        let ckpt_path = out.join(CHECKPOINT_FILE);
        let file = File::create(&ckpt_path).map_err(|e| CliError::io(&ckpt_path, e))?;
        write_checkpoint(&Checkpoint { supernet, data: train.data }, BufWriter::new(file))?;
        let log_path = out.join(TRAIN_LOG_FILE);
        write_rows(&log_path, &log)?;
        if let (Some(first), Some(last)) = (log.first(), log.last()) {
            eprintln!("adv loss {:.4} -> {:.4} over {} epochs", first.adv_loss, last.adv_loss, log.len());
        }
        Ok(vec![ckpt_path, log_path])
    })
}

fn build_evaluator(cfg: &Config) -> Result<Box<dyn Evaluator>, CliError> {
    match cfg.search.evaluator {
        EvaluatorKind::Synthetic => Ok(Box::new(SyntheticEvaluator { noise_seed: cfg.search.master_seed })),
        EvaluatorKind::Micronet => {
            let path = cfg.driver.checkpoint.as_ref().ok_or_else(|| CliError::Missing("the micronet evaluator needs a checkpoint".into()))?;
            let file = File::open(path).map_err(|e| CliError::Missing(format!("checkpoint {}: {e}", path.display())))?;
            let ckpt = read_checkpoint(BufReader::new(file))?;
            let data = ckpt.data.build()?;
            Ok(Box::new(MicronetEvaluator::new(ckpt.supernet, data.val, cfg.search.low_fidelity_fraction, cfg.search.master_seed)))
        }
    }
}

pub fn search(config: Option<&Path>, ov: &Overrides, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut cfg = Config::load(config)?;
    ov.apply(&mut cfg)?;
    let out = out.unwrap_or_else(|| default_out("search"));
    with_manifest(&out, "search", cfg.to_flat(), cfg.search.master_seed, Vec::new(), || {
        let evaluator = build_evaluator(&cfg)?;
        let outcome = run_search(&cfg.search, evaluator.as_ref())?;
        let files = RunFiles::new(&out);
        write_config(&files.config(), &cfg.search)?;
        write_surrogate_data(&files.surrogate_data(), &outcome.training_set)?;
        write_history(&files.history(), &outcome.history)?;
        write_archive(&files.archive(), outcome.archive.entries())?;
        let c = &outcome.counters;
        eprintln!(
            "mode {} archive {} generations {} high evals {} refits {}{}",
            cfg.search.mode,
            outcome.archive.len(),
            c.generations,
            c.high_evals,
            c.surrogate_refits,
            if outcome.budget_exhausted { " (budget exhausted)" } else { "" }
        );
        Ok(vec![files.config(), files.surrogate_data(), files.history(), files.archive()])
    })
}

/// The resolved config a search run was started with.
fn run_config(run: &Path) -> Result<Config, CliError> {
    let manifest = manifest_path(run, "search");
    if manifest.exists() {
        return Config::from_value(serde_json::Value::Object(RunManifest::read(&manifest)?.config));
    }
    let path = RunFiles::new(run).config();
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Missing(format!("{}: {e}", path.display())))?;
    let search: SearchConfig = serde_json::from_str(&text).map_err(|e| CliError::io(&path, e))?;
    Ok(Config { search, ..Config::default() })
}

fn read_entries(path: &Path) -> Result<Vec<ArchiveEntry>, CliError> {
    if !path.exists() {
        return Err(CliError::Missing(format!("{} does not exist", path.display())));
    }
    Ok(read_archive(path)?)
}

pub fn screen(run: &Path, ov: &Overrides) -> Result<(), CliError> {
    let mut cfg = run_config(run)?;
    ov.apply(&mut cfg)?;
    let files = RunFiles::new(run);
    with_manifest(run, "screen", cfg.to_flat(), cfg.search.master_seed, vec![run.to_path_buf()], || {
        let archive = read_entries(&files.archive())?;
        if archive.is_empty() {
            return Err(CliError::Missing(format!("{} has no entries", files.archive().display())));
        }
        let evaluator = build_evaluator(&cfg)?;
        let screened = secondary_screening(&archive, evaluator.as_ref())?;
        write_archive(&files.screened(), &screened)?;
        eprintln!("screened {} of {} archive members", screened.len(), archive.len());
        Ok(vec![files.screened()])
    })
}

#[derive(Serialize)]
struct FrontRow {
    mode: Mode,
    genome: String,
    f1h: f64,
    f2h: f64,
}

#[derive(Serialize)]
struct HistoryRow {
    mode: Mode,
    run: String,
    generation: usize,
    archive_size: usize,
    hypervolume: Option<f64>,
    high_evals: usize,
}

/// A screened genome with its high-fidelity pair.
type Scored = (Genome, (f64, f64));

pub fn report(runs: &[PathBuf], out: Option<PathBuf>) -> Result<(), CliError> {
    if runs.is_empty() {
        return Err(CliError::Missing("report needs at least one run directory".into()));
    }
    let out = out.unwrap_or_else(|| default_out("report"));
    let seed = run_config(&runs[0]).map(|c| c.search.master_seed).unwrap_or(0);
    with_manifest(&out, "report", serde_json::Map::new(), seed, runs.to_vec(), || {
        let mut modes: Vec<Mode> = Vec::new();
        let mut pooled: HashMap<Mode, Vec<Scored>> = HashMap::new();
        let mut history = Vec::new();
        for run in runs {
            let mode = run_config(run)?.search.mode;
            let files = RunFiles::new(run);
            let screened = read_entries(&files.screened())?;
            if !files.history().exists() {
                return Err(CliError::Missing(format!("{} does not exist", files.history().display())));
            }
            for r in read_history(&files.history())? {
                history.push(HistoryRow {
                    mode,
                    run: run.display().to_string(),
                    generation: r.generation,
                    archive_size: r.archive_size,
                    hypervolume: r.hypervolume,
                    high_evals: r.high_evals,
                });
            }
            if !modes.contains(&mode) {
                modes.push(mode);
            }
            let pool = pooled.entry(mode).or_default();
            for e in screened {
                let high = e.high.ok_or_else(|| CliError::Io(format!("{} lacks high-fidelity values", files.screened().display())))?;
                if !pool.iter().any(|(g, _)| *g == e.genome) {
                    pool.push((e.genome, high));
                }
            }
        }
        let mut front = Vec::new();
        for mode in &modes {
            let pool = &pooled[mode];
            let points: Vec<[f64; 2]> = pool.iter().map(|(_, h)| [h.0, h.1]).collect();
            let mut first = sort_fronts(&points).swap_remove(0);
            first.sort_unstable();
            let kept: Vec<[f64; 2]> = first.iter().map(|&i| points[i]).collect();
            let hv = hypervolume(&kept, &[1.0, 1.0])?;
            println!("{mode}: {} front points, high-fidelity HV {hv:.6}", kept.len());
            front.extend(first.into_iter().map(|i| FrontRow { mode: *mode, genome: pool[i].0.to_string(), f1h: pool[i].1 .0, f2h: pool[i].1 .1 }));
        }
        let (front_path, report_path) = (out.join(FRONT_FILE), out.join(REPORT_FILE));
        write_rows(&front_path, front)?;
        write_rows(&report_path, history)?;
        Ok(vec![front_path, report_path])
    })
}

/// Which genome `final-train` trains.
#[derive(Debug, Clone)]
pub enum Pick {
    Index(usize),
    Genome(String),
}

#[derive(Serialize)]
struct MetricsRow {
    genome: String,
    seed: u64,
    epochs: usize,
    clean_error: f64,
    fgsm_error: f64,
    pgd7_error: f64,
    pgd20_error: f64,
}

pub fn final_train(run: Option<&Path>, pick: &Pick, config: Option<&Path>, ov: &Overrides, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut cfg = match (config, run) {
        (Some(path), _) => Config::load(Some(path))?,
        (None, Some(run)) => run_config(run)?,
        (None, None) => Config::default(),
    };
    ov.apply(&mut cfg)?;
    let train = cfg.train_config();
    train.validate()?;
    let out = out.or_else(|| run.map(Path::to_path_buf)).unwrap_or_else(|| default_out("final-train"));
    let inputs = run.map(|r| vec![r.to_path_buf()]).unwrap_or_default();
    with_manifest(&out, "final-train", cfg.to_flat(), cfg.search.master_seed, inputs, || {
        let genome: Genome = match pick {
            Pick::Genome(text) => text.parse().map_err(|e| CliError::Config(format!("genome {text:?}: {e}")))?,
            Pick::Index(i) => {
                let run = run.ok_or_else(|| CliError::Missing("--index needs a run directory".into()))?;
                let screened = read_entries(&RunFiles::new(run).screened())?;
                screened
                    .get(*i)
                    .map(|e| e.genome)
                    .ok_or_else(|| CliError::Missing(format!("index {i} out of range for {} screened architectures", screened.len())))?
            }
        };
        let outcome = train_standalone(genome, &train)?;
        check_log(&outcome.log)?;
        let m = outcome.metrics;
        if ![m.clean_error, m.fgsm_error, m.pgd7_error, m.pgd20_error].iter().all(|v| v.is_finite()) {
            return Err(CliError::Numeric(format!("non-finite metrics {m:?}")));
        }
        let (metrics_path, log_path) = (out.join(METRICS_FILE), out.join(FINAL_LOG_FILE));
        write_rows(
            &metrics_path,
            [MetricsRow {
                genome: genome.to_string(),
                seed: train.seed,
                epochs: train.epochs,
                clean_error: m.clean_error,
                fgsm_error: m.fgsm_error,
                pgd7_error: m.pgd7_error,
                pgd20_error: m.pgd20_error,
            }],
        )?;
        write_rows(&log_path, &outcome.log)?;
        println!("clean {:.4} fgsm {:.4} pgd7 {:.4} pgd20 {:.4}", m.clean_error, m.fgsm_error, m.pgd7_error, m.pgd20_error);
        Ok(vec![metrics_path, log_path])
    })
}
