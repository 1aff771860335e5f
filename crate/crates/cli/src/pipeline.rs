//! ingest → clean → encode → select → split → per-method generate, score
//! and persist.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use netsynth_core::data::{
    binarize_target, clean, encode_categoricals, load_csv_dir, load_csv_with, stratified_split, stratified_subsample,
    write_dataset, LoadOptions,
};
use netsynth_core::featsel::select_features;
use netsynth_core::metrics::{class_balance_diff, correlation_report, data_structure_check, pd_percent, Verdict};
use netsynth_core::rng;
use netsynth_core::utility::{evaluate, train_tree_ensemble, Scores};
use netsynth_core::{Dataset, EvalReport, Generator, Method, MiRanking};

use crate::artifact::{self, Stamp};
use crate::config::RunConfig;
use crate::{plots, report};

/// Stream ids for seeds derived from the master seed.
const CLASSIFIER_STREAM: u64 = 1;
const SUBSAMPLE_STREAM: u64 = 2;
const METHOD_STREAM_BASE: u64 = 1000;

pub fn classifier_seed(master: u64) -> u64 {
    rng::derive(master, CLASSIFIER_STREAM)
}

pub fn method_seed(master: u64, m: Method) -> u64 {
    rng::derive(master, METHOD_STREAM_BASE + m.index() as u64)
}

/// Prepared benchmark input.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Selected features plus target, before splitting.
    pub data: Dataset,
    pub train: Dataset,
    pub test: Dataset,
    pub ranking: MiRanking,
    pub loaded_rows: usize,
    pub rows_dropped: usize,
}

/// Load the raw dataset named by `cfg` and apply cleaning, target
/// binarization and one-hot encoding.
pub fn ingest(cfg: &RunConfig) -> Result<Dataset> {
    let opts = LoadOptions {
        profile: cfg.dataset.profile,
        target: cfg.dataset.target.clone(),
    };
    let path = &cfg.dataset.path;
    let raw = if path.is_dir() {
        load_csv_dir(path, &opts)
    } else {
        load_csv_with(std::slice::from_ref(path), &opts)
    }
    .with_context(|| format!("loading {}", path.display()))?;
    let cleaned = clean(&raw);
    let report = cleaned.cleaning().clone();
    if report.rows_dropped > 0 || !report.columns_dropped.is_empty() {
        log::info!(
            "cleaning dropped {} rows and columns {:?}",
            report.rows_dropped,
            report.columns_dropped
        );
    }
    let labeled = binarize_target(&cleaned, cfg.dataset.profile)?;
    Ok(encode_categoricals(&labeled))
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let encoded = ingest(cfg)?;
    let rows_dropped = encoded.cleaning().rows_dropped;
    let loaded_rows = encoded.row_count() + rows_dropped;
    let sized = match cfg.dataset.effective_subsample() {
        Some(n) if n < encoded.row_count() => {
            stratified_subsample(&encoded, n, rng::derive(cfg.seed, SUBSAMPLE_STREAM))?
        }
        _ => encoded,
    };
    let (data, ranking) = select_features(&sized, cfg.features.rule(cfg.dataset.profile))?;
    let (train, test) = stratified_split(&data, &cfg.split)?;
    Ok(Prepared {
        data,
        train,
        test,
        ranking,
        loaded_rows,
        rows_dropped,
    })
}

/// Contents of `run.json`, the index the report is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunIndex {
    pub profile: String,
    pub methods: Vec<Method>,
    pub loaded_rows: usize,
    pub rows_dropped: usize,
    pub rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub columns: Vec<String>,
    pub classifier_seed: u64,
    pub test_fingerprint: String,
    pub trtr: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFailure {
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub result: std::result::Result<EvalReport, String>,
    pub seconds: f64,
    pub peak_rss_kib: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub trtr: Scores,
    pub methods: Vec<MethodRun>,
}

impl RunOutcome {
    pub fn failed(&self) -> Vec<Method> {
        self.methods.iter().filter(|m| m.result.is_err()).map(|m| m.method).collect()
    }

    pub fn report(&self, m: Method) -> Option<&EvalReport> {
        self.methods.iter().find(|r| r.method == m)?.result.as_ref().ok()
    }
}

pub fn method_dir(run_dir: &Path, m: Method) -> PathBuf {
    run_dir.join("methods").join(m.key())
}

/// Process peak resident set size from `/proc`, where available.
fn peak_rss_kib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

struct Shared<'a> {
    cfg: &'a RunConfig,
    stamp: &'a Stamp,
    prep: &'a Prepared,
    trtr: &'a Scores,
    run_dir: &'a Path,
}

/// Run the full benchmark described by `cfg` into `cfg.output_dir`.
///
/// Method failures (errors or panics) are recorded in the method's
/// `failure.json` and do not stop the run; check
/// [`RunOutcome::failed`].
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let stamp = Stamp {
        seed: cfg.seed,
        config_hash: cfg.hash()?,
    };
    let run_dir = cfg.output_dir.clone();
    fs::create_dir_all(&run_dir).with_context(|| format!("creating {}", run_dir.display()))?;
    let mut config_text = stamp.csv_header();
    config_text.push_str(&cfg.documented_toml()?);
    artifact::write(&run_dir.join("config.toml"), config_text.as_bytes())?;

    let started = Instant::now();
    let prep = prepare(cfg)?;
    let prepare_seconds = started.elapsed().as_secs_f64();
    log::info!(
        "prepared {} rows x {} columns ({} train / {} test) in {prepare_seconds:.1}s",
        prep.data.row_count(),
        prep.data.n_cols(),
        prep.train.row_count(),
        prep.test.row_count()
    );
    stamp.write_csv(&run_dir.join("mi_ranking.csv"), &prep.ranking.to_csv())?;

    let cls_seed = classifier_seed(cfg.seed);
    let real_model = train_tree_ensemble(&prep.train, &cfg.classifier, cls_seed).context("TRTR classifier")?;
    let trtr = evaluate(&real_model, &prep.test)?;
    drop(real_model);
    let index = RunIndex {
        profile: cfg.dataset.profile.name().to_string(),
        methods: cfg.methods.clone(),
        loaded_rows: prep.loaded_rows,
        rows_dropped: prep.rows_dropped,
        rows: prep.data.row_count(),
        train_rows: prep.train.row_count(),
        test_rows: prep.test.row_count(),
        columns: prep.data.names().iter().map(|s| s.to_string()).collect(),
        classifier_seed: cls_seed,
        test_fingerprint: prep.test.fingerprint(),
        trtr: trtr.clone(),
    };
    stamp.write_json(&run_dir.join("run.json"), &index)?;

    let shared = Shared {
        cfg,
        stamp: &stamp,
        prep: &prep,
        trtr: &trtr,
        run_dir: &run_dir,
    };
    let methods = if cfg.run.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = cfg
                .methods
                .iter()
                .map(|&m| {
                    let shared = &shared;
                    s.spawn(move || run_method(shared, m))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("method runner panicked")).collect::<Vec<_>>()
        })
    } else {
        cfg.methods.iter().map(|&m| run_method(&shared, m)).collect()
    };

    let timings: BTreeMap<&str, serde_json::Value> = methods
        .iter()
        .map(|r| {
            (
                r.method.key(),
                json!({ "seconds": r.seconds, "peak_rss_kib": r.peak_rss_kib, "ok": r.result.is_ok() }),
            )
        })
        .collect();
    stamp.write_json(
        &run_dir.join("timings.json"),
        &json!({
            "note": "wall-clock seconds; peak_rss_kib is the process high-water mark after the method finished",
            "prepare_seconds": prepare_seconds,
            "methods": timings,
        }),
    )?;

    plots::emit_plot_data(&run_dir, cfg.run.svg)?;
    report::emit_report(&run_dir)?;
    Ok(RunOutcome { run_dir, trtr, methods })
}

fn panic_text(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".to_string()
    }
}

fn run_method(sh: &Shared<'_>, m: Method) -> MethodRun {
    let dir = method_dir(sh.run_dir, m);
    let started = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| score_method(sh, m, &dir)))
        .map_err(|p| format!("panicked: {}", panic_text(p)))
        .and_then(|r| r.map_err(|e| format!("{e:#}")));
    let seconds = started.elapsed().as_secs_f64();
    let result = match result {
        Ok(mut report) => {
            report.runtime_seconds = seconds;
            log::info!("{m}: done in {seconds:.1}s");
            Ok(report)
        }
        Err(error) => {
            log::error!("{m} failed: {error}");
            let failure = MethodFailure { method: m, error: error.clone() };
            if let Err(e) = sh.stamp.write_json(&dir.join("failure.json"), &failure) {
                log::error!("could not record failure of {m}: {e:#}");
            }
            Err(error)
        }
    };
    MethodRun {
        method: m,
        result,
        seconds,
        peak_rss_kib: peak_rss_kib(),
    }
}

/// Generate, score and persist one method. `eval.json` is written last, so
/// its presence marks a completed method.
fn score_method(sh: &Shared<'_>, m: Method, dir: &Path) -> Result<EvalReport> {
    if dir.exists() {
        fs::remove_dir_all(dir).with_context(|| format!("clearing {}", dir.display()))?;
    }
    fs::create_dir_all(dir)?;
    if sh.cfg.run.fail_methods.contains(&m) {
        panic!("injected failure for {}", m.key());
    }
    let train = &sh.prep.train;
    let seed = method_seed(sh.cfg.seed, m);
    let generated = m.generator(&sh.cfg.params).generate(train, seed)?;
    let synth = &generated.data;

    let ds = data_structure_check(train.columns(), synth)?;
    let corr = correlation_report(train, synth, &sh.cfg.thresholds.corr)?;
    let pd = pd_percent(train, synth, &sh.cfg.thresholds.pd)?;
    let cb = class_balance_diff(synth)?;
    let model = train_tree_ensemble(synth, &sh.cfg.classifier, classifier_seed(sh.cfg.seed)).context("TSTR classifier")?;
    let tstr = evaluate(&model, &sh.prep.test)?;

    let kde: Vec<_> = pd
        .kde
        .iter()
        .map(|(name, real, synthetic)| json!({ "variable": name, "real": real, "synthetic": synthetic }))
        .collect();
    sh.stamp.write_json(&dir.join("kde.json"), &json!({ "method": m, "variables": kde }))?;
    sh.stamp.write_json(&dir.join("corr.json"), &json!({ "method": m, "correlation": corr }))?;
    if let Some(trace) = &generated.loss_trace {
        sh.stamp.write_csv(&dir.join("loss_trace.csv"), &trace.to_csv())?;
    }
    if sh.cfg.run.write_synthetic {
        let meta = json!({ "seed": sh.stamp.seed, "config_hash": sh.stamp.config_hash, "method": m, "method_seed": seed });
        write_dataset(synth, dir.join("synthetic.csv"), Some(meta))?;
    }

    let report = EvalReport {
        method: m.display_name().to_string(),
        ds_verdict: ds.verdict,
        corr_verdict: corr.verdict,
        pd_percent: pd.pd_percent,
        cb_percent: cb,
        trtr_accuracy: sh.trtr.accuracy,
        tstr_accuracy: tstr.accuracy,
        runtime_seconds: 0.0,
    };
    let [normal, attack] = synth.class_counts();
    sh.stamp.write_json(
        &dir.join("eval.json"),
        &json!({
            "method": m,
            "method_seed": seed,
            "report": report,
            "data_structure": ds,
            "correlation": { "verdict": corr.verdict, "mean_diff": corr.mean_diff, "max_diff": corr.max_diff },
            "probability_distribution": { "pd_percent": pd.pd_percent, "variables": pd.variables },
            "synthetic_rows": synth.row_count(),
            "synthetic_class_counts": [normal, attack],
            "tstr": tstr,
        }),
    )?;
    if corr.verdict == Verdict::No {
        log::debug!("{m}: correlation mean {:.4} max {:.4}", corr.mean_diff, corr.max_diff);
    }
    Ok(report)
}

/// Load a method's completed report, if any.
pub fn read_eval(run_dir: &Path, m: Method) -> Result<Option<EvalReport>> {
    let path = method_dir(run_dir, m).join("eval.json");
    if !path.exists() {
        return Ok(None);
    }
    let v = artifact::read_json(&path)?;
    let report = v.get("report").ok_or_else(|| anyhow!("{} has no report", path.display()))?;
    Ok(Some(serde_json::from_value(report.clone())?))
}
