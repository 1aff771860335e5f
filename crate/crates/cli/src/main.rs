use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use netsynth_cli::artifact;
use netsynth_cli::config::RunConfig;
use netsynth_cli::pipeline::{self, classifier_seed};
use netsynth_cli::{emit_plot_data, emit_report, run_benchmark};
use netsynth_core::data::{read_dataset, stratified_subsample, write_dataset};
use netsynth_core::featsel::select_features;
use netsynth_core::metrics::{class_balance_diff, correlation_report, data_structure_check, pd_percent};
use netsynth_core::utility::{evaluate, train_tree_ensemble};
use netsynth_core::{Generator, Method, Profile, SelectionRule};

#[derive(Parser)]
#[command(name = "netsynth", version, about = "Synthetic network-traffic data generation and benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, clean and encode a raw dataset.
    Ingest(IngestArgs),
    /// Rank features by mutual information and keep the top ones.
    SelectFeatures(SelectArgs),
    /// Train one method on a prepared table and write synthetic rows.
    Generate(GenerateArgs),
    /// Score a synthetic table against a real one.
    Evaluate(EvaluateArgs),
    /// Run the full pipeline for every configured method.
    Benchmark(BenchmarkArgs),
    /// Rebuild the comparison table and plot data of a run directory.
    Report(ReportArgs),
    /// Print or write a documented default configuration.
    InitConfig {
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    profile: Profile,
    /// CSV file or directory of CSV files.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Label column (generic profile).
    #[arg(long)]
    target: Option<String>,
    /// Stratified row cap; 0 keeps every row.
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// `quartile` or a feature count.
    #[arg(long, default_value = "quartile", value_parser = parse_rule)]
    keep: SelectionRule,
    /// Where to write the full ranking.
    #[arg(long)]
    ranking: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Take method hyperparameters from this run config.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Real table the generator was trained on.
    #[arg(long)]
    real: PathBuf,
    #[arg(long)]
    synth: PathBuf,
    /// Held-out real rows; enables TRTR/TSTR scoring.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Take thresholds and classifier settings from this run config.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<Profile>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated method keys.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long)]
    ks_threshold: Option<f64>,
    #[arg(long)]
    corr_mean_tol: Option<f64>,
    #[arg(long)]
    corr_max_tol: Option<f64>,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    write_synthetic: bool,
    /// Force these methods to fail.
    #[arg(long, value_delimiter = ',')]
    fail: Option<Vec<Method>>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    run_dir: PathBuf,
    /// Also regenerate plot data.
    #[arg(long)]
    plots: bool,
    #[arg(long)]
    svg: bool,
}

fn parse_rule(s: &str) -> std::result::Result<SelectionRule, String> {
    if s.eq_ignore_ascii_case("quartile") {
        Ok(SelectionRule::Quartile)
    } else {
        s.parse().map(SelectionRule::Fixed).map_err(|_| format!("expected `quartile` or a count, got {s:?}"))
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

fn ingest(a: IngestArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    cfg.dataset.profile = a.profile;
    cfg.dataset.path = a.input;
    cfg.dataset.target = a.target;
    cfg.dataset.subsample = a.subsample;
    let mut d = pipeline::ingest(&cfg)?;
    if let Some(n) = cfg.dataset.effective_subsample() {
        if n < d.row_count() {
            d = stratified_subsample(&d, n, a.seed)?;
        }
    }
    write_dataset(&d, &a.output, Some(serde_json::json!({ "seed": a.seed, "profile": a.profile })))?;
    let [normal, attack] = d.class_counts();
    println!("{} rows x {} columns ({normal} normal, {attack} attack)", d.row_count(), d.n_cols());
    Ok(())
}

fn select(a: SelectArgs) -> Result<()> {
    let d = read_dataset(&a.input)?;
    let (selected, ranking) = select_features(&d, a.keep)?;
    write_dataset(&selected, &a.output, None)?;
    if let Some(p) = &a.ranking {
        artifact::write(p, ranking.to_csv().as_bytes())?;
    }
    for (i, (name, score)) in ranking.entries.iter().take(10).enumerate() {
        println!("{:>2}. {name:<32} {score:.6}", i + 1);
    }
    println!("kept {} of {} features", selected.n_cols() - 1, d.n_cols() - 1);
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let train = read_dataset(&a.input)?;
    let out = a.method.generator(&cfg.params).generate(&train, a.seed)?;
    let meta = serde_json::json!({ "seed": a.seed, "method": a.method });
    write_dataset(&out.data, &a.output, Some(meta))?;
    if let Some(trace) = out.loss_trace {
        trace.write_csv(&a.output.with_extension("loss.csv"))?;
    }
    let [normal, attack] = out.data.class_counts();
    println!("{}: {} rows ({normal} normal, {attack} attack)", a.method, out.data.row_count());
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let real = read_dataset(&a.real)?;
    let synth = read_dataset(&a.synth)?;
    let ds = data_structure_check(real.columns(), &synth)?;
    let corr = correlation_report(&real, &synth, &cfg.thresholds.corr)?;
    let pd = pd_percent(&real, &synth, &cfg.thresholds.pd)?;
    let cb = class_balance_diff(&synth)?;
    let mut out = serde_json::json!({
        "seed": a.seed,
        "ds": ds,
        "corr": { "verdict": corr.verdict, "mean_diff": corr.mean_diff, "max_diff": corr.max_diff },
        "pd_percent": pd.pd_percent,
        "variables": pd.variables,
        "cb_percent": cb,
    });
    println!("DS {}  Corr {}  PD {:.2}%  CB {:.2}%", ds.verdict, corr.verdict, pd.pd_percent, cb);
    if let Some(test_path) = &a.test {
        let test = read_dataset(test_path)?;
        let cls_seed = classifier_seed(a.seed);
        let trtr = evaluate(&train_tree_ensemble(&real, &cfg.classifier, cls_seed)?, &test)?;
        let tstr = evaluate(&train_tree_ensemble(&synth, &cfg.classifier, cls_seed)?, &test)?;
        println!("TRTR {:.4}  TSTR {:.4}", trtr.accuracy, tstr.accuracy);
        out["trtr"] = serde_json::to_value(trtr)?;
        out["tstr"] = serde_json::to_value(tstr)?;
    }
    if let Some(p) = &a.output {
        artifact::write(p, &serde_json::to_vec_pretty(&out)?)?;
    }
    Ok(())
}

fn benchmark(a: BenchmarkArgs) -> Result<bool> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(p) = a.profile {
        cfg.dataset.profile = p;
    }
    if let Some(p) = a.data {
        cfg.dataset.path = p;
    }
    if let Some(p) = a.out {
        cfg.output_dir = p;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(m) = a.methods {
        cfg.methods = m;
    }
    if a.subsample.is_some() {
        cfg.dataset.subsample = a.subsample;
    }
    if let Some(v) = a.ks_threshold {
        cfg.thresholds.pd.ks_threshold = v;
    }
    if let Some(v) = a.corr_mean_tol {
        cfg.thresholds.corr.mean_tol = v;
    }
    if let Some(v) = a.corr_max_tol {
        cfg.thresholds.corr.max_tol = v;
    }
    cfg.run.parallel |= a.parallel;
    cfg.run.svg |= a.svg;
    cfg.run.write_synthetic |= a.write_synthetic;
    if let Some(f) = a.fail {
        cfg.run.fail_methods = f;
    }
    let outcome = run_benchmark(&cfg)?;
    print!("{}", std::fs::read_to_string(outcome.run_dir.join("summary.txt"))?);
    Ok(outcome.failed().is_empty())
}

fn report(a: ReportArgs) -> Result<bool> {
    if a.plots || a.svg {
        emit_plot_data(&a.run_dir, a.svg)?;
    }
    let rows = emit_report(&a.run_dir)?;
    print!("{}", std::fs::read_to_string(a.run_dir.join("summary.txt"))?);
    Ok(rows.iter().all(|r| !r.failed()))
}

fn init_config(output: Option<PathBuf>) -> Result<()> {
    let text = RunConfig::default().documented_toml()?;
    match output {
        Some(p) => {
            if p.exists() {
                bail!("{} already exists", p.display());
            }
            artifact::write(&p, text.as_bytes()).context("writing config")
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a).map(|()| true),
        Command::SelectFeatures(a) => select(a).map(|()| true),
        Command::Generate(a) => generate(a).map(|()| true),
        Command::Evaluate(a) => evaluate_cmd(a).map(|()| true),
        Command::Benchmark(a) => benchmark(a),
        Command::Report(a) => report(a),
        Command::InitConfig { output } => init_config(output).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more methods failed; their rows are marked --");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
