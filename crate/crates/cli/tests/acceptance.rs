//! Acceptance checks. Each criterion prints one `PASS`, `FAIL` or
//! `NOT RUN` line; the test fails if any line is `FAIL`.
//!
//! Criteria that need the public datasets run when these are set:
//! `NETSYNTH_NSL_KDD` (path to KDDTrain+.txt) and `NETSYNTH_CIC_IDS2017`
//! (directory of the eight daily CSVs). Without them the surrogate lines
//! exercise the same pipeline on generated files of the same layout.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use netsynth_cli::artifact::read_csv_rows;
use netsynth_cli::pipeline::prepare;
use netsynth_cli::{run_benchmark, RunConfig, RunOutcome};
use netsynth_core::featsel::{entropy, mutual_information};
use netsynth_core::gen_ai::{BnParams, ChowLiuBn, GanParams, ModeNormalizer};
use netsynth_core::gen_stat::{fit_gmm, GmmOptions};
use netsynth_core::metrics::{class_balance_diff, kde_estimate, pd_percent, pd_percent_from_counts, trapezoid, PdThresholds};
use netsynth_core::nn::{Activation, Mlp, MlpSpec};
use netsynth_core::{rng, ColumnSchema, Dataset, Method, Profile};

const PAPER_NSL_TOP10: [&str; 10] = [
    "src_bytes",
    "dst_bytes",
    "same_srv_rate",
    "diff_srv_rate",
    "flag_SF",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "logged_in",
    "dst_host_serror_rate",
    "dst_host_diff_srv_rate",
];

const STATISTICAL: [Method; 5] = [Method::Ros, Method::Smote, Method::Adasyn, Method::Cc, Method::Gmm];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    NotRun,
}

#[derive(Default)]
struct Board {
    lines: Vec<(Status, String)>,
}

impl Board {
    fn record(&mut self, id: &str, ok: Option<bool>, detail: String) {
        let status = match ok {
            Some(true) => Status::Pass,
            Some(false) => Status::Fail,
            None => Status::NotRun,
        };
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotRun => "NOT RUN",
        };
        let line = format!("[{tag}] {id}: {detail}");
        // written straight to the handle so it shows without --nocapture
        let _ = writeln!(std::io::stderr(), "{line}");
        self.lines.push((status, line));
    }

    fn check(&mut self, id: &str, ok: bool, detail: String) {
        self.record(id, Some(ok), detail);
    }

    /// Informational lines never gate the run.
    fn note(&mut self, id: &str, ok: bool, detail: String) {
        let tag = if ok { "ok" } else { "miss" };
        let _ = writeln!(std::io::stderr(), "[info:{tag}] {id}: {detail}");
    }
}

fn env_path(var: &str) -> Option<PathBuf> {
    std::env::var_os(var).map(PathBuf::from).filter(|p| p.exists())
}

fn data_config(profile: Profile, path: PathBuf, out: PathBuf, methods: &[Method]) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.dataset.profile = profile;
    cfg.dataset.path = path;
    cfg.output_dir = out;
    cfg.methods = methods.to_vec();
    if profile == Profile::NslKdd {
        cfg.dataset.subsample = Some(0);
    }
    cfg
}

fn tstr(o: &RunOutcome, m: Method) -> f64 {
    o.report(m).map_or(f64::NAN, |r| r.tstr_accuracy)
}

fn cb(o: &RunOutcome, m: Method) -> f64 {
    o.report(m).map_or(f64::NAN, |r| r.cb_percent)
}

fn pd(o: &RunOutcome, m: Method) -> f64 {
    o.report(m).map_or(f64::NAN, |r| r.pd_percent)
}

fn ds(o: &RunOutcome, m: Method) -> String {
    o.report(m).map_or("--".into(), |r| r.ds_verdict.to_string())
}

fn seconds(o: &RunOutcome, methods: &[Method]) -> f64 {
    o.methods.iter().filter(|r| methods.contains(&r.method)).map(|r| r.seconds).sum()
}

/// Criteria 3 and 4 over one run of the statistical methods.
fn statistical_checks(b: &mut Board, o: &RunOutcome, label: &str, gate: bool) {
    let record = |b: &mut Board, id: &str, ok: bool, d: String| {
        if gate {
            b.check(id, ok, d)
        } else {
            b.note(id, ok, d)
        }
    };
    let exact = [Method::Ros, Method::Smote, Method::Cc];
    let zero = exact.iter().all(|&m| cb(o, m) == 0.0 && pd(o, m) == 0.0);
    record(
        b,
        &format!("3a {label} ROS/SMOTE/CC CB = 0% and PD = 0%"),
        zero,
        exact.iter().map(|&m| format!("{m} CB {:.2} PD {:.2}", cb(o, m), pd(o, m))).collect::<Vec<_>>().join(", "),
    );
    record(
        b,
        &format!("3b {label} ADASYN CB <= 1%"),
        cb(o, Method::Adasyn) <= 1.0,
        format!("{:.2}%", cb(o, Method::Adasyn)),
    );
    let accs = exact.iter().all(|&m| tstr(o, m) >= 0.985) && o.trtr.accuracy >= 0.985;
    record(
        b,
        &format!("3c {label} TSTR ROS/SMOTE/CC >= 0.985, TRTR >= 0.985"),
        accs,
        format!(
            "TRTR {:.4}; {}",
            o.trtr.accuracy,
            exact.iter().map(|&m| format!("{m} {:.4}", tstr(o, m))).collect::<Vec<_>>().join(", ")
        ),
    );
    let secs = seconds(o, &STATISTICAL);
    record(b, &format!("3e {label} statistical runtime < 30 min"), secs < 1800.0, format!("{secs:.1}s"));
    let best = [Method::Ros, Method::Smote, Method::Adasyn, Method::Cc]
        .iter()
        .map(|&m| tstr(o, m))
        .fold(f64::NAN, f64::max);
    let gmm = tstr(o, Method::Gmm);
    record(
        b,
        &format!("4 {label} GMM TSTR <= 0.75 and >= 0.2 below best statistical"),
        gmm <= 0.75 && best - gmm >= 0.2,
        format!("GMM {gmm:.4}, best {best:.4}"),
    );
}

fn ai_checks(b: &mut Board, o: &RunOutcome, label: &str, gate: bool) {
    let record = |b: &mut Board, id: &str, ok: bool, d: String| {
        if gate {
            b.check(id, ok, d)
        } else {
            b.note(id, ok, d)
        }
    };
    let bn = tstr(o, Method::Bn);
    record(b, &format!("5a {label} BN TSTR >= 0.85"), bn >= 0.85, format!("{bn:.4}"));
    for m in [Method::Ctgan, Method::Copulagan] {
        record(
            b,
            &format!("5b {label} {m} TSTR >= 0.85 and CB <= 20%"),
            tstr(o, m) >= 0.85 && cb(o, m) <= 20.0,
            format!("TSTR {:.4}, CB {:.2}%", tstr(o, m), cb(o, m)),
        );
    }
    let slowest = o
        .methods
        .iter()
        .filter(|r| r.method.category() == netsynth_core::Category::Ai)
        .map(|r| r.seconds)
        .fold(0.0, f64::max);
    record(b, &format!("5c {label} AI runtime <= 2 h per method"), slowest <= 7200.0, format!("slowest {slowest:.1}s"));
}

fn real_data(b: &mut Board, tmp: &Path) {
    let nsl = env_path("NETSYNTH_NSL_KDD");
    let cic = env_path("NETSYNTH_CIC_IDS2017");
    let unset = |var: &str| format!("dataset not available (set {var})");

    match &nsl {
        Some(p) => {
            let cfg = data_config(Profile::NslKdd, p.clone(), tmp.join("nsl"), &[Method::Ros]);
            let t = Instant::now();
            let prep = prepare(&cfg).expect("NSL-KDD prepare");
            let secs = t.elapsed().as_secs_f64();
            b.check(
                "1a NSL-KDD 25 features + target = 26 columns, < 5 min",
                prep.data.n_cols() == 26 && secs < 300.0,
                format!("{} columns from {} rows in {secs:.1}s", prep.data.n_cols(), prep.loaded_rows),
            );
            let top: Vec<&str> = prep.ranking.names().into_iter().take(10).collect();
            let overlap = PAPER_NSL_TOP10.iter().filter(|n| top.contains(n)).count();
            b.check(
                "2 NSL-KDD src_bytes ranked first, >= 7 of published top 10",
                top.first() == Some(&"src_bytes") && overlap >= 7,
                format!("top {:?}, overlap {overlap}/10", top),
            );
        }
        None => {
            b.record("1a NSL-KDD 26 columns", None, unset("NETSYNTH_NSL_KDD"));
            b.record("2 NSL-KDD MI ranking", None, unset("NETSYNTH_NSL_KDD"));
        }
    }
    match &cic {
        Some(p) => {
            let cfg = data_config(Profile::CicIds2017, p.clone(), tmp.join("cic"), &[Method::Smote]);
            let prep = prepare(&cfg).expect("CIC-IDS2017 prepare");
            b.check(
                "1b CIC-IDS2017 20 features + target = 21 columns",
                prep.data.n_cols() == 21,
                format!("{} columns", prep.data.n_cols()),
            );
        }
        None => b.record("1b CIC-IDS2017 21 columns", None, unset("NETSYNTH_CIC_IDS2017")),
    }

    match &nsl {
        Some(p) => {
            let cfg = data_config(Profile::NslKdd, p.clone(), tmp.join("nsl_stat"), &STATISTICAL);
            let o = run_benchmark(&cfg).expect("NSL-KDD statistical run");
            statistical_checks(b, &o, "NSL-KDD", true);
            b.check("3d NSL-KDD SMOTE DS = No", ds(&o, Method::Smote) == "No", ds(&o, Method::Smote));
            let ai = [Method::Bn, Method::Ctgan, Method::Copulagan];
            let cfg = data_config(Profile::NslKdd, p.clone(), tmp.join("nsl_ai"), &ai);
            let o = run_benchmark(&cfg).expect("NSL-KDD AI run");
            ai_checks(b, &o, "NSL-KDD", true);
        }
        None => {
            for id in ["3 statistical table (NSL-KDD)", "4 GMM degradation (NSL-KDD)", "5 AI regimes (NSL-KDD)"] {
                b.record(id, None, unset("NETSYNTH_NSL_KDD"));
            }
        }
    }
    match &cic {
        Some(p) => {
            let cfg = data_config(Profile::CicIds2017, p.clone(), tmp.join("cic_smote"), &[Method::Smote]);
            let o = run_benchmark(&cfg).expect("CIC-IDS2017 SMOTE run");
            b.check("3d CIC-IDS2017 SMOTE DS = Yes", ds(&o, Method::Smote) == "Yes", ds(&o, Method::Smote));
        }
        None => b.record("3d CIC-IDS2017 SMOTE DS", None, unset("NETSYNTH_CIC_IDS2017")),
    }
}

fn surrogate(b: &mut Board, tmp: &Path) {
    let nsl = tmp.join("KDDTrain+_surrogate.txt");
    common::write_nsl_like(&nsl, 3000, 21);
    let cic_dir = tmp.join("cic_surrogate");
    fs::create_dir_all(&cic_dir).unwrap();
    common::write_cic_like(&cic_dir.join("Monday-WorkingHours.pcap_ISCX.csv"), 1500, 22);
    common::write_cic_like(&cic_dir.join("Tuesday-WorkingHours.pcap_ISCX.csv"), 1500, 23);

    let cfg = common::quick_config(nsl.clone(), tmp.join("s_nsl"), &[Method::Ros]);
    let prep = prepare(&cfg).unwrap();
    b.check(
        "1a surrogate NSL-KDD layout -> 26 columns",
        prep.data.n_cols() == 26,
        format!("{} columns", prep.data.n_cols()),
    );
    let mut cfg = common::quick_config(cic_dir, tmp.join("s_cic"), &[Method::Ros]);
    cfg.dataset.profile = Profile::CicIds2017;
    let prep = prepare(&cfg).unwrap();
    b.check(
        "1b surrogate CIC-IDS2017 layout (8 daily-file loader) -> 21 columns",
        prep.data.n_cols() == 21,
        format!("{} columns from {} loaded rows", prep.data.n_cols(), prep.loaded_rows),
    );

    let mut cfg = common::quick_config(nsl, tmp.join("s_all"), &Method::ALL);
    cfg.params.ctgan = GanParams::default();
    cfg.params.copulagan = GanParams::default();
    let o = run_benchmark(&cfg).unwrap();
    statistical_checks(b, &o, "surrogate", false);
    ai_checks(b, &o, "surrogate", false);
}

fn formula_oracles(b: &mut Board) {
    let v = pd_percent_from_counts(1, 26);
    b.check("6a PD(1 of 26) = 3.8462% +- 0.01", (v - 3.8462).abs() <= 0.01, format!("{v:.4}"));

    let t: Vec<f64> = (0..100).map(|i| f64::from(u8::from(i >= 75))).collect();
    let d = Dataset::new(
        vec![ColumnSchema::numeric("x"), ColumnSchema::binary("target")],
        vec![(0..100).map(f64::from).collect(), t],
        1,
    )
    .unwrap();
    let v = class_balance_diff(&d).unwrap();
    b.check("6b CB(75/25) = 50% exactly", v == 50.0, format!("{v}"));

    let mut r = rng::seeded(606);
    let mut worst_pd: f64 = 0.0;
    let mut worst_cb: f64 = 0.0;
    for _ in 0..100 {
        let n = 2 * r.random_range(10..200usize);
        let p = r.random_range(1..8usize);
        let mut cols: Vec<ColumnSchema> = (0..p).map(|j| ColumnSchema::numeric(format!("c{j}"))).collect();
        let mut vals: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                let scale = r.random_range(0.1..100.0);
                (0..n).map(|_| scale * r.sample::<f64, _>(StandardNormal)).collect()
            })
            .collect();
        cols.push(ColumnSchema::binary("target"));
        let mut labels: Vec<f64> = (0..n).map(|i| f64::from(u8::from(i < n / 2))).collect();
        rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), &mut r);
        vals.push(labels);
        let d = Dataset::new(cols, vals, p).unwrap();
        worst_pd = worst_pd.max(pd_percent(&d, &d, &PdThresholds::default()).unwrap().pd_percent);
        worst_cb = worst_cb.max(class_balance_diff(&d).unwrap());
    }
    b.check(
        "6c pd(d,d) = 0 and CB(balanced) = 0 on 100 random tables",
        worst_pd == 0.0 && worst_cb == 0.0,
        format!("max pd {worst_pd}, max cb {worst_cb}"),
    );
}

fn gradient_check(r: &mut rng::Rng) -> (bool, f64) {
    let acts = [Activation::Tanh, Activation::Sigmoid, Activation::Identity, Activation::ReLU, Activation::Softmax];
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let depth = r.random_range(1..4usize);
        let mut widths = vec![r.random_range(1..6usize)];
        let mut layer_acts = Vec::new();
        for _ in 0..depth {
            widths.push(r.random_range(1..6usize));
            layer_acts.push(acts[r.random_range(0..acts.len())]);
        }
        let mut net = Mlp::new(MlpSpec::new(widths.clone(), layer_acts, trial)).unwrap();
        let theta: Vec<f64> = (0..net.param_count()).map(|_| r.random_range(-1.0..1.0)).collect();
        net.set_params(&theta).unwrap();
        let batch = r.random_range(1..5usize);
        let x = Array2::from_shape_fn((batch, widths[0]), |_| r.random_range(-1.0..1.0));
        let out_w = *widths.last().unwrap();
        let weights = Array2::from_shape_fn((batch, out_w), |_| r.random_range(-1.0..1.0));
        let loss = |net: &Mlp| (net.predict(&x).unwrap() * &weights).sum();
        let (_, cache) = net.forward(&x).unwrap();
        let analytic = net.backward(&cache, &weights).unwrap().0.flatten();
        let h = 1e-5;
        for i in 0..theta.len() {
            let mut plus = theta.clone();
            plus[i] += h;
            let mut minus = theta.clone();
            minus[i] -= h;
            net.set_params(&plus).unwrap();
            let lp = loss(&net);
            net.set_params(&minus).unwrap();
            let lm = loss(&net);
            let numeric = (lp - lm) / (2.0 * h);
            let scale = analytic[i].abs().max(numeric.abs()).max(1e-3);
            worst = worst.max((analytic[i] - numeric).abs() / scale);
        }
    }
    (worst <= 1e-4, worst)
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "timings.json" {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn property_suites(b: &mut Board, tmp: &Path) {
    let mut r = rng::seeded(707);

    let (ok, worst) = gradient_check(&mut r);
    b.check("7a nn finite-difference agreement rel <= 1e-4", ok, format!("worst rel error {worst:.2e}"));

    let x: Vec<f64> = (0..100_000).map(|_| r.sample(StandardNormal)).collect();
    let k = kde_estimate(&x);
    let mass = trapezoid(&k.grid, &k.density);
    let sup = k
        .grid
        .iter()
        .zip(&k.density)
        .map(|(g, d)| (d - (-0.5 * g * g).exp() / (2.0 * std::f64::consts::PI).sqrt()).abs())
        .fold(0.0, f64::max);
    b.check(
        "7b KDE integral 1 +- 0.01, sup error <= 0.01 vs N(0,1) at n=1e5",
        (mass - 1.0).abs() <= 0.01 && sup <= 0.01,
        format!("integral {mass:.5}, sup {sup:.5}"),
    );

    let mut pts = Vec::new();
    for i in 0..3000 {
        let c = [-3.0, 0.0, 4.0][i % 3];
        pts.push(c + r.sample::<f64, _>(StandardNormal) * 0.8);
        pts.push(-c + r.sample::<f64, _>(StandardNormal) * 1.2);
    }
    let (_, trace) = fit_gmm(&pts, 2, 3, 5, &GmmOptions::default()).unwrap();
    let ll = &trace.log_likelihoods;
    let monotone = ll.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    b.check(
        "7c EM log-likelihood monotone",
        monotone && ll.len() > 1,
        format!("{} iterations, {:.4} -> {:.4}", ll.len(), ll[0], ll[ll.len() - 1]),
    );

    let a: Vec<f64> = (0..5000).map(|_| r.sample(StandardNormal)).collect();
    let c: Vec<f64> = a.iter().map(|v: &f64| v * v + r.random_range(-0.5..0.5)).collect();
    let ab = mutual_information(&a, &c, 16).unwrap().mi;
    let ba = mutual_information(&c, &a, 16).unwrap().mi;
    let aa = mutual_information(&a, &a, 16).unwrap().mi;
    let h = entropy(&a, 16).unwrap();
    b.check(
        "7d MI symmetric and MI(X,X) = H(X)",
        (ab - ba).abs() <= 1e-12 && (aa - h).abs() <= 1e-12,
        format!("MI(a,c) {ab:.6} MI(c,a) {ba:.6} MI(a,a) {aa:.6} H(a) {h:.6}"),
    );

    let bimodal: Vec<f64> = (0..4000)
        .map(|i| if i % 2 == 0 { 10.0 } else { 50.0 } + 2.0 * r.sample::<f64, _>(StandardNormal))
        .collect();
    let mn = ModeNormalizer::fit(&bimodal, 10, 9).unwrap();
    let err = bimodal
        .iter()
        .map(|&v| {
            let (s, k) = mn.transform(v);
            (mn.inverse(s, k) - v).abs()
        })
        .fold(0.0, f64::max);
    b.check("7e ModeNormalizer round trip <= 1e-6", err <= 1e-6, format!("max error {err:.2e}, {} modes", mn.n_modes()));

    let n = 2000;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); 5];
    for _ in 0..n {
        let z: f64 = r.sample(StandardNormal);
        cols[0].push(z);
        cols[1].push(z + 0.3 * r.sample::<f64, _>(StandardNormal));
        cols[2].push(f64::from(u8::from(z > 0.0)));
        cols[3].push(r.random_range(0.0..1.0));
        cols[4].push(f64::from(u8::from(z + 0.5 * r.sample::<f64, _>(StandardNormal) > 0.0)));
    }
    let d = Dataset::new(
        vec![
            ColumnSchema::numeric("a"),
            ColumnSchema::numeric("b"),
            ColumnSchema::binary("c"),
            ColumnSchema::numeric("noise"),
            ColumnSchema::binary("target"),
        ],
        cols,
        4,
    )
    .unwrap();
    let bn = ChowLiuBn::fit(&d, &BnParams::default()).unwrap();
    let spanning = bn.edges.len() == d.n_cols() - 1 && bn.order[0] == 4 && bn.parents[4].is_none();
    let normalized = bn
        .cpts
        .iter()
        .flatten()
        .all(|row| (row.iter().sum::<f64>() - 1.0).abs() <= 1e-12 && row.iter().all(|&p| p > 0.0));
    b.check(
        "7f Chow-Liu spanning tree rooted at target, CPT rows sum to 1",
        spanning && normalized,
        format!("{} edges over {} columns", bn.edges.len(), d.n_cols()),
    );

    let data = tmp.join("determinism.txt");
    common::write_nsl_like(&data, 700, 31);
    let cfg = common::quick_config(data, tmp.join("det_run"), &Method::ALL);
    run_benchmark(&cfg).unwrap();
    let first = snapshot(&cfg.output_dir);
    run_benchmark(&cfg).unwrap();
    let second = snapshot(&cfg.output_dir);
    let differing: Vec<_> = first
        .keys()
        .chain(second.keys())
        .filter(|k| first.get(*k) != second.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    b.check(
        "7g repeated seeded benchmark is byte-identical (timings.json excluded)",
        differing.is_empty() && !first.is_empty(),
        format!("{} files compared, differing {:?}", first.len(), differing),
    );
}

fn fault_isolation(b: &mut Board, tmp: &Path) {
    let data = tmp.join("fault.txt");
    common::write_nsl_like(&data, 700, 41);
    let cfg = common::quick_config(data, tmp.join("fault_run"), &Method::ALL);
    let cfg_path = tmp.join("fault.toml");
    fs::write(&cfg_path, cfg.to_toml().unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_netsynth"))
        .args(["benchmark", "--fail", "bn", "--config"])
        .arg(&cfg_path)
        .env("RUST_LOG", "error")
        .output()
        .unwrap();
    let rows = read_csv_rows(&cfg.output_dir.join("report.csv")).unwrap_or_default();
    let bn_dashes = rows.iter().any(|r| r[1] == "BN" && r[2..].iter().all(|c| c == "--"));
    let others_full = rows.len() == 11
        && rows[1..]
            .iter()
            .filter(|r| r[1] != "BN")
            .all(|r| r[2..].iter().all(|c| c != "--"));
    let code = out.status.code();
    b.check(
        "8 injected failure: complete table, BN row '--', nonzero exit",
        bn_dashes && others_full && code.is_some_and(|c| c != 0),
        format!("{} table rows, exit code {code:?}", rows.len().saturating_sub(1)),
    );
}

#[test]
fn acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    let mut board = Board::default();
    real_data(&mut board, tmp.path());
    surrogate(&mut board, tmp.path());
    formula_oracles(&mut board);
    property_suites(&mut board, tmp.path());
    fault_isolation(&mut board, tmp.path());
    let failed: Vec<&String> = board.lines.iter().filter(|(s, _)| *s == Status::Fail).map(|(_, l)| l).collect();
    let passed = board.lines.iter().filter(|(s, _)| *s == Status::Pass).count();
    let not_run = board.lines.iter().filter(|(s, _)| *s == Status::NotRun).count();
    let _ = writeln!(
        std::io::stderr(),
        "acceptance: {passed} passed, {} failed, {not_run} not run",
        failed.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:#?}");
}
