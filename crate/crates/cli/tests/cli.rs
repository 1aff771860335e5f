mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use proptest::prelude::*;

use netsynth_cli::artifact::{read_csv_rows, read_json};
use netsynth_cli::{run_benchmark, RunConfig};
use netsynth_core::metrics::{KdeCurve, GRID_POINTS};
use netsynth_core::{Method, Profile, SelectionRule};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netsynth"))
}

fn stamped(path: &Path, seed: u64, hash: &str) -> bool {
    let text = fs::read_to_string(path).unwrap();
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            v["seed"] == seed && v["config_hash"] == hash
        }
        _ => text.contains(&format!("seed={seed} config_hash={hash}")),
    }
}

fn files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn full_run_on_surrogate_nsl() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("KDDTrain+.txt");
    common::write_nsl_like(&data, 1500, 11);
    let mut cfg = common::quick_config(data, tmp.path().join("run"), &Method::ALL);
    cfg.run.svg = true;
    let outcome = run_benchmark(&cfg).unwrap();
    assert!(outcome.failed().is_empty(), "{:?}", outcome.failed());

    let run = &outcome.run_dir;
    let index = read_json(&run.join("run.json")).unwrap();
    assert_eq!(index["columns"].as_array().unwrap().len(), 26);

    let report = read_csv_rows(&run.join("report.csv")).unwrap();
    assert_eq!(report.len(), 11);
    let order: Vec<&str> = report[1..].iter().map(|r| r[1].as_str()).collect();
    let expected: Vec<&str> = Method::ALL.iter().map(|m| m.display_name()).collect();
    assert_eq!(order, expected);
    assert!(fs::read_to_string(run.join("report.csv")).unwrap().contains("# trtr_accuracy="));

    let ros = outcome.report(Method::Ros).unwrap();
    assert_eq!(ros.cb_percent, 0.0);
    assert_eq!(ros.ds_verdict.to_string(), "Yes");

    for m in Method::ALL {
        let plots = run.join("plots").join(m.key());
        let kde: Vec<_> = files(&plots.join("kde"))
            .into_iter()
            .filter(|p| p.extension().unwrap() == "csv")
            .collect();
        assert_eq!(kde.len(), 26, "{m}");
        let rows = read_csv_rows(&kde[0]).unwrap();
        assert_eq!(rows[0], vec!["grid", "real_density", "synth_density"]);
        assert_eq!(rows.len() - 1, GRID_POINTS);
        for name in ["corr_real_abs", "corr_synth_abs", "corr_abs_diff"] {
            let m = read_csv_rows(&plots.join(format!("{name}.csv"))).unwrap();
            assert_eq!(m.len(), 27);
            assert!(plots.join(format!("{name}.svg")).exists());
        }
    }
    let hash = cfg.hash().unwrap();
    for f in files(run) {
        assert!(stamped(&f, cfg.seed, &hash), "{} lacks seed/hash", f.display());
    }
}

#[test]
fn kde_json_curves_integrate_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("nsl.txt");
    common::write_nsl_like(&data, 600, 3);
    let cfg = common::quick_config(data, tmp.path().join("run"), &[Method::Smote]);
    run_benchmark(&cfg).unwrap();
    let v = read_json(&tmp.path().join("run/methods/smote/kde.json")).unwrap();
    for var in v["variables"].as_array().unwrap() {
        let c: KdeCurve = serde_json::from_value(var["real"].clone()).unwrap();
        if c.point_mass.is_none() {
            let mass = netsynth_core::metrics::trapezoid(&c.grid, &c.density);
            assert!((mass - 1.0).abs() < 0.01, "{} {mass}", var["variable"]);
        }
    }
}

#[test]
fn empty_method_list_fails_before_work() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = common::quick_config(tmp.path().join("missing.txt"), tmp.path().join("run"), &[]);
    let err = run_benchmark(&cfg).unwrap_err();
    assert!(err.to_string().contains("empty"));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn stage_commands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    common::write_nsl_like(&t.join("raw.txt"), 800, 5);
    let ok = |c: &mut Command| {
        let out = c.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    ok(bin().args(["ingest", "--profile", "nsl-kdd", "--input"]).arg(t.join("raw.txt")).arg("--output").arg(t.join("enc.csv")));
    let listing = ok(bin()
        .args(["select-features", "--keep", "25", "--input"])
        .arg(t.join("enc.csv"))
        .arg("--output")
        .arg(t.join("sel.csv"))
        .arg("--ranking")
        .arg(t.join("rank.csv")));
    assert!(listing.contains("kept 25 of"));
    ok(bin().args(["generate", "--method", "smote", "--input"]).arg(t.join("sel.csv")).arg("--output").arg(t.join("syn.csv")));
    let eval = ok(bin()
        .args(["evaluate", "--real"])
        .arg(t.join("sel.csv"))
        .arg("--synth")
        .arg(t.join("syn.csv"))
        .arg("--test")
        .arg(t.join("sel.csv"))
        .arg("--output")
        .arg(t.join("eval.json")));
    assert!(eval.contains("CB 0.00%"), "{eval}");
    assert!(eval.contains("TSTR"));
    let template = ok(bin().arg("init-config"));
    let cfg: RunConfig = toml::from_str(&template).unwrap();
    assert_eq!(cfg, RunConfig::default());
}

#[test]
fn report_command_requires_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin().args(["report", "--run-dir"]).arg(tmp.path()).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn parallel_matches_sequential() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("nsl.txt");
    common::write_nsl_like(&data, 600, 8);
    let methods = [Method::Ros, Method::Cc, Method::Bn, Method::Gmm];
    let mut cfg = common::quick_config(data, tmp.path().join("run"), &methods);
    run_benchmark(&cfg).unwrap();
    let seq = fs::read(tmp.path().join("run/report.json")).unwrap();
    cfg.run.parallel = true;
    run_benchmark(&cfg).unwrap();
    let par = fs::read(tmp.path().join("run/report.json")).unwrap();
    // the config hash differs, the table must not
    let strip = |b: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(b).unwrap();
        v.as_object_mut().unwrap().remove("config_hash");
        v
    };
    assert_eq!(strip(&seq), strip(&par));
}

fn arb_method_list() -> impl Strategy<Value = Vec<Method>> {
    proptest::sample::subsequence(Method::ALL.to_vec(), 1..=10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips(
        seed in any::<u64>(),
        methods in arb_method_list(),
        keep in proptest::option::of(4usize..60),
        subsample in proptest::option::of(0usize..1_000_000),
        ks in 0.0f64..1.0,
        lr in 1e-6f64..1e-1,
        parallel in any::<bool>(),
    ) {
        let mut cfg = RunConfig {
            seed,
            methods,
            ..RunConfig::default()
        };
        cfg.features.selection = keep.map(SelectionRule::Fixed);
        cfg.dataset.subsample = subsample;
        cfg.dataset.profile = Profile::CicIds2017;
        cfg.dataset.path = "data/cic".into();
        cfg.thresholds.pd.ks_threshold = ks;
        cfg.params.ctgan.lr = lr;
        cfg.run.parallel = parallel;
        let back: RunConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
    }
}
