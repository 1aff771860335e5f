//! Surrogate datasets shaped like the public IDS files, and fast configs.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;

use netsynth_cli::RunConfig;
use netsynth_core::gen_ai::{BnParams, DiffusionParams, GanParams, TvaeParams};
use netsynth_core::{rng, Method, MethodParams, Profile};

/// Headerless KDD-format file: 41 features, label, level.
pub fn write_nsl_like(path: &Path, n: usize, seed: u64) {
    let mut r = rng::seeded(seed);
    let services = ["http", "private", "domain_u", "smtp", "ftp_data", "eco_i"];
    let attacks = ["neptune", "smurf", "satan", "ipsweep", "portsweep"];
    let mut out = String::new();
    for _ in 0..n {
        let attack = r.random_bool(0.47);
        let mut f: Vec<String> = Vec::with_capacity(43);
        let duration = if r.random_bool(0.1) { r.random_range(0..5000) } else { 0 };
        f.push(duration.to_string());
        let proto = if attack && r.random_bool(0.3) { "icmp" } else if r.random_bool(0.15) { "udp" } else { "tcp" };
        f.push(proto.into());
        let service = if attack {
            services[r.random_range(1..services.len())]
        } else {
            services[r.random_range(0..4)]
        };
        f.push(service.into());
        let flag = if attack { if r.random_bool(0.6) { "S0" } else { "REJ" } } else if r.random_bool(0.95) { "SF" } else { "REJ" };
        f.push(flag.into());
        let src = if attack { r.random_range(0.0..60.0f64) } else { (r.random_range(4.0..9.0f64)).exp() };
        let dst = if attack { 0.0 } else { (r.random_range(3.0..10.0f64)).exp() };
        f.push(format!("{:.0}", src));
        f.push(format!("{:.0}", dst));
        for _ in 0..3 {
            f.push(u8::from(r.random_bool(0.01)).to_string());
        }
        f.push(r.random_range(0..3).to_string());
        f.push("0".into());
        f.push(u8::from(!attack && r.random_bool(0.8)).to_string());
        for _ in 0..10 {
            f.push(if r.random_bool(0.05) { r.random_range(1..4).to_string() } else { "0".into() });
        }
        let count = if attack { r.random_range(100..511) } else { r.random_range(1..30) };
        f.push(count.to_string());
        f.push(r.random_range(1..40).to_string());
        let serror = if attack && flag == "S0" { 1.0 } else { 0.0 };
        let rerror = if flag == "REJ" { 1.0 } else { 0.0 };
        let jitter = |r: &mut rng::Rng, v: f64| (v + r.random_range(-0.05..0.05f64)).clamp(0.0, 1.0);
        for v in [serror, serror, rerror, rerror] {
            f.push(format!("{:.2}", jitter(&mut r, v)));
        }
        let same = if attack { r.random_range(0.0..0.2) } else { r.random_range(0.8..1.0) };
        f.push(format!("{same:.2}"));
        f.push(format!("{:.2}", 1.0 - same));
        f.push(format!("{:.2}", r.random_range(0.0..0.3f64)));
        f.push(r.random_range(1..256).to_string());
        f.push(if attack { r.random_range(1..30) } else { r.random_range(100..256) }.to_string());
        f.push(format!("{same:.2}"));
        f.push(format!("{:.2}", 1.0 - same));
        for _ in 0..2 {
            f.push(format!("{:.2}", r.random_range(0.0..1.0f64)));
        }
        for v in [serror, serror, rerror, rerror] {
            f.push(format!("{:.2}", jitter(&mut r, v)));
        }
        f.push(if attack { attacks[r.random_range(0..attacks.len())] } else { "normal" }.into());
        f.push(r.random_range(if attack { 15..22 } else { 10..22 }).to_string());
        assert_eq!(f.len(), 43);
        out.push_str(&f.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}

/// CIC-IDS2017-shaped file: 78 numeric flow features and `Label`, with one
/// duplicated header name as in the published captures.
pub fn write_cic_like(path: &Path, n: usize, seed: u64) {
    let mut r = rng::seeded(seed);
    let mut names: Vec<String> = (0..78).map(|j| format!(" Flow Feature {j}")).collect();
    names[61] = " Fwd Header Length".into();
    names[40] = " Fwd Header Length".into();
    let mut out = names.join(",");
    out.push_str(", Label\n");
    let labels = ["DoS Hulk", "PortScan", "DDoS", "Bot"];
    for _ in 0..n {
        let attack = r.random_bool(0.2);
        let mut row = Vec::with_capacity(79);
        let header_len = r.random_range(20..400);
        for j in 0..78 {
            let v = if j == 40 || j == 61 {
                header_len as f64
            } else if j % 9 == 0 {
                f64::from(u8::from(r.random_bool(if attack { 0.7 } else { 0.2 })))
            } else {
                let shift = if attack && j % 4 == 0 { 2.0 } else { 0.0 };
                (r.random_range(0.0..3.0f64) + shift).exp().floor()
            };
            row.push(format!("{v}"));
        }
        if r.random_bool(0.002) {
            row[5] = "Infinity".into();
        }
        row.push(if attack { labels[r.random_range(0..labels.len())] } else { "BENIGN" }.into());
        let _ = writeln!(out, "{}", row.join(","));
    }
    std::fs::write(path, out).unwrap();
}

/// Small-budget hyperparameters that keep every method under a few seconds.
pub fn quick_params() -> MethodParams {
    let gan = GanParams {
        epochs: 3,
        batch: 64,
        noise_dim: 8,
        hidden: vec![16, 16],
        max_modes: 3,
        ..GanParams::default()
    };
    MethodParams {
        bn: BnParams::default(),
        tvae: TvaeParams {
            epochs: 3,
            batch: 64,
            latent_dim: 4,
            hidden: vec![16],
            max_modes: 3,
            ..TvaeParams::default()
        },
        tabddpm: DiffusionParams {
            timesteps: 20,
            steps: 40,
            batch: 64,
            hidden: vec![16],
            ..DiffusionParams::default()
        },
        ctgan: gan.clone(),
        copulagan: gan,
        ..MethodParams::default()
    }
}

/// Config for a surrogate NSL-KDD file with every method on a small budget.
pub fn quick_config(data: PathBuf, out: PathBuf, methods: &[Method]) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.dataset.profile = Profile::NslKdd;
    cfg.dataset.path = data;
    cfg.output_dir = out;
    cfg.methods = methods.to_vec();
    cfg.classifier.trees = 15;
    cfg.params = quick_params();
    cfg
}
