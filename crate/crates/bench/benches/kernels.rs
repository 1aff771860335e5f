use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ndarray::Array2;
use rand::Rng;

use netsynth_core::featsel::rank_features;
use netsynth_core::gen_stat::neighbors::KdTree;
use netsynth_core::gen_stat::smote_balance;
use netsynth_core::metrics::{kde_pair, ks_statistic};
use netsynth_core::nn::{Activation, Mlp, MlpSpec};
use netsynth_core::utility::train_tree_ensemble;
use netsynth_core::{rng, ColumnSchema, Dataset, ForestParams};

/// `n` rows, `p` numeric features, roughly 1 in 5 rows attack.
fn table(n: usize, p: usize, seed: u64) -> Dataset {
    let mut r = rng::seeded(seed);
    let target: Vec<f64> = (0..n).map(|_| f64::from(u8::from(r.random_bool(0.2)))).collect();
    let mut columns: Vec<ColumnSchema> = (0..p).map(|j| ColumnSchema::numeric(format!("f{j}"))).collect();
    let mut values: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            target
                .iter()
                .map(|&t| r.random_range(0.0..1.0) + t * (j % 3) as f64 * 0.5)
                .collect()
        })
        .collect();
    columns.push(ColumnSchema::binary("target"));
    values.push(target);
    Dataset::new(columns, values, p).unwrap()
}

fn featsel(c: &mut Criterion) {
    let d = table(20_000, 40, 1);
    c.bench_function("rank_features 20k x 40", |b| b.iter(|| rank_features(black_box(&d), None)));
}

fn neighbors(c: &mut Criterion) {
    let d = table(5_000, 8, 2);
    let points: Vec<f64> = d.feature_rows().concat();
    c.bench_function("kdtree build 5k x 8", |b| b.iter(|| KdTree::new(black_box(&points), 8)));
    let tree = KdTree::new(&points, 8);
    c.bench_function("kdtree 5-nn query", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % 5_000;
            tree.nearest(&points[i * 8..i * 8 + 8], 5, Some(i))
        })
    });
    c.bench_function("smote_balance 5k x 8", |b| b.iter(|| smote_balance(black_box(&d), 5, 3).unwrap()));
}

fn forest(c: &mut Criterion) {
    let d = table(10_000, 20, 3);
    let params = ForestParams {
        trees: 10,
        ..ForestParams::default()
    };
    let mut g = c.benchmark_group("forest");
    g.sample_size(10);
    g.bench_function("train 10 trees 10k x 20", |b| b.iter(|| train_tree_ensemble(&d, &params, 4).unwrap()));
    g.finish();
}

fn nn(c: &mut Criterion) {
    let net = Mlp::new(MlpSpec::stack(64, &[128, 128], 32, Activation::ReLU, Activation::Identity, 5)).unwrap();
    let mut r = rng::seeded(6);
    let x = Array2::from_shape_fn((512, 64), |_| r.random_range(-1.0..1.0));
    c.bench_function("mlp forward 512x64", |b| b.iter(|| net.forward(black_box(&x)).unwrap()));
    let (out, cache) = net.forward(&x).unwrap();
    let grad = Array2::ones(out.raw_dim());
    c.bench_function("mlp backward 512x64", |b| b.iter(|| net.backward(&cache, black_box(&grad)).unwrap()));
}

fn metrics(c: &mut Criterion) {
    let mut r = rng::seeded(7);
    let a: Vec<f64> = (0..50_000).map(|_| r.random_range(0.0..1.0)).collect();
    let s: Vec<f64> = (0..50_000).map(|_| r.random_range(0.1..1.1)).collect();
    c.bench_function("ks 50k vs 50k", |b| {
        b.iter_batched(|| (a.clone(), s.clone()), |(x, y)| ks_statistic(&x, &y), BatchSize::LargeInput)
    });
    let mut g = c.benchmark_group("kde");
    g.sample_size(10);
    g.bench_function("kde_pair 50k", |b| b.iter(|| kde_pair(black_box(&a), black_box(&s))));
    g.finish();
}

criterion_group!(benches, featsel, neighbors, forest, nn, metrics);
criterion_main!(benches);
