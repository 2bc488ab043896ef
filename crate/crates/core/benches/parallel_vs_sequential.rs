use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use std::hint::black_box;

use innokit::causal::{infer_direction, CausalOptions, ContingencyTable};
use innokit::ikea::best_partition;
use innokit::mec::{exhaustive_mec, MarginalSet};
use innokit::{parallel, Execution, RngSeed, SearchConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn three_ternary() -> MarginalSet {
    MarginalSet::from_masses(vec![vec![0.2, 0.3, 0.5], vec![0.1, 0.45, 0.45], vec![0.6, 0.25, 0.15]]).unwrap()
}

fn exhaustive(c: &mut Criterion) {
    let set = three_ternary();
    let mut group = c.benchmark_group("exhaustive_mec_3x3");
    group.sample_size(10);
    for (name, mode) in MODES {
        let cfg = SearchConfig::default().with_execution(mode);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| exhaustive_mec(black_box(&set), 7, cfg).unwrap())
        });
    }
    group.finish();
}

fn shelves(c: &mut Criterion) {
    let set = MarginalSet::from_masses(vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
    let mut group = c.benchmark_group("best_partition_2x2_L3");
    for (name, mode) in MODES {
        let cfg = SearchConfig::default().with_execution(mode);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| best_partition(black_box(&set), 3, 5, cfg).unwrap())
        });
    }
    group.finish();
}

fn table(seed: RngSeed) -> ContingencyTable {
    let mut rng = seed.rng();
    let g: Vec<[usize; 2]> = (0..10).map(|_| [rng.random_range(0..10), rng.random_range(0..10)]).collect();
    let pairs: Vec<(usize, usize)> = (0..10_000)
        .map(|_| {
            let x = rng.random_range(0..10);
            (x, g[x][rng.random_range(0..2)])
        })
        .collect();
    ContingencyTable::from_pairs(pairs).unwrap()
}

fn causal_trials(c: &mut Criterion) {
    let tables: Vec<ContingencyTable> = (0..32).map(|k| table(RngSeed(7).derive(k))).collect();
    let mut group = c.benchmark_group("causal_32_trials");
    for (name, mode) in MODES {
        let mut options = CausalOptions::default();
        options.search.execution = mode;
        group.bench_with_input(BenchmarkId::from_parameter(name), &options, |b, options| {
            b.iter(|| {
                parallel::map_indices(tables.len(), mode, |k| infer_direction(&tables[k], options).unwrap().direction)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, exhaustive, shelves, causal_trials);
criterion_main!(benches);
