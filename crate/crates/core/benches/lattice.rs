use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jroc::classifiers::{train, ClassifierSpec};
use jroc::cost::{CostContext, PerExampleContext};
use jroc::data::{load_csv, split_dataset, LoadOptions};
use jroc::exec::Execution;
use jroc::lattice::enumerate_full_lattice_with;
use jroc::search::{backward_search, Criterion as SearchCriterion};

fn modes() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    if Execution::Parallel.is_parallel() {
        v.push(("parallel", Execution::Parallel));
    }
    v
}

fn bench(c: &mut Criterion) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/diabetes.csv");
    let d = load_csv(path, &LoadOptions::default()).expect("bundled dataset");
    let halves = split_dataset(&d, &[0.5, 0.5], 1).unwrap();
    let (fit, val) = (&halves[0], &halves[1]);
    let pec = PerExampleContext::from(CostContext::uniform(d.m(), d.c()).unwrap());

    for spec in [
        ClassifierSpec::Knn { k: 1 },
        ClassifierSpec::DecisionTree {
            max_depth: 10,
            min_leaf: 2,
        },
    ] {
        let model = train(&spec, fit).unwrap();
        let id = spec.label();

        let mut g = c.benchmark_group(format!("full_lattice/{id}"));
        g.sample_size(10);
        for (name, exec) in modes() {
            g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
                b.iter(|| black_box(enumerate_full_lattice_with(&model, &id, val, &pec, 20, exec).unwrap()))
            });
        }
        g.finish();

        let mut g = c.benchmark_group(format!("backward_bjc/{id}"));
        g.sample_size(10);
        for (name, exec) in modes() {
            g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
                b.iter(|| black_box(backward_search(&model, &id, val, &pec, SearchCriterion::Jc(0.5), exec).unwrap()))
            });
        }
        g.finish();
    }
}

criterion_group!(benches, bench);
criterion_main!(benches);
