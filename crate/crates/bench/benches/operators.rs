use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pqbbh::analysis::{sup_error, CorpusFunction, Grid2D};
use pqbbh::exact::{exact_identity_check, IdentityId};
use pqbbh::pq::euler_sum;
use pqbbh::univariate::weights;
use pqbbh_bench::{exact_inputs, operator, params, DEGREES};

fn euler(c: &mut Criterion) {
    let mut group = c.benchmark_group("euler_sum");
    for n in DEGREES {
        let p = params(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| euler_sum(black_box(n), p, 0.7))
        });
    }
    group.finish();
}

fn weight_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("weights");
    for n in DEGREES {
        let p = params(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| weights(black_box(n), p, 1.3))
        });
    }
    group.finish();
}

fn bivariate(c: &mut Criterion) {
    let f = CorpusFunction::SumRatios;
    let mut group = c.benchmark_group("apply2");
    for n in [8, 32, 128] {
        let op = operator(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &op, |b, op| {
            b.iter(|| op.apply(|u, v| f.eval(u, v), black_box(1.3), black_box(0.4)))
        });
    }
    group.finish();

    let grid = Grid2D::default();
    let mut group = c.benchmark_group("sup_error_33x33");
    group.sample_size(10);
    for n in [8, 32] {
        let op = operator(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &op, |b, op| {
            b.iter(|| sup_error(op, |u, v| f.eval(u, v), &grid))
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_check");
    for id in [IdentityId::Euler15, IdentityId::Tensor22] {
        let inputs = exact_inputs(id, 16);
        group.bench_function(id.to_string(), |b| {
            b.iter(|| {
                inputs
                    .iter()
                    .filter(|i| exact_identity_check(id, i).is_ok_and(|w| w.holds))
                    .count()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, euler, weight_table, bivariate, exact);
criterion_main!(benches);
