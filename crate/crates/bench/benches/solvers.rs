use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use parklab::report::compute_report;
use parklab::solver::{solve_m, solve_m2, solve_mprime};
use parklab::{Params, TailMethod};
use std::hint::black_box;

fn solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for m in [64, 256] {
        let p = Params::new(1.0, 7, m).unwrap();
        g.bench_with_input(BenchmarkId::new("M", m), &p, |b, p| b.iter(|| solve_m(black_box(p))));
        g.bench_with_input(BenchmarkId::new("Mprime", m), &p, |b, p| b.iter(|| solve_mprime(black_box(p))));
        let mg = solve_m(&p);
        g.bench_with_input(BenchmarkId::new("M2", m), &p, |b, p| b.iter(|| solve_m2(black_box(p), &mg).unwrap()));
    }
    g.finish();
}

fn report(c: &mut Criterion) {
    c.bench_function("constants lambda=1 n=7 m=256", |b| {
        b.iter(|| compute_report(black_box(1.0), 7, 256, TailMethod::Envelope).unwrap())
    });
}

criterion_group!(benches, solvers, report);
criterion_main!(benches);
