use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pcflab::curve::{construct_curve, CurveSpec};
use pcflab::noncollapse::{mu_report_with, oracle_radii};
use pcflab::par::Exec;

fn pair_scan(c: &mut Criterion) {
    let spec = CurveSpec::fourier(1.0, &[(3, 0.02, 0.3)]);
    let mut group = c.benchmark_group("mu_report");
    for n in [256, 512] {
        let g = construct_curve(&spec, n).unwrap().geometry().unwrap();
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &g, |b, g| {
                b.iter(|| mu_report_with(g, exec).unwrap())
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("oracle_radii");
    group.sample_size(10);
    let g = construct_curve(&spec, 256).unwrap().geometry().unwrap();
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| b.iter(|| oracle_radii(&g, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, pair_scan);
criterion_main!(benches);
