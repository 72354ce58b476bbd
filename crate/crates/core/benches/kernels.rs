//! Data-parallel kernels on a one-thread pool versus the default pool.
//! Build with `--no-default-features` for the plain sequential loops.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vortibc::elliptic::NeumannSolver;
use vortibc::fieldcalc::{advect, laplacian_vector, vector_jet_summary};
use vortibc::geometry::{build_grid, DomainSpec};
use vortibc::par::with_threads;
use vortibc::scenarios::random_smooth_field;

fn kernels(c: &mut Criterion) {
    let g = build_grid(DomainSpec::annulus(1.0, 2.0), 128, 128).unwrap();
    let u = random_smooth_field(&g, 1);
    let ensemble: Vec<_> = (0..8).map(|s| random_smooth_field(&g, s)).collect();
    let solver = NeumannSolver::new(g.clone()).unwrap();
    let mut group = c.benchmark_group("kernels_128");
    for (label, threads) in [("1_thread", Some(1)), ("default_pool", None)] {
        group.bench_with_input(BenchmarkId::new("jets", label), &threads, |b, t| {
            b.iter(|| with_threads(*t, || black_box(vector_jet_summary(&u))))
        });
        group.bench_with_input(BenchmarkId::new("advect", label), &threads, |b, t| {
            b.iter(|| with_threads(*t, || black_box(advect(&u, &u))))
        });
        group.bench_with_input(BenchmarkId::new("laplacian", label), &threads, |b, t| {
            b.iter(|| with_threads(*t, || black_box(laplacian_vector(&u))))
        });
        group.bench_with_input(BenchmarkId::new("pressure_ensemble", label), &threads, |b, t| {
            b.iter(|| {
                with_threads(*t, || {
                    black_box(vortibc::par::map_items(&ensemble, |f| solver.pressure_euler(f).unwrap()))
                })
            })
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = kernels
}
criterion_main!(benches);
