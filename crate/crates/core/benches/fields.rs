//! Sequential vs parallel: the lattice field evaluation (per-point map) and a
//! variational capacity solve (FFT convolutions). Build with
//! `--no-default-features` to time the rayon-free fallback throughout.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use wolffkit::capacity::{capacity_variational, CapacityParams, VariationalOptions};
use wolffkit::measure::Region;
use wolffkit::par::{self, Execution};
use wolffkit::potential::{wolff_field_with, Lattice, PotentialParams, QuadratureRule};
use wolffkit::random::random_atoms;

fn field(c: &mut Criterion) {
    let m = random_atoms(7, 16, 3).unwrap();
    let p = PotentialParams::truncated(3, 1.0, 2.0, 1.0);
    let q = QuadratureRule::default();
    let lat = Lattice::new(vec![-1.0; 3], 0.125, vec![17; 3]).unwrap();
    let mut g = c.benchmark_group("wolff_field_17^3");
    g.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        g.bench_function(name, |b| b.iter(|| wolff_field_with(exec, black_box(&m), &p, &q, &lat).unwrap()));
    }
    g.finish();
}

fn capacity(c: &mut Criterion) {
    let p = CapacityParams::riesz(1.0, 2.0);
    let k = Region::Ball { center: vec![0.0; 3], radius: 0.5 };
    let opts = VariationalOptions::new(0.125);
    let mut g = c.benchmark_group("capacity_variational_h1/8");
    g.sample_size(10);
    g.bench_function("one_worker", |b| {
        b.iter(|| par::with_threads(1, || capacity_variational(&p, black_box(&k), 3, &opts).unwrap()))
    });
    g.bench_function("default_pool", |b| b.iter(|| capacity_variational(&p, black_box(&k), 3, &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, field, capacity);
criterion_main!(benches);
