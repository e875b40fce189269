use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use disloc::darboux::DeformedSystem;
use disloc::oracle::{grid_spectrum, GridConfig};
use disloc::specfun::recip_gamma;
use disloc::spectrum::{self, find_spectrum_general, negative_spectrum_hermite_case};
use disloc::states::eigenstate;
use disloc::PotentialSpec;

fn special_functions(c: &mut Criterion) {
    c.bench_function("recip_gamma sweep", |b| b.iter(|| (0..200).map(|i| recip_gamma(black_box(-10.05 + 0.1 * i as f64))).sum::<f64>()));
}

fn spectra(c: &mut Criterion) {
    let spec = PotentialSpec::new(2.0).unwrap();
    c.bench_function("matching spectrum a=2 [-5,12]", |b| {
        b.iter(|| find_spectrum_general(black_box(&spec), -5.0, 12.0, spectrum::DEFAULT_SCAN_STEP, spectrum::DEFAULT_TOL).unwrap())
    });
    c.bench_function("exact negative roots l=6", |b| b.iter(|| negative_spectrum_hermite_case(black_box(6), spectrum::STATE_TOL).unwrap()));
}

fn states(c: &mut Criterion) {
    let state = eigenstate(&PotentialSpec::new(2.0).unwrap(), 3).unwrap();
    c.bench_function("general state, 400 evaluations", |b| {
        b.iter(|| (0..400).map(|i| state.evaluate(black_box(-5.99 + 0.03 * i as f64), None).unwrap()).sum::<f64>())
    });
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid oracle");
    group.sample_size(10);
    let spec = PotentialSpec::new(2.0).unwrap();
    let cfg = GridConfig::new(8.0, 4000, 6).unwrap();
    group.bench_function("a=2, N=4000, 6 levels", |b| b.iter(|| grid_spectrum(black_box(&spec), &cfg).unwrap()));
    let sys = DeformedSystem::crum(1, 1).unwrap();
    group.bench_function("Crum l=1 M=1 potential, 1000 points", |b| {
        b.iter(|| (0..1000).map(|i| sys.potential(black_box(-7.995 + 0.016 * i as f64), None).unwrap()).sum::<f64>())
    });
    group.finish();
}

criterion_group!(benches, special_functions, spectra, states, oracle);
criterion_main!(benches);
