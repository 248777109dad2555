//! Benchmarks for the numerical hot loops: radial quadrature, profile
//! solves, the 2D energy/gradient kernel and winding measurement.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use glpin_core::field::edge_weights;
use glpin_core::iquant::{compute_i, compute_i_rc, solve_profile, DEFAULT_KNOTS};
use glpin_core::{Field2D, Grid, PotentialSpec, WeightSpec};

fn bench_quadrature(c: &mut Criterion) {
    let quartic = PotentialSpec::quartic();
    let exp1 = PotentialSpec::exp_family(1.0).unwrap();
    c.bench_function("compute_i quartic R=1e3", |b| {
        b.iter(|| compute_i(&quartic, 1e3).unwrap())
    });
    c.bench_function("compute_i exp h=1 R=1e3", |b| {
        b.iter(|| compute_i(&exp1, 1e3).unwrap())
    });
}

fn bench_profile(c: &mut Criterion) {
    let exp1 = PotentialSpec::exp_family(1.0).unwrap();
    c.bench_function("solve_profile exp h=1 R=1e3 c=1", |b| {
        b.iter(|| solve_profile(&exp1, 1e3, 1.0, DEFAULT_KNOTS).unwrap())
    });
    let profile = solve_profile(&exp1, 1e3, 1.0, DEFAULT_KNOTS).unwrap();
    c.bench_function("compute_i_rc on solved profile", |b| {
        b.iter(|| compute_i_rc(&profile))
    });
}

fn vortex_field(n: usize) -> (Field2D, WeightSpec) {
    let grid = Arc::new(Grid::disc(1.0, n).unwrap());
    let field = Field2D::from_fn(grid, |x, y| {
        let r = (x * x + y * y).sqrt();
        let m = (r / 0.1).tanh();
        Complex64::from_polar(m, y.atan2(x))
    });
    (field, WeightSpec::constant(1.0))
}

fn bench_energy_kernels(c: &mut Criterion) {
    let (field, weight) = vortex_field(128);
    let pot = PotentialSpec::quartic();
    let edge_p = edge_weights(field.grid(), &weight);
    c.bench_function("energy 128^2", |b| {
        b.iter(|| field.energy_with(&edge_p, &pot, 0.05))
    });
    let mut grad = Vec::new();
    c.bench_function("energy_gradient 128^2", |b| {
        b.iter(|| field.energy_gradient_with(&edge_p, &pot, 0.05, &mut grad))
    });
}

fn bench_winding(c: &mut Criterion) {
    let (field, _) = vortex_field(256);
    c.bench_function("winding_on_circle r=0.5 (256^2)", |b| {
        b.iter(|| field.winding_on_circle((0.0, 0.0), 0.5).unwrap())
    });
}

criterion_group!(
    benches,
    bench_quadrature,
    bench_profile,
    bench_energy_kernels,
    bench_winding
);
criterion_main!(benches);
