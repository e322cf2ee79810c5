use criterion::{criterion_group, criterion_main, Criterion};
use loglap_bench::{centered_grid, gaussian, plane_constants};
use loglap_core::operator::{apply_log_laplacian, apply_log_laplacian_at, KernelPlan};
use std::hint::black_box;

fn bench_plan_build(c: &mut Criterion) {
    let constants = plane_constants();
    let grid = centered_grid(8.0, 0.05);
    c.bench_function("kernel_plan_321x321", |b| {
        b.iter(|| KernelPlan::new(black_box(&grid), &constants).unwrap())
    });
}

fn bench_apply_at_point(c: &mut Criterion) {
    let constants = plane_constants();
    let grid = centered_grid(8.0, 0.05);
    let plan = KernelPlan::new(&grid, &constants).unwrap();
    let u = gaussian(&grid, 1.0);
    let center = grid.flat(&grid.position_of(&[0.0, 0.0]).unwrap());
    c.bench_function("apply_at_point_321x321", |b| {
        b.iter(|| apply_log_laplacian_at(black_box(&u), &plan, center).unwrap())
    });
}

fn bench_apply_full_field(c: &mut Criterion) {
    let constants = plane_constants();
    let grid = centered_grid(2.0, 0.1);
    let plan = KernelPlan::new(&grid, &constants).unwrap();
    let u = gaussian(&grid, 0.7);
    c.bench_function("apply_full_41x41", |b| {
        b.iter(|| apply_log_laplacian(black_box(&u), &plan).unwrap())
    });
}

criterion_group!(benches, bench_plan_build, bench_apply_at_point, bench_apply_full_field);
criterion_main!(benches);
