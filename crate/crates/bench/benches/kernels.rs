use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use wavekit::delta::{band_limited_delta, DEFAULT_THRESHOLD};
use wavekit::geometry::{tessellate_disc, Vec3};
use wavekit::oracle::{monopole_pressure, TimeAxis};
use wavekit::signal::tone_burst;
use wavekit::{spectral_derivative, Medium, Solver, SolverConfig, SolverState, Stagger};
use wavekit_bench::{cube, smooth_field, C, DX};

fn derivative(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_derivative");
    for n in [32, 64] {
        let g = cube(n);
        let f = smooth_field(&g);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| spectral_derivative(&g, black_box(&f), 0, Stagger::Forward).unwrap())
        });
    }
    group.finish();
}

fn solver_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver_step");
    group.sample_size(20);
    for kspace in [false, true] {
        let g = cube(64);
        let medium = Medium::homogeneous(&g, C, 1000.0).unwrap();
        let cfg = SolverConfig {
            kspace_correction: kspace,
            ..SolverConfig::default()
        };
        let mut solver = Solver::new(&g, &medium, 0.2 * DX / C, &cfg).unwrap();
        let mut state = SolverState::new(&g);
        let mass = smooth_field(&g);
        group.bench_function(if kspace { "64^3 kspace" } else { "64^3" }, |b| {
            b.iter(|| solver.step(&mut state, Some(&mass), None).unwrap())
        });
    }
    group.finish();
}

fn delta(c: &mut Criterion) {
    let g = cube(64);
    let f = smooth_field(&g);
    let x0 = [31.37 * DX, 30.81 * DX, 32.12 * DX];
    c.bench_function("delta_b build+sample 64^3", |b| {
        b.iter(|| {
            band_limited_delta(&g, black_box(x0), DEFAULT_THRESHOLD)
                .unwrap()
                .sample(&f)
        })
    });
}

fn oracle(c: &mut Criterion) {
    let mesh = tessellate_disc(8e-3, Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), 2.5e-4).unwrap();
    let un = tone_burst(0.5e6, 3.0, 1e-3, 2e-8);
    let x = Vec3::new(5e-3, -3e-3, 20e-3);
    c.bench_function("monopole oracle, one receiver", |b| {
        b.iter(|| monopole_pressure(&mesh, &un, 1000.0, C, 2.0, black_box(&x), TimeAxis::new(8e-8, 500)).unwrap())
    });
}

criterion_group!(benches, derivative, solver_step, delta, oracle);
criterion_main!(benches);
