use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gfront::flow::FlowSamples;
use gfront::hj::{hamiltonian_inviscid, weno_derivatives, WenoOrder};
use gfront::reinit::{reinit_field, ReinitProfile};
use gfront::stepping::spectral::PeriodicHelmholtz;
use gfront::{FlowSpec, Model, ModelConfig, SchemeChoice, SimState, Stepper};
use gfront_bench::wrinkled_front;

fn weno(c: &mut Criterion) {
    let mut group = c.benchmark_group("weno");
    for n in [100, 200] {
        let f = wrinkled_front(n);
        group.bench_with_input(BenchmarkId::new("weno5", n), &f, |b, f| {
            b.iter(|| weno_derivatives(black_box(f), WenoOrder::Five).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("weno3", n), &f, |b, f| {
            b.iter(|| weno_derivatives(black_box(f), WenoOrder::Three).unwrap())
        });
    }
    group.finish();
}

fn hamiltonian(c: &mut Criterion) {
    let f = wrinkled_front(200);
    let g = weno_derivatives(&f, WenoOrder::Five).unwrap();
    let flow = FlowSamples::new(&FlowSpec::cellular(8.0), f.grid());
    c.bench_function("hamiltonian_inviscid/200", |b| b.iter(|| hamiltonian_inviscid(black_box(&g), &flow, 1.0)));
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(20);
    let cases = [
        ("inviscid", Model::Inviscid, 0.0, SchemeChoice::Auto),
        ("strain", Model::Strain, 0.02, SchemeChoice::Auto),
        ("curvature_explicit", Model::Curvature, 0.1, SchemeChoice::Explicit),
        ("curvature_semi", Model::Curvature, 0.1, SchemeChoice::SemiImplicit),
        ("viscous_semi", Model::Viscous, 0.1, SchemeChoice::SemiImplicit),
    ];
    for (name, model, d, scheme) in cases {
        let f = wrinkled_front(100);
        let cfg = ModelConfig { model, s_l: 1.0, d, scheme };
        let mut stepper = Stepper::new(&cfg, &FlowSpec::cellular(8.0), f.grid(), f.direction(), 0.5).unwrap();
        group.bench_function(BenchmarkId::new(name, 100), |b| {
            b.iter_batched(
                || SimState::new(f.clone()),
                |mut s| stepper.step(&mut s).unwrap(),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn reinit(c: &mut Criterion) {
    let f = wrinkled_front(100);
    let profile = ReinitProfile::default();
    let mut group = c.benchmark_group("reinit");
    group.sample_size(10);
    group.bench_function("five_cells/100", |b| b.iter(|| reinit_field(black_box(&f), &profile, 0.05).unwrap()));
    group.finish();
}

fn spectral(c: &mut Criterion) {
    let f = wrinkled_front(200);
    let mut solver = PeriodicHelmholtz::new(f.grid());
    let mut out = vec![0.0; f.u().len()];
    c.bench_function("helmholtz_solve/200", |b| b.iter(|| solver.solve(1.0, 1e-3, black_box(f.u()), &mut out)));
}

criterion_group!(benches, weno, hamiltonian, steps, reinit, spectral);
criterion_main!(benches);
