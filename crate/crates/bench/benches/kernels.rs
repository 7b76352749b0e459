use criterion::{black_box, criterion_group, criterion_main, Criterion};

use maxrand::analytic::{
    construct_bipartite_family, construct_tripartite_family, maximize_f_over_a,
};
use maxrand::incompat::sdp_robustness;
use maxrand::matkernel::{hermitian_eig, kron, ComplexMatrix};
use maxrand::npa::{pg_upper_bound, Level};
use maxrand::numverify::{verify_family, MinimizeOptions};
use maxrand::quantum::born_behavior;
use maxrand::FamilyKind;

fn eig(c: &mut Criterion) {
    let z = ComplexMatrix::pauli_z();
    let x = ComplexMatrix::pauli_x();
    let m = kron(&kron(&z, &x), &ComplexMatrix::pauli_y()).add(&kron(&kron(&x, &x), &z));
    c.bench_function("hermitian_eig_8x8", |b| {
        b.iter(|| hermitian_eig(black_box(&m)).unwrap())
    });
}

fn born(c: &mut Criterion) {
    let bi = construct_bipartite_family(0.45, 0.45).unwrap();
    let tri = construct_tripartite_family(0.24, 0.23).unwrap();
    c.bench_function("born_bipartite", |b| {
        b.iter(|| born_behavior(black_box(&bi.state), &bi.assembly).unwrap())
    });
    c.bench_function("born_tripartite", |b| {
        b.iter(|| born_behavior(black_box(&tri.state), &tri.assembly).unwrap())
    });
}

fn f_bound(c: &mut Criterion) {
    c.bench_function("maximize_f_over_a", |b| {
        b.iter(|| maximize_f_over_a(black_box(0.37), black_box(0.21)).unwrap())
    });
}

fn jm_sdp(c: &mut Criterion) {
    let n1 = [0.0, 0.0, 1.0];
    let n2 = [0.6, 0.0, 0.8];
    c.bench_function("sdp_robustness_1e-6", |b| {
        b.iter(|| sdp_robustness(black_box(n1), n2, 1e-6).unwrap())
    });
}

fn npa(c: &mut Criterion) {
    let fam = construct_bipartite_family(0.45, 0.45).unwrap().behavior();
    let mut g = c.benchmark_group("pg_upper_bound");
    g.sample_size(20);
    for level in [Level::OnePlusAb, Level::Two] {
        g.bench_function(level.as_str(), |b| {
            b.iter(|| pg_upper_bound(black_box(&fam), &[0, 0], level).unwrap())
        });
    }
    g.finish();
}

fn simplex(c: &mut Criterion) {
    let opts = MinimizeOptions {
        restarts: 1,
        ..Default::default()
    };
    let mut g = c.benchmark_group("numeric_verification");
    g.sample_size(10);
    g.bench_function("bipartite_one_restart", |b| {
        b.iter(|| verify_family(FamilyKind::Bipartite, 0.45, 0.45, black_box(&opts)).unwrap())
    });
    g.bench_function("tripartite_one_restart", |b| {
        b.iter(|| verify_family(FamilyKind::Tripartite, 0.24, 0.235, black_box(&opts)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, eig, born, f_bound, jm_sdp, npa, simplex);
criterion_main!(benches);
