use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use jja_bench::{ground_guess, instance, random_state, resolved};
use jja_core::ham_mpo::build_hamiltonian;
use jja_core::localbasis::build_bases;
use jja_core::normalmodes::normal_modes;
use jja_core::solver::{dmrg_ground, energy_variance};
use jja_core::tn::TruncationPolicy;
use jja_core::{BasisConfig, SolverConfig};

fn normal_mode_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("normal_modes");
    for n in [10, 40, 95] {
        let (p, m) = resolved(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| normal_modes(black_box(&p), &m).unwrap()));
    }
    group.finish();
}

fn mpo_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("hamiltonian_mpo");
    for n in [4, 8, 16] {
        let (p, m) = resolved(n);
        let bases = build_bases(&p, &m, BasisConfig { ncut: 30, d: 6 }).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| build_hamiltonian(black_box(&p), &m, &bases, &TruncationPolicy::operator()).unwrap())
        });
    }
    group.finish();
}

fn mpo_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("mpo_apply");
    let inst = instance(8, 6);
    for bond in [8, 16, 32] {
        let psi = random_state(&inst, bond);
        group.bench_with_input(BenchmarkId::new("expectation", bond), &psi, |b, psi| b.iter(|| inst.hamiltonian.mpo.expectation_real(psi).unwrap()));
        group.bench_with_input(BenchmarkId::new("variance", bond), &psi, |b, psi| b.iter(|| energy_variance(&inst.hamiltonian.mpo, psi).unwrap()));
    }
    group.finish();
}

fn ground_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("dmrg_ground");
    group.sample_size(10);
    for n in [3, 6] {
        let inst = instance(n, 4);
        let init = ground_guess(&inst);
        let cfg = SolverConfig::with_variance_tol(32, 1e-4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| dmrg_ground(&inst.hamiltonian.mpo, &init, &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, normal_mode_solve, mpo_build, mpo_apply, ground_sweep);
criterion_main!(benches);
