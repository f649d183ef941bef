//! Tensor-network results against dense exact diagonalization.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use jja_core::excitations::build_trial;
use jja_core::linalg;
use jja_core::oracle::{dense_bosonic, dense_eigensolve, dense_walsh_hadamard};
use jja_core::pipeline::{kerr_modes, solve_excitation, solve_ground, Instance, GROUND_LABEL};
use jja_core::tn::{Mps, TruncationPolicy};
use jja_core::{BasisConfig, CircuitParams, OccupationString, SolverConfig};

fn toy(phi_ext: f64, ng: f64) -> CircuitParams {
    CircuitParams { phi_ext, ng: vec![ng, 0.0, 2.0 * ng], ..CircuitParams::uniform(3, 20.0, 0.5, 3.0, Some(2.0), 50.0, 10.0, 10.0) }
}

fn instance(p: &CircuitParams) -> Instance {
    Instance::new(p, BasisConfig { ncut: 30, d: 4 }).unwrap()
}

#[test]
fn mpo_reconstructs_dense_hamiltonian() {
    for (phi, ng) in [(0.0, 0.0), (0.3 * PI, 0.2), (PI, 0.45)] {
        let inst = instance(&toy(phi, ng));
        let dense = inst.dense_hamiltonian().unwrap();
        let diff = linalg::frobenius_c((inst.hamiltonian.mpo.to_dense().unwrap() - &dense).as_ref());
        assert!(diff < 1e-10 * linalg::frobenius_c(dense.as_ref()), "phi={phi} ng={ng}: {diff:e}");
    }
}

#[test]
fn ground_and_excitations_match_dense() {
    let inst = instance(&toy(0.3 * PI, 0.1));
    let spec = dense_eigensolve(&inst.dense_hamiltonian().unwrap(), 16).unwrap();
    let cfg = SolverConfig::with_variance_tol(64, 1e-6);
    let ground = solve_ground(&inst, &cfg).unwrap();
    assert!(ground.record.converged);
    assert!((ground.record.energy - spec.eigenvalues[0]).abs() <= 1e-8 * spec.eigenvalues[0].abs());
    for k in 0..3 {
        let occ = OccupationString::single(3, k).unwrap();
        let s = solve_excitation(&inst, &ground, GROUND_LABEL, &occ, &cfg).unwrap();
        let (idx, fid) = spec.best_overlap(&s.mps.to_dense().unwrap()).unwrap();
        assert!(fid > 0.999, "mode {k}: fidelity {fid}");
        assert!((s.record.energy - spec.eigenvalues[idx]).abs() < 1e-6);
        assert!((s.record.energy - spec.eigenvalues[idx]).abs() <= 3.0 * s.record.sigma + 1e-9);
    }
}

#[test]
fn walsh_hadamard_matches_dense() {
    let inst = instance(&toy(0.3 * PI, 0.0));
    let h = inst.dense_hamiltonian().unwrap();
    let spec = dense_eigensolve(&h, h.nrows()).unwrap();
    let cfg = SolverConfig::with_variance_tol(64, 1e-6);
    let ground = solve_ground(&inst, &cfg).unwrap();
    let run = kerr_modes(&inst, &ground, 1, 2, &cfg).unwrap();

    let v = spec.eigenvectors.as_ref().unwrap();
    let g: Vec<_> = (0..v.nrows()).map(|r| v[(r, 0)]).collect();
    let reference = Mps::from_dense(&inst.dims(), &g, &TruncationPolicy::exact()).unwrap();
    let trial = |modes: &[usize]| {
        let occ = OccupationString::from_modes(3, modes).unwrap();
        build_trial(&reference, GROUND_LABEL, &occ, &inst.normal_modes, &inst.bases, &TruncationPolicy::exact()).unwrap().mps.to_dense().unwrap()
    };
    let (exact, _) = dense_walsh_hadamard(&spec, &[g.clone(), trial(&[1]), trial(&[2]), trial(&[1, 2])]).unwrap();
    assert_abs_diff_eq!(run.result.chi, exact, epsilon = 1e-4);
}

#[test]
fn quadratic_single_excitations_are_mode_frequencies() {
    let p = CircuitParams::uniform(3, 30.0, 0.5, 0.0, None, 60.0, 8.0, 12.0).resolved().unwrap();
    let nm = jja_core::normalmodes::normal_modes(&p, &jja_core::circuit::capacitance_model(&p).unwrap()).unwrap();
    let spec = dense_bosonic(&nm, 8, 4).unwrap();
    for k in 0..3 {
        assert_abs_diff_eq!(spec.eigenvalues[k + 1] - spec.eigenvalues[0], nm.omegas[k], epsilon = 1e-8);
    }
}
