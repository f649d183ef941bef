//! Fixtures shared by the kernel benchmarks.

use jja_core::circuit::capacitance_model;
use jja_core::pipeline::Instance;
use jja_core::solver::ground_initial_state;
use jja_core::tn::Mps;
use jja_core::{BasisConfig, CircuitParams};

/// Uniform fluxonium array with `n` junctions.
pub fn array(n: usize) -> CircuitParams {
    CircuitParams { phi_ext: 0.3 * std::f64::consts::PI, ..CircuitParams::uniform(n, 20.0, 0.5, 3.0, Some(2.0), 50.0, 10.0, 10.0) }
}

pub fn instance(n: usize, d: usize) -> Instance {
    Instance::new(&array(n), BasisConfig { ncut: 30, d }).expect("bench instance")
}

pub fn random_state(inst: &Instance, bond: usize) -> Mps {
    let mut psi = Mps::random(&inst.dims(), bond, 7).expect("random state");
    psi.normalize().expect("nonzero state");
    psi
}

pub fn ground_guess(inst: &Instance) -> Mps {
    ground_initial_state(&inst.dims(), 7).expect("initial state")
}

pub fn resolved(n: usize) -> (CircuitParams, jja_core::circuit::CapacitanceModel) {
    let p = array(n).resolved().expect("valid params");
    let m = capacitance_model(&p).expect("capacitance model");
    (p, m)
}
