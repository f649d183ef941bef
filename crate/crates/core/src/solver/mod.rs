//! Ground-state DMRG, orthogonal excited states and overlap-targeted DMRG-X.

mod dmrg;
pub(crate) mod krylov;

pub use dmrg::{dmrg_excited_orthogonal, dmrg_ground, dmrgx, energy_variance, ground_initial_state};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tn::TruncationPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSolverConfig {
    /// Eigenpairs requested per local step; the Lanczos space is at least 3× larger.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Residual `‖H_eff v − λ v‖` accepted without further restarts (GHz).
    pub tol: f64,
}

impl Default for LocalSolverConfig {
    fn default() -> Self {
        Self { krylov_dim: 8, max_restarts: 4, tol: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftInvertConfig {
    pub enabled: bool,
    pub inner_solver_tol: f64,
    pub max_inner_iters: usize,
}

impl Default for ShiftInvertConfig {
    fn default() -> Self {
        Self { enabled: true, inner_solver_tol: 1e-10, max_inner_iters: 60 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_bond: usize,
    pub svd_cutoff: f64,
    pub max_sweeps: usize,
    /// Per-sweep energy change accepted for ground-state convergence (GHz).
    pub energy_tol: f64,
    /// Target standard deviation `σ` (GHz).
    pub variance_tol: f64,
    pub local_solver: LocalSolverConfig,
    pub shift_invert: ShiftInvertConfig,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::with_variance_tol(64, 1e-4)
    }
}

impl SolverConfig {
    /// Defaults for a given bond cap and σ target; shift-invert is switched on
    /// below 1 MHz and the SVD cutoff scales as `1e-6·σ²` within `[1e-16, 1e-12]`.
    pub fn with_variance_tol(max_bond: usize, variance_tol: f64) -> Self {
        Self {
            max_bond,
            svd_cutoff: (1e-6 * variance_tol * variance_tol).clamp(1e-16, 1e-12),
            max_sweeps: 20,
            energy_tol: 1e-9,
            variance_tol,
            local_solver: LocalSolverConfig::default(),
            shift_invert: ShiftInvertConfig { enabled: variance_tol < 1e-3, ..ShiftInvertConfig::default() },
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_bond < 2 {
            return Err(Error::InvalidParams("max_bond must be >= 2".into()));
        }
        if !(self.energy_tol > 0.0 && self.variance_tol > 0.0 && self.local_solver.tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        if self.shift_invert.enabled && self.shift_invert.inner_solver_tol <= 0.0 {
            return Err(Error::InvalidParams("inner_solver_tol must be positive".into()));
        }
        if self.local_solver.krylov_dim == 0 || self.max_sweeps == 0 {
            return Err(Error::InvalidParams("krylov_dim and max_sweeps must be >= 1".into()));
        }
        self.policy().validate()
    }

    pub fn policy(&self) -> TruncationPolicy {
        TruncationPolicy { max_bond: self.max_bond, svd_cutoff: self.svd_cutoff }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRecord {
    pub label: String,
    pub energy: f64,
    /// Standard deviation `(⟨H²⟩ − ⟨H⟩²)^{1/2}` (GHz).
    pub sigma: f64,
    /// `|⟨trial|result⟩|`; absent for ground-state runs.
    pub trial_fidelity: Option<f64>,
    pub bond_profile: Vec<usize>,
    pub sweeps_used: usize,
    pub converged: bool,
}
