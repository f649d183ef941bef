//! Run configuration: parameters or preset, basis, solver, targets, sweep
//! and output options.

use std::path::{Path, PathBuf};

use jja_core::{BasisConfig, CircuitParams, Impedance, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::presets::{with_junctions, Preset, SET3_OMEGA_P};

/// Junction count applied to presets for solver runs without `--unbounded`.
pub const DESK_JUNCTIONS: usize = 6;
/// Largest solver problem accepted without `--unbounded`.
pub const DESK_MAX_JUNCTIONS: usize = 12;
pub const DESK_MAX_BOND: usize = 64;
pub const DESK_MAX_D: usize = 8;
pub const MIN_SWEEP_POINTS: usize = 2;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<CircuitParams>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub targets: Vec<Target>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub perturbative: PertSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Worker threads for independent labels and sweep points; 0 uses the
    /// available parallelism.
    #[serde(default)]
    pub workers: usize,
}

/// Edits applied on top of the preset or explicit parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_junctions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_ext: Option<f64>,
    /// Uniform offset charge on every island.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ng: Option<f64>,
    /// Array junction impedance `Z/R_Q`; recomputes `E^a_J`, `E^a_C`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ej_blacksheep: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub max_bond: usize,
    /// Target energy standard deviation (GHz).
    pub variance_tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { max_bond: 64, variance_tol: 1e-4, max_sweeps: 20, seed: 0 }
    }
}

impl SolverSpec {
    pub fn solver_config(&self) -> SolverConfig {
        let mut c = SolverConfig::with_variance_tol(self.max_bond, self.variance_tol);
        c.max_sweeps = self.max_sweeps;
        c.seed = self.seed;
        c
    }
}

/// Reduced-model settings for the perturbative Kerr estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PertSpec {
    pub flux_levels: usize,
    pub mode_levels: usize,
}

impl Default for PertSpec {
    fn default() -> Self {
        Self { flux_levels: 16, mode_levels: 8 }
    }
}

/// A state or a named task. Mode indices refer to the array normal modes in
/// ascending frequency.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    /// Every single-excitation state `|1_k>`.
    Singles,
    /// The first excited fluxonium level `|1_φ>`.
    Fluxonium,
    /// `Π_k Â†_k|0>` over the listed modes (repeats allowed).
    Modes(Vec<usize>),
    /// Cross-Kerr between two array modes.
    Kerr([usize; 2]),
    /// Cross-Kerr between the fluxonium level and array mode `k ≥ 1`.
    KerrFluxonium(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PhiExt,
    Ng,
    Z,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json] }
    }
}

/// Command-line adjustments layered over the file.
#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub preset: Option<Preset>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub unbounded: bool,
}

/// How expensive the requested command is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// Normal modes only: any size.
    Analytic,
    /// DMRG runs: presets are cut to desk scale unless unbounded.
    Solver,
}

/// A validated configuration with its resolved circuit.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub params: CircuitParams,
    pub hash: String,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Applies flags, desk-scale cuts and overrides, validates, and hashes the
    /// effective configuration.
    pub fn resolve(mut self, flags: &Flags, scale: Scale) -> Result<Resolved, CliError> {
        if let Some(p) = flags.preset {
            self.preset = Some(p);
            self.params = None;
        }
        if let Some(out) = &flags.out {
            self.output.directory = out.clone();
        }
        if let Some(seed) = flags.seed {
            self.solver.seed = seed;
        }
        let base = match (&self.params, self.preset) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either params or preset, not both".into())),
            (Some(p), None) => p.clone(),
            (None, Some(p)) => {
                let mut params = p.params();
                if scale == Scale::Solver && !flags.unbounded && self.overrides.n_junctions.is_none() {
                    params = with_junctions(&params, params.n_junctions.min(DESK_JUNCTIONS));
                }
                params
            }
            (None, None) => return Err(CliError::Config("no circuit: set params or preset".into())),
        };
        let params = apply_overrides(&base, &self.overrides)?;
        let params = params.resolved().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(s) = &self.sweep {
            if s.points < MIN_SWEEP_POINTS {
                return Err(CliError::Config(format!("sweep needs at least {MIN_SWEEP_POINTS} points, got {}", s.points)));
            }
            if !(s.start.is_finite() && s.stop.is_finite()) {
                return Err(CliError::Config("sweep bounds must be finite".into()));
            }
        }
        if self.basis.d < 2 || self.basis.ncut < self.basis.d {
            return Err(CliError::Config(format!("basis needs 2 <= d <= ncut, got {:?}", self.basis)));
        }
        self.solver.solver_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if scale == Scale::Solver && !flags.unbounded {
            let n = params.n_junctions;
            if n > DESK_MAX_JUNCTIONS || self.solver.max_bond > DESK_MAX_BOND || self.basis.d > DESK_MAX_D {
                return Err(CliError::Config(format!(
                    "N_J={n}, D={}, d={} exceeds desk scale (N_J <= {DESK_MAX_JUNCTIONS}, D <= {DESK_MAX_BOND}, d <= {DESK_MAX_D}); pass --unbounded",
                    self.solver.max_bond, self.basis.d
                )));
            }
        }
        let hash = config_hash(&self, &params);
        Ok(Resolved { config: self, params, hash })
    }
}

/// Applies [`Overrides`] to `params`.
pub fn apply_overrides(params: &CircuitParams, o: &Overrides) -> Result<CircuitParams, CliError> {
    let mut p = match o.n_junctions {
        Some(0) => return Err(CliError::Config("n_junctions must be >= 1".into())),
        Some(n) => with_junctions(params, n),
        None => params.clone(),
    };
    if let Some(phi) = o.phi_ext {
        p.phi_ext = phi;
    }
    if let Some(ng) = o.ng {
        p.ng = vec![ng; p.n_junctions];
    }
    if let Some(z) = o.z {
        let omega_p = p.impedance.map_or(SET3_OMEGA_P, |i| i.omega_p);
        p.impedance = Some(Impedance { z, omega_p });
    }
    if let Some(ejb) = o.ej_blacksheep {
        p.ej_blacksheep = ejb;
    }
    Ok(p)
}

/// SHA-256 of the effective configuration and resolved circuit. The output
/// directory is left out.
pub fn config_hash(config: &RunConfig, params: &CircuitParams) -> String {
    let mut c = config.clone();
    c.output.directory = PathBuf::new();
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&c).expect("config serializes"));
    h.update(serde_json::to_vec(params).expect("params serialize"));
    hex::encode(h.finalize())
}
