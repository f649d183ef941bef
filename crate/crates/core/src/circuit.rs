//! Device parameters and the reduced capacitance model of the array circuit.
//!
//! Energies are in GHz with ħ = 1. Capacitances are stored as reciprocal
//! charging energies (units of e²/2 per GHz), so a branch with charging energy
//! `E` contributes `1/E` to the node capacitance matrix and the charging energy
//! of a reduced coordinate is `[C̃⁻¹]_ii`.
//!
//! Topology: nodes `0..=N` joined by `N` array junctions `(i-1, i)`, the
//! black-sheep branch between nodes `0` and `N`, and a capacitance to ground on
//! every node.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Condition number above which the reduced capacitance inversion is flagged.
pub const CONDITION_WARN: f64 = 1e12;

/// Junction impedance parameterization: `√(8 E_C E_J) = ω_p` and
/// `√(8 E_C / E_J) = 2π z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Impedance {
    pub z: f64,
    pub omega_p: f64,
}

impl Impedance {
    /// `(E_J, E_C)` of an array junction with this impedance and plasma frequency.
    pub fn energies(&self) -> (f64, f64) {
        let tau = std::f64::consts::TAU;
        (self.omega_p / (tau * self.z), std::f64::consts::PI * self.z * self.omega_p / 4.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub n_junctions: usize,
    /// Per-junction Josephson energies `E^a_{J,i}`. May be empty when an
    /// impedance spec is given.
    #[serde(default)]
    pub ej_array: Vec<f64>,
    /// Array junction charging energy `E^a_C`; ignored when `impedance` is set.
    #[serde(default)]
    pub ec_array: f64,
    pub ej_blacksheep: f64,
    /// `None` removes the black-sheep capacitor.
    pub ec_blacksheep: Option<f64>,
    pub eg_array: f64,
    pub eg_left: f64,
    pub eg_right: f64,
    #[serde(default)]
    pub phi_ext: f64,
    /// Offset charges; empty means all zero.
    #[serde(default)]
    pub ng: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impedance: Option<Impedance>,
}

impl CircuitParams {
    /// Uniform array with identical junctions, no offset charges and no flux.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        n_junctions: usize,
        ej: f64,
        ec: f64,
        ej_blacksheep: f64,
        ec_blacksheep: Option<f64>,
        eg_array: f64,
        eg_left: f64,
        eg_right: f64,
    ) -> Self {
        Self {
            n_junctions,
            ej_array: vec![ej; n_junctions],
            ec_array: ec,
            ej_blacksheep,
            ec_blacksheep,
            eg_array,
            eg_left,
            eg_right,
            phi_ext: 0.0,
            ng: vec![0.0; n_junctions],
            impedance: None,
        }
    }

    /// Applies the impedance spec, fills defaults, reduces offset charges to
    /// `[0, 1)` and validates every energy.
    pub fn resolved(&self) -> Result<Self> {
        let n = self.n_junctions;
        if n == 0 {
            return Err(Error::InvalidParams("n_junctions must be >= 1".into()));
        }
        let mut p = self.clone();
        if let Some(imp) = self.impedance {
            if !(imp.z > 0.0 && imp.omega_p > 0.0) {
                return Err(Error::InvalidParams(format!("impedance spec must be positive: {imp:?}")));
            }
            let (ej, ec) = imp.energies();
            p.ej_array = vec![ej; n];
            p.ec_array = ec;
        }
        if p.ej_array.len() == 1 && n > 1 {
            p.ej_array = vec![p.ej_array[0]; n];
        }
        if p.ej_array.len() != n {
            return Err(Error::InvalidParams(format!(
                "ej_array has {} entries, expected {n}",
                p.ej_array.len()
            )));
        }
        if p.ng.is_empty() {
            p.ng = vec![0.0; n];
        }
        if p.ng.len() != n {
            return Err(Error::InvalidParams(format!("ng has {} entries, expected {n}", p.ng.len())));
        }
        for (i, &e) in p.ej_array.iter().enumerate() {
            positive(&format!("ej_array[{i}]"), e)?;
        }
        positive("ec_array", p.ec_array)?;
        if let Some(ecb) = p.ec_blacksheep {
            positive("ec_blacksheep", ecb)?;
        }
        if n > 1 {
            positive("eg_array", p.eg_array)?;
        }
        positive("eg_left", p.eg_left)?;
        positive("eg_right", p.eg_right)?;
        if !(p.ej_blacksheep >= 0.0 && p.ej_blacksheep.is_finite()) {
            return Err(Error::InvalidParams(format!("ej_blacksheep must be >= 0, got {}", p.ej_blacksheep)));
        }
        if !p.phi_ext.is_finite() {
            return Err(Error::InvalidParams("phi_ext must be finite".into()));
        }
        for x in p.ng.iter_mut() {
            if !x.is_finite() {
                return Err(Error::InvalidParams("offset charges must be finite".into()));
            }
            *x = reduce_offset(*x);
        }
        Ok(p)
    }
}

/// Reduces an offset charge to `[0, 1)`.
pub fn reduce_offset(ng: f64) -> f64 {
    let r = ng.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

// `+inf` is accepted and means "capacitor absent".
fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")))
    }
}

#[derive(Clone, Debug)]
pub struct CapacitanceModel {
    /// Node capacitance matrix `C̃_Φ`, `(N+1)×(N+1)`.
    pub c_node: Mat<f64>,
    /// Reduced junction-coordinate capacitance matrix `C̃`, `N×N`.
    pub c_reduced: Mat<f64>,
    /// `E_{C,i} = [C̃⁻¹]_ii`.
    pub ec: Vec<f64>,
    /// `g_ij = 4 [C̃⁻¹]_ij` for `i ≠ j`, zero diagonal.
    pub g: Mat<f64>,
    pub condition_number: f64,
}

impl CapacitanceModel {
    pub fn n(&self) -> usize {
        self.ec.len()
    }

    /// `C̃⁻¹` reassembled from `ec` and `g`.
    pub fn inverse_capacitance(&self) -> Mat<f64> {
        let n = self.n();
        Mat::from_fn(n, n, |i, j| if i == j { self.ec[i] } else { 0.25 * self.g[(i, j)] })
    }
}

pub fn build_node_capacitance(params: &CircuitParams) -> Result<Mat<f64>> {
    let p = params.resolved()?;
    let n = p.n_junctions;
    let mut c = Mat::<f64>::zeros(n + 1, n + 1);
    let branch = |c: &mut Mat<f64>, a: usize, b: usize, w: f64| {
        c[(a, a)] += w;
        c[(b, b)] += w;
        c[(a, b)] -= w;
        c[(b, a)] -= w;
    };
    let wa = 1.0 / p.ec_array;
    for i in 1..=n {
        branch(&mut c, i - 1, i, wa);
    }
    if let Some(ecb) = p.ec_blacksheep {
        if n >= 1 {
            branch(&mut c, 0, n, 1.0 / ecb);
        }
    }
    for i in 1..n {
        c[(i, i)] += 1.0 / p.eg_array;
    }
    c[(0, 0)] += 1.0 / p.eg_left;
    c[(n, n)] += 1.0 / p.eg_right;
    Ok(c)
}

/// Orientation of the junction coordinate: `Θ_i = s (Φ_i − Φ_{i−1})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Orientation {
    Forward,
    #[cfg_attr(not(test), allow(dead_code))]
    Backward,
}

/// Coordinate change `(Σ, Θ_1..Θ_N) = R Φ`.
pub(crate) fn coordinate_matrix(n: usize, orientation: Orientation) -> Mat<f64> {
    let s = match orientation {
        Orientation::Forward => 1.0,
        Orientation::Backward => -1.0,
    };
    let mut r = Mat::<f64>::zeros(n + 1, n + 1);
    for j in 0..=n {
        r[(0, j)] = 1.0;
    }
    for i in 1..=n {
        r[(i, i)] = s;
        r[(i, i - 1)] = -s;
    }
    r
}

/// `C_Θ = (Rᵀ)⁻¹ C_Φ R⁻¹` in the `(Σ, Θ)` basis.
pub(crate) fn sum_difference_capacitance(c_node: &Mat<f64>, orientation: Orientation) -> Result<Mat<f64>> {
    let n = c_node.nrows() - 1;
    let r = coordinate_matrix(n, orientation);
    let rinv = linalg::inverse(r.as_ref())?;
    Ok(linalg::symmetrize((rinv.transpose() * c_node * &rinv).as_ref()))
}

pub fn reduce_capacitance(c_node: &Mat<f64>) -> Result<CapacitanceModel> {
    reduce_with_orientation(c_node, Orientation::Forward)
}

pub(crate) fn reduce_with_orientation(c_node: &Mat<f64>, orientation: Orientation) -> Result<CapacitanceModel> {
    if c_node.nrows() != c_node.ncols() || c_node.nrows() < 2 {
        return Err(Error::Dimension(format!(
            "node capacitance must be square with at least 2 nodes, got {}x{}",
            c_node.nrows(),
            c_node.ncols()
        )));
    }
    let n = c_node.nrows() - 1;
    let ct = sum_difference_capacitance(c_node, orientation)?;
    let c_ss = ct[(0, 0)];
    let scale = (0..=n).map(|i| c_node[(i, i)].abs()).fold(0.0, f64::max);
    if !(c_ss > 1e-13 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::FreeModeNotRemovable);
    }
    // Schur complement of the Σ block.
    let c_red = Mat::from_fn(n, n, |i, j| ct[(i + 1, j + 1)] - ct[(0, i + 1)] * ct[(0, j + 1)] / c_ss);
    let c_red = linalg::symmetrize(c_red.as_ref());
    let (inv, cond) = linalg::spd_inverse(c_red.as_ref())?;
    if cond > CONDITION_WARN {
        log::warn!("reduced capacitance matrix is ill-conditioned: condition number {cond:.3e}");
    }
    let ec = (0..n).map(|i| inv[(i, i)]).collect();
    let g = Mat::from_fn(n, n, |i, j| if i == j { 0.0 } else { 4.0 * inv[(i, j)] });
    Ok(CapacitanceModel { c_node: c_node.clone(), c_reduced: c_red, ec, g, condition_number: cond })
}

/// Builds the full reduced model from device parameters.
pub fn capacitance_model(params: &CircuitParams) -> Result<CapacitanceModel> {
    reduce_capacitance(&build_node_capacitance(params)?)
}
