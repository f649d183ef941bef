//! Bundled device parameter sets.

use jja_core::{CircuitParams, Impedance};
use serde::{Deserialize, Serialize};

/// Plasma frequency of the impedance-parameterized set (GHz).
pub const SET3_OMEGA_P: f64 = 12.5;
/// Array junction impedance `Z/R_Q` used for set 3 unless overridden.
pub const SET3_DEFAULT_Z: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// LC resonator, 80 junctions.
    Set1,
    /// Fluxonium, 43 junctions.
    Set2,
    /// Fluxonium, 40 junctions, array set by impedance.
    Set3,
    /// Fluxonium, 95 junctions.
    Set4,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Set1, Preset::Set2, Preset::Set3, Preset::Set4];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Set1 => "set1",
            Preset::Set2 => "set2",
            Preset::Set3 => "set3",
            Preset::Set4 => "set4",
        }
    }

    pub fn params(self) -> CircuitParams {
        match self {
            Preset::Set1 => CircuitParams::uniform(80, 84.3, 0.483, 0.0, Some(6.07), 170.0, 3.45, 5.91),
            Preset::Set2 => CircuitParams::uniform(43, 26.0, 1.24, 8.93, Some(3.60), 194.0, 4.80, 4.80),
            Preset::Set3 => {
                let imp = Impedance { z: SET3_DEFAULT_Z, omega_p: SET3_OMEGA_P };
                let (ej, ec) = imp.energies();
                CircuitParams { impedance: Some(imp), ..CircuitParams::uniform(40, ej, ec, 8.9, Some(2.58), 194.0, 194.0, 194.0) }
            }
            Preset::Set4 => CircuitParams::uniform(95, 48.3, 1.01, 10.2, Some(4.78), 484.0, 11.9, 11.9),
        }
    }
}

/// `params` with the array cut to `n` junctions; per-junction energies and
/// boundary capacitances are kept.
pub fn with_junctions(params: &CircuitParams, n: usize) -> CircuitParams {
    let pick = |v: &[f64]| -> Vec<f64> {
        match v.len() {
            0 => Vec::new(),
            1 => vec![v[0]; n],
            _ => (0..n).map(|i| v[i.min(v.len() - 1)]).collect(),
        }
    };
    CircuitParams { n_junctions: n, ej_array: pick(&params.ej_array), ng: pick(&params.ng), ..params.clone() }
}
