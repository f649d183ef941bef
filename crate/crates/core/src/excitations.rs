//! Normal-mode creation MPOs and occupation-string trial states.

use std::fmt;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localbasis::LocalBasis;
use crate::normalmodes::NormalModeData;
use crate::tn::{Mpo, Mps, TruncationPolicy};

pub const MAX_EXCITATIONS: usize = 4;
const DEGENERATE_NORM: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OccupationString {
    pub l: Vec<usize>,
}

impl OccupationString {
    pub fn new(l: Vec<usize>) -> Result<Self> {
        let total: usize = l.iter().sum();
        if total > MAX_EXCITATIONS {
            return Err(Error::InvalidParams(format!("occupation string carries {total} excitations, limit {MAX_EXCITATIONS}")));
        }
        Ok(Self { l })
    }

    pub fn vacuum(n: usize) -> Self {
        Self { l: vec![0; n] }
    }

    pub fn single(n: usize, k: usize) -> Result<Self> {
        Self::from_modes(n, &[k])
    }

    /// One excitation per listed mode; repeated entries stack.
    pub fn from_modes(n: usize, modes: &[usize]) -> Result<Self> {
        let mut l = vec![0; n];
        for &k in modes {
            if k >= n {
                return Err(Error::InvalidParams(format!("mode {k} out of range for {n} modes")));
            }
            l[k] += 1;
        }
        Self::new(l)
    }

    pub fn total(&self) -> usize {
        self.l.iter().sum()
    }

    pub fn is_vacuum(&self) -> bool {
        self.total() == 0
    }
}

impl fmt::Display for OccupationString {
    /// `|0⟩` for the vacuum, otherwise `|1_0 2_3⟩`-style.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.l.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, c)| format!("{c}_{k}")).collect();
        if parts.is_empty() {
            write!(f, "|0>")
        } else {
            write!(f, "|{}>", parts.join(" "))
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialState {
    pub mps: Mps,
    pub label: OccupationString,
    pub reference_label: String,
    /// Summed relative discarded weight of all compressions during the build.
    pub build_discarded_weight: f64,
    /// Norm after each creation application, in application order.
    pub application_norms: Vec<(usize, f64)>,
}

fn check(nm: &NormalModeData, k: usize, bases: &[LocalBasis]) -> Result<()> {
    let n = nm.n();
    if k >= n {
        return Err(Error::InvalidParams(format!("mode {k} out of range for {n} modes")));
    }
    if bases.len() != n {
        return Err(Error::ShapeMismatch(format!("{} bases for {n} modes", bases.len())));
    }
    Ok(())
}

fn mode_mpo(nm: &NormalModeData, k: usize, bases: &[LocalBasis], creation: bool) -> Result<Mpo> {
    check(nm, k, bases)?;
    let ops: Vec<Mat<C64>> = bases
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let (a, c) = (nm.alpha[k][i], nm.beta[k][i]);
            let (x, y) = if creation { (a, c) } else { (c, a) };
            // x b† + y b
            Mat::from_fn(b.d, b.d, |r, s| C64::new(x * b.op_b[(s, r)] + y * b.op_b[(r, s)], 0.0))
        })
        .collect();
    Mpo::onsite_sum(&ops)
}

/// `Â†_k = Σ_i (α_ki b̂†_i + β_ki b̂_i)` as a bond-2 MPO.
pub fn creation_mpo(nm: &NormalModeData, k: usize, bases: &[LocalBasis]) -> Result<Mpo> {
    mode_mpo(nm, k, bases, true)
}

/// `Â_k = Σ_i (α_ki b̂_i + β_ki b̂†_i)`.
pub fn annihilation_mpo(nm: &NormalModeData, k: usize, bases: &[LocalBasis]) -> Result<Mpo> {
    mode_mpo(nm, k, bases, false)
}

/// Mode indices of `label` expanded by multiplicity, highest frequency first.
pub fn application_order(nm: &NormalModeData, label: &OccupationString) -> Vec<usize> {
    let mut modes: Vec<usize> = label.l.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c)).collect();
    modes.sort_by(|&a, &b| nm.omegas[b].total_cmp(&nm.omegas[a]).then(a.cmp(&b)));
    modes
}

/// `Π_k (Â†_k)^{l_k} |reference⟩`, normalized after every application.
pub fn build_trial(
    reference: &Mps,
    reference_label: &str,
    label: &OccupationString,
    nm: &NormalModeData,
    bases: &[LocalBasis],
    policy: &TruncationPolicy,
) -> Result<TrialState> {
    build_trial_ordered(reference, reference_label, label, &application_order(nm, label), nm, bases, policy)
}

/// As [`build_trial`] with an explicit application order, which must be a
/// permutation of the expanded label.
pub fn build_trial_ordered(
    reference: &Mps,
    reference_label: &str,
    label: &OccupationString,
    order: &[usize],
    nm: &NormalModeData,
    bases: &[LocalBasis],
    policy: &TruncationPolicy,
) -> Result<TrialState> {
    policy.validate()?;
    if label.l.len() != nm.n() || reference.len() != nm.n() {
        return Err(Error::ShapeMismatch("label, reference and normal modes disagree on N_J".into()));
    }
    let mut counts = vec![0usize; nm.n()];
    for &k in order {
        if k >= nm.n() {
            return Err(Error::InvalidParams(format!("mode {k} out of range")));
        }
        counts[k] += 1;
    }
    if counts != label.l {
        return Err(Error::InvalidParams("application order is not a permutation of the label".into()));
    }
    let rn = reference.norm();
    if (rn - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParams(format!("reference state not normalized (norm {rn})")));
    }
    let mut psi = reference.clone();
    let mut discarded = 0.0;
    let mut norms = Vec::with_capacity(order.len());
    for &k in order {
        let a = creation_mpo(nm, k, bases)?;
        let (next, w) = a.apply(&psi, policy)?;
        psi = next;
        discarded += w;
        let norm = psi.norm();
        norms.push((k, norm));
        if !(norm >= DEGENERATE_NORM) {
            return Err(Error::DegenerateTrial { mode: k, norm });
        }
        psi.normalize()?;
    }
    if discarded >= 1e-8 {
        log::warn!(target: "jja::excitations", "trial {label} discarded weight {discarded:.3e}");
    }
    Ok(TrialState { mps: psi, label: label.clone(), reference_label: reference_label.to_string(), build_discarded_weight: discarded, application_norms: norms })
}
