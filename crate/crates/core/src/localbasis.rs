//! Per-junction truncated eigenbasis of `4E_C(n̂ − n_g)² − E_J cos θ̂`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::circuit::{reduce_offset, CapacitanceModel, CircuitParams};
use crate::error::{Error, Result};
use crate::linalg;

pub const DEFAULT_NCUT: usize = 30;
pub const MAX_NCUT: usize = 60;
const NCUT_STEP: usize = 5;
const CUTOFF_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisConfig {
    pub ncut: usize,
    pub d: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { ncut: DEFAULT_NCUT, d: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub site_index: usize,
    pub d: usize,
    /// Lowest `d` eigenvalues, ascending (GHz).
    pub energies: Vec<f64>,
    /// `⟨ψ_k|n̂ − n_g|ψ_k'⟩`.
    pub op_n: Mat<f64>,
    /// `⟨ψ_k|e^{iθ̂}|ψ_k'⟩`, real because the charge-basis eigenvectors are real.
    pub op_expitheta: Mat<f64>,
    pub op_b: Mat<f64>,
    /// Charge cutoff actually used after escalation.
    pub ncut: usize,
}

impl LocalBasis {
    pub fn hamiltonian(&self) -> Mat<f64> {
        Mat::from_fn(self.d, self.d, |i, j| if i == j { self.energies[i] } else { 0.0 })
    }
}

fn charge_hamiltonian(ec: f64, ej: f64, ng: f64, ncut: usize) -> Mat<f64> {
    let dim = 2 * ncut + 1;
    Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            let m = i as f64 - ncut as f64;
            4.0 * ec * (m - ng) * (m - ng)
        } else if i.abs_diff(j) == 1 {
            -0.5 * ej
        } else {
            0.0
        }
    })
}

fn lowest(ec: f64, ej: f64, ng: f64, ncut: usize, d: usize) -> Result<(Vec<f64>, Mat<f64>)> {
    let (vals, vecs) = linalg::sym_eigh(charge_hamiltonian(ec, ej, ng, ncut).as_ref())?;
    Ok((vals[..d].to_vec(), vecs.get(.., ..d).to_owned()))
}

/// Diagonalizes one junction in the charge basis `m ∈ [−ncut, ncut]` and
/// projects `n̂ − n_g` and `e^{iθ̂} = Σ_m |m+1⟩⟨m|` onto the lowest `d` states.
///
/// The cutoff is raised in steps of 5 up to [`MAX_NCUT`] until the `d`-th
/// eigenvalue moves by less than 1e-10 GHz.
pub fn diagonalize_transmon(ec: f64, ej: f64, ng: f64, ncut: usize, d: usize) -> Result<LocalBasis> {
    if d == 0 || d > 2 * ncut + 1 {
        return Err(Error::Dimension(format!("d = {d} must satisfy 1 <= d <= 2*ncut+1 = {}", 2 * ncut + 1)));
    }
    if !(ec > 0.0 && ej >= 0.0 && ec.is_finite() && ej.is_finite()) {
        return Err(Error::InvalidParams(format!("transmon energies must satisfy E_C > 0, E_J >= 0 (got {ec}, {ej})")));
    }
    let ng = reduce_offset(ng);
    let mut cut = ncut;
    let (mut vals, mut vecs) = lowest(ec, ej, ng, cut, d)?;
    loop {
        let next = cut + NCUT_STEP;
        let (nv, nvec) = lowest(ec, ej, ng, next, d)?;
        let delta = (nv[d - 1] - vals[d - 1]).abs();
        if delta < CUTOFF_TOL {
            break;
        }
        if next > MAX_NCUT {
            return Err(Error::Convergence(format!(
                "charge cutoff did not converge by ncut = {MAX_NCUT} (last change {delta:.3e} GHz)"
            )));
        }
        cut = next;
        vals = nv;
        vecs = nvec;
    }
    let dim = 2 * cut + 1;
    // Gauge: the largest-magnitude component of each eigenvector is positive.
    for k in 0..d {
        let mut best = 0;
        for m in 0..dim {
            if vecs[(m, k)].abs() > vecs[(best, k)].abs() + 1e-12 {
                best = m;
            }
        }
        if vecs[(best, k)] < 0.0 {
            for m in 0..dim {
                vecs[(m, k)] = -vecs[(m, k)];
            }
        }
    }
    let charge = Mat::from_fn(dim, dim, |i, j| if i == j { i as f64 - cut as f64 - ng } else { 0.0 });
    let shift = Mat::from_fn(dim, dim, |i, j| if i == j + 1 { 1.0 } else { 0.0 });
    let project = |op: &Mat<f64>| vecs.transpose() * op * &vecs;
    let op_n = linalg::symmetrize(project(&charge).as_ref());
    let op_expitheta = project(&shift);
    Ok(LocalBasis {
        site_index: 0,
        d,
        energies: vals,
        op_n,
        op_expitheta,
        op_b: ladder(d),
        ncut: cut,
    })
}

fn ladder(d: usize) -> Mat<f64> {
    Mat::from_fn(d, d, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

/// `b̂ = Σ_{k=1}^{d−1} √k |ψ_{k−1}⟩⟨ψ_k|`.
pub fn ladder_matrix(basis: &LocalBasis) -> Mat<f64> {
    ladder(basis.d)
}

/// One basis per junction, using `E_{C,i}` from the reduced model, the
/// junction's `E_J` and its offset charge. Identical junctions share one
/// diagonalization.
pub fn build_bases(params: &CircuitParams, model: &CapacitanceModel, cfg: BasisConfig) -> Result<Vec<LocalBasis>> {
    let p = params.resolved()?;
    let n = p.n_junctions;
    if model.n() != n {
        return Err(Error::ShapeMismatch(format!("model has {} junctions, params {n}", model.n())));
    }
    let mut out: Vec<LocalBasis> = Vec::with_capacity(n);
    let mut cache: Vec<((u64, u64, u64), LocalBasis)> = Vec::new();
    for i in 0..n {
        let key = (model.ec[i].to_bits(), p.ej_array[i].to_bits(), p.ng[i].to_bits());
        let mut basis = match cache.iter().find(|(k, _)| *k == key) {
            Some((_, b)) => b.clone(),
            None => {
                let b = diagonalize_transmon(model.ec[i], p.ej_array[i], p.ng[i], cfg.ncut, cfg.d)?;
                cache.push((key, b.clone()));
                b
            }
        };
        basis.site_index = i;
        out.push(basis);
    }
    Ok(out)
}
