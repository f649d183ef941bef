//! Circuit Hamiltonian as a compressed MPO in the local transmon eigenbases.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{CapacitanceModel, CircuitParams};
use crate::error::{Error, Result};
use crate::linalg;
use crate::localbasis::LocalBasis;
use crate::tn::{CompressionReport, Mpo, Tensor, TruncationPolicy};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BondReport {
    pub onsite: usize,
    pub charge_coupling: usize,
    /// Largest bond seen while accumulating the coupling terms.
    pub charge_coupling_peak: usize,
    pub blacksheep: usize,
    pub total: usize,
    pub discarded_weight: f64,
}

#[derive(Clone, Debug)]
pub struct HamiltonianMpo {
    pub mpo: Mpo,
    pub onsite: Mpo,
    pub charge_coupling: Mpo,
    pub blacksheep: Mpo,
    pub bond_report: BondReport,
    pub phi_ext: f64,
}

impl HamiltonianMpo {
    pub fn phys_dims(&self) -> Vec<usize> {
        self.mpo.phys_dims()
    }
}

fn dims(bases: &[LocalBasis]) -> Vec<usize> {
    bases.iter().map(|b| b.d).collect()
}

fn real_op(m: &Mat<f64>) -> Mat<C64> {
    linalg::to_complex(m.as_ref())
}

/// `Σ_i Ĥ_{0,i}` with `Ĥ_{0,i} = diag(E_k^{(i)})`; bond 2.
pub fn build_onsite(bases: &[LocalBasis]) -> Result<Mpo> {
    let ops: Vec<Mat<C64>> = bases.iter().map(|b| real_op(&b.hamiltonian())).collect();
    let mut m = Mpo::onsite_sum(&ops)?;
    m.set_hermitian(true);
    Ok(m)
}

/// `ñ_i Σ_{j>i} c_j ñ_j` as an MPO with bond at most 2.
fn pair_row(bases: &[LocalBasis], i: usize, coeffs: &[f64]) -> Result<Mpo> {
    let n = bases.len();
    let mut tensors = Vec::with_capacity(n);
    for (k, b) in bases.iter().enumerate() {
        let d = b.d;
        let nk = &b.op_n;
        let id = |p: usize, q: usize| if p == q { ONE } else { ZERO };
        let t = if k < i {
            Tensor::from_fn(&[1, d, d, 1], |ix| id(ix[1], ix[2]))
        } else if k == i {
            Tensor::from_fn(&[1, d, d, 1], |ix| C64::new(nk[(ix[1], ix[2])], 0.0))
        } else {
            // channel 0: open (waiting for the partner), channel 1: closed
            let c = coeffs[k];
            let left = if k == i + 1 { 1 } else { 2 };
            let right = if k == n - 1 { 1 } else { 2 };
            Tensor::from_fn(&[left, d, d, right], |ix| {
                let (a, o, p, r) = (ix[0], ix[1], ix[2], ix[3]);
                if right == 1 {
                    match a {
                        0 => C64::new(c * nk[(o, p)], 0.0),
                        _ => id(o, p),
                    }
                } else {
                    match (a, r) {
                        (0, 0) | (1, 1) => id(o, p),
                        (0, 1) => C64::new(c * nk[(o, p)], 0.0),
                        _ => ZERO,
                    }
                }
            })
        };
        tensors.push(t);
    }
    Mpo::from_tensors(tensors, false)
}

fn check_coupling(bases: &[LocalBasis], model: &CapacitanceModel) -> Result<()> {
    let n = bases.len();
    if model.n() != n {
        return Err(Error::ShapeMismatch(format!("model has {} junctions, bases {n}", model.n())));
    }
    for i in 0..n {
        if model.g[(i, i)] != 0.0 {
            return Err(Error::InvalidParams("coupling matrix must have zero diagonal".into()));
        }
        for j in 0..n {
            if (model.g[(i, j)] - model.g[(j, i)]).abs() > 1e-12 * model.g[(i, j)].abs().max(1e-300) {
                return Err(Error::InvalidParams("coupling matrix must be symmetric".into()));
            }
        }
    }
    Ok(())
}

/// `Σ_{i≠j} g_ij ñ_i ñ_j` with `ñ = n̂ − n_g` in the local eigenbasis. Rows
/// `ñ_i Σ_{j>i} 2g_ij ñ_j` are added one at a time and compressed after
/// each addition, so memory stays proportional to the final bond.
pub fn build_charge_coupling(bases: &[LocalBasis], model: &CapacitanceModel, policy: &TruncationPolicy) -> Result<(Mpo, CompressionReport)> {
    check_coupling(bases, model)?;
    let n = bases.len();
    let d = dims(bases);
    let mut acc = Mpo::zero(&d);
    let mut peak = 1;
    let mut discarded = 0.0;
    for i in 0..n.saturating_sub(1) {
        let coeffs: Vec<f64> = (0..n).map(|j| if j > i { 2.0 * model.g[(i, j)] } else { 0.0 }).collect();
        if coeffs.iter().all(|&c| c == 0.0) {
            continue;
        }
        let row = pair_row(bases, i, &coeffs)?;
        acc = Mpo::sum(&acc, &row)?;
        peak = peak.max(acc.max_bond());
        discarded += acc.compress(policy)?.discarded_weight;
    }
    acc.set_hermitian(true);
    let bonds = acc.bond_dims();
    Ok((acc, CompressionReport { bonds_before: vec![peak], bonds_after: bonds, discarded_weight: discarded }))
}

/// The same operator with every row summed and no compression; the bond at
/// cut `k` is at most `k + 2 ≤ 2N`. Meant for small instances.
pub fn build_charge_coupling_uncompressed(bases: &[LocalBasis], model: &CapacitanceModel) -> Result<Mpo> {
    check_coupling(bases, model)?;
    let n = bases.len();
    let mut acc: Option<Mpo> = None;
    for i in 0..n.saturating_sub(1) {
        let coeffs: Vec<f64> = (0..n).map(|j| if j > i { 2.0 * model.g[(i, j)] } else { 0.0 }).collect();
        let row = pair_row(bases, i, &coeffs)?;
        acc = Some(match acc {
            None => row,
            Some(a) => Mpo::sum(&a, &row)?,
        });
    }
    let mut m = acc.unwrap_or_else(|| Mpo::zero(&dims(bases)));
    m.set_hermitian(true);
    Ok(m)
}

/// `−(E^b_J/2)[e^{iφ_ext}∏_j e^{iθ̂_j} + h.c.]`; bond 2, zero MPO when `ejb = 0`.
pub fn build_blacksheep(bases: &[LocalBasis], ejb: f64, phi_ext: f64) -> Result<Mpo> {
    if !(ejb >= 0.0) {
        return Err(Error::InvalidParams(format!("ej_blacksheep must be >= 0, got {ejb}")));
    }
    let d = dims(bases);
    if ejb == 0.0 {
        return Ok(Mpo::zero(&d));
    }
    let fwd: Vec<(usize, Mat<C64>)> = bases.iter().enumerate().map(|(i, b)| (i, real_op(&b.op_expitheta))).collect();
    let bwd: Vec<(usize, Mat<C64>)> = bases
        .iter()
        .enumerate()
        .map(|(i, b)| (i, real_op(&b.op_expitheta.transpose().to_owned())))
        .collect();
    let up = Mpo::product_of_locals(&d, &fwd)?;
    let down = Mpo::product_of_locals(&d, &bwd)?;
    let ph = C64::from_polar(1.0, phi_ext);
    let mut m = Mpo::lincomb(ph * (-0.5 * ejb), &up, ph.conj() * (-0.5 * ejb), &down)?;
    m.set_hermitian(true);
    Ok(m)
}

/// Sum of the three parts, compressed under `policy`.
pub fn build_hamiltonian(
    params: &CircuitParams,
    model: &CapacitanceModel,
    bases: &[LocalBasis],
    policy: &TruncationPolicy,
) -> Result<HamiltonianMpo> {
    let p = params.resolved()?;
    if bases.len() != p.n_junctions {
        return Err(Error::ShapeMismatch(format!("{} bases for {} junctions", bases.len(), p.n_junctions)));
    }
    let onsite = build_onsite(bases)?;
    let (cc, cc_report) = build_charge_coupling(bases, model, policy)?;
    let bs = build_blacksheep(bases, p.ej_blacksheep, p.phi_ext)?;
    let mut total = Mpo::sum(&Mpo::sum(&onsite, &cc)?, &bs)?;
    let rep = total.compress(policy)?;
    total.set_hermitian(true);
    let bond_report = BondReport {
        onsite: onsite.max_bond(),
        charge_coupling: cc.max_bond(),
        charge_coupling_peak: cc_report.max_before(),
        blacksheep: if p.ej_blacksheep == 0.0 { 0 } else { bs.max_bond() },
        total: total.max_bond(),
        discarded_weight: rep.discarded_weight + cc_report.discarded_weight,
    };
    log::debug!(target: "jja::ham_mpo", "bond report {bond_report:?}");
    Ok(HamiltonianMpo { mpo: total, onsite, charge_coupling: cc, blacksheep: bs, bond_report, phi_ext: p.phi_ext })
}
