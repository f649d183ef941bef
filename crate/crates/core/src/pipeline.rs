//! End-to-end runs on one circuit: Hamiltonian MPO, normal modes, ground
//! state, trial-targeted excitations and Kerr combinations.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::circuit::{capacitance_model, CapacitanceModel, CircuitParams};
use crate::error::{Error, Result};
use crate::excitations::{build_trial, OccupationString};
use crate::ham_mpo::{build_hamiltonian, HamiltonianMpo};
use crate::kerr::{walsh_hadamard_chi, KerrResult};
use crate::localbasis::{build_bases, BasisConfig, LocalBasis};
use crate::normalmodes::{normal_modes, NormalModeData};
use crate::oracle::dense_hamiltonian;
use crate::solver::{dmrg_excited_orthogonal, dmrg_ground, dmrgx, ground_initial_state, SolverConfig, SpectralRecord};
use crate::tn::{Mps, TruncationPolicy};

pub const GROUND_LABEL: &str = "ground";
pub const FLUXONIUM_LABEL: &str = "fluxonium-excited";

#[derive(Clone, Debug)]
pub struct Instance {
    pub params: CircuitParams,
    pub model: CapacitanceModel,
    pub bases: Vec<LocalBasis>,
    pub hamiltonian: HamiltonianMpo,
    pub normal_modes: NormalModeData,
}

impl Instance {
    pub fn new(params: &CircuitParams, basis: BasisConfig) -> Result<Self> {
        let params = params.resolved()?;
        let model = capacitance_model(&params)?;
        let bases = build_bases(&params, &model, basis)?;
        let hamiltonian = build_hamiltonian(&params, &model, &bases, &TruncationPolicy::operator())?;
        let normal_modes = normal_modes(&params, &model)?;
        Ok(Self { params, model, bases, hamiltonian, normal_modes })
    }

    pub fn n(&self) -> usize {
        self.bases.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.hamiltonian.phys_dims()
    }

    pub fn dense_hamiltonian(&self) -> Result<Mat<C64>> {
        dense_hamiltonian(&self.params, &self.model, &self.bases)
    }
}

/// A converged (or best-effort) eigenstate with its record.
#[derive(Clone, Debug)]
pub struct Eigenstate {
    pub mps: Mps,
    pub record: SpectralRecord,
}

/// Record label for an occupation string built on `reference`: `|0>`,
/// `|1_2>`, `|1_φ>` or `|1_φ 1_2>`.
pub fn compose_label(reference: &str, occ: &OccupationString) -> String {
    let mut parts: Vec<String> = Vec::new();
    if reference == FLUXONIUM_LABEL {
        parts.push("1_φ".into());
    }
    parts.extend(occ.l.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, c)| format!("{c}_{k}")));
    if parts.is_empty() {
        "|0>".into()
    } else {
        format!("|{}>", parts.join(" "))
    }
}

pub fn solve_ground(inst: &Instance, cfg: &SolverConfig) -> Result<Eigenstate> {
    let init = ground_initial_state(&inst.dims(), cfg.seed)?;
    let (mps, mut record) = dmrg_ground(&inst.hamiltonian.mpo, &init, cfg)?;
    record.label = "|0>".into();
    Ok(Eigenstate { mps, record })
}

/// Lowest state orthogonal to the ground state, taken as the first excited
/// fluxonium level.
pub fn solve_fluxonium_excited(inst: &Instance, ground: &Eigenstate, cfg: &SolverConfig) -> Result<Eigenstate> {
    let init = Mps::random(&inst.dims(), 4, cfg.seed.wrapping_add(1))?;
    let (mps, mut record) = dmrg_excited_orthogonal(&inst.hamiltonian.mpo, std::slice::from_ref(&ground.mps), &init, cfg)?;
    record.label = "|1_φ>".into();
    Ok(Eigenstate { mps, record })
}

/// DMRG-X from `Π(Â†_k)^{l_k}|reference⟩`.
pub fn solve_excitation(inst: &Instance, reference: &Eigenstate, reference_label: &str, occ: &OccupationString, cfg: &SolverConfig) -> Result<Eigenstate> {
    let trial = build_trial(&reference.mps, reference_label, occ, &inst.normal_modes, &inst.bases, &cfg.policy())?;
    let label = compose_label(reference_label, occ);
    let (mps, record) = dmrgx(&inst.hamiltonian.mpo, &trial.mps, &label, cfg)?;
    Ok(Eigenstate { mps, record })
}

/// The `count` occupation strings of lowest harmonic energy `Σ l_k ω_k`,
/// excluding the vacuum, with at most `max_total` quanta. `skip` lists modes
/// left out (for instance a mode treated separately as the fluxonium).
pub fn lowest_strings(nm: &NormalModeData, count: usize, max_total: usize, skip: &[usize]) -> Result<Vec<OccupationString>> {
    let n = nm.n();
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, skip: &[usize], out: &mut Vec<(f64, Vec<usize>)>, w: &[f64]) {
        if k == cur.len() {
            if cur.iter().any(|&c| c > 0) {
                out.push((cur.iter().zip(w).map(|(&c, &x)| c as f64 * x).sum(), cur.clone()));
            }
            return;
        }
        let top = if skip.contains(&k) { 0 } else { left };
        for c in 0..=top {
            cur[k] = c;
            rec(k + 1, left - c, cur, skip, out, w);
        }
        cur[k] = 0;
    }
    rec(0, max_total.min(crate::excitations::MAX_EXCITATIONS), &mut cur, skip, &mut out, &nm.omegas);
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out.into_iter().take(count).map(|(_, l)| OccupationString::new(l)).collect()
}

/// The four records of a Walsh–Hadamard combination and the result.
#[derive(Clone, Debug)]
pub struct KerrRun {
    pub result: KerrResult,
    pub records: [SpectralRecord; 4],
}

/// `χ_jk` between normal modes from DMRG-X on `|1_j⟩`, `|1_k⟩`, `|1_j1_k⟩`.
pub fn kerr_modes(inst: &Instance, ground: &Eigenstate, j: usize, k: usize, cfg: &SolverConfig) -> Result<KerrRun> {
    let n = inst.n();
    if j == k || j >= n || k >= n {
        return Err(Error::InvalidParams(format!("mode pair ({j}, {k}) invalid for {n} modes")));
    }
    let s = |modes: &[usize]| -> Result<Eigenstate> { solve_excitation(inst, ground, GROUND_LABEL, &OccupationString::from_modes(n, modes)?, cfg) };
    let (a, b, ab) = (s(&[j])?, s(&[k])?, s(&[j, k])?);
    let result = walsh_hadamard_chi(&ground.record, &a.record, &b.record, &ab.record)?;
    Ok(KerrRun { result, records: [ground.record.clone(), a.record, b.record, ab.record] })
}

/// `χ_φk` between the fluxonium level and normal mode `k`; the joint state is
/// targeted from `Â†_k|1_φ⟩`.
pub fn kerr_fluxonium(inst: &Instance, ground: &Eigenstate, flux: &Eigenstate, k: usize, cfg: &SolverConfig) -> Result<KerrRun> {
    let n = inst.n();
    let occ = OccupationString::single(n, k)?;
    let a = solve_excitation(inst, ground, GROUND_LABEL, &occ, cfg)?;
    let ab = solve_excitation(inst, flux, FLUXONIUM_LABEL, &occ, cfg)?;
    let result = walsh_hadamard_chi(&ground.record, &flux.record, &a.record, &ab.record)?;
    Ok(KerrRun { result, records: [ground.record.clone(), flux.record.clone(), a.record, ab.record] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        let occ = OccupationString::from_modes(4, &[2]).unwrap();
        assert_eq!(compose_label(GROUND_LABEL, &occ), "|1_2>");
        assert_eq!(compose_label(FLUXONIUM_LABEL, &occ), "|1_φ 1_2>");
        assert_eq!(compose_label(FLUXONIUM_LABEL, &OccupationString::vacuum(4)), "|1_φ>");
        assert_eq!(compose_label(GROUND_LABEL, &OccupationString::vacuum(4)), "|0>");
    }

    #[test]
    fn strings_sorted_by_harmonic_energy() {
        let p = CircuitParams::uniform(3, 20.0, 0.5, 0.0, None, 40.0, 6.0, 9.0);
        let nm = normal_modes(&p, &capacitance_model(&p).unwrap()).unwrap();
        let s = lowest_strings(&nm, 6, 2, &[]).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s[0].l, vec![1, 0, 0]);
        let e = |o: &OccupationString| o.l.iter().zip(&nm.omegas).map(|(&c, w)| c as f64 * w).sum::<f64>();
        for w in s.windows(2) {
            assert!(e(&w[0]) <= e(&w[1]));
        }
        let skipped = lowest_strings(&nm, 3, 1, &[0]).unwrap();
        assert!(skipped.iter().all(|o| o.l[0] == 0));
        assert_eq!(skipped.len(), 2);
    }
}
