//! Cross-Kerr couplings: Walsh–Hadamard combination of converged energies,
//! first-order estimates and the fluxonium star-model reduced diagonalization.

use std::collections::BTreeMap;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitParams;
use crate::error::{Error, Result};
use crate::linalg;
use crate::normalmodes::{kerr_first_order, symplectic_diagonalize, NormalModeData, QuadraticForm, SymplecticModes};
use crate::solver::SpectralRecord;

const TRACKING_AMBIGUITY: f64 = 1e-3;
const COS_PADDING: usize = 40;
const MAX_FLUX_LEVELS: usize = 120;
const LEVEL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KerrMethod {
    Dmrgx,
    Pert1,
    Pert2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerrResult {
    pub i: String,
    pub j: String,
    /// GHz.
    pub chi: f64,
    /// `[E(1_i1_j), E(1_i0_j), E(0_i1_j)]` relative to the ground energy (GHz).
    pub energies: [f64; 3],
    pub method: KerrMethod,
    pub sigma_bound: f64,
    /// Set when dressed-state tracking was ambiguous.
    pub flagged: bool,
}

fn wh(e11: f64, e10: f64, e01: f64) -> f64 {
    0.5 * (e11 - e10 - e01)
}

/// Excitation multiset of a label such as `|1_0 1_3>`, `|1_φ 1_2>` or `|0>`.
pub fn parse_label(label: &str) -> Result<BTreeMap<String, usize>> {
    let inner = label
        .trim()
        .strip_prefix('|')
        .and_then(|s| s.strip_suffix('>'))
        .ok_or_else(|| Error::LabelMismatch(format!("unparseable label {label:?}")))?;
    let mut out = BTreeMap::new();
    if inner.trim() == "0" {
        return Ok(out);
    }
    for tok in inner.split_whitespace() {
        let (c, m) = tok.split_once('_').ok_or_else(|| Error::LabelMismatch(format!("bad token {tok:?} in {label:?}")))?;
        let c: usize = c.parse().map_err(|_| Error::LabelMismatch(format!("bad count in {tok:?}")))?;
        if c > 0 {
            *out.entry(m.to_string()).or_insert(0) += c;
        }
    }
    Ok(out)
}

/// `χ_ij = ½[E(1_i1_j) − E(1_i0_j) − E(0_i1_j)]` with energies relative to
/// `ground`; the bound adds the four σ values linearly.
pub fn walsh_hadamard_chi(ground: &SpectralRecord, r10: &SpectralRecord, r01: &SpectralRecord, r11: &SpectralRecord) -> Result<KerrResult> {
    let (l0, l10, l01, l11) = (parse_label(&ground.label)?, parse_label(&r10.label)?, parse_label(&r01.label)?, parse_label(&r11.label)?);
    let single = |l: &BTreeMap<String, usize>, name: &str| -> Result<String> {
        if l.len() == 1 && l.values().all(|&c| c == 1) {
            Ok(l.keys().next().cloned().unwrap_or_default())
        } else {
            Err(Error::LabelMismatch(format!("{name} record must carry exactly one excitation")))
        }
    };
    if !l0.is_empty() {
        return Err(Error::LabelMismatch(format!("ground record labelled {:?}", ground.label)));
    }
    let (i, j) = (single(&l10, "first")?, single(&l01, "second")?);
    if i == j {
        return Err(Error::LabelMismatch(format!("both single-excitation records are mode {i}")));
    }
    let want: BTreeMap<String, usize> = [(i.clone(), 1), (j.clone(), 1)].into_iter().collect();
    if l11 != want {
        return Err(Error::LabelMismatch(format!("joint record {:?} is not 1_{i} 1_{j}", r11.label)));
    }
    for r in [ground, r10, r01, r11] {
        if !r.converged {
            return Err(Error::Unconverged(format!("record {} not converged (σ = {:.3e})", r.label, r.sigma)));
        }
    }
    let e0 = ground.energy;
    let energies = [r11.energy - e0, r10.energy - e0, r01.energy - e0];
    Ok(KerrResult {
        i,
        j,
        chi: wh(energies[0], energies[1], energies[2]),
        energies,
        method: KerrMethod::Dmrgx,
        sigma_bound: 0.5 * (ground.sigma + r10.sigma + r01.sigma + r11.sigma),
        flagged: false,
    })
}

/// First-order estimate for normal modes `j ≠ k`.
pub fn pert1_chi(nm: &NormalModeData, j: usize, k: usize) -> Result<KerrResult> {
    let n = nm.n();
    if j >= n || k >= n || j == k {
        return Err(Error::InvalidParams(format!("mode pair ({j}, {k}) invalid for {n} modes")));
    }
    let chi = kerr_first_order(nm, &nm.ej)[(j, k)];
    let (wj, wk) = (nm.omegas[j], nm.omegas[k]);
    Ok(KerrResult { i: j.to_string(), j: k.to_string(), chi, energies: [wj + wk + 2.0 * chi, wj, wk], method: KerrMethod::Pert1, sigma_bound: 0.0, flagged: false })
}

/// Fluxonium coordinate `φ = Σθ` coupled to the remaining array modes.
#[derive(Clone, Debug)]
pub struct StarModel {
    pub ec_phi: f64,
    pub e_l: f64,
    /// Inductive energy of `φ` after eliminating the array flux couplings,
    /// equal to `[Σ_i 1/K_ii]^{−1}`.
    pub e_l_series: f64,
    pub ejb: f64,
    pub phi_ext: f64,
    /// Array-sector frequencies, ascending (GHz).
    pub omegas: Vec<f64>,
    /// `g̃_φk` multiplying `n̂_φ â_k` (GHz).
    pub g_tilde: Vec<C64>,
    /// Charge couplings `g^{(n)}_φj` in the unrotated array coordinates.
    pub charge_couplings: Vec<f64>,
    /// Flux couplings `g^{(φ)}_φj`, dropped from the star Hamiltonian.
    pub flux_couplings: Vec<f64>,
    pub b: Mat<f64>,
    /// Transformed blocks `K′ = B^{−T}KB^{−1}`, `G′ = BGBᵀ`.
    pub k_prime: Mat<f64>,
    pub g_prime: Mat<f64>,
    pub xi_modes: SymplecticModes,
}

impl StarModel {
    pub fn n_modes(&self) -> usize {
        self.omegas.len()
    }

    pub fn fluxonium_harmonic_frequency(&self) -> f64 {
        (8.0 * self.ec_phi * self.e_l).sqrt()
    }

    pub fn max_flux_coupling(&self) -> f64 {
        self.flux_couplings.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// The same star model with a different external flux.
    pub fn with_phi_ext(&self, phi_ext: f64) -> Self {
        Self { phi_ext, ..self.clone() }
    }
}

/// Replaces the fundamental row of the array normal-mode matrix by ones and
/// conjugates the linearized form by `diag(B, B^{−T})`.
pub fn build_star_model(params: &CircuitParams, nm: &NormalModeData) -> Result<StarModel> {
    let p = params.resolved()?;
    let n = nm.n();
    if n < 2 {
        return Err(Error::InvalidParams("star model needs at least two junctions".into()));
    }
    let form = nm.form();
    let modes = symplectic_diagonalize(&form)?;
    let b = Mat::from_fn(n, n, |r, c| if r == 0 { 1.0 } else { modes.c[(r, c)] });
    let b_inv = linalg::inverse(b.as_ref()).map_err(|e| Error::Singular(format!("star transform B: {e}")))?;
    let k_prime = linalg::symmetrize((b_inv.transpose() * &form.k * &b_inv).as_ref());
    let g_prime = linalg::symmetrize((&b * &form.g * b.transpose()).as_ref());
    let m = n - 1;
    let xi = QuadraticForm { k: k_prime.get(1.., 1..).to_owned(), g: g_prime.get(1.., 1..).to_owned() };
    let xi_modes = symplectic_diagonalize(&xi)?;
    let charge_couplings: Vec<f64> = (1..n).map(|j| g_prime[(0, j)]).collect();
    let flux_couplings: Vec<f64> = (1..n).map(|j| k_prime[(0, j)]).collect();
    // n_ξ = Cᵀp with p_k = −i(a_k − a†_k)/√2
    let g_tilde: Vec<C64> = (0..m)
        .map(|k| {
            let h: f64 = (0..m).map(|j| xi_modes.c[(k, j)] * charge_couplings[j]).sum();
            C64::new(0.0, -h / std::f64::consts::SQRT_2)
        })
        .collect();
    let e_l_series = 1.0 / (0..n).map(|i| 1.0 / form.k[(i, i)]).sum::<f64>();
    let worst = flux_couplings.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    log::info!(target: "jja::kerr", "star model: dropped flux couplings, max |g^(phi)| = {worst:.3e} GHz");
    Ok(StarModel {
        ec_phi: g_prime[(0, 0)] / 8.0,
        e_l: k_prime[(0, 0)],
        e_l_series,
        ejb: p.ej_blacksheep,
        phi_ext: p.phi_ext,
        omegas: xi_modes.omegas.clone(),
        g_tilde,
        charge_couplings,
        flux_couplings,
        b,
        k_prime,
        g_prime,
        xi_modes,
    })
}

fn annihilation(n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

/// `H_φ` and `n̂_φ` in a harmonic-oscillator basis of `levels` states at
/// frequency `√(8E_C^φE_L)`.
fn fluxonium_matrices(star: &StarModel, levels: usize) -> Result<(Mat<f64>, Mat<C64>)> {
    let (ec, el) = (star.ec_phi, star.e_l);
    if !(ec > 0.0 && el > 0.0) {
        return Err(Error::InvalidParams(format!("fluxonium needs E_C, E_L > 0 (got {ec}, {el})")));
    }
    let w = (8.0 * ec * el).sqrt();
    let phi_zpf = (2.0 * ec / el).powf(0.25);
    let n_zpf = (el / (32.0 * ec)).powf(0.25);
    let big = levels + COS_PADDING;
    let a = annihilation(big);
    let x = Mat::from_fn(big, big, |i, j| phi_zpf * (a[(i, j)] + a[(j, i)]));
    let (xs, v) = linalg::sym_eigh(x.as_ref())?;
    let cosd = Mat::from_fn(big, big, |i, j| if i == j { (xs[i] + star.phi_ext).cos() } else { 0.0 });
    let cosm = &v * &cosd * v.transpose();
    let h = Mat::from_fn(levels, levels, |i, j| {
        let osc = if i == j { w * (i as f64 + 0.5) } else { 0.0 };
        osc - star.ejb * cosm[(i, j)]
    });
    let nphi = Mat::from_fn(levels, levels, |i, j| C64::new(0.0, -n_zpf * (a[(i, j)] - a[(j, i)])));
    Ok((linalg::symmetrize(h.as_ref()), nphi))
}

struct Pert2Spectrum {
    values: Vec<f64>,
    vectors: Mat<C64>,
    bare: [Vec<C64>; 4],
}

fn pert2_spectrum(star: &StarModel, k: usize, nf: usize, nmode: usize) -> Result<Pert2Spectrum> {
    let (hphi, nphi) = fluxonium_matrices(star, nf)?;
    let (_, fvec) = linalg::sym_eigh(hphi.as_ref())?;
    let a = annihilation(nmode);
    let (w, g) = (star.omegas[k], star.g_tilde[k]);
    let dim = nf * nmode;
    let h = Mat::from_fn(dim, dim, |r, c| {
        let (fa, ma) = (r / nmode, r % nmode);
        let (fb, mb) = (c / nmode, c % nmode);
        let mut x = C64::new(0.0, 0.0);
        if ma == mb {
            x += hphi[(fa, fb)];
            if fa == fb {
                x += w * ma as f64;
            }
        }
        // n_φ ⊗ (g̃ a + g̃* a†)
        let coupling = g * a[(ma, mb)] + g.conj() * a[(mb, ma)];
        x + nphi[(fa, fb)] * coupling
    });
    let (values, vectors) = linalg::herm_eigh(h.as_ref())?;
    let bare_vec = |f: usize, m: usize| -> Vec<C64> { (0..dim).map(|r| if r % nmode == m { C64::new(fvec[(r / nmode, f)], 0.0) } else { C64::new(0.0, 0.0) }).collect() };
    Ok(Pert2Spectrum { values, vectors, bare: [bare_vec(0, 0), bare_vec(1, 0), bare_vec(0, 1), bare_vec(1, 1)] })
}

/// Index of the best match for `target` and whether the runner-up is within
/// the ambiguity margin.
fn track(vectors: &Mat<C64>, target: &[C64]) -> (usize, bool) {
    let ovs: Vec<f64> = (0..vectors.ncols()).map(|c| target.iter().enumerate().map(|(r, t)| vectors[(r, c)].conj() * t).sum::<C64>().norm()).collect();
    let mut idx: Vec<usize> = (0..ovs.len()).collect();
    idx.sort_by(|&a, &b| ovs[b].total_cmp(&ovs[a]));
    let ambiguous = ovs.len() > 1 && ovs[idx[0]] - ovs[idx[1]] < TRACKING_AMBIGUITY;
    (idx[0], ambiguous)
}

fn column(m: &Mat<C64>, c: usize) -> Vec<C64> {
    (0..m.nrows()).map(|r| m[(r, c)]).collect()
}

/// Tracks `{00, 10, 01, 11}` (fluxonium, mode) against `targets`.
fn pert2_from(spec: &Pert2Spectrum, targets: &[Vec<C64>; 4], k: usize) -> (KerrResult, [Vec<C64>; 4]) {
    let mut picks = [0usize; 4];
    let mut flagged = false;
    for (s, t) in targets.iter().enumerate() {
        let (p, amb) = track(&spec.vectors, t);
        picks[s] = p;
        flagged |= amb;
    }
    for a in 0..4 {
        for b in a + 1..4 {
            flagged |= picks[a] == picks[b];
        }
    }
    let e = |s: usize| spec.values[picks[s]] - spec.values[picks[0]];
    let energies = [e(3), e(1), e(2)];
    let tracked = [column(&spec.vectors, picks[0]), column(&spec.vectors, picks[1]), column(&spec.vectors, picks[2]), column(&spec.vectors, picks[3])];
    if flagged {
        log::warn!(target: "jja::kerr", "pert2 state tracking ambiguous for mode {k}");
    }
    let r = KerrResult { i: "φ".into(), j: k.to_string(), chi: wh(energies[0], energies[1], energies[2]), energies, method: KerrMethod::Pert2, sigma_bound: 0.0, flagged };
    (r, tracked)
}

/// Flux-level count at which the reduced-model χ is stable to `LEVEL_TOL`
/// under +4 escalation.
fn converged_levels(star: &StarModel, k: usize, nf: usize, nmode: usize) -> Result<(usize, KerrResult)> {
    let mut levels = nf;
    let spec = pert2_spectrum(star, k, levels, nmode)?;
    let mut prev = pert2_from(&spec, &spec.bare.clone(), k).0;
    while levels + 4 <= MAX_FLUX_LEVELS {
        let spec = pert2_spectrum(star, k, levels + 4, nmode)?;
        let next = pert2_from(&spec, &spec.bare.clone(), k).0;
        let delta = (next.chi - prev.chi).abs();
        levels += 4;
        prev = next;
        if delta < LEVEL_TOL {
            return Ok((levels, prev));
        }
    }
    log::warn!(target: "jja::kerr", "pert2 flux-level escalation reached {levels} without stabilizing");
    prev.flagged = true;
    Ok((levels, prev))
}

/// `χ_φk` from exact diagonalization of the fluxonium plus array mode `k`
/// with dressed states tracked by overlap with bare products.
pub fn pert2_chi(star: &StarModel, k: usize, n_flux_levels: usize, n_mode_levels: usize) -> Result<KerrResult> {
    if k >= star.n_modes() {
        return Err(Error::InvalidParams(format!("mode {k} out of range for {} array modes", star.n_modes())));
    }
    if n_flux_levels < 6 || n_mode_levels < 6 {
        return Err(Error::InvalidParams("pert2 needs at least 6 levels per subsystem".into()));
    }
    Ok(converged_levels(star, k, n_flux_levels, n_mode_levels)?.1)
}

/// [`pert2_chi`] along a sequence of star models differing in external flux,
/// continuing each dressed state from the previous point.
pub fn pert2_sweep(stars: &[StarModel], k: usize, n_flux_levels: usize, n_mode_levels: usize) -> Result<Vec<KerrResult>> {
    let mut levels = n_flux_levels;
    for s in stars {
        pert2_chi(s, k, n_flux_levels, n_mode_levels)?;
        levels = levels.max(converged_levels(s, k, n_flux_levels, n_mode_levels)?.0);
    }
    let mut out = Vec::with_capacity(stars.len());
    let mut prev: Option<[Vec<C64>; 4]> = None;
    for s in stars {
        let spec = pert2_spectrum(s, k, levels, n_mode_levels)?;
        let targets = prev.take().unwrap_or_else(|| spec.bare.clone());
        let (r, tracked) = pert2_from(&spec, &targets, k);
        out.push(r);
        prev = Some(tracked);
    }
    Ok(out)
}
