//! Linearized array: normal-ordering factors, symplectic normal modes, local
//! to normal-mode boson map and first-order Kerr couplings.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{CapacitanceModel, CircuitParams};
use crate::error::{Error, Result};
use crate::linalg;

const ETA_MAX: f64 = 8.0;
const DEGENERATE_REL: f64 = 1e-10;

fn eta_residual(eta: f64, ratio: f64) -> f64 {
    (-eta / 4.0).exp() * eta * eta - ratio
}

/// Smaller positive root of `e^{−η/4}η² = 8E_C/E_J`.
pub fn solve_eta(ec: f64, ej: f64) -> Result<f64> {
    if !(ec > 0.0 && ej > 0.0 && ec.is_finite() && ej.is_finite()) {
        return Err(Error::InvalidParams(format!("solve_eta needs E_C, E_J > 0 (got {ec}, {ej})")));
    }
    let ratio = 8.0 * ec / ej;
    if ratio >= 64.0 * (-2.0f64).exp() {
        return Err(Error::LinearizationInvalid { ratio });
    }
    let (mut lo, mut hi) = (0.0, ETA_MAX);
    let mut eta = ratio.sqrt().min(ETA_MAX * 0.5);
    for _ in 0..200 {
        let f = eta_residual(eta, ratio);
        if f.abs() < 1e-15 * ratio.max(1e-300) {
            break;
        }
        if f > 0.0 {
            hi = eta;
        } else {
            lo = eta;
        }
        let df = (-eta / 4.0).exp() * (2.0 * eta - eta * eta / 4.0);
        let newton = eta - f / df;
        eta = if df > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-16 * hi {
            break;
        }
    }
    let res = eta_residual(eta, ratio).abs();
    if res > 1e-12 {
        return Err(Error::Convergence(format!("eta residual {res:.3e}")));
    }
    Ok(eta)
}

/// `H_lin = ½θᵀKθ + ½nᵀGn`; the cross block is zero.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    /// `θθ` block, `diag(Ẽ_J)`.
    pub k: Mat<f64>,
    /// `nn` block, `8E_C` on the diagonal and `2g_ij` off it.
    pub g: Mat<f64>,
}

impl QuadraticForm {
    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    /// Full `2N×2N` matrix in `(θ…, n…)` order.
    pub fn matrix(&self) -> Mat<f64> {
        let n = self.n();
        Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.k[(i, j)],
            (false, false) => self.g[(i - n, j - n)],
            _ => 0.0,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Linearization {
    pub form: QuadraticForm,
    pub etas: Vec<f64>,
    pub ej_tilde: Vec<f64>,
    pub ej: Vec<f64>,
    pub ec: Vec<f64>,
}

/// Linearized array Hamiltonian with normal-ordered Josephson energies
/// `Ẽ_{J,i} = e^{−η_i/4}E_{J,i}`. The black-sheep junction is not included.
pub fn linearize(params: &CircuitParams, model: &CapacitanceModel) -> Result<Linearization> {
    let p = params.resolved()?;
    let n = p.n_junctions;
    if model.n() != n {
        return Err(Error::ShapeMismatch(format!("model has {} junctions, params {n}", model.n())));
    }
    let etas = (0..n).map(|i| solve_eta(model.ec[i], p.ej_array[i])).collect::<Result<Vec<_>>>()?;
    let ej_tilde: Vec<f64> = (0..n).map(|i| (-etas[i] / 4.0).exp() * p.ej_array[i]).collect();
    let k = Mat::from_fn(n, n, |i, j| if i == j { ej_tilde[i] } else { 0.0 });
    let g = Mat::from_fn(n, n, |i, j| if i == j { 8.0 * model.ec[i] } else { 2.0 * model.g[(i, j)] });
    Ok(Linearization { form: QuadraticForm { k, g }, etas, ej_tilde, ej: p.ej_array.clone(), ec: model.ec.clone() })
}

/// Normal modes of a quadratic form: `ξ = Cθ`, `n_ξ = C^{−T}n`.
#[derive(Clone, Debug)]
pub struct SymplecticModes {
    pub omegas: Vec<f64>,
    pub c: Mat<f64>,
    pub c_inv: Mat<f64>,
}

impl SymplecticModes {
    /// `S = diag(C, C^{−T})`.
    pub fn s_matrix(&self) -> Mat<f64> {
        let n = self.omegas.len();
        Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.c[(i, j)],
            (false, false) => self.c_inv[(j - n, i - n)],
            _ => 0.0,
        })
    }
}

fn mirror_fix(vecs: &mut Mat<f64>, vals: &[f64]) {
    let n = vecs.nrows();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[end] - vals[start]).abs() <= DEGENERATE_REL * vals[start].abs().max(1e-300) {
            end += 1;
        }
        if end - start > 1 {
            // diagonalize the site-reversal operator inside the degenerate block
            let m = end - start;
            let block = vecs.get(.., start..end).to_owned();
            let p = Mat::from_fn(m, m, |a, b| (0..n).map(|r| block[(r, a)] * block[(n - 1 - r, b)]).sum::<f64>());
            if let Ok((_, w)) = linalg::sym_eigh(linalg::symmetrize(p.as_ref()).as_ref()) {
                let rotated = &block * &w;
                for c in 0..m {
                    for r in 0..n {
                        vecs[(r, start + c)] = rotated[(r, c)];
                    }
                }
            }
        }
        start = end;
    }
}

/// Symplectic diagonalization of `½θᵀKθ + ½nᵀGn` through `G = LLᵀ` and
/// `LᵀKL = VΛVᵀ`, giving `ω = √Λ` and `C = Λ^{1/4}VᵀL^{−1}`.
pub fn symplectic_diagonalize(form: &QuadraticForm) -> Result<SymplecticModes> {
    let n = form.n();
    let l = linalg::cholesky(form.g.as_ref()).map_err(|_| Error::NotPositiveDefinite("charge block".into()))?;
    linalg::cholesky(form.k.as_ref()).map_err(|_| Error::NotPositiveDefinite("phase block".into()))?;
    let ltkl = linalg::symmetrize((l.transpose() * &form.k * &l).as_ref());
    let (vals, mut v) = linalg::sym_eigh(ltkl.as_ref())?;
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite("normal-mode frequencies".into()));
    }
    mirror_fix(&mut v, &vals);
    let omegas: Vec<f64> = vals.iter().map(|x| x.sqrt()).collect();
    // C^{-1} = L V Ω^{-1/2}
    let lv = &l * &v;
    let mut c_inv = Mat::from_fn(n, n, |i, k| lv[(i, k)] / omegas[k].sqrt());
    // sign convention: largest-magnitude entry of each mode profile positive
    for k in 0..n {
        let mut best = 0;
        for i in 0..n {
            if c_inv[(i, k)].abs() > c_inv[(best, k)].abs() * (1.0 + 1e-9) {
                best = i;
            }
        }
        if c_inv[(best, k)] < 0.0 {
            for i in 0..n {
                c_inv[(i, k)] = -c_inv[(i, k)];
            }
        }
    }
    let c = linalg::inverse(c_inv.as_ref())?;
    Ok(SymplecticModes { omegas, c, c_inv })
}

/// `max |SΩSᵀ − Ω|`.
pub fn symplectic_residual(s: &Mat<f64>) -> f64 {
    let n2 = s.nrows();
    let n = n2 / 2;
    let omega = Mat::from_fn(n2, n2, |i, j| {
        if j == i + n && i < n {
            1.0
        } else if i == j + n && j < n {
            -1.0
        } else {
            0.0
        }
    });
    let r = s * &omega * s.transpose() - &omega;
    (0..n2).flat_map(|i| (0..n2).map(move |j| (i, j))).map(|(i, j)| r[(i, j)].abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalModeData {
    /// Ascending mode frequencies (GHz).
    pub omegas: Vec<f64>,
    /// `2N×2N` symplectic matrix, row-major.
    pub s_matrix: Vec<Vec<f64>>,
    /// `θ̂_j = Σ_k u_jk Â_k + u*_jk Â†_k`, `u[j][k]`.
    pub u: Vec<Vec<C64>>,
    /// `Â†_k = Σ_i α_ki b̂†_i + β_ki b̂_i`, `alpha[k][i]`.
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub etas: Vec<f64>,
    pub ej_tilde: Vec<f64>,
    pub ej_prime: Vec<f64>,
    /// Josephson energies of the quadratic form that produced these modes.
    pub ej_quadratic: Vec<f64>,
    pub ej: Vec<f64>,
    pub ec: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub iterations: usize,
}

impl NormalModeData {
    pub fn n(&self) -> usize {
        self.omegas.len()
    }

    pub fn u_matrix(&self) -> Mat<C64> {
        let n = self.n();
        Mat::from_fn(n, n, |j, k| self.u[j][k])
    }

    /// `Σ_k |u_jk|²` per junction.
    pub fn phase_fluctuations(&self) -> Vec<f64> {
        self.u.iter().map(|row| row.iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    /// `|u_jk|² / Σ_m |u_mk|²` for junction `j` and mode `k`.
    pub fn participation(&self, j: usize, k: usize) -> f64 {
        let tot: f64 = (0..self.n()).map(|m| self.u[m][k].norm_sqr()).sum();
        self.u[j][k].norm_sqr() / tot
    }

    pub fn form(&self) -> QuadraticForm {
        let n = self.n();
        QuadraticForm {
            k: Mat::from_fn(n, n, |i, j| if i == j { self.ej_quadratic[i] } else { 0.0 }),
            g: Mat::from_fn(n, n, |i, j| if i == j { 8.0 * self.ec[i] } else { 2.0 * self.g[i][j] }),
        }
    }

    /// `max_jk |[Â_j, Â†_k] − δ_jk|` from the creation coefficients.
    pub fn commutator_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in 0..n {
                let c: f64 = (0..n).map(|i| self.alpha[j][i] * self.alpha[k][i] - self.beta[j][i] * self.beta[k][i]).sum();
                worst = worst.max((c - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

/// Composes the symplectic modes with the local boson definition
/// `b̂_i = θ̂_i/√(2η_i) + i√(η_i/2) n̂_i`. Returns `(u, α, β)`.
pub fn bosonic_map(modes: &SymplecticModes, etas: &[f64]) -> Result<(Mat<C64>, Mat<f64>, Mat<f64>)> {
    let n = modes.omegas.len();
    if etas.len() != n || etas.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Singular("local boson map needs eta > 0 on every junction".into()));
    }
    let u = Mat::from_fn(n, n, |j, k| C64::new(modes.c_inv[(j, k)] / std::f64::consts::SQRT_2, 0.0));
    // D = C^{-T}, so D_ki = (C^{-1})_ik
    let alpha = Mat::from_fn(n, n, |k, i| {
        let se = etas[i].sqrt();
        0.5 * modes.c[(k, i)] * se + 0.5 * modes.c_inv[(i, k)] / se
    });
    let beta = Mat::from_fn(n, n, |k, i| {
        let se = etas[i].sqrt();
        0.5 * modes.c[(k, i)] * se - 0.5 * modes.c_inv[(i, k)] / se
    });
    Ok((u, alpha, beta))
}

fn assemble(lin: &Linearization, g: &Mat<f64>, ej_quadratic: Vec<f64>, modes: SymplecticModes, iterations: usize) -> Result<NormalModeData> {
    let n = modes.omegas.len();
    let (u, alpha, beta) = bosonic_map(&modes, &lin.etas)?;
    let s = modes.s_matrix();
    let mut data = NormalModeData {
        omegas: modes.omegas.clone(),
        s_matrix: (0..2 * n).map(|i| (0..2 * n).map(|j| s[(i, j)]).collect()).collect(),
        u: (0..n).map(|j| (0..n).map(|k| u[(j, k)]).collect()).collect(),
        alpha: (0..n).map(|k| (0..n).map(|i| alpha[(k, i)]).collect()).collect(),
        beta: (0..n).map(|k| (0..n).map(|i| beta[(k, i)]).collect()).collect(),
        etas: lin.etas.clone(),
        ej_tilde: lin.ej_tilde.clone(),
        ej_prime: Vec::new(),
        ej_quadratic,
        ej: lin.ej.clone(),
        ec: lin.ec.clone(),
        g: (0..n).map(|i| (0..n).map(|j| g[(i, j)]).collect()).collect(),
        iterations,
    };
    data.ej_prime = renormalized_ej(&data, &lin.ej);
    let sres = symplectic_residual(&s);
    if sres > 1e-8 {
        return Err(Error::Numerical(format!("symplectic residual {sres:.3e}")));
    }
    Ok(data)
}

/// `E′_{J,m} = e^{−½Σ_k|u_mk|²} E_{J,m}`, the normal-ordering factor of
/// `cos θ̂_m` in the normal-mode vacuum.
pub fn renormalized_ej(nm: &NormalModeData, ej: &[f64]) -> Vec<f64> {
    nm.phase_fluctuations().iter().zip(ej).map(|(f, e)| (-0.5 * f).exp() * e).collect()
}

/// Linearization plus symplectic diagonalization, without the residual loop.
pub fn normal_modes(params: &CircuitParams, model: &CapacitanceModel) -> Result<NormalModeData> {
    let lin = linearize(params, model)?;
    let modes = symplectic_diagonalize(&lin.form)?;
    assemble(&lin, &model.g, lin.ej_tilde.clone(), modes, 0)
}

/// First-order cross- and self-Kerr matrix
/// `χ_jk = −½ Σ_m E′_{J,m} |u_mj|²|u_mk|²`, normalized so that off-diagonal
/// entries match `½[E(1_j1_k) − E(1_j) − E(1_k)]`.
pub fn kerr_first_order(nm: &NormalModeData, ej_array: &[f64]) -> Mat<f64> {
    let n = nm.n();
    let ejp = renormalized_ej(nm, ej_array);
    Mat::from_fn(n, n, |j, k| {
        let (a, b) = (j.min(k), j.max(k));
        -0.5 * (0..n).map(|m| ejp[m] * nm.u[m][a].norm_sqr() * nm.u[m][b].norm_sqr()).sum::<f64>()
    })
}

/// Replaces `Ẽ_{J,j}` by the self-consistent `E_{J,j}e^{−½Σ_k|u_jk|²}` and
/// rediagonalizes until `max_j |Δω_j|/ω_j < tol`. `iterations` counts the
/// rediagonalizations that changed the spectrum by more than `tol`.
pub fn iterate_residual(nm: &NormalModeData, params: &CircuitParams, tol: f64, max_iter: usize) -> Result<NormalModeData> {
    let p = params.resolved()?;
    let lin = Linearization {
        form: nm.form(),
        etas: nm.etas.clone(),
        ej_tilde: nm.ej_tilde.clone(),
        ej: p.ej_array.clone(),
        ec: nm.ec.clone(),
    };
    let n = nm.n();
    let g = Mat::from_fn(n, n, |i, j| nm.g[i][j]);
    let mut current = nm.clone();
    let mut prev_step = f64::INFINITY;
    for it in 1..=max_iter {
        let ejq = renormalized_ej(&current, &p.ej_array);
        let mut form = lin.form.clone();
        for i in 0..n {
            form.k[(i, i)] = ejq[i];
        }
        let modes = symplectic_diagonalize(&form)?;
        let change = modes
            .omegas
            .iter()
            .zip(&current.omegas)
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max);
        let next = assemble(&lin, &g, ejq, modes, if change < tol { it - 1 } else { it })?;
        log::debug!(target: "jja::normalmodes", "residual iteration {it}: max relative change {change:.3e}");
        if change > prev_step {
            log::debug!(target: "jja::normalmodes", "residual update grew from {prev_step:.3e} to {change:.3e}");
        }
        prev_step = change;
        current = next;
        if change < tol {
            return Ok(current);
        }
    }
    Err(Error::Convergence(format!("residual quadratic iteration did not converge in {max_iter} steps")))
}
