use faer::Mat;
use num_complex::Complex64 as C64;

use super::krylov::{self, dot, norm, orthonormalize};
use super::{SolverConfig, SpectralRecord};
use crate::error::{Error, Result};
use crate::linalg;
use crate::tn::{mat_to_vec, tensor_to_mat, transfer, transfer_right, Mpo, Mps, Tensor, TruncationPolicy};

/// Local problems up to this dimension are diagonalized densely.
const DENSE_LOCAL: usize = 400;
const LOST_TARGET_OVERLAP: f64 = 0.1;
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Lowest,
    Overlap,
}

struct Overlaps<'a> {
    state: &'a Mps,
    left: Vec<Tensor>,
    right: Vec<Tensor>,
}

fn unit_env(rank: usize) -> Tensor {
    Tensor::from_vec(&vec![1; rank], vec![ONE])
}

fn overlap_left(env: &Tensor, a: &Tensor, b: &Tensor) -> Tensor {
    let t = env.tensordot(&[1], b, &[0]); // [a, s, e']
    a.conj().tensordot(&[0, 1], &t, &[0, 1]) // [a', e']
}

fn overlap_right(env: &Tensor, a: &Tensor, b: &Tensor) -> Tensor {
    let t = b.tensordot(&[2], env, &[1]); // [e, s, a']
    a.conj().tensordot(&[1, 2], &t, &[1, 2]) // [a, e]
}

struct Sweeper<'a> {
    h: &'a Mpo,
    psi: Mps,
    left: Vec<Tensor>,
    right: Vec<Tensor>,
    below: Vec<Overlaps<'a>>,
    policy: TruncationPolicy,
    cfg: &'a SolverConfig,
    target: Target,
}

struct StepOutcome {
    energy: f64,
    overlap: f64,
}

impl<'a> Sweeper<'a> {
    fn new(h: &'a Mpo, mut psi: Mps, below: &'a [Mps], cfg: &'a SolverConfig, target: Target) -> Result<Self> {
        let n = psi.len();
        if h.phys_dims() != psi.phys_dims() {
            return Err(Error::ShapeMismatch("Hamiltonian and state site dimensions differ".into()));
        }
        for b in below {
            if b.phys_dims() != psi.phys_dims() {
                return Err(Error::ShapeMismatch("orthogonality state has different site dimensions".into()));
            }
        }
        let policy = cfg.policy();
        psi.compress(&policy)?;
        psi.normalize()?;
        psi.canonicalize(0);
        let mut right = vec![unit_env(3); n + 1];
        for i in (1..n).rev() {
            right[i] = transfer_right(&right[i + 1], psi.tensor(i), &h.tensors()[i], psi.tensor(i));
        }
        let below = below
            .iter()
            .map(|state| {
                let mut r = vec![unit_env(2); n + 1];
                for i in (1..n).rev() {
                    r[i] = overlap_right(&r[i + 1], psi.tensor(i), state.tensor(i));
                }
                Overlaps { state, left: vec![unit_env(2); n + 1], right: r }
            })
            .collect();
        Ok(Self { h, psi, left: vec![unit_env(3); n + 1], right, below, policy, cfg, target })
    }

    fn theta(&self, i: usize) -> Tensor {
        self.psi.tensor(i).tensordot(&[2], self.psi.tensor(i + 1), &[0])
    }

    fn apply_heff(&self, i: usize, theta: &Tensor) -> Tensor {
        let (w1, w2) = (&self.h.tensors()[i], &self.h.tensors()[i + 1]);
        let t = self.left[i].tensordot(&[2], theta, &[0]); // [a, w, s1, s2, d]
        let t = t.tensordot(&[1, 2], w1, &[0, 2]); // [a, s2, d, o1, x]
        let t = t.tensordot(&[1, 4], w2, &[2, 0]); // [a, d, o1, o2, y]
        let t = t.tensordot(&[1, 4], &self.right[i + 2], &[2, 1]); // [a, o1, o2, c]
        t
    }

    fn dense_heff(&self, i: usize) -> Mat<C64> {
        let (w1, w2) = (&self.h.tensors()[i], &self.h.tensors()[i + 1]);
        let t = self.left[i].tensordot(&[1], w1, &[0]); // [a, b, o1, s1, x]
        let t = t.tensordot(&[4], w2, &[0]); // [a, b, o1, s1, o2, s2, y]
        let t = t.tensordot(&[6], &self.right[i + 2], &[1]); // [a, b, o1, s1, o2, s2, c, d]
        let t = t.permute(&[0, 2, 4, 6, 1, 3, 5, 7]);
        let n = (t.len() as f64).sqrt().round() as usize;
        let m = tensor_to_mat(&t, n, n);
        Mat::from_fn(n, n, |r, c| 0.5 * (m[(r, c)] + m[(c, r)].conj()))
    }

    fn local_projections(&self, i: usize) -> Vec<Vec<C64>> {
        self.below
            .iter()
            .map(|o| {
                let t = o.left[i].tensordot(&[1], o.state.tensor(i), &[0]); // [a, s1, f]
                let t = t.tensordot(&[2], o.state.tensor(i + 1), &[0]); // [a, s1, s2, g]
                t.tensordot(&[3], &o.right[i + 2], &[1]).into_data() // [a, s1, s2, c]
            })
            .collect()
    }

    fn solve_local(&self, i: usize) -> Result<(Tensor, StepOutcome)> {
        let theta0 = self.theta(i);
        let shape = theta0.shape().to_vec();
        let mut v0 = theta0.into_data();
        let deflate = orthonormalize(&self.local_projections(i));
        krylov::project_out(&mut v0, &deflate);
        let n0 = norm(&v0);
        if n0 < 1e-14 {
            // the current local state lies in the excluded space; restart from a generic vector
            v0 = (0..v0.len()).map(|k| C64::new(1.0 + (k as f64 * 0.618).fract(), 0.0)).collect();
            krylov::project_out(&mut v0, &deflate);
        }
        let nv = norm(&v0);
        krylov::scale(&mut v0, 1.0 / nv);
        let dim = v0.len();
        let (energy, vec, overlap) = if dim <= DENSE_LOCAL {
            self.solve_dense(i, &v0, &deflate)?
        } else {
            self.solve_krylov(i, &shape, &v0, &deflate)?
        };
        Ok((Tensor::from_vec(&shape, vec), StepOutcome { energy, overlap }))
    }

    fn solve_dense(&self, i: usize, v0: &[C64], deflate: &[Vec<C64>]) -> Result<(f64, Vec<C64>, f64)> {
        let mut m = self.dense_heff(i);
        let n = m.nrows();
        if !deflate.is_empty() {
            // P H P + λ(1 − P) pushes the excluded space above the spectrum
            let p = Mat::from_fn(n, n, |r, c| {
                let mut x = if r == c { ONE } else { C64::new(0.0, 0.0) };
                for q in deflate {
                    x -= q[r] * q[c].conj();
                }
                x
            });
            let bound = linalg::frobenius_c(m.as_ref()) + 1.0;
            let php = &p * &m * &p;
            m = Mat::from_fn(n, n, |r, c| {
                let ex = if r == c { ONE } else { C64::new(0.0, 0.0) } - p[(r, c)];
                php[(r, c)] + ex * (10.0 * bound)
            });
        }
        let (vals, vecs) = linalg::herm_eigh(m.as_ref())?;
        let idx = match self.target {
            Target::Lowest => 0,
            Target::Overlap => {
                let mut best = (0, -1.0);
                for k in 0..n {
                    let ov: f64 = (0..n).map(|r| v0[r].conj() * vecs[(r, k)]).sum::<C64>().norm();
                    if ov > best.1 + 1e-12 {
                        best = (k, ov);
                    }
                }
                best.0
            }
        };
        let v: Vec<C64> = (0..n).map(|r| vecs[(r, idx)]).collect();
        let ov = dot(v0, &v).norm();
        Ok((vals[idx], v, ov))
    }

    fn solve_krylov(&self, i: usize, shape: &[usize], v0: &[C64], deflate: &[Vec<C64>]) -> Result<(f64, Vec<C64>, f64)> {
        let op = |x: &[C64]| -> Vec<C64> {
            let t = Tensor::from_vec(shape, x.to_vec());
            self.apply_heff(i, &t).into_data()
        };
        if self.target == Target::Overlap {
            return self.solve_targeted(&op, v0, deflate);
        }
        let ls = &self.cfg.local_solver;
        let m = (3 * ls.krylov_dim).max(24);
        let mut start = v0.to_vec();
        let mut best: Option<(f64, Vec<C64>)> = None;
        for _ in 0..=ls.max_restarts {
            let ritz = krylov::lanczos(&op, &start, m, deflate)?;
            if ritz.values.is_empty() {
                break;
            }
            let (lam, v) = (ritz.values[0], ritz.vectors[0].clone());
            let mut hv = op(&v);
            krylov::project_out(&mut hv, deflate);
            krylov::axpy(&mut hv, C64::new(-lam, 0.0), &v);
            start = v.clone();
            best = Some((lam, v));
            if norm(&hv) < ls.tol {
                break;
            }
        }
        let (lam, v) = best.ok_or_else(|| Error::Numerical("empty Krylov space".into()))?;
        let ov = dot(v0, &v).norm();
        Ok((lam, v, ov))
    }

    /// Rayleigh–Ritz on the space spanned by `v0` and repeated shift-invert
    /// images `(H − μ)⁻ᵏ v0`, `μ` the Rayleigh quotient of `v0`, keeping the
    /// Ritz vector of largest overlap with `v0`. Without shift-invert the
    /// images are plain powers of `H`.
    fn solve_targeted<F: Fn(&[C64]) -> Vec<C64>>(&self, op: &F, v0: &[C64], deflate: &[Vec<C64>]) -> Result<(f64, Vec<C64>, f64)> {
        let (ls, si) = (&self.cfg.local_solver, &self.cfg.shift_invert);
        let h = |x: &[C64]| {
            let mut y = op(x);
            krylov::project_out(&mut y, deflate);
            y
        };
        let mut basis = vec![v0.to_vec()];
        let mut images = vec![h(v0)];
        let mu = dot(v0, &images[0]).re;
        let mut r0 = images[0].clone();
        krylov::axpy(&mut r0, C64::new(-mu, 0.0), v0);
        let mut best = (mu, v0.to_vec(), norm(&r0));
        let steps = if si.enabled { ls.krylov_dim.max(2) } else { (3 * ls.krylov_dim).max(24) };
        for _ in 0..steps {
            if best.2 < ls.tol {
                break;
            }
            let last = basis.last().expect("nonempty basis");
            let mut y = if si.enabled {
                let sol = krylov::minres(op, last, mu, si.inner_solver_tol, si.max_inner_iters, deflate);
                log::trace!(target: "jja::solver", "shift-invert at {mu:.9}: {} inner steps, residual {:.2e}", sol.iterations, sol.relative_residual);
                sol.x
            } else {
                images.last().expect("nonempty images").clone()
            };
            krylov::project_out(&mut y, deflate);
            krylov::project_out(&mut y, &basis);
            let ny = norm(&y);
            if !(ny.is_finite() && ny > 1e-12) {
                break;
            }
            krylov::scale(&mut y, 1.0 / ny);
            images.push(h(&y));
            basis.push(y);
            let m = basis.len();
            let b = Mat::from_fn(m, m, |r, c| 0.5 * (dot(&basis[r], &images[c]) + dot(&basis[c], &images[r]).conj()));
            let (vals, vecs) = linalg::herm_eigh(b.as_ref())?;
            let k = (0..m).fold(0, |a, k| if vecs[(0, k)].norm() > vecs[(0, a)].norm() + 1e-12 { k } else { a });
            let mut x = vec![C64::new(0.0, 0.0); v0.len()];
            let mut hx = x.clone();
            for r in 0..m {
                krylov::axpy(&mut x, vecs[(r, k)], &basis[r]);
                krylov::axpy(&mut hx, vecs[(r, k)], &images[r]);
            }
            krylov::axpy(&mut hx, C64::new(-vals[k], 0.0), &x);
            best = (vals[k], x, norm(&hx));
        }
        log::trace!(target: "jja::solver", "targeted local solve at {mu:.9}: {} vectors, residual {:.2e}", basis.len(), best.2);
        let ov = dot(v0, &best.1).norm();
        Ok((best.0, best.1, ov))
    }

    /// Splits an optimized two-site tensor; `left_to_right` puts the
    /// singular values on the right-hand site.
    fn split(&mut self, i: usize, theta: Tensor, left_to_right: bool) -> Result<f64> {
        let sh = theta.shape().to_vec();
        let (a, s1, s2, c) = (sh[0], sh[1], sh[2], sh[3]);
        let m = tensor_to_mat(&theta, a * s1, s2 * c);
        let (u, s, v) = linalg::svd(m.as_ref())?;
        let (k, w) = self.policy.rank(&s);
        let kept: f64 = s[..k].iter().map(|x| x * x).sum::<f64>().sqrt();
        let sn: Vec<f64> = s[..k].iter().map(|x| x / kept).collect();
        let (lt, rt) = if left_to_right {
            (
                Mat::from_fn(a * s1, k, |r, q| u[(r, q)]),
                Mat::from_fn(k, s2 * c, |q, r| v[(r, q)].conj() * sn[q]),
            )
        } else {
            (
                Mat::from_fn(a * s1, k, |r, q| u[(r, q)] * sn[q]),
                Mat::from_fn(k, s2 * c, |q, r| v[(r, q)].conj()),
            )
        };
        let ts = self.psi.tensors_mut();
        ts[i] = Tensor::from_vec(&[a, s1, k], mat_to_vec(lt.as_ref()));
        ts[i + 1] = Tensor::from_vec(&[k, s2, c], mat_to_vec(rt.as_ref()));
        Ok(w)
    }

    fn update_left(&mut self, i: usize) {
        let a = self.psi.tensor(i);
        self.left[i + 1] = transfer(&self.left[i], a, &self.h.tensors()[i], a);
        for o in &mut self.below {
            o.left[i + 1] = overlap_left(&o.left[i], a, o.state.tensor(i));
        }
    }

    fn update_right(&mut self, i: usize) {
        let a = self.psi.tensor(i);
        self.right[i] = transfer_right(&self.right[i + 1], a, &self.h.tensors()[i], a);
        for o in &mut self.below {
            o.right[i] = overlap_right(&o.right[i + 1], a, o.state.tensor(i));
        }
    }

    /// One left-to-right and right-to-left pass. Returns the last local
    /// energy and the smallest target overlap seen.
    fn sweep(&mut self) -> Result<(f64, f64)> {
        let n = self.psi.len();
        let mut energy = f64::NAN;
        let mut min_overlap = f64::INFINITY;
        for i in 0..n - 1 {
            let (theta, out) = self.solve_local(i)?;
            self.split(i, theta, true)?;
            self.update_left(i);
            energy = out.energy;
            min_overlap = min_overlap.min(out.overlap);
        }
        for i in (0..n - 1).rev() {
            let (theta, out) = self.solve_local(i)?;
            self.split(i, theta, false)?;
            self.update_right(i + 1);
            energy = out.energy;
            min_overlap = min_overlap.min(out.overlap);
        }
        Ok((energy, min_overlap))
    }
}

/// `σ = ‖(H − E)ψ‖ / ‖ψ‖` with `E = ⟨H⟩`. The shifted operator is applied
/// without truncation and the norm is read off after a QR sweep, avoiding the
/// cancellation in `⟨H²⟩ − ⟨H⟩²`.
pub fn energy_variance(h: &Mpo, s: &Mps) -> Result<f64> {
    let nrm2 = s.inner(s)?.re;
    if !(nrm2 > 0.0) {
        return Err(Error::Numerical("zero state".into()));
    }
    let e = h.expectation_real(s)? / nrm2;
    let shifted = Mpo::lincomb(ONE, h, C64::new(-e, 0.0), &Mpo::identity(&h.phys_dims()))?;
    let mut phi = shifted.apply_exact(s)?;
    let n = phi.len();
    let ts = phi.tensors_mut();
    for i in 0..n.saturating_sub(1) {
        crate::tn::left_orthogonalize(ts, i);
    }
    let var = ts[n - 1].norm().powi(2) / nrm2;
    if var < -1e-12 {
        return Err(Error::Numerical(format!("negative variance {var:.3e}")));
    }
    Ok(var.max(0.0).sqrt())
}

fn single_site(h: &Mpo, init: &Mps, target: Target) -> Result<Mps> {
    let m = h.to_dense()?;
    let m = Mat::from_fn(m.nrows(), m.ncols(), |r, c| 0.5 * (m[(r, c)] + m[(c, r)].conj()));
    let (_, vecs) = linalg::herm_eigh(m.as_ref())?;
    let v0 = init.to_dense()?;
    let idx = match target {
        Target::Lowest => 0,
        Target::Overlap => (0..m.ncols())
            .map(|k| (k, (0..m.nrows()).map(|r| v0[r].conj() * vecs[(r, k)]).sum::<C64>().norm()))
            .fold((0, -1.0), |b, x| if x.1 > b.1 + 1e-12 { x } else { b })
            .0,
    };
    let v: Vec<C64> = (0..m.nrows()).map(|r| vecs[(r, idx)]).collect();
    Mps::from_tensors(vec![Tensor::from_vec(&[1, v.len(), 1], v)])
}

fn record(label: &str, h: &Mpo, psi: &Mps, sweeps: usize, converged: bool, fidelity: Option<f64>) -> Result<SpectralRecord> {
    Ok(SpectralRecord {
        label: label.to_string(),
        energy: h.expectation_real(psi)?,
        sigma: energy_variance(h, psi)?,
        trial_fidelity: fidelity,
        bond_profile: psi.bond_dims(),
        sweeps_used: sweeps,
        converged,
    })
}

fn run(
    label: &str,
    h: &Mpo,
    init: &Mps,
    below: &[Mps],
    cfg: &SolverConfig,
    target: Target,
) -> Result<(Mps, SpectralRecord)> {
    cfg.validate()?;
    if h.len() == 1 {
        let psi = single_site(h, init, target)?;
        let mut rec = record(label, h, &psi, 1, true, None)?;
        rec.converged = rec.sigma < cfg.variance_tol;
        return Ok((psi, rec));
    }
    let mut sw = Sweeper::new(h, init.clone(), below, cfg, target)?;
    let mut prev = f64::INFINITY;
    let mut low_overlap_run = 0;
    for sweep in 1..=cfg.max_sweeps {
        let (_, min_overlap) = sw.sweep()?;
        let energy = h.expectation_real(&sw.psi)?;
        let sigma = energy_variance(h, &sw.psi)?;
        log::info!(
            target: "jja::solver",
            "label={label} sweep={sweep} energy={energy:.12} sigma={sigma:.3e} max_bond={} min_overlap={min_overlap:.4}",
            sw.psi.max_bond()
        );
        if target == Target::Overlap {
            if min_overlap < LOST_TARGET_OVERLAP {
                low_overlap_run += 1;
            } else {
                low_overlap_run = 0;
            }
            if low_overlap_run >= 2 {
                let rec = record(label, h, &sw.psi, sweep, false, None)?;
                return Err(Error::LostTarget { overlap: min_overlap, record: Box::new(rec) });
            }
        }
        let done = match target {
            Target::Lowest => (energy - prev).abs() < cfg.energy_tol && sigma < cfg.variance_tol,
            Target::Overlap => sigma < cfg.variance_tol,
        };
        prev = energy;
        if done {
            let rec = record(label, h, &sw.psi, sweep, true, None)?;
            return Ok((sw.psi, rec));
        }
    }
    let rec = record(label, h, &sw.psi, cfg.max_sweeps, false, None)?;
    Ok((sw.psi, rec))
}

/// Product of local ground orbitals with a seed-controlled perturbation of
/// relative size 1e-3.
pub fn ground_initial_state(dims: &[usize], seed: u64) -> Result<Mps> {
    let base = Mps::basis_state(dims, &vec![0; dims.len()])?;
    let noise = Mps::random(dims, 2, seed)?;
    let mut psi = Mps::lincomb(ONE, &base, C64::new(1e-3, 0.0), &noise, &TruncationPolicy::exact())?;
    psi.normalize()?;
    Ok(psi)
}

/// Two-site ground-state DMRG. Non-convergence is reported through the
/// record's `converged` flag.
pub fn dmrg_ground(h: &Mpo, init: &Mps, cfg: &SolverConfig) -> Result<(Mps, SpectralRecord)> {
    run("ground", h, init, &[], cfg, Target::Lowest)
}

/// Lowest state in the orthogonal complement of `below`, enforced by local
/// projection at every two-site step.
pub fn dmrg_excited_orthogonal(h: &Mpo, below: &[Mps], init: &Mps, cfg: &SolverConfig) -> Result<(Mps, SpectralRecord)> {
    run("excited", h, init, below, cfg, Target::Lowest)
}

/// DMRG-X: each local step keeps the eigenvector with the largest overlap
/// with the current state, optionally refined by Rayleigh-shifted inverse
/// iteration.
pub fn dmrgx(h: &Mpo, trial: &Mps, label: &str, cfg: &SolverConfig) -> Result<(Mps, SpectralRecord)> {
    let mut t = trial.clone();
    t.normalize()?;
    let (psi, mut rec) = run(label, h, &t, &[], cfg, Target::Overlap)?;
    rec.trial_fidelity = Some(t.inner(&psi)?.norm().min(1.0));
    Ok((psi, rec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_op(vals: &[f64]) -> Mat<C64> {
        Mat::from_fn(vals.len(), vals.len(), |i, j| if i == j { C64::new(vals[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    fn hopping_chain(n: usize, d: usize, j: f64) -> Mpo {
        let onsite: Vec<Mat<C64>> = (0..n).map(|i| diag_op(&(0..d).map(|k| k as f64 * (1.0 + 0.1 * i as f64)).collect::<Vec<_>>())).collect();
        let mut h = Mpo::onsite_sum(&onsite).unwrap();
        let b = Mat::from_fn(d, d, |r, c| if c == r + 1 { C64::new((c as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) });
        let bd = b.adjoint().to_owned();
        let dims = vec![d; n];
        for i in 0..n - 1 {
            let x = &b + &bd;
            let t = Mpo::product_of_locals(&dims, &[(i, x.clone()), (i + 1, x)]).unwrap();
            h = Mpo::lincomb(ONE, &h, C64::new(j, 0.0), &t).unwrap();
            h.compress(&TruncationPolicy::operator()).unwrap();
        }
        h.set_hermitian(true);
        h
    }

    fn dense_spectrum(h: &Mpo) -> (Vec<f64>, Mat<C64>) {
        linalg::herm_eigh(h.to_dense().unwrap().as_ref()).unwrap()
    }

    #[test]
    fn ground_matches_dense() {
        let h = hopping_chain(4, 3, 0.2);
        let (vals, _) = dense_spectrum(&h);
        let cfg = SolverConfig::with_variance_tol(16, 1e-6);
        let init = ground_initial_state(&h.phys_dims(), 1).unwrap();
        let (_, rec) = dmrg_ground(&h, &init, &cfg).unwrap();
        assert!(rec.converged);
        assert!((rec.energy - vals[0]).abs() < 1e-9);
        assert!(rec.energy >= vals[0] - 1e-10);
    }

    #[test]
    fn excited_orthogonal_matches_dense() {
        let h = hopping_chain(3, 3, 0.15);
        let (vals, _) = dense_spectrum(&h);
        let cfg = SolverConfig::with_variance_tol(16, 1e-6);
        let init = ground_initial_state(&h.phys_dims(), 1).unwrap();
        let (g, _) = dmrg_ground(&h, &init, &cfg).unwrap();
        let init1 = Mps::random(&h.phys_dims(), 4, 3).unwrap();
        let (e, rec) = dmrg_excited_orthogonal(&h, std::slice::from_ref(&g), &init1, &cfg).unwrap();
        assert!((rec.energy - vals[1]).abs() < 1e-8, "{} vs {}", rec.energy, vals[1]);
        assert!(g.inner(&e).unwrap().norm() < 1e-8);
    }

    fn dense_overlap(vecs: &Mat<C64>, k: usize, v: &[C64]) -> f64 {
        (0..v.len()).map(|r| vecs[(r, k)].conj() * v[r]).sum::<C64>().norm()
    }

    #[test]
    fn dmrgx_basis_trial_lands_on_eigenstate() {
        let h = hopping_chain(3, 3, 0.1);
        let (vals, vecs) = dense_spectrum(&h);
        let cfg = SolverConfig::with_variance_tol(16, 1e-7);
        let trial = Mps::basis_state(&h.phys_dims(), &[0, 1, 0]).unwrap();
        let (psi, rec) = dmrgx(&h, &trial, "010", &cfg).unwrap();
        assert!(rec.converged);
        let k = (0..vals.len()).min_by(|&a, &b| (vals[a] - rec.energy).abs().total_cmp(&(vals[b] - rec.energy).abs())).unwrap();
        assert!((rec.energy - vals[k]).abs() < 1e-7);
        assert!(dense_overlap(&vecs, k, &psi.to_dense().unwrap()) > 1.0 - 1e-10);
        assert!((rec.trial_fidelity.unwrap() - dense_overlap(&vecs, k, &trial.to_dense().unwrap())).abs() < 1e-6);
    }

    #[test]
    fn dmrgx_recovers_perturbed_eigenvector() {
        let h = hopping_chain(3, 3, 0.1);
        let (vals, vecs) = dense_spectrum(&h);
        let dims = h.phys_dims();
        let noise = Mps::random(&dims, 3, 11).unwrap().to_dense().unwrap();
        for target in [1, 2, 3, 5] {
            let v: Vec<C64> = (0..noise.len()).map(|r| vecs[(r, target)] + noise[r] * 0.3).collect();
            let trial = Mps::from_dense(&dims, &v, &TruncationPolicy::exact()).unwrap();
            let cfg = SolverConfig::with_variance_tol(16, 1e-7);
            let (psi, rec) = dmrgx(&h, &trial, "perturbed", &cfg).unwrap();
            assert!(rec.converged);
            assert!((rec.energy - vals[target]).abs() < 1e-7, "target {target}: {} vs {}", rec.energy, vals[target]);
            assert!(dense_overlap(&vecs, target, &psi.to_dense().unwrap()) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn variance_of_two_level_superposition() {
        let h = Mpo::onsite_sum(&[diag_op(&[0.0, 2.0]), diag_op(&[0.0, 0.0])]).unwrap();
        let v = vec![C64::new(1.0 / 2f64.sqrt(), 0.0), C64::new(1.0 / 2f64.sqrt(), 0.0)];
        let psi = Mps::product_state(&[v, vec![ONE, C64::new(0.0, 0.0)]]).unwrap();
        assert!((energy_variance(&h, &psi).unwrap() - 1.0).abs() < 1e-14);
    }
}
