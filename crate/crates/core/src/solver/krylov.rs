//! Hermitian Krylov kernels: Lanczos with full reorthogonalization and MINRES.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::linalg;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

pub(crate) fn scale(x: &mut [C64], s: f64) {
    x.iter_mut().for_each(|z| *z *= s);
}

/// Removes the components along an orthonormal set, twice for stability.
pub(crate) fn project_out(v: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            axpy(v, -c, q);
        }
    }
}

/// Orthonormalizes `vecs` in order, dropping members with relative norm
/// below 1e-10 after projection.
pub(crate) fn orthonormalize(vecs: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vecs {
        let n0 = norm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        project_out(&mut w, &out);
        let n = norm(&w);
        if n > 1e-10 * n0 {
            scale(&mut w, 1.0 / n);
            out.push(w);
        }
    }
    out
}

pub(crate) struct RitzSet {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

/// `m`-step Lanczos from `v0` with full reorthogonalization, restricted to the
/// complement of the orthonormal set `deflate`. Stops early on an invariant
/// subspace.
pub(crate) fn lanczos<F>(op: &F, v0: &[C64], m: usize, deflate: &[Vec<C64>]) -> Result<RitzSet>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = v0.len();
    let mut q0 = v0.to_vec();
    project_out(&mut q0, deflate);
    let nq = norm(&q0);
    if nq < 1e-300 {
        return Ok(RitzSet { values: Vec::new(), vectors: Vec::new() });
    }
    scale(&mut q0, 1.0 / nq);
    let mut qs: Vec<Vec<C64>> = vec![q0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let m = m.min(n.saturating_sub(deflate.len())).max(1);
    loop {
        let k = qs.len() - 1;
        let mut w = op(&qs[k]);
        project_out(&mut w, deflate);
        let a = dot(&qs[k], &w).re;
        alpha.push(a);
        // full reorthogonalization against the whole Krylov basis
        for _ in 0..2 {
            for q in &qs {
                let c = dot(q, &w);
                axpy(&mut w, -c, q);
            }
        }
        project_out(&mut w, deflate);
        let b = norm(&w);
        if qs.len() >= m || b < 1e-12 * a.abs().max(1.0) {
            break;
        }
        beta.push(b);
        scale(&mut w, 1.0 / b);
        qs.push(w);
    }
    let k = alpha.len();
    let t = Mat::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let (vals, vecs) = linalg::sym_eigh(t.as_ref())?;
    let vectors = (0..k)
        .map(|c| {
            let mut y = vec![ZERO; n];
            for (r, q) in qs.iter().enumerate().take(k) {
                axpy(&mut y, C64::new(vecs[(r, c)], 0.0), q);
            }
            let ny = norm(&y);
            scale(&mut y, 1.0 / ny);
            y
        })
        .collect();
    Ok(RitzSet { values: vals, vectors })
}

pub(crate) struct MinresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `(A − shift)x = b` for Hermitian `A` (possibly indefinite), with
/// every iterate kept in the complement of `deflate`.
pub(crate) fn minres<F>(op: &F, b: &[C64], shift: f64, tol: f64, max_iter: usize, deflate: &[Vec<C64>]) -> MinresOutcome
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = b.len();
    let mut x = vec![ZERO; n];
    let mut r1 = b.to_vec();
    project_out(&mut r1, deflate);
    let beta1 = norm(&r1);
    if beta1 == 0.0 {
        return MinresOutcome { x, iterations: 0, relative_residual: 0.0 };
    }
    let mut r2 = r1.clone();
    let mut y = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![ZERO; n];
    let mut w2 = vec![ZERO; n];
    let mut itn = 0;
    while itn < max_iter {
        itn += 1;
        let v: Vec<C64> = y.iter().map(|z| z / beta).collect();
        y = op(&v);
        axpy(&mut y, C64::new(-shift, 0.0), &v);
        project_out(&mut y, deflate);
        if itn >= 2 {
            axpy(&mut y, C64::new(-beta / oldb, 0.0), &r1);
        }
        let alfa = dot(&v, &y).re;
        axpy(&mut y, C64::new(-alfa / beta, 0.0), &r2);
        r1 = std::mem::replace(&mut r2, y.clone());
        oldb = beta;
        beta = norm(&y);
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w.clone());
        for i in 0..n {
            w[i] = (v[i] - w1[i] * oldeps - w2[i] * delta) / gamma;
        }
        axpy(&mut x, C64::new(phi, 0.0), &w);
        if phibar < tol * beta1 || beta < 1e-14 * beta1 {
            break;
        }
    }
    MinresOutcome { x, iterations: itn, relative_residual: phibar / beta1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> Mat<C64> {
        let h = Mat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(i as f64 - 3.5, 0.0)
            } else {
                let s = ((i * 7 + j * 3) % 11) as f64 / 50.0;
                if i < j {
                    C64::new(s, 0.3 * s)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        });
        Mat::from_fn(n, n, |i, j| if i <= j { h[(i, j)] } else { h[(j, i)].conj() })
    }

    fn apply(a: &Mat<C64>, x: &[C64]) -> Vec<C64> {
        (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
    }

    #[test]
    fn lanczos_full_space_is_exact() {
        let a = test_matrix(12);
        let (vals, _) = linalg::herm_eigh(a.as_ref()).unwrap();
        let v0: Vec<C64> = (0..12).map(|i| C64::new(1.0, 0.1 * i as f64)).collect();
        let r = lanczos(&|x: &[C64]| apply(&a, x), &v0, 12, &[]).unwrap();
        for (x, y) in r.values.iter().zip(&vals) {
            assert!((x - y).abs() < 1e-10);
        }
        for (k, v) in r.vectors.iter().enumerate() {
            let av = apply(&a, v);
            let res: f64 = av.iter().zip(v).map(|(p, q)| (p - q * r.values[k]).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-9);
        }
    }

    #[test]
    fn lanczos_respects_deflation() {
        let a = test_matrix(10);
        let (vals, vecs) = linalg::herm_eigh(a.as_ref()).unwrap();
        let ground: Vec<C64> = (0..10).map(|i| vecs[(i, 0)]).collect();
        let v0: Vec<C64> = (0..10).map(|i| C64::new(1.0 + i as f64, 0.0)).collect();
        let r = lanczos(&|x: &[C64]| apply(&a, x), &v0, 10, &[ground]).unwrap();
        assert!((r.values[0] - vals[1]).abs() < 1e-10);
    }

    #[test]
    fn minres_indefinite_solve() {
        let a = test_matrix(15);
        let b: Vec<C64> = (0..15).map(|i| C64::new((i as f64).sin(), (i as f64).cos())).collect();
        let out = minres(&|x: &[C64]| apply(&a, x), &b, 0.37, 1e-12, 200, &[]);
        let mut r = apply(&a, &out.x);
        axpy(&mut r, C64::new(-0.37, 0.0), &out.x);
        let res: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        assert!(res < 1e-9 * norm(&b), "residual {res}");
    }
}
