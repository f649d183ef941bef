//! Dense exact-diagonalization references for small instances.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::circuit::{CapacitanceModel, CircuitParams};
use crate::error::{Error, Result};
use crate::linalg;
use crate::localbasis::LocalBasis;
use crate::normalmodes::NormalModeData;
use crate::tn::DENSE_OPERATOR_LIMIT;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, first site most significant.
    pub eigenvectors: Option<Mat<C64>>,
    pub dims: Vec<usize>,
}

impl DenseSpectrum {
    /// Index and modulus of the eigenvector with the largest overlap with `v`.
    pub fn best_overlap(&self, v: &[C64]) -> Result<(usize, f64)> {
        let vecs = self.eigenvectors.as_ref().ok_or_else(|| Error::Numerical("spectrum stored without eigenvectors".into()))?;
        if vecs.nrows() != v.len() {
            return Err(Error::ShapeMismatch(format!("vector length {} vs {}", v.len(), vecs.nrows())));
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut best = (0, -1.0);
        for k in 0..vecs.ncols() {
            let ov = (0..v.len()).map(|r| vecs[(r, k)].conj() * v[r]).sum::<C64>().norm() / nv;
            if ov > best.1 {
                best = (k, ov);
            }
        }
        Ok(best)
    }

    /// Assigns each vector to its maximal-overlap eigenstate; two vectors
    /// claiming the same eigenstate is a label mismatch.
    pub fn assign(&self, vectors: &[Vec<C64>]) -> Result<Vec<(usize, f64)>> {
        let out = vectors.iter().map(|v| self.best_overlap(v)).collect::<Result<Vec<_>>>()?;
        for a in 0..out.len() {
            for b in a + 1..out.len() {
                if out[a].0 == out[b].0 {
                    return Err(Error::LabelMismatch(format!("vectors {a} and {b} both map to eigenstate {}", out[a].0)));
                }
            }
        }
        Ok(out)
    }
}

fn guard(dims: &[usize]) -> Result<usize> {
    let dim = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).unwrap_or(usize::MAX);
    if dim > DENSE_OPERATOR_LIMIT {
        return Err(Error::SizeGuard { dim, limit: DENSE_OPERATOR_LIMIT });
    }
    Ok(dim)
}

/// `𝟙 ⊗ … ⊗ op_site ⊗ … ⊗ 𝟙` acting on `dims`, accumulated into `acc` with
/// weight `w`. `ops` lists `(site, matrix)` pairs on distinct sites.
fn add_local_product(acc: &mut Mat<C64>, dims: &[usize], ops: &[(usize, &Mat<C64>)], w: C64) {
    let dim = acc.nrows();
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    for row in 0..dim {
        // enumerate columns differing from `row` only on the listed sites
        let mut cols = vec![(row, w)];
        for &(site, m) in ops {
            let digit = (row / strides[site]) % dims[site];
            let mut next = Vec::with_capacity(cols.len() * dims[site]);
            for &(c, amp) in &cols {
                let base = c - digit * strides[site];
                for q in 0..dims[site] {
                    let x = m[(digit, q)];
                    if x != ZERO {
                        next.push((base + q * strides[site], amp * x));
                    }
                }
            }
            cols = next;
        }
        for (c, amp) in cols {
            acc[(row, c)] += amp;
        }
    }
}

/// Dense circuit Hamiltonian in the product of the local truncated bases,
/// assembled from the same `LocalBasis` matrices as the MPO builder.
pub fn dense_hamiltonian(params: &CircuitParams, model: &CapacitanceModel, bases: &[LocalBasis]) -> Result<Mat<C64>> {
    let p = params.resolved()?;
    let n = p.n_junctions;
    if bases.len() != n || model.n() != n {
        return Err(Error::ShapeMismatch("bases, model and params disagree on N_J".into()));
    }
    let dims: Vec<usize> = bases.iter().map(|b| b.d).collect();
    let dim = guard(&dims)?;
    let mut h = Mat::<C64>::zeros(dim, dim);
    let c = |m: &Mat<f64>| linalg::to_complex(m.as_ref());
    let one = C64::new(1.0, 0.0);
    for (i, b) in bases.iter().enumerate() {
        let e = c(&b.hamiltonian());
        add_local_product(&mut h, &dims, &[(i, &e)], one);
    }
    let nops: Vec<Mat<C64>> = bases.iter().map(|b| c(&b.op_n)).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && model.g[(i, j)] != 0.0 {
                add_local_product(&mut h, &dims, &[(i, &nops[i]), (j, &nops[j])], C64::new(model.g[(i, j)], 0.0));
            }
        }
    }
    if p.ej_blacksheep > 0.0 {
        let up: Vec<Mat<C64>> = bases.iter().map(|b| c(&b.op_expitheta)).collect();
        let down: Vec<Mat<C64>> = bases.iter().map(|b| c(&b.op_expitheta.transpose().to_owned())).collect();
        let ph = C64::from_polar(1.0, p.phi_ext);
        let up_ops: Vec<(usize, &Mat<C64>)> = up.iter().enumerate().collect();
        let down_ops: Vec<(usize, &Mat<C64>)> = down.iter().enumerate().collect();
        add_local_product(&mut h, &dims, &up_ops, ph * (-0.5 * p.ej_blacksheep));
        add_local_product(&mut h, &dims, &down_ops, ph.conj() * (-0.5 * p.ej_blacksheep));
    }
    Ok(h)
}

/// Lowest `m` eigenpairs of a Hermitian matrix.
pub fn dense_eigensolve(h: &Mat<C64>, m: usize) -> Result<DenseSpectrum> {
    let n = h.nrows();
    let scale = linalg::frobenius_c(h.as_ref()).max(1.0);
    let herm = linalg::max_abs_diff_c(h.as_ref(), h.adjoint().to_owned().as_ref());
    if herm > 1e-10 * scale {
        return Err(Error::Numerical(format!("matrix is not Hermitian (deviation {herm:.3e})")));
    }
    let (vals, vecs) = linalg::herm_eigh(h.as_ref())?;
    let m = m.min(n);
    Ok(DenseSpectrum {
        eigenvalues: vals[..m].to_vec(),
        eigenvectors: Some(vecs.get(.., ..m).to_owned()),
        dims: vec![n],
    })
}

/// `b̂` truncated to `cutoff` Fock levels.
fn fock_annihilation(cutoff: usize) -> Mat<C64> {
    Mat::from_fn(cutoff, cutoff, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { ZERO })
}

/// Dense matrix of the quadratic model `½θᵀKθ + ½nᵀGn` with
/// `θ̂_i = √(η_i/2)(b̂_i + b̂†_i)` and `n̂_i = −i(b̂_i − b̂†_i)/√(2η_i)` in a
/// truncated Fock space of `cutoff` levels per junction. On-site squares are
/// formed one level above the cutoff and then truncated.
pub fn dense_bosonic_matrix(nm: &NormalModeData, cutoff: usize) -> Result<Mat<C64>> {
    let n = nm.n();
    let dims = vec![cutoff; n];
    let dim = guard(&dims)?;
    let ops = |c: usize| -> (Vec<Mat<C64>>, Vec<Mat<C64>>) {
        let b = fock_annihilation(c);
        let bd = b.adjoint().to_owned();
        let theta = nm.etas.iter().map(|&e| (&b + &bd) * faer::Scale(C64::new((e / 2.0).sqrt(), 0.0))).collect();
        let charge = nm.etas.iter().map(|&e| (&b - &bd) * faer::Scale(C64::new(0.0, -1.0 / (2.0 * e).sqrt()))).collect();
        (theta, charge)
    };
    let (theta, charge) = ops(cutoff);
    let (theta_up, charge_up) = ops(cutoff + 1);
    let square = |m: &Mat<C64>| (m * m).get(..cutoff, ..cutoff).to_owned();
    let form = nm.form();
    let mut h = Mat::<C64>::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            for (blk, ops, up) in [(&form.k, &theta, &theta_up), (&form.g, &charge, &charge_up)] {
                let w = 0.5 * blk[(i, j)];
                if w == 0.0 {
                    continue;
                }
                if i == j {
                    add_local_product(&mut h, &dims, &[(i, &square(&up[i]))], C64::new(w, 0.0));
                } else {
                    add_local_product(&mut h, &dims, &[(i, &ops[i]), (j, &ops[j])], C64::new(w, 0.0));
                }
            }
        }
    }
    Ok(h)
}

/// [`dense_bosonic_matrix`] plus the exact black-sheep term
/// `−E^b_J cos(Σθ̂_i + φ_ext)`: the linear-array fluxonium model.
pub fn dense_linear_array_fluxonium(nm: &NormalModeData, ejb: f64, phi_ext: f64, cutoff: usize) -> Result<Mat<C64>> {
    let mut h = dense_bosonic_matrix(nm, cutoff)?;
    if ejb == 0.0 {
        return Ok(h);
    }
    let n = nm.n();
    let dims = vec![cutoff; n];
    let big = cutoff + 40;
    let b = fock_annihilation(big);
    let disp: Vec<Mat<C64>> = nm
        .etas
        .iter()
        .map(|&e| {
            let z = (e / 2.0).sqrt();
            let x = Mat::from_fn(big, big, |i, j| (b[(i, j)] + b[(j, i)]).re * z);
            let (vals, v) = linalg::sym_eigh(x.as_ref()).expect("symmetric eigensolve");
            let vc = linalg::to_complex(v.as_ref());
            let d = Mat::from_fn(big, big, |i, j| if i == j { C64::from_polar(1.0, vals[i]) } else { ZERO });
            (&vc * &d * vc.adjoint()).get(..cutoff, ..cutoff).to_owned()
        })
        .collect();
    let down: Vec<Mat<C64>> = disp.iter().map(|m| m.adjoint().to_owned()).collect();
    let ph = C64::from_polar(1.0, phi_ext);
    let up_ops: Vec<(usize, &Mat<C64>)> = disp.iter().enumerate().collect();
    let down_ops: Vec<(usize, &Mat<C64>)> = down.iter().enumerate().collect();
    add_local_product(&mut h, &dims, &up_ops, ph * (-0.5 * ejb));
    add_local_product(&mut h, &dims, &down_ops, ph.conj() * (-0.5 * ejb));
    Ok(h)
}

/// Walsh–Hadamard χ on dense eigenvalues, with the four states identified by
/// maximal overlap with `[ground, 10, 01, 11]` trial vectors. Returns `χ` and
/// the matched eigenstate indices.
pub fn dense_walsh_hadamard(spec: &DenseSpectrum, trials: &[Vec<C64>; 4]) -> Result<(f64, [usize; 4])> {
    let a = spec.assign(trials)?;
    let e = |s: usize| spec.eigenvalues[a[s].0] - spec.eigenvalues[a[0].0];
    Ok((0.5 * (e(3) - e(1) - e(2)), [a[0].0, a[1].0, a[2].0, a[3].0]))
}

pub fn dense_bosonic(nm: &NormalModeData, cutoff: usize, m: usize) -> Result<DenseSpectrum> {
    let h = dense_bosonic_matrix(nm, cutoff)?;
    let mut s = dense_eigensolve(&h, m)?;
    s.dims = vec![cutoff; nm.n()];
    Ok(s)
}
