//! Thin wrappers over `faer` dense decompositions.
//!
//! Everything here runs with sequential parallelism so results are bit-for-bit
//! reproducible for identical inputs.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) const PAR: Par = Par::Seq;

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn sym_eigh(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    let vals = evd.S().column_vector().iter().copied().collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
pub fn herm_eigh(a: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver failed: {e:?}")))?;
    let vals = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Thin SVD `a = U diag(s) V^†`; singular values descending.
pub fn svd(a: MatRef<'_, C64>) -> Result<(Mat<C64>, Vec<f64>, Mat<C64>)> {
    let dec = a
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))?;
    let s = dec.S().column_vector().iter().map(|z| z.re).collect();
    Ok((dec.U().to_owned(), s, dec.V().to_owned()))
}

/// Thin QR `a = Q R`.
pub fn qr(a: MatRef<'_, C64>) -> (Mat<C64>, Mat<C64>) {
    let dec = a.qr();
    (dec.compute_thin_Q(), dec.thin_R().to_owned())
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let llt = a
        .llt(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("{e:?}")))?;
    Ok(llt.L().to_owned())
}

/// Inverse of a symmetric positive-definite matrix through its Cholesky factor,
/// returned together with the 2-norm condition number.
pub fn spd_inverse(a: MatRef<'_, f64>) -> Result<(Mat<f64>, f64)> {
    let llt = a
        .llt(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("{e:?}")))?;
    let inv = llt.inverse();
    let inv = symmetrize(inv.as_ref());
    let (vals, _) = sym_eigh(a)?;
    let cond = vals.last().copied().unwrap_or(1.0) / vals[0];
    Ok((inv, cond))
}

/// General inverse via LU with partial pivoting.
pub fn inverse(a: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let n = a.nrows();
    let lu = a.partial_piv_lu();
    let inv = lu.inverse();
    let id = &inv * a;
    let err = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (id[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    if !err.is_finite() || err > 1e-6 {
        return Err(Error::Singular(format!("inverse residual {err:.3e}")));
    }
    Ok(inv)
}

pub fn symmetrize(a: MatRef<'_, f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

pub fn to_complex(a: MatRef<'_, f64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| C64::new(a[(i, j)], 0.0))
}

/// `dst = lhs * rhs` for row-major slices; used by the tensor contraction kernel.
pub(crate) fn matmul_row_major(
    dst: &mut [C64],
    lhs: &[C64],
    rhs: &[C64],
    m: usize,
    k: usize,
    n: usize,
) {
    debug_assert_eq!(lhs.len(), m * k);
    debug_assert_eq!(rhs.len(), k * n);
    debug_assert_eq!(dst.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        dst.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        return;
    }
    let l = MatRef::from_row_major_slice(lhs, m, k);
    let r = MatRef::from_row_major_slice(rhs, k, n);
    let d = faer::MatMut::from_row_major_slice_mut(dst, m, n);
    faer::linalg::matmul::matmul(d, Accum::Replace, l, r, C64::new(1.0, 0.0), PAR);
}

pub fn max_abs_diff_c(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn frobenius_c(a: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn frobenius(a: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_eigh_two_by_two() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { 2.0 } else { 1.0 });
        let (vals, _) = sym_eigh(a.as_ref()).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn spd_inverse_reports_condition() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { [1.0, 1e-3][i] } else { 0.0 });
        let (inv, cond) = spd_inverse(a.as_ref()).unwrap();
        assert!((inv[(1, 1)] - 1e3).abs() < 1e-9);
        assert!((cond - 1e3).abs() < 1e-6);
    }

    #[test]
    fn matmul_row_major_matches_naive() {
        let lhs: Vec<C64> = (0..6).map(|x| C64::new(x as f64, 1.0)).collect();
        let rhs: Vec<C64> = (0..12).map(|x| C64::new(1.0, x as f64)).collect();
        let mut out = vec![C64::new(0.0, 0.0); 8];
        matmul_row_major(&mut out, &lhs, &rhs, 2, 3, 4);
        for i in 0..2 {
            for j in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..3 {
                    acc += lhs[i * 3 + k] * rhs[k * 4 + j];
                }
                assert!((acc - out[i * 4 + j]).norm() < 1e-12);
            }
        }
    }
}
