//! Matrix-product state and operator algebra.

mod mpo;
mod mps;
mod tensor;

pub use mpo::{CompressionReport, Mpo};
pub(crate) use mpo::{transfer, transfer_right};
pub use mps::Mps;
pub use tensor::Tensor;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest state-vector length `dense_reconstruct` will produce.
pub const DENSE_STATE_LIMIT: usize = 1_000_000;
/// Largest Hilbert-space dimension for a dense operator matrix.
pub const DENSE_OPERATOR_LIMIT: usize = 4096;
/// Discarded-weight threshold for operator algebra.
pub const OPERATOR_CUTOFF: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub max_bond: usize,
    /// Largest relative discarded weight `Σ_discarded s² / Σ s²` per bond.
    pub svd_cutoff: f64,
}

impl TruncationPolicy {
    pub fn new(max_bond: usize, svd_cutoff: f64) -> Result<Self> {
        let p = Self { max_bond, svd_cutoff };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_bond < 1 {
            return Err(Error::InvalidParams("max_bond must be >= 1".into()));
        }
        if !(0.0..=1e-4).contains(&self.svd_cutoff) {
            return Err(Error::InvalidParams(format!("svd_cutoff {} outside [0, 1e-4]", self.svd_cutoff)));
        }
        Ok(())
    }

    /// Operator algebra default: discarded weight 1e-20, so the Frobenius
    /// error of a compressed operator stays below 1e-10 of its norm; no bond cap.
    pub fn operator() -> Self {
        Self { max_bond: usize::MAX, svd_cutoff: OPERATOR_CUTOFF }
    }

    /// State truncation default: cutoff 1e-10.
    pub fn state(max_bond: usize) -> Self {
        Self { max_bond, svd_cutoff: 1e-10 }
    }

    /// No truncation beyond exact zeros.
    pub fn exact() -> Self {
        Self { max_bond: usize::MAX, svd_cutoff: 0.0 }
    }

    /// Number of singular values to keep and the relative weight discarded.
    ///
    /// Cuts fall at a fixed index: degenerate values straddling the cut are
    /// not pulled in, so the kept count is deterministic.
    pub fn rank(&self, s: &[f64]) -> (usize, f64) {
        let total: f64 = s.iter().map(|x| x * x).sum();
        if s.is_empty() {
            return (0, 0.0);
        }
        if total <= 0.0 {
            return (1, 0.0);
        }
        let mut k = s.len();
        let mut tail = 0.0;
        while k > 1 {
            let next = tail + s[k - 1] * s[k - 1];
            if next > self.svd_cutoff * total {
                break;
            }
            tail = next;
            k -= 1;
        }
        if k > self.max_bond {
            k = self.max_bond.max(1);
            tail = s[k..].iter().map(|x| x * x).sum();
        }
        (k, tail / total)
    }
}

pub(crate) fn tensor_to_mat(t: &Tensor, rows: usize, cols: usize) -> Mat<C64> {
    debug_assert_eq!(rows * cols, t.len());
    let d = t.data();
    Mat::from_fn(rows, cols, |i, j| d[i * cols + j])
}

pub(crate) fn mat_to_vec(m: faer::MatRef<'_, C64>) -> Vec<C64> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut v = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Left-canonicalizes site `i` of a rank-3 train, pushing the remainder into
/// site `i + 1`.
pub(crate) fn left_orthogonalize(train: &mut [Tensor], i: usize) {
    let sh = train[i].shape().to_vec();
    let (a, s, b) = (sh[0], sh[1], sh[2]);
    let m = tensor_to_mat(&train[i], a * s, b);
    let (q, r) = linalg::qr(m.as_ref());
    let k = q.ncols();
    train[i] = Tensor::from_vec(&[a, s, k], mat_to_vec(q.as_ref()));
    let rt = Tensor::from_vec(&[k, b], mat_to_vec(r.as_ref()));
    train[i + 1] = rt.tensordot(&[1], &train[i + 1], &[0]);
}

/// Right-canonicalizes site `i`, pushing the remainder into site `i - 1`.
pub(crate) fn right_orthogonalize(train: &mut [Tensor], i: usize) {
    let sh = train[i].shape().to_vec();
    let (a, s, b) = (sh[0], sh[1], sh[2]);
    let m = tensor_to_mat(&train[i], a, s * b);
    let (q, r) = linalg::qr(m.adjoint().to_owned().as_ref());
    // m = r† q†
    let k = q.ncols();
    train[i] = Tensor::from_vec(&[k, s, b], mat_to_vec(q.adjoint().to_owned().as_ref()));
    let rdag = Tensor::from_vec(&[a, k], mat_to_vec(r.adjoint().to_owned().as_ref()));
    train[i - 1] = train[i - 1].tensordot(&[2], &rdag, &[0]);
}

/// SVD-truncates every bond of a rank-3 train (right-to-left after a left
/// canonical sweep). Returns the summed relative discarded weight and leaves
/// the train right-canonical from site 1 on.
pub(crate) fn compress_train(train: &mut [Tensor], policy: &TruncationPolicy) -> Result<f64> {
    let n = train.len();
    if n <= 1 {
        return Ok(0.0);
    }
    for i in 0..n - 1 {
        left_orthogonalize(train, i);
    }
    let mut discarded = 0.0;
    for i in (1..n).rev() {
        let sh = train[i].shape().to_vec();
        let (a, s, b) = (sh[0], sh[1], sh[2]);
        let m = tensor_to_mat(&train[i], a, s * b);
        let (u, sv, v) = linalg::svd(m.as_ref())?;
        let (k, w) = policy.rank(&sv);
        discarded += w;
        let vh = Mat::from_fn(k, s * b, |r, c| v[(c, r)].conj());
        train[i] = Tensor::from_vec(&[k, s, b], mat_to_vec(vh.as_ref()));
        let us = Mat::from_fn(a, k, |r, c| u[(r, c)] * sv[c]);
        let ust = Tensor::from_vec(&[a, k], mat_to_vec(us.as_ref()));
        train[i - 1] = train[i - 1].tensordot(&[2], &ust, &[0]);
    }
    Ok(discarded)
}

/// Direct sum `ca·a ⊕ cb·b` of two rank-3 trains with equal physical dims.
pub(crate) fn direct_sum(a: &[Tensor], ca: C64, b: &[Tensor], cb: C64) -> Vec<Tensor> {
    let n = a.len();
    let one = C64::new(1.0, 0.0);
    if n == 1 {
        let mut t = a[0].clone().scaled(ca);
        t.axpy(cb, &b[0]);
        return vec![t];
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (ta, tb) = (&a[i], &b[i]);
        let (la, d, ra) = (ta.shape()[0], ta.shape()[1], ta.shape()[2]);
        let (lb, rb) = (tb.shape()[0], tb.shape()[2]);
        let first = i == 0;
        let last = i == n - 1;
        let l = if first { 1 } else { la + lb };
        let r = if last { 1 } else { ra + rb };
        let (fa, fb) = if first { (ca, cb) } else { (one, one) };
        let (ol, or) = (if first { 0 } else { la }, if last { 0 } else { ra });
        let mut t = Tensor::zeros(&[l, d, r]);
        let td = t.data_mut();
        for x in 0..la {
            for s in 0..d {
                for y in 0..ra {
                    td[(x * d + s) * r + y] += fa * ta.data()[(x * d + s) * ra + y];
                }
            }
        }
        for x in 0..lb {
            for s in 0..d {
                for y in 0..rb {
                    td[((x + ol) * d + s) * r + y + or] += fb * tb.data()[(x * d + s) * rb + y];
                }
            }
        }
        out.push(t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_respects_cutoff_and_cap() {
        let s = [1.0, 0.1, 1e-4, 1e-8];
        let p = TruncationPolicy { max_bond: 10, svd_cutoff: 1e-10 };
        let (k, w) = p.rank(&s);
        assert_eq!(k, 3);
        assert!(w < 1e-10);
        let p = TruncationPolicy { max_bond: 2, svd_cutoff: 0.0 };
        let (k, w) = p.rank(&s);
        assert_eq!(k, 2);
        assert!((w - (1e-8 + 1e-16) / (1.0 + 1e-2 + 1e-8 + 1e-16)).abs() < 1e-18);
    }

    #[test]
    fn degenerate_cut_is_deterministic() {
        let s = [1.0, 0.5, 0.5, 0.5];
        let p = TruncationPolicy { max_bond: 2, svd_cutoff: 0.0 };
        assert_eq!(p.rank(&s).0, 2);
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::new(0, 1e-10).is_err());
        assert!(TruncationPolicy::new(4, 1e-3).is_err());
        assert!(TruncationPolicy::new(4, 1e-10).is_ok());
    }
}
