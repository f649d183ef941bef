use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{compress_train, direct_sum, left_orthogonalize, right_orthogonalize, Tensor, TruncationPolicy, DENSE_STATE_LIMIT};
use crate::error::{Error, Result};

/// Matrix-product state with site tensors `A[left, phys, right]`.
#[derive(Clone, Debug)]
pub struct Mps {
    tensors: Vec<Tensor>,
}

impl Mps {
    pub fn from_tensors(tensors: Vec<Tensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::Dimension("MPS needs at least one site".into()));
        }
        for (i, t) in tensors.iter().enumerate() {
            if t.shape().len() != 3 {
                return Err(Error::ShapeMismatch(format!("site {i} has rank {}", t.shape().len())));
            }
            if i + 1 < tensors.len() && t.shape()[2] != tensors[i + 1].shape()[0] {
                return Err(Error::ShapeMismatch(format!("bond {i} mismatch")));
            }
        }
        if tensors[0].shape()[0] != 1 || tensors.last().unwrap().shape()[2] != 1 {
            return Err(Error::ShapeMismatch("boundary bonds must be 1".into()));
        }
        Ok(Self { tensors })
    }

    /// Product state `⊗_i v_i`.
    pub fn product_state(vectors: &[Vec<C64>]) -> Result<Self> {
        let tensors = vectors.iter().map(|v| Tensor::from_vec(&[1, v.len(), 1], v.clone())).collect();
        Self::from_tensors(tensors)
    }

    /// Computational basis state `|s_1 s_2 …⟩`.
    pub fn basis_state(dims: &[usize], occ: &[usize]) -> Result<Self> {
        if dims.len() != occ.len() {
            return Err(Error::ShapeMismatch("occupation length differs from site count".into()));
        }
        let vs: Vec<Vec<C64>> = dims
            .iter()
            .zip(occ)
            .map(|(&d, &s)| {
                let mut v = vec![C64::new(0.0, 0.0); d];
                if s < d {
                    v[s] = C64::new(1.0, 0.0);
                }
                v
            })
            .collect();
        if occ.iter().zip(dims).any(|(s, d)| s >= d) {
            return Err(Error::Dimension("occupation exceeds local dimension".into()));
        }
        Self::product_state(&vs)
    }

    /// Normalized random state with bonds capped at `bond`, reproducible from `seed`.
    pub fn random(dims: &[usize], bond: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = dims.len();
        let mut bonds = vec![1usize; n + 1];
        for i in 1..n {
            let left: usize = dims[..i].iter().try_fold(1usize, |a, &d| a.checked_mul(d)).unwrap_or(usize::MAX);
            let right: usize = dims[i..].iter().try_fold(1usize, |a, &d| a.checked_mul(d)).unwrap_or(usize::MAX);
            bonds[i] = bond.max(1).min(left).min(right);
        }
        let tensors = (0..n)
            .map(|i| {
                Tensor::from_fn(&[bonds[i], dims[i], bonds[i + 1]], |_| {
                    C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                })
            })
            .collect();
        let mut m = Self::from_tensors(tensors)?;
        m.normalize()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub(crate) fn tensors_mut(&mut self) -> &mut Vec<Tensor> {
        &mut self.tensors
    }

    pub fn tensor(&self, i: usize) -> &Tensor {
        &self.tensors[i]
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.shape()[1]).collect()
    }

    /// Internal bond dimensions (length `N − 1`).
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.shape()[2]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Mps) -> Result<C64> {
        if self.phys_dims() != other.phys_dims() {
            return Err(Error::ShapeMismatch("inner product of MPS with different site dimensions".into()));
        }
        let mut env = Tensor::from_vec(&[1, 1], vec![C64::new(1.0, 0.0)]);
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            // env[a, b] · conj(A)[a, s, a'] · B[b, s, b']
            let t = env.tensordot(&[1], b, &[0]); // [a, s, b']
            env = a.conj().tensordot(&[0, 1], &t, &[0, 1]); // [a', b']
        }
        Ok(env.data()[0])
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Numerical(format!("cannot normalize MPS with norm {n}")));
        }
        self.scale(C64::new(1.0 / n, 0.0));
        Ok(n)
    }

    pub fn scale(&mut self, s: C64) {
        self.tensors[0].scale(s);
    }

    /// Mixed canonical form with orthogonality center at `center`.
    pub fn canonicalize(&mut self, center: usize) {
        let n = self.len();
        let center = center.min(n - 1);
        for i in 0..center {
            left_orthogonalize(&mut self.tensors, i);
        }
        for i in (center + 1..n).rev() {
            right_orthogonalize(&mut self.tensors, i);
        }
    }

    /// SVD compression under `policy`; the norm is kept. Returns the summed
    /// relative discarded weight.
    pub fn compress(&mut self, policy: &TruncationPolicy) -> Result<f64> {
        compress_train(&mut self.tensors, policy)
    }

    /// `a + b` through the direct-sum construction followed by compression.
    pub fn add(a: &Mps, b: &Mps, policy: &TruncationPolicy) -> Result<Mps> {
        Self::lincomb(C64::new(1.0, 0.0), a, C64::new(1.0, 0.0), b, policy)
    }

    pub fn lincomb(ca: C64, a: &Mps, cb: C64, b: &Mps, policy: &TruncationPolicy) -> Result<Mps> {
        if a.phys_dims() != b.phys_dims() {
            return Err(Error::ShapeMismatch("cannot add MPS with different site dimensions".into()));
        }
        let mut m = Mps::from_tensors(direct_sum(&a.tensors, ca, &b.tensors, cb))?;
        m.compress(policy)?;
        Ok(m)
    }

    /// Full state vector, first site most significant. Refused above
    /// [`DENSE_STATE_LIMIT`] amplitudes.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        let total = self
            .phys_dims()
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .unwrap_or(usize::MAX);
        if total > DENSE_STATE_LIMIT {
            return Err(Error::SizeGuard { dim: total, limit: DENSE_STATE_LIMIT });
        }
        let mut acc = self.tensors[0].clone().reshape(&[self.tensors[0].shape()[1], self.tensors[0].shape()[2]]);
        for t in &self.tensors[1..] {
            let c = acc.tensordot(&[1], t, &[0]); // [S, s, b]
            let (sz, d, b) = (c.shape()[0], c.shape()[1], c.shape()[2]);
            acc = c.reshape(&[sz * d, b]);
        }
        Ok(acc.into_data())
    }

    /// Exact MPS of a dense vector via successive SVDs.
    pub fn from_dense(dims: &[usize], v: &[C64], policy: &TruncationPolicy) -> Result<Mps> {
        let total: usize = dims.iter().product();
        if total != v.len() {
            return Err(Error::ShapeMismatch(format!("vector length {} vs {total}", v.len())));
        }
        let n = dims.len();
        let mut tensors = Vec::with_capacity(n);
        let mut rest = Tensor::from_vec(&[1, total], v.to_vec());
        let mut left = 1;
        for i in 0..n - 1 {
            let cols = rest.len() / (left * dims[i]);
            let m = super::tensor_to_mat(&rest, left * dims[i], cols);
            let (u, s, vv) = crate::linalg::svd(m.as_ref())?;
            let (k, _) = policy.rank(&s);
            let uk = faer::Mat::from_fn(left * dims[i], k, |r, c| u[(r, c)]);
            tensors.push(Tensor::from_vec(&[left, dims[i], k], super::mat_to_vec(uk.as_ref())));
            let sv = faer::Mat::from_fn(k, cols, |r, c| vv[(c, r)].conj() * s[r]);
            rest = Tensor::from_vec(&[k, cols], super::mat_to_vec(sv.as_ref()));
            left = k;
        }
        tensors.push(rest.reshape(&[left, dims[n - 1], 1]));
        Mps::from_tensors(tensors)
    }
}
