use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{compress_train, direct_sum, Mps, Tensor, TruncationPolicy, DENSE_OPERATOR_LIMIT};
use crate::error::{Error, Result};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Matrix-product operator with site tensors `W[left, out, in, right]`.
#[derive(Clone, Debug)]
pub struct Mpo {
    tensors: Vec<Tensor>,
    hermitian: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub bonds_before: Vec<usize>,
    pub bonds_after: Vec<usize>,
    pub discarded_weight: f64,
}

impl CompressionReport {
    pub fn max_before(&self) -> usize {
        self.bonds_before.iter().copied().max().unwrap_or(1)
    }

    pub fn max_after(&self) -> usize {
        self.bonds_after.iter().copied().max().unwrap_or(1)
    }
}

fn identity_tensor(d: usize) -> Tensor {
    Tensor::from_fn(&[1, d, d, 1], |ix| if ix[1] == ix[2] { ONE } else { C64::new(0.0, 0.0) })
}

fn op_tensor(op: &Mat<C64>) -> Tensor {
    let d = op.nrows();
    Tensor::from_fn(&[1, d, d, 1], |ix| op[(ix[1], ix[2])])
}

impl Mpo {
    pub fn from_tensors(tensors: Vec<Tensor>, hermitian: bool) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::Dimension("MPO needs at least one site".into()));
        }
        for (i, t) in tensors.iter().enumerate() {
            let sh = t.shape();
            if sh.len() != 4 || sh[1] != sh[2] {
                return Err(Error::ShapeMismatch(format!("site {i} has shape {sh:?}")));
            }
            if i + 1 < tensors.len() && sh[3] != tensors[i + 1].shape()[0] {
                return Err(Error::ShapeMismatch(format!("bond {i} mismatch")));
            }
        }
        if tensors[0].shape()[0] != 1 || tensors.last().unwrap().shape()[3] != 1 {
            return Err(Error::ShapeMismatch("boundary bonds must be 1".into()));
        }
        Ok(Self { tensors, hermitian })
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self { tensors: dims.iter().map(|&d| identity_tensor(d)).collect(), hermitian: true }
    }

    pub fn zero(dims: &[usize]) -> Self {
        Self { tensors: dims.iter().map(|&d| Tensor::zeros(&[1, d, d, 1])).collect(), hermitian: true }
    }

    /// Product operator `⊗_i O_i`, identity on sites without an entry.
    pub fn product_of_locals(dims: &[usize], ops: &[(usize, Mat<C64>)]) -> Result<Self> {
        let mut tensors: Vec<Tensor> = dims.iter().map(|&d| identity_tensor(d)).collect();
        for (site, op) in ops {
            if *site >= dims.len() || op.nrows() != dims[*site] || op.ncols() != dims[*site] {
                return Err(Error::ShapeMismatch(format!("local operator on site {site}")));
            }
            let t = op_tensor(op);
            let d = dims[*site];
            tensors[*site] = t.tensordot(&[2], &tensors[*site], &[1]).reshape(&[1, d, d, 1]);
        }
        Ok(Self { tensors, hermitian: false })
    }

    /// `Σ_i O_i` with the block-triangular bond-2 construction.
    pub fn onsite_sum(ops: &[Mat<C64>]) -> Result<Self> {
        let n = ops.len();
        if n == 0 {
            return Err(Error::Dimension("empty operator list".into()));
        }
        if n == 1 {
            return Self::from_tensors(vec![op_tensor(&ops[0])], false);
        }
        let zero = C64::new(0.0, 0.0);
        let tensors = ops
            .iter()
            .enumerate()
            .map(|(i, op)| {
                let d = op.nrows();
                let id = |a: usize, b: usize| if a == b { ONE } else { zero };
                if i == 0 {
                    Tensor::from_fn(&[1, d, d, 2], |ix| if ix[3] == 0 { id(ix[1], ix[2]) } else { op[(ix[1], ix[2])] })
                } else if i == n - 1 {
                    Tensor::from_fn(&[2, d, d, 1], |ix| if ix[0] == 0 { op[(ix[1], ix[2])] } else { id(ix[1], ix[2]) })
                } else {
                    Tensor::from_fn(&[2, d, d, 2], |ix| match (ix[0], ix[3]) {
                        (0, 0) | (1, 1) => id(ix[1], ix[2]),
                        (0, 1) => op[(ix[1], ix[2])],
                        _ => zero,
                    })
                }
            })
            .collect();
        Self::from_tensors(tensors, false)
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

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn set_hermitian(&mut self, flag: bool) {
        self.hermitian = flag;
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.shape()[1]).collect()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.shape()[3]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn scale(&mut self, s: C64) {
        self.tensors[0].scale(s);
        if s.im != 0.0 {
            self.hermitian = false;
        }
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.scale(s);
        self
    }

    pub fn adjoint(&self) -> Self {
        let tensors = self.tensors.iter().map(|t| t.permute(&[0, 2, 1, 3]).conj()).collect();
        Self { tensors, hermitian: self.hermitian }
    }

    fn as_train(&self) -> Vec<Tensor> {
        self.tensors
            .iter()
            .map(|t| {
                let sh = t.shape();
                t.clone().reshape(&[sh[0], sh[1] * sh[2], sh[3]])
            })
            .collect()
    }

    fn from_train(train: Vec<Tensor>, dims: &[usize], hermitian: bool) -> Self {
        let tensors = train
            .into_iter()
            .zip(dims)
            .map(|(t, &d)| {
                let sh = t.shape().to_vec();
                t.reshape(&[sh[0], d, d, sh[2]])
            })
            .collect();
        Self { tensors, hermitian }
    }

    /// `ca·a + cb·b` as a direct sum; bonds add, no compression.
    pub fn lincomb(ca: C64, a: &Mpo, cb: C64, b: &Mpo) -> Result<Mpo> {
        let dims = a.phys_dims();
        if dims != b.phys_dims() {
            return Err(Error::ShapeMismatch("cannot add MPOs with different site dimensions".into()));
        }
        let train = direct_sum(&a.as_train(), ca, &b.as_train(), cb);
        let herm = a.hermitian && b.hermitian && ca.im == 0.0 && cb.im == 0.0;
        Ok(Self::from_train(train, &dims, herm))
    }

    pub fn sum(a: &Mpo, b: &Mpo) -> Result<Mpo> {
        Self::lincomb(ONE, a, ONE, b)
    }

    /// Operator product `a·b`; bonds multiply.
    pub fn product(a: &Mpo, b: &Mpo) -> Result<Mpo> {
        if a.phys_dims() != b.phys_dims() {
            return Err(Error::ShapeMismatch("cannot multiply MPOs with different site dimensions".into()));
        }
        let tensors = a
            .tensors
            .iter()
            .zip(&b.tensors)
            .map(|(ta, tb)| {
                // A[wa, o, t, xa] · B[wb, t, i, xb] -> [wa, o, xa, wb, i, xb]
                let c = ta.tensordot(&[2], tb, &[1]);
                let (wa, d, xa, wb, xb) = (ta.shape()[0], ta.shape()[1], ta.shape()[3], tb.shape()[0], tb.shape()[3]);
                c.permute(&[0, 3, 1, 4, 2, 5]).reshape(&[wa * wb, d, d, xa * xb])
            })
            .collect();
        Ok(Self { tensors, hermitian: false })
    }

    /// SVD sweep under `policy`.
    pub fn compress(&mut self, policy: &TruncationPolicy) -> Result<CompressionReport> {
        let bonds_before = self.bond_dims();
        let dims = self.phys_dims();
        let mut train = self.as_train();
        let discarded_weight = compress_train(&mut train, policy)?;
        *self = Self::from_train(train, &dims, self.hermitian);
        Ok(CompressionReport { bonds_before, bonds_after: self.bond_dims(), discarded_weight })
    }

    pub fn compressed(mut self, policy: &TruncationPolicy) -> Result<(Mpo, CompressionReport)> {
        let r = self.compress(policy)?;
        Ok((self, r))
    }

    /// Dense matrix, first site most significant. Refused above
    /// [`DENSE_OPERATOR_LIMIT`].
    pub fn to_dense(&self) -> Result<Mat<C64>> {
        let dim = self
            .phys_dims()
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .unwrap_or(usize::MAX);
        if dim > DENSE_OPERATOR_LIMIT {
            return Err(Error::SizeGuard { dim, limit: DENSE_OPERATOR_LIMIT });
        }
        let t0 = &self.tensors[0];
        let mut acc = t0.clone().reshape(&[t0.shape()[1], t0.shape()[2], t0.shape()[3]]);
        for t in &self.tensors[1..] {
            // acc[O, I, w] · W[w, o, i, x] -> [O, I, o, i, x]
            let c = acc.tensordot(&[2], t, &[0]);
            let (o_, i_, d, x) = (c.shape()[0], c.shape()[1], c.shape()[2], c.shape()[4]);
            acc = c.permute(&[0, 2, 1, 3, 4]).reshape(&[o_ * d, i_ * d, x]);
        }
        let data = acc.data();
        Ok(Mat::from_fn(dim, dim, |i, j| data[i * dim + j]))
    }

    /// `O|ψ⟩` with bonds multiplied and no truncation.
    pub fn apply_exact(&self, psi: &Mps) -> Result<Mps> {
        if self.phys_dims() != psi.phys_dims() {
            return Err(Error::ShapeMismatch("MPO and MPS site dimensions differ".into()));
        }
        let tensors = self
            .tensors
            .iter()
            .zip(psi.tensors())
            .map(|(w, a)| {
                // A[a, s, b] · W[w, o, s, x] -> [a, b, w, o, x]
                let c = a.tensordot(&[1], w, &[2]);
                let (la, rb, lw, d, rx) = (c.shape()[0], c.shape()[1], c.shape()[2], c.shape()[3], c.shape()[4]);
                c.permute(&[0, 2, 3, 1, 4]).reshape(&[la * lw, d, rb * rx])
            })
            .collect();
        Mps::from_tensors(tensors)
    }

    /// `O|ψ⟩` compressed under `policy`; returns the discarded weight too.
    pub fn apply(&self, psi: &Mps, policy: &TruncationPolicy) -> Result<(Mps, f64)> {
        let mut out = self.apply_exact(psi)?;
        let w = out.compress(policy)?;
        Ok((out, w))
    }

    /// `⟨bra|O|ket⟩`.
    pub fn sandwich(&self, bra: &Mps, ket: &Mps) -> Result<C64> {
        let dims = self.phys_dims();
        if dims != bra.phys_dims() || dims != ket.phys_dims() {
            return Err(Error::ShapeMismatch("MPO and MPS site dimensions differ".into()));
        }
        let mut env = Tensor::from_vec(&[1, 1, 1], vec![ONE]);
        for ((w, a), b) in self.tensors.iter().zip(bra.tensors()).zip(ket.tensors()) {
            env = transfer(&env, a, w, b);
        }
        Ok(env.data()[0])
    }

    pub fn expectation(&self, psi: &Mps) -> Result<C64> {
        self.sandwich(psi, psi)
    }

    /// Real expectation value of a Hermitian operator; a non-negligible
    /// imaginary part is reported as an error.
    pub fn expectation_real(&self, psi: &Mps) -> Result<f64> {
        let z = self.expectation(psi)?;
        if z.im.abs() > 1e-8 * z.re.abs().max(1.0) {
            return Err(Error::Numerical(format!("expectation value has imaginary part {:.3e}", z.im)));
        }
        Ok(z.re)
    }

    /// `‖O|ψ⟩‖²` by a double-layer contraction, with no truncation.
    pub fn norm_sq_applied(&self, psi: &Mps) -> Result<f64> {
        if self.phys_dims() != psi.phys_dims() {
            return Err(Error::ShapeMismatch("MPO and MPS site dimensions differ".into()));
        }
        // env[a (bra), u (conj W), w (W), b (ket)]
        let mut env = Tensor::from_vec(&[1, 1, 1, 1], vec![ONE]);
        for (w, a) in self.tensors.iter().zip(psi.tensors()) {
            let t = env.tensordot(&[3], a, &[0]); // [a, u, w, s, b']
            let t = t.tensordot(&[2, 3], w, &[0, 2]); // [a, u, b', t, x]
            let t = t.tensordot(&[1, 3], &w.conj(), &[0, 1]); // [a, b', x, s', y]
            let t = a.conj().tensordot(&[0, 1], &t, &[0, 3]); // [a', b', x, y]
            env = t.permute(&[0, 3, 2, 1]);
        }
        Ok(env.data()[0].re)
    }
}

/// One step of `⟨bra|O|ket⟩`: `env[a, w, b]` → `env[a', x, b']`.
pub(crate) fn transfer(env: &Tensor, bra: &Tensor, w: &Tensor, ket: &Tensor) -> Tensor {
    let t = env.tensordot(&[2], ket, &[0]); // [a, w, s, b']
    let t = t.tensordot(&[1, 2], w, &[0, 2]); // [a, b', o, x]
    let t = bra.conj().tensordot(&[0, 1], &t, &[0, 2]); // [a', b', x]
    t.permute(&[0, 2, 1])
}

/// Mirror of [`transfer`] from the right: `env[a', x, b']` → `env[a, w, b]`.
pub(crate) fn transfer_right(env: &Tensor, bra: &Tensor, w: &Tensor, ket: &Tensor) -> Tensor {
    let t = ket.tensordot(&[2], env, &[2]); // [b, s, a', x]
    let t = w.tensordot(&[2, 3], &t, &[1, 3]); // [w, o, b, a']
    let t = bra.conj().tensordot(&[1, 2], &t, &[1, 3]); // [a, w, b]
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn rand_op(d: usize, seed: u64) -> Mat<C64> {
        let mut x = seed as f64 * 0.37 + 0.1;
        Mat::from_fn(d, d, |_, _| {
            x = (x * 7.31 + 0.13).fract();
            let re = x - 0.5;
            x = (x * 5.17 + 0.29).fract();
            C64::new(re, x - 0.5)
        })
    }

    fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
        let (m, n) = (b.nrows(), b.ncols());
        Mat::from_fn(a.nrows() * m, a.ncols() * n, |i, j| a[(i / m, j / n)] * b[(i % m, j % n)])
    }

    fn eye(d: usize) -> Mat<C64> {
        Mat::from_fn(d, d, |i, j| if i == j { ONE } else { C64::new(0.0, 0.0) })
    }

    fn random_mpo(dims: &[usize], seed: u64) -> Mpo {
        let ops: Vec<Mat<C64>> = dims.iter().enumerate().map(|(i, &d)| rand_op(d, seed + i as u64)).collect();
        let a = Mpo::onsite_sum(&ops).unwrap();
        let locals: Vec<(usize, Mat<C64>)> = dims.iter().enumerate().map(|(i, &d)| (i, rand_op(d, seed + 10 + i as u64))).collect();
        let b = Mpo::product_of_locals(dims, &locals).unwrap();
        let c = Mpo::product_of_locals(dims, &locals[..1]).unwrap();
        Mpo::sum(&Mpo::sum(&a, &b).unwrap(), &c).unwrap()
    }

    #[test]
    fn onsite_sum_dense() {
        let ops: Vec<Mat<C64>> = (0..3).map(|i| rand_op(2, i)).collect();
        let m = Mpo::onsite_sum(&ops).unwrap();
        assert_eq!(m.bond_dims(), vec![2, 2]);
        let i2 = eye(2);
        let expected = kron(&kron(&ops[0], &i2), &i2) + kron(&kron(&i2, &ops[1]), &i2) + kron(&kron(&i2, &i2), &ops[2]);
        assert!(linalg::max_abs_diff_c(m.to_dense().unwrap().as_ref(), expected.as_ref()) < 1e-14);
    }

    #[test]
    fn sum_adds_bonds() {
        let ops: Vec<Mat<C64>> = (0..4).map(|i| rand_op(3, i)).collect();
        let a = Mpo::onsite_sum(&ops).unwrap();
        let s = Mpo::sum(&a, &a).unwrap();
        assert_eq!(s.bond_dims(), vec![4, 4, 4]);
        let dense = s.to_dense().unwrap();
        let twice = a.to_dense().unwrap() * faer::Scale(C64::new(2.0, 0.0));
        assert!(linalg::max_abs_diff_c(dense.as_ref(), twice.as_ref()) < 1e-13);
    }

    #[test]
    fn product_and_apply_match_dense() {
        let dims = [2, 3, 2];
        let a = random_mpo(&dims, 1);
        let b = random_mpo(&dims, 7);
        let ab = Mpo::product(&a, &b).unwrap();
        assert_eq!(ab.max_bond(), a.max_bond() * b.max_bond());
        let expected = a.to_dense().unwrap() * b.to_dense().unwrap();
        assert!(linalg::max_abs_diff_c(ab.to_dense().unwrap().as_ref(), expected.as_ref()) < 1e-12);

        let psi = Mps::random(&dims, 3, 4).unwrap();
        let exact = a.apply_exact(&psi).unwrap();
        assert_eq!(exact.max_bond(), a.max_bond() * psi.max_bond());
        let (out, w) = a.apply(&psi, &TruncationPolicy::exact()).unwrap();
        assert!(w < 1e-20);
        let v = psi.to_dense().unwrap();
        let ad = a.to_dense().unwrap();
        let got = out.to_dense().unwrap();
        for i in 0..v.len() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..v.len() {
                acc += ad[(i, j)] * v[j];
            }
            assert!((acc - got[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn sandwich_and_double_layer() {
        let dims = [3, 2, 3];
        let a = random_mpo(&dims, 3);
        let psi = Mps::random(&dims, 4, 9).unwrap();
        let phi = Mps::random(&dims, 4, 10).unwrap();
        let ad = a.to_dense().unwrap();
        let (vp, vf) = (psi.to_dense().unwrap(), phi.to_dense().unwrap());
        let n = vp.len();
        let mut s = C64::new(0.0, 0.0);
        let mut nsq = 0.0;
        for i in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..n {
                row += ad[(i, j)] * vp[j];
            }
            s += vf[i].conj() * row;
            nsq += row.norm_sqr();
        }
        assert!((a.sandwich(&phi, &psi).unwrap() - s).norm() < 1e-12);
        assert!((a.norm_sq_applied(&psi).unwrap() - nsq).abs() < 1e-11);
    }

    #[test]
    fn right_transfer_consistent() {
        let dims = [2, 3, 2];
        let a = random_mpo(&dims, 5);
        let psi = Mps::random(&dims, 3, 2).unwrap();
        let mut env = Tensor::from_vec(&[1, 1, 1], vec![ONE]);
        for i in (0..3).rev() {
            env = transfer_right(&env, psi.tensor(i), &a.tensors()[i], psi.tensor(i));
        }
        assert!((env.data()[0] - a.expectation(&psi).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn compression_is_faithful() {
        let dims = [2, 2, 3, 2];
        let a = random_mpo(&dims, 2);
        let big = Mpo::sum(&a, &a.clone().scaled(C64::new(0.5, 0.0))).unwrap();
        let before = big.to_dense().unwrap();
        let (c, rep) = big.compressed(&TruncationPolicy::operator()).unwrap();
        assert!(rep.max_after() <= a.max_bond());
        assert!(linalg::max_abs_diff_c(c.to_dense().unwrap().as_ref(), before.as_ref()) < 1e-12);
    }

    #[test]
    fn adjoint_dense() {
        let dims = [2, 2];
        let a = random_mpo(&dims, 8);
        let d = a.to_dense().unwrap();
        let ad = a.adjoint().to_dense().unwrap();
        assert!(linalg::max_abs_diff_c(ad.as_ref(), d.adjoint().to_owned().as_ref()) < 1e-14);
    }
}
