//! Minimal dense row-major tensor with a `tensordot` contraction.

use num_complex::Complex64 as C64;

use crate::linalg;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self { shape: shape.to_vec(), data: vec![ZERO; n] }
    }

    pub fn from_vec(shape: &[usize], data: Vec<C64>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), data.len(), "shape {shape:?} vs {} elements", data.len());
        Self { shape: shape.to_vec(), data }
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let mut t = Self::zeros(shape);
        let mut idx = vec![0; shape.len()];
        for k in 0..t.data.len() {
            t.data[k] = f(&idx);
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        t
    }

    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut off = 0;
        for (i, (&x, &n)) in idx.iter().zip(&self.shape).enumerate() {
            debug_assert!(x < n, "index {x} out of range on axis {i} (dim {n})");
            off = off * n + x;
        }
        off
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: C64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    #[inline]
    pub fn add_at(&mut self, idx: &[usize], v: C64) {
        let o = self.offset(idx);
        self.data[o] += v;
    }

    pub fn reshape(mut self, shape: &[usize]) -> Self {
        assert_eq!(shape.iter().product::<usize>(), self.data.len(), "cannot reshape {:?} into {shape:?}", self.shape);
        self.shape = shape.to_vec();
        self
    }

    pub fn permute(&self, axes: &[usize]) -> Self {
        assert_eq!(axes.len(), self.shape.len());
        if axes.iter().enumerate().all(|(i, &a)| i == a) {
            return self.clone();
        }
        let new_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let old_strides = strides(&self.shape);
        let src_strides: Vec<usize> = axes.iter().map(|&a| old_strides[a]).collect();
        let mut out = Vec::with_capacity(self.data.len());
        let rank = new_shape.len();
        if self.data.is_empty() {
            return Self { shape: new_shape, data: out };
        }
        let mut idx = vec![0usize; rank];
        let mut src = 0usize;
        let inner = rank - 1;
        let (inner_n, inner_s) = (new_shape[inner], src_strides[inner]);
        loop {
            let mut s = src;
            for _ in 0..inner_n {
                out.push(self.data[s]);
                s += inner_s;
            }
            // advance the outer indices
            let mut ax = inner;
            loop {
                if ax == 0 {
                    return Self { shape: new_shape, data: out };
                }
                ax -= 1;
                idx[ax] += 1;
                src += src_strides[ax];
                if idx[ax] < new_shape[ax] {
                    break;
                }
                src -= src_strides[ax] * idx[ax];
                idx[ax] = 0;
            }
        }
    }

    pub fn conj(&self) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&mut self, s: C64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.scale(s);
        self
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Tensor) -> C64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn axpy(&mut self, alpha: C64, x: &Tensor) {
        debug_assert_eq!(self.data.len(), x.data.len());
        for (a, b) in self.data.iter_mut().zip(&x.data) {
            *a += alpha * b;
        }
    }

    /// Contracts `self[.., axes_a, ..]` with `other[.., axes_b, ..]`. The
    /// result carries the free axes of `self` in order, then those of `other`.
    pub fn tensordot(&self, axes_a: &[usize], other: &Tensor, axes_b: &[usize]) -> Tensor {
        assert_eq!(axes_a.len(), axes_b.len());
        for (&a, &b) in axes_a.iter().zip(axes_b) {
            assert_eq!(self.shape[a], other.shape[b], "contracted dims differ: {:?}[{a}] vs {:?}[{b}]", self.shape, other.shape);
        }
        let free_a: Vec<usize> = (0..self.shape.len()).filter(|i| !axes_a.contains(i)).collect();
        let free_b: Vec<usize> = (0..other.shape.len()).filter(|i| !axes_b.contains(i)).collect();
        let perm_a: Vec<usize> = free_a.iter().chain(axes_a).copied().collect();
        let perm_b: Vec<usize> = axes_b.iter().chain(&free_b).copied().collect();
        let a = self.permute(&perm_a);
        let b = other.permute(&perm_b);
        let m: usize = free_a.iter().map(|&i| self.shape[i]).product();
        let k: usize = axes_a.iter().map(|&i| self.shape[i]).product();
        let n: usize = free_b.iter().map(|&i| other.shape[i]).product();
        let mut out = vec![ZERO; m * n];
        linalg::matmul_row_major(&mut out, &a.data, &b.data, m, k, n);
        let shape: Vec<usize> = free_a.iter().map(|&i| self.shape[i]).chain(free_b.iter().map(|&i| other.shape[i])).collect();
        Tensor { shape, data: out }
    }
}
