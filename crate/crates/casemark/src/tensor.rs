//! Dense vectors and row-major matrices.
//!
//! Shapes are fixed at construction and checked on every operation; a
//! mismatch is a programmer error and panics.

use crate::rng::SimRng;
use crate::scalar::Scalar;

/// A dense vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor1<S> {
    data: Vec<S>,
}

impl<S: Scalar> Tensor1<S> {
    pub fn zeros(len: usize) -> Self {
        Tensor1 {
            data: vec![S::zero(); len],
        }
    }

    pub fn from_vec(data: Vec<S>) -> Self {
        Tensor1 { data }
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> S) -> Self {
        Tensor1 {
            data: (0..len).map(f).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn fill(&mut self, v: S) {
        self.data.fill(v);
    }

    pub fn dot(&self, other: &Tensor1<S>) -> S {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &Tensor1<S>, scale: S) {
        assert_eq!(self.len(), other.len(), "add_scaled: length mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, s: S) {
        for a in &mut self.data {
            *a *= s;
        }
    }

    /// Index of the first maximum entry (ties break to the lowest index).
    pub fn argmax(&self) -> usize {
        assert!(!self.is_empty(), "argmax of empty tensor");
        let mut best = 0;
        for i in 1..self.data.len() {
            if self.data[i] > self.data[best] {
                best = i;
            }
        }
        best
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.data.iter()
    }

    pub fn norm(&self) -> S {
        self.dot(self).sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<S: Scalar> std::ops::Index<usize> for Tensor1<S> {
    type Output = S;
    #[inline]
    fn index(&self, i: usize) -> &S {
        &self.data[i]
    }
}

impl<S: Scalar> std::ops::IndexMut<usize> for Tensor1<S> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut S {
        &mut self.data[i]
    }
}

/// A dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Tensor2<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2 {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[S] {
        assert!(r < self.rows, "row {} out of range ({})", r, self.rows);
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        assert!(r < self.rows, "row {} out of range ({})", r, self.rows);
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn fill(&mut self, v: S) {
        self.data.fill(v);
    }

    pub fn fill_uniform(&mut self, rng: &mut SimRng, lo: f64, hi: f64) {
        for v in &mut self.data {
            *v = S::c(rng.uniform_in(lo, hi));
        }
    }

    /// `y = W x`
    pub fn matvec(&self, x: &Tensor1<S>) -> Tensor1<S> {
        assert_eq!(x.len(), self.cols, "matvec: {}x{} * {}", self.rows, self.cols, x.len());
        let mut y = Tensor1::zeros(self.rows);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = S::zero();
            for (w, &xv) in row.iter().zip(x.as_slice()) {
                acc += *w * xv;
            }
            y[r] = acc;
        }
        y
    }

    /// `x = W^T y`
    pub fn matvec_t(&self, y: &Tensor1<S>) -> Tensor1<S> {
        assert_eq!(y.len(), self.rows, "matvec_t: {}x{} ^T * {}", self.rows, self.cols, y.len());
        let mut x = Tensor1::zeros(self.cols);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let yv = y[r];
            for (xo, &w) in x.as_mut_slice().iter_mut().zip(row) {
                *xo += w * yv;
            }
        }
        x
    }

    /// `self += y ⊗ x` (outer product accumulation).
    pub fn add_outer(&mut self, y: &Tensor1<S>, x: &Tensor1<S>) {
        assert_eq!(y.len(), self.rows, "add_outer: row mismatch");
        assert_eq!(x.len(), self.cols, "add_outer: col mismatch");
        for r in 0..self.rows {
            let yv = y[r];
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, &xv) in row.iter_mut().zip(x.as_slice()) {
                *w += yv * xv;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<S: Scalar> std::ops::Index<(usize, usize)> for Tensor2<S> {
    type Output = S;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &S {
        assert!(r < self.rows && c < self.cols, "index ({},{}) out of range", r, c);
        &self.data[r * self.cols + c]
    }
}

impl<S: Scalar> std::ops::IndexMut<(usize, usize)> for Tensor2<S> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        assert!(r < self.rows && c < self.cols, "index ({},{}) out of range", r, c);
        &mut self.data[r * self.cols + c]
    }
}
