//! Embedding table with per-row lookup and gradient accumulation.

use super::adam::Param;
use crate::rng::SimRng;
use crate::scalar::Scalar;
use crate::tensor::Tensor1;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<S> {
    /// rows x dim
    pub table: Param<S>,
}

impl<S: Scalar> Embedding<S> {
    pub fn new(rows: usize, dim: usize) -> Self {
        Embedding {
            table: Param::matrix(rows, dim),
        }
    }

    pub fn init_uniform(&mut self, rng: &mut SimRng, limit: f64) {
        self.table.init_uniform(rng, limit);
    }

    pub fn rows(&self) -> usize {
        self.table.value().rows()
    }

    pub fn dim(&self) -> usize {
        self.table.value().cols()
    }

    pub fn lookup(&self, idx: usize) -> Tensor1<S> {
        Tensor1::from_vec(self.table.value().row(idx).to_vec())
    }

    pub fn accumulate_grad(&mut self, idx: usize, d: &Tensor1<S>) {
        assert_eq!(d.len(), self.dim(), "embedding grad dim mismatch");
        for (g, &dv) in self.table.grad_mut().row_mut(idx).iter_mut().zip(d.as_slice()) {
            *g += dv;
        }
    }
}
