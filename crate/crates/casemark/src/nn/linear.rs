//! Dense affine map `y = W x + b`.

use super::adam::Param;
use crate::rng::SimRng;
use crate::scalar::Scalar;
use crate::tensor::Tensor1;

#[derive(Debug, Clone, PartialEq)]
pub struct Linear<S> {
    /// out_dim x in_dim
    pub w: Param<S>,
    /// 1 x out_dim
    pub b: Param<S>,
}

impl<S: Scalar> Linear<S> {
    pub fn new(in_dim: usize, out_dim: usize) -> Self {
        Linear {
            w: Param::matrix(out_dim, in_dim),
            b: Param::vector(out_dim),
        }
    }

    /// Weights U[-limit, limit], biases zero.
    pub fn init_uniform(&mut self, rng: &mut SimRng, limit: f64) {
        self.w.init_uniform(rng, limit);
    }

    pub fn in_dim(&self) -> usize {
        self.w.value().cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.value().rows()
    }

    pub fn forward(&self, x: &Tensor1<S>) -> Tensor1<S> {
        let mut y = self.w.value().matvec(x);
        for (yo, &bv) in y.as_mut_slice().iter_mut().zip(self.b.value().row(0)) {
            *yo += bv;
        }
        y
    }

    /// Accumulates `dW += dy ⊗ x`, `db += dy`; returns `dx = W^T dy`.
    pub fn backward(&mut self, x: &Tensor1<S>, dy: &Tensor1<S>) -> Tensor1<S> {
        self.w.grad_mut().add_outer(dy, x);
        for (g, &d) in self.b.grad_mut().row_mut(0).iter_mut().zip(dy.as_slice()) {
            *g += d;
        }
        self.w.value().matvec_t(dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_applies_bias() {
        let mut lin: Linear<f64> = Linear::new(2, 2);
        lin.w.value_mut().row_mut(0).copy_from_slice(&[1.0, 0.0]);
        lin.w.value_mut().row_mut(1).copy_from_slice(&[0.0, 1.0]);
        lin.b.value_mut().row_mut(0).copy_from_slice(&[0.5, -0.5]);
        let y = lin.forward(&Tensor1::from_vec(vec![1.0, 2.0]));
        assert_eq!(y.as_slice(), &[1.5, 1.5]);
    }

    #[test]
    fn backward_accumulates() {
        let mut lin: Linear<f64> = Linear::new(2, 1);
        lin.w.value_mut().row_mut(0).copy_from_slice(&[2.0, 3.0]);
        let x = Tensor1::from_vec(vec![1.0, -1.0]);
        let dy = Tensor1::from_vec(vec![0.5]);
        let dx = lin.backward(&x, &dy);
        assert_eq!(dx.as_slice(), &[1.0, 1.5]);
        assert_eq!(lin.w.grad().as_slice(), &[0.5, -0.5]);
        assert_eq!(lin.b.grad().as_slice(), &[0.5]);
        // second pass adds on top
        lin.backward(&x, &dy);
        assert_eq!(lin.w.grad().as_slice(), &[1.0, -1.0]);
    }
}
