//! Trainable parameters and the Adam optimizer.

use crate::rng::SimRng;
use crate::scalar::Scalar;
use crate::tensor::Tensor2;

/// A trainable tensor with its gradient accumulator and Adam moment buffers.
///
/// Gradients accumulate additively (`+=`) across backward passes and are
/// zeroed only by the optimizer step; there is no implicit clearing.
/// Vector-shaped parameters (biases) are stored as 1 x n matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Param<S> {
    value: Tensor2<S>,
    grad: Tensor2<S>,
    adam_m: Tensor2<S>,
    adam_v: Tensor2<S>,
    step_count: u64,
}

impl<S: Scalar> Param<S> {
    pub fn matrix(rows: usize, cols: usize) -> Self {
        Param {
            value: Tensor2::zeros(rows, cols),
            grad: Tensor2::zeros(rows, cols),
            adam_m: Tensor2::zeros(rows, cols),
            adam_v: Tensor2::zeros(rows, cols),
            step_count: 0,
        }
    }

    pub fn vector(len: usize) -> Self {
        Self::matrix(1, len)
    }

    /// Fills the value with draws from U[-limit, limit]; moments untouched.
    pub fn init_uniform(&mut self, rng: &mut SimRng, limit: f64) {
        self.value.fill_uniform(rng, -limit, limit);
    }

    #[inline]
    pub fn value(&self) -> &Tensor2<S> {
        &self.value
    }

    #[inline]
    pub fn value_mut(&mut self) -> &mut Tensor2<S> {
        &mut self.value
    }

    #[inline]
    pub fn grad(&self) -> &Tensor2<S> {
        &self.grad
    }

    #[inline]
    pub fn grad_mut(&mut self) -> &mut Tensor2<S> {
        &mut self.grad
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    #[inline]
    pub fn adam_m(&self) -> &Tensor2<S> {
        &self.adam_m
    }

    #[inline]
    pub fn adam_v(&self) -> &Tensor2<S> {
        &self.adam_v
    }

    /// Restores full optimizer state (checkpoint loading). Shapes must
    /// match the parameter.
    pub fn restore_state(
        &mut self,
        value: Tensor2<S>,
        adam_m: Tensor2<S>,
        adam_v: Tensor2<S>,
        step_count: u64,
    ) {
        for t in [&value, &adam_m, &adam_v] {
            assert_eq!(
                (t.rows(), t.cols()),
                (self.value.rows(), self.value.cols()),
                "restore_state shape mismatch"
            );
        }
        self.value = value;
        self.adam_m = adam_m;
        self.adam_v = adam_v;
        self.step_count = step_count;
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(S::zero());
    }

    pub fn grad_sq_sum(&self) -> S {
        self.grad.as_slice().iter().map(|&g| g * g).sum()
    }

    pub fn scale_grad(&mut self, s: S) {
        for g in self.grad.as_mut_slice() {
            *g *= s;
        }
    }
}

/// Adam hyperparameters; `Default` gives the standard 0.9 / 0.999 / 1e-8.
#[derive(Debug, Clone, Copy)]
pub struct AdamHyper<S> {
    pub beta1: S,
    pub beta2: S,
    pub eps: S,
}

impl<S: Scalar> Default for AdamHyper<S> {
    fn default() -> Self {
        AdamHyper {
            beta1: S::c(0.9),
            beta2: S::c(0.999),
            eps: S::c(1e-8),
        }
    }
}

/// One bias-corrected Adam update; zeroes the gradient buffer afterwards.
pub fn adam_step<S: Scalar>(p: &mut Param<S>, lr: S, h: &AdamHyper<S>) {
    p.step_count += 1;
    let t = p.step_count as i32;
    let bc1 = S::one() - h.beta1.powi(t);
    let bc2 = S::one() - h.beta2.powi(t);
    let n = p.value.len();
    for i in 0..n {
        let g = p.grad.as_slice()[i];
        let m = &mut p.adam_m.as_mut_slice()[i];
        *m = h.beta1 * *m + (S::one() - h.beta1) * g;
        let m_hat = *m / bc1;
        let v = &mut p.adam_v.as_mut_slice()[i];
        *v = h.beta2 * *v + (S::one() - h.beta2) * g * g;
        let v_hat = *v / bc2;
        p.value.as_mut_slice()[i] -= lr * m_hat / (v_hat.sqrt() + h.eps);
    }
    p.zero_grad();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param_with_grad(values: &[f64], grads: &[f64]) -> Param<f64> {
        let mut p = Param::vector(values.len());
        p.value_mut().as_mut_slice().copy_from_slice(values);
        p.grad_mut().as_mut_slice().copy_from_slice(grads);
        p
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let g = [0.7, -1.3, 2.0, -0.5];
        let mut p = param_with_grad(&[0.0; 4], &g);
        adam_step(&mut p, 0.01, &AdamHyper::default());
        for (i, &gi) in g.iter().enumerate() {
            let update = p.value().as_slice()[i];
            assert!(
                (update + 0.01 * gi.signum()).abs() < 1e-5,
                "update {} for grad {}",
                update,
                gi
            );
        }
        assert_eq!(p.step_count(), 1);
    }

    #[test]
    fn zero_grad_first_step_leaves_value_unchanged() {
        let mut p = param_with_grad(&[1.5, -2.5], &[0.0, 0.0]);
        adam_step(&mut p, 0.1, &AdamHyper::default());
        assert_eq!(p.value().as_slice(), &[1.5, -2.5]);
    }

    #[test]
    fn grad_zeroed_after_step() {
        let mut p = param_with_grad(&[0.0], &[3.0]);
        adam_step(&mut p, 0.01, &AdamHyper::default());
        assert_eq!(p.grad().as_slice(), &[0.0]);
    }

    // Scalar Adam recurrence computed directly, independent of the
    // implementation above.
    fn adam_oracle(steps: usize, grad: f64, lr: f64) -> f64 {
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let (mut x, mut m, mut v) = (0.0f64, 0.0f64, 0.0f64);
        for t in 1..=steps {
            m = b1 * m + (1.0 - b1) * grad;
            v = b2 * v + (1.0 - b2) * grad * grad;
            let m_hat = m / (1.0 - b1.powi(t as i32));
            let v_hat = v / (1.0 - b2.powi(t as i32));
            x -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        x
    }

    #[test]
    fn hundred_constant_grad_steps_match_recurrence_oracle() {
        let mut p = param_with_grad(&[0.0], &[1.0]);
        let mut prev = 0.0;
        for _ in 0..100 {
            p.grad_mut().as_mut_slice()[0] = 1.0;
            adam_step(&mut p, 0.005, &AdamHyper::default());
            let cur = p.value().as_slice()[0];
            assert!(cur < prev, "value must decrease monotonically");
            prev = cur;
        }
        let expect = adam_oracle(100, 1.0, 0.005);
        assert!(
            (prev - expect).abs() < 1e-6,
            "got {} expected {}",
            prev,
            expect
        );
    }

    #[test]
    fn steps_are_bitwise_reproducible() {
        let run = || {
            let mut rng = crate::rng::SimRng::new(99);
            let mut p: Param<f64> = Param::matrix(3, 4);
            p.init_uniform(&mut rng, 0.1);
            for step in 0..50 {
                for (i, g) in p.grad_mut().as_mut_slice().iter_mut().enumerate() {
                    *g = ((step * 31 + i) as f64).sin();
                }
                adam_step(&mut p, 0.01, &AdamHyper::default());
            }
            p.value()
                .as_slice()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<u64>>()
        };
        assert_eq!(run(), run());
    }
}
