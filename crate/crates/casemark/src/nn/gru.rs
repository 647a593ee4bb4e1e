//! Gated recurrent unit with an exact manual backward pass.
//!
//! Gate equations:
//!
//! ```text
//! z  = sigmoid(W_z x + U_z h + b_z)
//! r  = sigmoid(W_r x + U_r h + b_r)
//! h~ = tanh(W_h x + U_h (r . h) + b_h)
//! h' = (1 - z) . h + z . h~
//! ```

use super::adam::Param;
use crate::rng::SimRng;
use crate::scalar::Scalar;
use crate::tensor::Tensor1;

#[derive(Debug, Clone, PartialEq)]
pub struct GruParams<S> {
    input_dim: usize,
    hidden_dim: usize,
    pub w_z: Param<S>,
    pub w_r: Param<S>,
    pub w_h: Param<S>,
    pub u_z: Param<S>,
    pub u_r: Param<S>,
    pub u_h: Param<S>,
    pub b_z: Param<S>,
    pub b_r: Param<S>,
    pub b_h: Param<S>,
}

/// Forward intermediates needed by [`GruParams::backward`].
#[derive(Debug, Clone)]
pub struct GruCache<S> {
    x: Tensor1<S>,
    h_prev: Tensor1<S>,
    z: Tensor1<S>,
    r: Tensor1<S>,
    h_tilde: Tensor1<S>,
}

fn sigmoid<S: Scalar>(a: S) -> S {
    S::one() / (S::one() + (-a).exp())
}

impl<S: Scalar> GruParams<S> {
    pub fn new(input_dim: usize, hidden_dim: usize) -> Self {
        GruParams {
            input_dim,
            hidden_dim,
            w_z: Param::matrix(hidden_dim, input_dim),
            w_r: Param::matrix(hidden_dim, input_dim),
            w_h: Param::matrix(hidden_dim, input_dim),
            u_z: Param::matrix(hidden_dim, hidden_dim),
            u_r: Param::matrix(hidden_dim, hidden_dim),
            u_h: Param::matrix(hidden_dim, hidden_dim),
            b_z: Param::vector(hidden_dim),
            b_r: Param::vector(hidden_dim),
            b_h: Param::vector(hidden_dim),
        }
    }

    /// Weight matrices U[-limit, limit], biases zero.
    pub fn init_uniform(&mut self, rng: &mut SimRng, limit: f64) {
        for w in [
            &mut self.w_z,
            &mut self.w_r,
            &mut self.w_h,
            &mut self.u_z,
            &mut self.u_r,
            &mut self.u_h,
        ] {
            w.init_uniform(rng, limit);
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    fn gates(&self, x: &Tensor1<S>, h: &Tensor1<S>) -> (Tensor1<S>, Tensor1<S>, Tensor1<S>) {
        assert_eq!(x.len(), self.input_dim, "gru input dim mismatch");
        assert_eq!(h.len(), self.hidden_dim, "gru hidden dim mismatch");
        let mut a_z = self.w_z.value().matvec(x);
        a_z.add_scaled(&self.u_z.value().matvec(h), S::one());
        let mut a_r = self.w_r.value().matvec(x);
        a_r.add_scaled(&self.u_r.value().matvec(h), S::one());
        let mut z = a_z;
        let mut r = a_r;
        for i in 0..self.hidden_dim {
            z[i] = sigmoid(z[i] + self.b_z.value().row(0)[i]);
            r[i] = sigmoid(r[i] + self.b_r.value().row(0)[i]);
        }
        let rh = Tensor1::from_fn(self.hidden_dim, |i| r[i] * h[i]);
        let mut a_h = self.w_h.value().matvec(x);
        a_h.add_scaled(&self.u_h.value().matvec(&rh), S::one());
        let mut h_tilde = a_h;
        for i in 0..self.hidden_dim {
            h_tilde[i] = (h_tilde[i] + self.b_h.value().row(0)[i]).tanh();
        }
        (z, r, h_tilde)
    }

    fn combine(z: &Tensor1<S>, h: &Tensor1<S>, h_tilde: &Tensor1<S>) -> Tensor1<S> {
        Tensor1::from_fn(h.len(), |i| (S::one() - z[i]) * h[i] + z[i] * h_tilde[i])
    }

    /// One step without caching (evaluation / generation path).
    pub fn step(&self, x: &Tensor1<S>, h: &Tensor1<S>) -> Tensor1<S> {
        let (z, _r, h_tilde) = self.gates(x, h);
        Self::combine(&z, h, &h_tilde)
    }

    /// One step, returning the cache required for the backward pass.
    pub fn step_cached(&self, x: &Tensor1<S>, h: &Tensor1<S>) -> (Tensor1<S>, GruCache<S>) {
        let (z, r, h_tilde) = self.gates(x, h);
        let h_next = Self::combine(&z, h, &h_tilde);
        (
            h_next,
            GruCache {
                x: x.clone(),
                h_prev: h.clone(),
                z,
                r,
                h_tilde,
            },
        )
    }

    /// Backpropagates `d_next = dL/dh'` through one cached step.
    ///
    /// Parameter gradients are accumulated (`+=`); returns `(dL/dx, dL/dh)`.
    pub fn backward(&mut self, cache: &GruCache<S>, d_next: &Tensor1<S>) -> (Tensor1<S>, Tensor1<S>) {
        assert_eq!(d_next.len(), self.hidden_dim, "gru backward dim mismatch");
        let n = self.hidden_dim;
        let GruCache {
            x,
            h_prev,
            z,
            r,
            h_tilde,
        } = cache;

        let rh = Tensor1::from_fn(n, |i| r[i] * h_prev[i]);
        let dz = Tensor1::from_fn(n, |i| d_next[i] * (h_tilde[i] - h_prev[i]));
        let dh_tilde = Tensor1::from_fn(n, |i| d_next[i] * z[i]);
        let mut dh = Tensor1::from_fn(n, |i| d_next[i] * (S::one() - z[i]));

        // candidate branch
        let da_h = Tensor1::from_fn(n, |i| dh_tilde[i] * (S::one() - h_tilde[i] * h_tilde[i]));
        self.w_h.grad_mut().add_outer(&da_h, x);
        self.u_h.grad_mut().add_outer(&da_h, &rh);
        for (g, &d) in self.b_h.grad_mut().row_mut(0).iter_mut().zip(da_h.as_slice()) {
            *g += d;
        }
        let d_rh = self.u_h.value().matvec_t(&da_h);
        let dr = Tensor1::from_fn(n, |i| d_rh[i] * h_prev[i]);
        dh.add_scaled(&Tensor1::from_fn(n, |i| d_rh[i] * r[i]), S::one());

        // update gate
        let da_z = Tensor1::from_fn(n, |i| dz[i] * z[i] * (S::one() - z[i]));
        self.w_z.grad_mut().add_outer(&da_z, x);
        self.u_z.grad_mut().add_outer(&da_z, h_prev);
        for (g, &d) in self.b_z.grad_mut().row_mut(0).iter_mut().zip(da_z.as_slice()) {
            *g += d;
        }
        dh.add_scaled(&self.u_z.value().matvec_t(&da_z), S::one());

        // reset gate
        let da_r = Tensor1::from_fn(n, |i| dr[i] * r[i] * (S::one() - r[i]));
        self.w_r.grad_mut().add_outer(&da_r, x);
        self.u_r.grad_mut().add_outer(&da_r, h_prev);
        for (g, &d) in self.b_r.grad_mut().row_mut(0).iter_mut().zip(da_r.as_slice()) {
            *g += d;
        }
        dh.add_scaled(&self.u_r.value().matvec_t(&da_r), S::one());

        let mut dx = self.w_z.value().matvec_t(&da_z);
        dx.add_scaled(&self.w_r.value().matvec_t(&da_r), S::one());
        dx.add_scaled(&self.w_h.value().matvec_t(&da_h), S::one());

        (dx, dh)
    }
}
