//! Softmax cross-entropy and categorical sampling.

use crate::rng::SimRng;
use crate::scalar::Scalar;
use crate::tensor::Tensor1;

/// Max-subtraction stabilized softmax.
pub fn softmax<S: Scalar>(logits: &Tensor1<S>) -> Tensor1<S> {
    assert!(!logits.is_empty(), "softmax of empty logits");
    let max = logits
        .iter()
        .copied()
        .fold(S::neg_infinity(), |a, b| a.max(b));
    let mut out = Tensor1::from_fn(logits.len(), |i| (logits[i] - max).exp());
    let sum: S = out.iter().copied().sum();
    out.scale(S::one() / sum);
    out
}

/// Cross-entropy of `target` under `softmax(logits)`.
///
/// Returns `(loss, dL/dlogits)` where `loss = -log softmax(logits)[target]`
/// and the gradient is `softmax(logits) - onehot(target)`.
pub fn softmax_xent<S: Scalar>(logits: &Tensor1<S>, target: usize) -> (S, Tensor1<S>) {
    assert!(!logits.is_empty(), "softmax_xent of empty logits");
    assert!(
        target < logits.len(),
        "target {} out of range ({})",
        target,
        logits.len()
    );
    let max = logits
        .iter()
        .copied()
        .fold(S::neg_infinity(), |a, b| a.max(b));
    let mut grad = Tensor1::from_fn(logits.len(), |i| (logits[i] - max).exp());
    let sum: S = grad.iter().copied().sum();
    let loss = -(logits[target] - max - sum.ln());
    grad.scale(S::one() / sum);
    grad[target] -= S::one();
    (loss, grad)
}

/// Log-probability of index `idx` under `softmax(logits)`, stabilized.
pub fn log_prob<S: Scalar>(logits: &Tensor1<S>, idx: usize) -> S {
    let max = logits
        .iter()
        .copied()
        .fold(S::neg_infinity(), |a, b| a.max(b));
    let sum: S = logits.iter().map(|&l| (l - max).exp()).sum();
    logits[idx] - max - sum.ln()
}

/// Draws an index from `softmax(logits)`; deterministic given the rng state.
pub fn sample_categorical<S: Scalar>(logits: &Tensor1<S>, rng: &mut SimRng) -> usize {
    let probs = softmax(logits);
    let u = S::c(rng.uniform());
    let mut acc = S::zero();
    for i in 0..probs.len() {
        acc += probs[i];
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Shannon entropy of a probability vector.
pub fn entropy<S: Scalar>(probs: &Tensor1<S>) -> S {
    -probs
        .iter()
        .map(|&p| if p > S::zero() { p * p.ln() } else { S::zero() })
        .sum::<S>()
}

/// Gradient of the entropy `H(softmax(logits))` w.r.t. the logits:
/// `dH/dz_k = -p_k (log p_k + H)`.
pub fn entropy_grad<S: Scalar>(probs: &Tensor1<S>) -> Tensor1<S> {
    let h = entropy(probs);
    Tensor1::from_fn(probs.len(), |i| {
        let p = probs[i];
        if p > S::zero() {
            -p * (p.ln() + h)
        } else {
            S::zero()
        }
    })
}
