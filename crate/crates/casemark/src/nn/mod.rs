//! Minimal deterministic neural-network substrate: dense linear maps,
//! embedding lookups, a GRU cell with exact backward pass, softmax
//! cross-entropy, categorical sampling, and Adam updates.

mod adam;
mod embedding;
mod gru;
mod linear;
mod loss;

pub use adam::{adam_step, AdamHyper, Param};
pub use embedding::Embedding;
pub use gru::{GruCache, GruParams};
pub use linear::Linear;
pub use loss::{entropy, entropy_grad, log_prob, sample_categorical, softmax, softmax_xent};
