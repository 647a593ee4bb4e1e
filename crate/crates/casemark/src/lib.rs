//! Simulation of differential case marking emergence in neural agents.
//!
//! Pairs of speaker/listener agents first acquire a miniature artificial
//! language by supervised learning, then optimize it through a
//! reinforcement-learned meaning-reconstruction game. Evaluation tracks
//! marker use and word-order preferences split by meaning typicality.
//!
//! The numeric core ([`tensor`], [`nn`]) is generic over the scalar type;
//! the simulator itself runs at f64 via the concrete aliases below.

pub mod agents;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod language;
pub mod nn;
pub mod rng;
pub mod scalar;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};

/// Scalar precision used by the shipped simulator.
pub type Real = f64;

pub type Tensor1 = tensor::Tensor1<Real>;
pub type Tensor2 = tensor::Tensor2<Real>;
pub type Param = nn::Param<Real>;
pub type GruParams = nn::GruParams<Real>;
pub type AgentParams = agents::AgentParams<Real>;
pub type SpeakRecord = agents::SpeakRecord<Real>;
pub type ListenerOutput = agents::ListenerOutput<Real>;
