//! Speaker and listener networks with tied meaning and word embeddings.
//!
//! One agent owns both directions: a linear-to-RNN speaker (meaning in,
//! token sequence out) and an RNN-to-linear listener (token sequence in,
//! meaning distributions out). The meaning and word embedding tables are
//! single shared parameters referenced by both paths.

use serde::{Deserialize, Serialize};

use crate::language::{Inventory, Meaning};
use crate::nn::{
    adam_step, entropy, entropy_grad, log_prob, sample_categorical, softmax, softmax_xent,
    AdamHyper, Embedding, GruCache, GruParams, Linear, Param,
};
use crate::rng::SimRng;
use crate::scalar::Scalar;
use crate::tensor::Tensor1;

/// Network dimensions. Defaults: 8-dim meaning embeddings, 16-dim word
/// embeddings, 16-dim GRUs, utterances capped at 10 words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDims {
    pub n_entities: usize,
    pub n_actions: usize,
    pub meaning_dim: usize,
    pub word_dim: usize,
    pub hidden_dim: usize,
    pub max_len: usize,
}

impl AgentDims {
    pub fn for_inventory(inv: &Inventory) -> Self {
        AgentDims {
            n_entities: inv.n_entities(),
            n_actions: inv.n_actions(),
            meaning_dim: 8,
            word_dim: 16,
            hidden_dim: 16,
            max_len: crate::language::MAX_UTTERANCE_LEN,
        }
    }

    /// Rows of the meaning embedding table: entities + actions.
    pub fn n_symbols(&self) -> usize {
        self.n_entities + self.n_actions
    }

    pub fn marker_id(&self) -> usize {
        self.n_symbols()
    }

    pub fn eos_id(&self) -> usize {
        self.n_symbols() + 1
    }

    /// Rows of the word embedding table and width of the speaker output:
    /// external vocabulary plus the internal eos token.
    pub fn vocab(&self) -> usize {
        self.n_symbols() + 2
    }
}

/// Which training path a parameter belongs to. The embedding tables are
/// shared between both paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamScope {
    Shared,
    Speaker,
    Listener,
}

/// Which parameters an optimizer step should touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    All,
    Speaker,
    Listener,
}

impl ParamGroup {
    pub fn includes(&self, scope: ParamScope) -> bool {
        match self {
            ParamGroup::All => true,
            ParamGroup::Speaker => scope != ParamScope::Listener,
            ParamGroup::Listener => scope != ParamScope::Speaker,
        }
    }
}

/// All trainable state of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentParams<S> {
    dims: AgentDims,
    pub meaning_emb: Embedding<S>,
    pub word_emb: Embedding<S>,
    pub init_map: Linear<S>,
    pub speaker_gru: GruParams<S>,
    pub speaker_out: Linear<S>,
    pub listener_gru: GruParams<S>,
    pub head_action: Linear<S>,
    pub head_agent: Linear<S>,
    pub head_patient: Linear<S>,
}

/// Decoding mode for the speaker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    Greedy,
    Sample,
}

/// A produced utterance with the stepwise log-probabilities of the chosen
/// tokens (including the eos draw when generation ended with one).
#[derive(Debug, Clone)]
pub struct SpeakRecord<S> {
    pub tokens: Vec<usize>,
    pub log_probs: Vec<S>,
    pub ended_with_eos: bool,
}

impl<S: Scalar> SpeakRecord<S> {
    /// Token targets for a teacher-forced replay of this production.
    pub fn replay_targets(&self, eos_id: usize) -> Vec<usize> {
        let mut t = self.tokens.clone();
        if self.ended_with_eos {
            t.push(eos_id);
        }
        t
    }
}

/// Softmax-normalized distributions over the three meaning slots.
#[derive(Debug, Clone)]
pub struct ListenerOutput<S> {
    pub action: Tensor1<S>,
    pub agent: Tensor1<S>,
    pub patient: Tensor1<S>,
    entity_count: usize,
}

/// Per-head argmax; ties break to the lowest id.
pub fn predict_meaning<S: Scalar>(out: &ListenerOutput<S>) -> Meaning {
    Meaning {
        action: out.entity_count + out.action.argmax(),
        agent: out.agent.argmax(),
        patient: out.patient.argmax(),
    }
}

struct SpeakerTrace<S> {
    meaning_input: Tensor1<S>,
    fed_tokens: Vec<usize>,
    caches: Vec<GruCache<S>>,
    hiddens: Vec<Tensor1<S>>,
    logits: Vec<Tensor1<S>>,
}

struct ListenerTrace<S> {
    caches: Vec<GruCache<S>>,
    final_hidden: Tensor1<S>,
    logits: [Tensor1<S>; 3],
}

impl<S: Scalar> AgentParams<S> {
    pub fn new(dims: AgentDims) -> Self {
        AgentParams {
            dims,
            meaning_emb: Embedding::new(dims.n_symbols(), dims.meaning_dim),
            word_emb: Embedding::new(dims.vocab(), dims.word_dim),
            init_map: Linear::new(3 * dims.meaning_dim, dims.hidden_dim),
            speaker_gru: GruParams::new(dims.word_dim, dims.hidden_dim),
            speaker_out: Linear::new(dims.hidden_dim, dims.vocab()),
            listener_gru: GruParams::new(dims.word_dim, dims.hidden_dim),
            head_action: Linear::new(dims.hidden_dim, dims.n_actions),
            head_agent: Linear::new(dims.hidden_dim, dims.n_entities),
            head_patient: Linear::new(dims.hidden_dim, dims.n_entities),
        }
    }

    /// Fresh agent with U[-0.1, 0.1] matrices and zero biases.
    pub fn init(dims: AgentDims, rng: &mut SimRng) -> Self {
        let mut a = Self::new(dims);
        const LIMIT: f64 = 0.1;
        a.meaning_emb.init_uniform(rng, LIMIT);
        a.word_emb.init_uniform(rng, LIMIT);
        a.init_map.init_uniform(rng, LIMIT);
        a.speaker_gru.init_uniform(rng, LIMIT);
        a.speaker_out.init_uniform(rng, LIMIT);
        a.listener_gru.init_uniform(rng, LIMIT);
        a.head_action.init_uniform(rng, LIMIT);
        a.head_agent.init_uniform(rng, LIMIT);
        a.head_patient.init_uniform(rng, LIMIT);
        a
    }

    pub fn dims(&self) -> AgentDims {
        self.dims
    }

    /// Visits every parameter in a stable order with its name and scope.
    pub fn visit_params(&self, f: &mut impl FnMut(&'static str, ParamScope, &Param<S>)) {
        use ParamScope::*;
        f("meaning_emb", Speaker, &self.meaning_emb.table);
        f("word_emb", Shared, &self.word_emb.table);
        f("init_map.w", Speaker, &self.init_map.w);
        f("init_map.b", Speaker, &self.init_map.b);
        f("speaker_gru.w_z", Speaker, &self.speaker_gru.w_z);
        f("speaker_gru.w_r", Speaker, &self.speaker_gru.w_r);
        f("speaker_gru.w_h", Speaker, &self.speaker_gru.w_h);
        f("speaker_gru.u_z", Speaker, &self.speaker_gru.u_z);
        f("speaker_gru.u_r", Speaker, &self.speaker_gru.u_r);
        f("speaker_gru.u_h", Speaker, &self.speaker_gru.u_h);
        f("speaker_gru.b_z", Speaker, &self.speaker_gru.b_z);
        f("speaker_gru.b_r", Speaker, &self.speaker_gru.b_r);
        f("speaker_gru.b_h", Speaker, &self.speaker_gru.b_h);
        f("speaker_out.w", Speaker, &self.speaker_out.w);
        f("speaker_out.b", Speaker, &self.speaker_out.b);
        f("listener_gru.w_z", Listener, &self.listener_gru.w_z);
        f("listener_gru.w_r", Listener, &self.listener_gru.w_r);
        f("listener_gru.w_h", Listener, &self.listener_gru.w_h);
        f("listener_gru.u_z", Listener, &self.listener_gru.u_z);
        f("listener_gru.u_r", Listener, &self.listener_gru.u_r);
        f("listener_gru.u_h", Listener, &self.listener_gru.u_h);
        f("listener_gru.b_z", Listener, &self.listener_gru.b_z);
        f("listener_gru.b_r", Listener, &self.listener_gru.b_r);
        f("listener_gru.b_h", Listener, &self.listener_gru.b_h);
        f("head_action.w", Listener, &self.head_action.w);
        f("head_action.b", Listener, &self.head_action.b);
        f("head_agent.w", Listener, &self.head_agent.w);
        f("head_agent.b", Listener, &self.head_agent.b);
        f("head_patient.w", Listener, &self.head_patient.w);
        f("head_patient.b", Listener, &self.head_patient.b);
    }

    pub fn visit_params_mut(&mut self, f: &mut impl FnMut(&'static str, ParamScope, &mut Param<S>)) {
        use ParamScope::*;
        f("meaning_emb", Speaker, &mut self.meaning_emb.table);
        f("word_emb", Shared, &mut self.word_emb.table);
        f("init_map.w", Speaker, &mut self.init_map.w);
        f("init_map.b", Speaker, &mut self.init_map.b);
        f("speaker_gru.w_z", Speaker, &mut self.speaker_gru.w_z);
        f("speaker_gru.w_r", Speaker, &mut self.speaker_gru.w_r);
        f("speaker_gru.w_h", Speaker, &mut self.speaker_gru.w_h);
        f("speaker_gru.u_z", Speaker, &mut self.speaker_gru.u_z);
        f("speaker_gru.u_r", Speaker, &mut self.speaker_gru.u_r);
        f("speaker_gru.u_h", Speaker, &mut self.speaker_gru.u_h);
        f("speaker_gru.b_z", Speaker, &mut self.speaker_gru.b_z);
        f("speaker_gru.b_r", Speaker, &mut self.speaker_gru.b_r);
        f("speaker_gru.b_h", Speaker, &mut self.speaker_gru.b_h);
        f("speaker_out.w", Speaker, &mut self.speaker_out.w);
        f("speaker_out.b", Speaker, &mut self.speaker_out.b);
        f("listener_gru.w_z", Listener, &mut self.listener_gru.w_z);
        f("listener_gru.w_r", Listener, &mut self.listener_gru.w_r);
        f("listener_gru.w_h", Listener, &mut self.listener_gru.w_h);
        f("listener_gru.u_z", Listener, &mut self.listener_gru.u_z);
        f("listener_gru.u_r", Listener, &mut self.listener_gru.u_r);
        f("listener_gru.u_h", Listener, &mut self.listener_gru.u_h);
        f("listener_gru.b_z", Listener, &mut self.listener_gru.b_z);
        f("listener_gru.b_r", Listener, &mut self.listener_gru.b_r);
        f("listener_gru.b_h", Listener, &mut self.listener_gru.b_h);
        f("head_action.w", Listener, &mut self.head_action.w);
        f("head_action.b", Listener, &mut self.head_action.b);
        f("head_agent.w", Listener, &mut self.head_agent.w);
        f("head_agent.b", Listener, &mut self.head_agent.b);
        f("head_patient.w", Listener, &mut self.head_patient.w);
        f("head_patient.b", Listener, &mut self.head_patient.b);
    }

    /// Optimizer step over one parameter group; grads of stepped parameters
    /// are zeroed by the update.
    pub fn adam_step_group(&mut self, group: ParamGroup, lr: S, hyper: &AdamHyper<S>) {
        self.visit_params_mut(&mut |_, scope, p| {
            if group.includes(scope) {
                adam_step(p, lr, hyper);
            }
        });
    }

    /// Global gradient norm over one group.
    pub fn grad_norm(&self, group: ParamGroup) -> S {
        let mut acc = S::zero();
        self.visit_params(&mut |_, scope, p| {
            if group.includes(scope) {
                acc += p.grad_sq_sum();
            }
        });
        acc.sqrt()
    }

    /// Scales all gradients in a group (gradient clipping support).
    pub fn scale_grads(&mut self, group: ParamGroup, s: S) {
        self.visit_params_mut(&mut |_, scope, p| {
            if group.includes(scope) {
                p.scale_grad(s);
            }
        });
    }

    /// Concatenated [action; agent; patient] embeddings; the role of each
    /// entity is conveyed purely by its slot position.
    fn meaning_input(&self, m: &Meaning) -> Tensor1<S> {
        let d = self.dims.meaning_dim;
        let mut x = Tensor1::zeros(3 * d);
        for (slot, &id) in [m.action, m.agent, m.patient].iter().enumerate() {
            let row = self.meaning_emb.table.value().row(id);
            x.as_mut_slice()[slot * d..(slot + 1) * d].copy_from_slice(row);
        }
        x
    }

    /// Generates an utterance for `m`. The initial hidden state is the
    /// linear map of the meaning embedding; the eos embedding doubles as the
    /// begin-of-sequence input. Generation stops at eos or after `max_len`
    /// external tokens; eos never appears in `tokens`.
    pub fn speak(&self, m: &Meaning, mode: DecodeMode, rng: &mut SimRng) -> SpeakRecord<S> {
        let eos = self.dims.eos_id();
        let mut h = self.init_map.forward(&self.meaning_input(m));
        let mut prev = eos;
        let mut tokens = Vec::new();
        let mut log_probs = Vec::new();
        let mut ended_with_eos = false;
        loop {
            let x = self.word_emb.lookup(prev);
            h = self.speaker_gru.step(&x, &h);
            let logits = self.speaker_out.forward(&h);
            let tok = match mode {
                DecodeMode::Greedy => logits.argmax(),
                DecodeMode::Sample => sample_categorical(&logits, rng),
            };
            log_probs.push(log_prob(&logits, tok));
            if tok == eos {
                ended_with_eos = true;
                break;
            }
            tokens.push(tok);
            if tokens.len() == self.dims.max_len {
                break;
            }
            prev = tok;
        }
        SpeakRecord {
            tokens,
            log_probs,
            ended_with_eos,
        }
    }

    fn speaker_trace(&self, m: &Meaning, targets: &[usize]) -> SpeakerTrace<S> {
        let eos = self.dims.eos_id();
        let meaning_input = self.meaning_input(m);
        let mut h = self.init_map.forward(&meaning_input);
        let mut fed_tokens = Vec::with_capacity(targets.len());
        let mut caches = Vec::with_capacity(targets.len());
        let mut hiddens = Vec::with_capacity(targets.len());
        let mut logits = Vec::with_capacity(targets.len());
        for t in 0..targets.len() {
            let fed = if t == 0 { eos } else { targets[t - 1] };
            fed_tokens.push(fed);
            let x = self.word_emb.lookup(fed);
            let (h_next, cache) = self.speaker_gru.step_cached(&x, &h);
            logits.push(self.speaker_out.forward(&h_next));
            caches.push(cache);
            hiddens.push(h_next.clone());
            h = h_next;
        }
        SpeakerTrace {
            meaning_input,
            fed_tokens,
            caches,
            hiddens,
            logits,
        }
    }

    /// Teacher-forced token-level cross-entropy of `targets` given `m`
    /// (no gradients).
    pub fn speaker_loss(&self, m: &Meaning, targets: &[usize]) -> S {
        let trace = self.speaker_trace(m, targets);
        trace
            .logits
            .iter()
            .zip(targets)
            .map(|(l, &t)| softmax_xent(l, t).0)
            .sum()
    }

    /// Value of the objective whose gradients
    /// [`Self::speaker_forward_backward`] accumulates:
    /// `xent_scale * sum_t xent_t - entropy_scale * sum_t H_t` (no gradients).
    pub fn speaker_objective(
        &self,
        m: &Meaning,
        targets: &[usize],
        xent_scale: S,
        entropy_scale: S,
    ) -> S {
        let trace = self.speaker_trace(m, targets);
        let mut total = S::zero();
        for (logits, &t) in trace.logits.iter().zip(targets) {
            total += xent_scale * softmax_xent(logits, t).0;
            if entropy_scale != S::zero() {
                total -= entropy_scale * entropy(&softmax(logits));
            }
        }
        total
    }

    /// Teacher-forced forward/backward pass for the speaker path.
    ///
    /// Accumulates gradients of `xent_scale * sum_t xent(logits_t, target_t)
    /// - entropy_scale * sum_t H(softmax(logits_t))` into the speaker-path
    /// parameters and returns the unscaled cross-entropy sum.
    pub fn speaker_forward_backward(
        &mut self,
        m: &Meaning,
        targets: &[usize],
        xent_scale: S,
        entropy_scale: S,
    ) -> S {
        assert!(!targets.is_empty(), "speaker backward needs targets");
        let trace = self.speaker_trace(m, targets);
        let mut total = S::zero();
        let mut dh_next = Tensor1::zeros(self.dims.hidden_dim);
        for t in (0..targets.len()).rev() {
            let (loss, mut dlogits) = softmax_xent(&trace.logits[t], targets[t]);
            total += loss;
            dlogits.scale(xent_scale);
            if entropy_scale != S::zero() {
                let probs = softmax(&trace.logits[t]);
                dlogits.add_scaled(&entropy_grad(&probs), -entropy_scale);
            }
            let mut dh = self.speaker_out.backward(&trace.hiddens[t], &dlogits);
            dh.add_scaled(&dh_next, S::one());
            let (dx, dh_prev) = self.speaker_gru.backward(&trace.caches[t], &dh);
            self.word_emb.accumulate_grad(trace.fed_tokens[t], &dx);
            dh_next = dh_prev;
        }
        let dx0 = self.init_map.backward(&trace.meaning_input, &dh_next);
        let d = self.dims.meaning_dim;
        for (slot, &id) in [m.action, m.agent, m.patient].iter().enumerate() {
            let chunk = Tensor1::from_vec(dx0.as_slice()[slot * d..(slot + 1) * d].to_vec());
            self.meaning_emb.accumulate_grad(id, &chunk);
        }
        total
    }

    fn listener_trace(&self, tokens: &[usize]) -> ListenerTrace<S> {
        let mut h = Tensor1::zeros(self.dims.hidden_dim);
        let mut caches = Vec::with_capacity(tokens.len());
        for &tok in tokens {
            let x = self.word_emb.lookup(tok);
            let (h_next, cache) = self.listener_gru.step_cached(&x, &h);
            caches.push(cache);
            h = h_next;
        }
        let logits = [
            self.head_action.forward(&h),
            self.head_agent.forward(&h),
            self.head_patient.forward(&h),
        ];
        ListenerTrace {
            caches,
            final_hidden: h,
            logits,
        }
    }

    /// Encodes the utterance left-to-right from a zero hidden state and
    /// returns the three softmax-normalized head distributions. An empty
    /// utterance falls back to uniform distributions.
    pub fn listen(&self, tokens: &[usize]) -> ListenerOutput<S> {
        let dims = self.dims;
        if tokens.is_empty() {
            log::debug!("listen: empty utterance, returning uniform distributions");
            let uniform = |n: usize| {
                let v = S::one() / S::c(n as f64);
                Tensor1::from_fn(n, |_| v)
            };
            return ListenerOutput {
                action: uniform(dims.n_actions),
                agent: uniform(dims.n_entities),
                patient: uniform(dims.n_entities),
                entity_count: dims.n_entities,
            };
        }
        let trace = self.listener_trace(tokens);
        ListenerOutput {
            action: softmax(&trace.logits[0]),
            agent: softmax(&trace.logits[1]),
            patient: softmax(&trace.logits[2]),
            entity_count: dims.n_entities,
        }
    }

    fn head_targets(&self, m: &Meaning) -> [usize; 3] {
        let action_idx = m.action - self.dims.n_entities;
        [action_idx, m.agent, m.patient]
    }

    /// Sum of the three head cross-entropies for the true meaning
    /// (no gradients). Empty utterances score against the uniform fallback.
    pub fn listener_loss(&self, tokens: &[usize], m: &Meaning) -> S {
        if tokens.is_empty() {
            let d = self.dims;
            return S::c((d.n_actions as f64).ln() + 2.0 * (d.n_entities as f64).ln());
        }
        let trace = self.listener_trace(tokens);
        self.head_targets(m)
            .iter()
            .zip(&trace.logits)
            .map(|(&t, l)| softmax_xent(l, t).0)
            .sum()
    }

    /// Forward/backward pass for the listener path: cross-entropy of the
    /// true meaning under the three heads, gradients scaled by `scale`.
    /// Empty utterances contribute the constant uniform-fallback loss and no
    /// gradient.
    pub fn listener_forward_backward(&mut self, tokens: &[usize], m: &Meaning, scale: S) -> S {
        if tokens.is_empty() {
            return self.listener_loss(tokens, m);
        }
        let trace = self.listener_trace(tokens);
        let targets = self.head_targets(m);
        let mut total = S::zero();
        let mut dh = Tensor1::zeros(self.dims.hidden_dim);
        for (i, head) in [
            &mut self.head_action,
            &mut self.head_agent,
            &mut self.head_patient,
        ]
        .into_iter()
        .enumerate()
        {
            let (loss, mut dlogits) = softmax_xent(&trace.logits[i], targets[i]);
            total += loss;
            dlogits.scale(scale);
            dh.add_scaled(&head.backward(&trace.final_hidden, &dlogits), S::one());
        }
        for t in (0..tokens.len()).rev() {
            let (dx, dh_prev) = self.listener_gru.backward(&trace.caches[t], &dh);
            self.word_emb.accumulate_grad(tokens[t], &dx);
            dh = dh_prev;
        }
        total
    }
}
