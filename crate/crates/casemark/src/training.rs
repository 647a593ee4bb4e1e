//! Supervised language acquisition and paired reinforcement-learning
//! interaction.
//!
//! Each agent is first trained on its own corpus with teacher forcing
//! (speaker: token-level cross-entropy; listener: summed head
//! cross-entropies; one joint Adam step per minibatch). Trained pairs then
//! play meaning-reconstruction games: the speaker samples an utterance, the
//! listener reconstructs the meaning, and the speaker is updated with
//! REINFORCE against the per-batch mean-reward baseline while the listener
//! is updated toward the true meaning. Interactive turns alternate roles by
//! a fair coin; every `self_play_interval`-th turn each agent instead speaks
//! to its own listener to preserve self-understanding.

use serde::{Deserialize, Serialize};

use crate::agents::{predict_meaning, DecodeMode, ParamGroup};
use crate::language::{Meaning, Utterance};
use crate::nn::AdamHyper;
use crate::rng::SimRng;
use crate::{AgentParams, Real, SpeakRecord};

/// Supervised-learning hyperparameters. Defaults: 60 epochs, learning rate
/// 0.01, batch size 32.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlConfig {
    pub epochs: usize,
    pub learning_rate: Real,
    pub batch_size: usize,
    /// Optional global-norm gradient clipping; off by default.
    pub grad_clip: Option<Real>,
}

impl Default for SlConfig {
    fn default() -> Self {
        SlConfig {
            epochs: 60,
            learning_rate: 0.01,
            batch_size: 32,
            grad_clip: None,
        }
    }
}

impl SlConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(crate::Error::Config(
                "sl epochs and batch_size must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(crate::Error::Config("sl learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Reinforcement-learning hyperparameters. Defaults: 200 interaction turns,
/// learning rate 0.005, 320 meanings per turn, batch size 32, self-play
/// every 5th turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlConfig {
    pub inter_turns: usize,
    pub learning_rate: Real,
    pub meanings_per_turn: usize,
    pub batch_size: usize,
    /// Every n-th turn is a self-communication turn; 0 disables self-play.
    pub self_play_interval: usize,
    /// Reward 1 only on full-meaning match instead of per-slot credit.
    pub exact_match_reward: bool,
    /// Weight the listener's cross-entropy update by the game reward.
    pub reward_weighted_listener: bool,
    /// Subtract the per-batch mean reward from each game's reward in the
    /// speaker update (variance reduction).
    pub speaker_baseline: bool,
    /// Entropy bonus weight for the speaker policy; off by default.
    pub entropy_weight: Real,
    /// Optional global-norm gradient clipping; off by default.
    pub grad_clip: Option<Real>,
}

impl Default for RlConfig {
    fn default() -> Self {
        RlConfig {
            inter_turns: 200,
            learning_rate: 0.005,
            meanings_per_turn: 320,
            batch_size: 32,
            self_play_interval: 5,
            exact_match_reward: false,
            reward_weighted_listener: false,
            speaker_baseline: true,
            entropy_weight: 0.0,
            grad_clip: None,
        }
    }
}

impl RlConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.inter_turns == 0 || self.meanings_per_turn == 0 || self.batch_size == 0 {
            return Err(crate::Error::Config(
                "rl inter_turns, meanings_per_turn and batch_size must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(crate::Error::Config("rl learning_rate must be > 0".into()));
        }
        if self.entropy_weight < 0.0 {
            return Err(crate::Error::Config("entropy_weight must be >= 0".into()));
        }
        Ok(())
    }
}

/// Per-epoch mean losses from supervised training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub speaker_loss: Real,
    pub listener_loss: Real,
}

/// Who spoke during a turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeakerRole {
    Agent(usize),
    Both,
}

impl std::fmt::Display for SpeakerRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpeakerRole::Agent(i) => write!(f, "{}", i),
            SpeakerRole::Both => write!(f, "both"),
        }
    }
}

/// Log entry for one interaction turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnLog {
    /// 1-based turn index.
    pub turn: usize,
    pub self_play: bool,
    pub speaker: SpeakerRole,
    pub mean_reward: Real,
    pub mean_accuracy: Real,
}

/// Shared communication reward: fraction of correctly reconstructed slots.
pub fn reward(m: &Meaning, predicted: &Meaning) -> Real {
    let hits = usize::from(m.action == predicted.action)
        + usize::from(m.agent == predicted.agent)
        + usize::from(m.patient == predicted.patient);
    hits as Real / 3.0
}

/// Trains one agent on its reference corpus with teacher forcing. Speaker
/// and listener are updated jointly each minibatch; the shared embeddings
/// receive gradients from both paths.
pub fn train_supervised(
    agent: &mut AgentParams,
    corpus: &[(Meaning, Utterance)],
    cfg: &SlConfig,
    rng: &mut SimRng,
) -> Vec<EpochStats> {
    assert!(!corpus.is_empty(), "supervised training needs a corpus");
    let hyper = AdamHyper::default();
    let eos = agent.dims().eos_id();
    let mut idx: Vec<usize> = (0..corpus.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut idx);
        let mut speaker_sum = 0.0;
        let mut listener_sum = 0.0;
        for batch in idx.chunks(cfg.batch_size) {
            // token-level cross-entropy: the speaker loss is averaged over
            // all target tokens of the batch, the listener loss over samples
            let batch_tokens: usize = batch.iter().map(|&i| corpus[i].1.len() + 1).sum();
            let speaker_scale = 1.0 / batch_tokens as Real;
            let listener_scale = 1.0 / batch.len() as Real;
            for &i in batch {
                let (m, u) = &corpus[i];
                let mut targets = u.tokens().to_vec();
                targets.push(eos);
                speaker_sum += agent.speaker_forward_backward(m, &targets, speaker_scale, 0.0);
                listener_sum += agent.listener_forward_backward(u.tokens(), m, listener_scale);
            }
            clip_grads(agent, ParamGroup::All, cfg.grad_clip);
            agent.adam_step_group(ParamGroup::All, cfg.learning_rate, &hyper);
        }
        curve.push(EpochStats {
            epoch,
            speaker_loss: speaker_sum / corpus.len() as Real,
            listener_loss: listener_sum / corpus.len() as Real,
        });
    }
    curve
}

fn clip_grads(agent: &mut AgentParams, group: ParamGroup, max_norm: Option<Real>) {
    if let Some(c) = max_norm {
        let norm = agent.grad_norm(group);
        if norm > c {
            agent.scale_grads(group, c / norm);
        }
    }
}

/// Coin flip assigning the speaker for an interactive turn.
pub fn draw_speaker(rng: &mut SimRng) -> usize {
    rng.below(2)
}

struct Game {
    meaning: Meaning,
    record: SpeakRecord,
    reward: Real,
    correct: bool,
}

/// Plays one batch of reconstruction games without mutating either agent.
fn play_games(
    speaker: &AgentParams,
    listener: &AgentParams,
    batch: &[Meaning],
    cfg: &RlConfig,
    rng: &mut SimRng,
) -> Vec<Game> {
    batch
        .iter()
        .map(|m| {
            let record = speaker.speak(m, DecodeMode::Sample, rng);
            let out = listener.listen(&record.tokens);
            let predicted = predict_meaning(&out);
            let correct = predicted == *m;
            let r = if cfg.exact_match_reward {
                if correct {
                    1.0
                } else {
                    0.0
                }
            } else {
                reward(m, &predicted)
            };
            Game {
                meaning: *m,
                record,
                reward: r,
                correct,
            }
        })
        .collect()
}

/// REINFORCE gradients with the per-batch mean reward as baseline: for each
/// game the replayed token cross-entropies are scaled by
/// `(reward - baseline) / batch_len`.
fn accumulate_speaker_grads(speaker: &mut AgentParams, games: &[Game], cfg: &RlConfig) {
    let n = games.len() as Real;
    let baseline = if cfg.speaker_baseline {
        games.iter().map(|g| g.reward).sum::<Real>() / n
    } else {
        0.0
    };
    let eos = speaker.dims().eos_id();
    let entropy_scale = cfg.entropy_weight / n;
    for g in games {
        let targets = g.record.replay_targets(eos);
        let scale = (g.reward - baseline) / n;
        speaker.speaker_forward_backward(&g.meaning, &targets, scale, entropy_scale);
    }
}

/// Listener gradients: cross-entropy toward the true meaning given the
/// sampled utterance (the cooperative environment knows `m`), optionally
/// weighted by the shared reward.
fn accumulate_listener_grads(listener: &mut AgentParams, games: &[Game], cfg: &RlConfig) {
    let n = games.len() as Real;
    for g in games {
        let scale = if cfg.reward_weighted_listener {
            g.reward / n
        } else {
            1.0 / n
        };
        listener.listener_forward_backward(&g.record.tokens, &g.meaning, scale);
    }
}

/// One interaction turn over `meanings`, processed in minibatches.
///
/// Interactive turns flip a single coin to assign roles for the whole turn;
/// self-play turns run each agent as speaker to its own listener over the
/// same meanings. Returns per-turn mean reward and exact-match accuracy of
/// the sampled games.
pub fn interaction_turn(
    agents: &mut [AgentParams; 2],
    meanings: &[Meaning],
    cfg: &RlConfig,
    rng: &mut SimRng,
    self_play: bool,
    turn: usize,
) -> TurnLog {
    assert!(!meanings.is_empty(), "interaction turn needs meanings");
    let hyper = AdamHyper::default();
    let mut reward_sum = 0.0;
    let mut correct_sum = 0usize;
    let mut n_games = 0usize;

    let speaker = if self_play {
        for a in 0..2 {
            for batch in meanings.chunks(cfg.batch_size) {
                let games = play_games(&agents[a], &agents[a], batch, cfg, rng);
                accumulate_speaker_grads(&mut agents[a], &games, cfg);
                accumulate_listener_grads(&mut agents[a], &games, cfg);
                clip_grads(&mut agents[a], ParamGroup::All, cfg.grad_clip);
                agents[a].adam_step_group(ParamGroup::All, cfg.learning_rate, &hyper);
                reward_sum += games.iter().map(|g| g.reward).sum::<Real>();
                correct_sum += games.iter().filter(|g| g.correct).count();
                n_games += games.len();
            }
        }
        SpeakerRole::Both
    } else {
        let s = draw_speaker(rng);
        let l = 1 - s;
        for batch in meanings.chunks(cfg.batch_size) {
            let games = play_games(&agents[s], &agents[l], batch, cfg, rng);
            accumulate_speaker_grads(&mut agents[s], &games, cfg);
            clip_grads(&mut agents[s], ParamGroup::Speaker, cfg.grad_clip);
            agents[s].adam_step_group(ParamGroup::Speaker, cfg.learning_rate, &hyper);
            accumulate_listener_grads(&mut agents[l], &games, cfg);
            clip_grads(&mut agents[l], ParamGroup::Listener, cfg.grad_clip);
            agents[l].adam_step_group(ParamGroup::Listener, cfg.learning_rate, &hyper);
            reward_sum += games.iter().map(|g| g.reward).sum::<Real>();
            correct_sum += games.iter().filter(|g| g.correct).count();
            n_games += games.len();
        }
        SpeakerRole::Agent(s)
    };

    TurnLog {
        turn,
        self_play,
        speaker,
        mean_reward: reward_sum / n_games as Real,
        mean_accuracy: correct_sum as Real / n_games as Real,
    }
}

/// Full RL phase with a per-turn observer (used for accuracy curves).
///
/// Each turn samples `meanings_per_turn` fresh meanings uniformly from the
/// train split (without replacement while it is large enough); every
/// `self_play_interval`-th turn is a self-communication turn.
pub fn run_rl_with(
    agents: &mut [AgentParams; 2],
    train: &[Meaning],
    cfg: &RlConfig,
    rng: &mut SimRng,
    mut on_turn: impl FnMut(usize, &[AgentParams; 2]),
) -> Vec<TurnLog> {
    assert!(!train.is_empty(), "rl needs a train split");
    let mut idx: Vec<usize> = (0..train.len()).collect();
    let mut logs = Vec::with_capacity(cfg.inter_turns);
    for turn in 1..=cfg.inter_turns {
        let self_play = cfg.self_play_interval > 0 && turn % cfg.self_play_interval == 0;
        let batch: Vec<Meaning> = if cfg.meanings_per_turn <= train.len() {
            rng.shuffle(&mut idx);
            idx[..cfg.meanings_per_turn]
                .iter()
                .map(|&i| train[i])
                .collect()
        } else {
            (0..cfg.meanings_per_turn)
                .map(|_| train[rng.below(train.len())])
                .collect()
        };
        logs.push(interaction_turn(agents, &batch, cfg, rng, self_play, turn));
        on_turn(turn, agents);
    }
    logs
}

/// Full RL phase; see [`run_rl_with`].
pub fn run_rl(
    agents: &mut [AgentParams; 2],
    train: &[Meaning],
    cfg: &RlConfig,
    rng: &mut SimRng,
) -> Vec<TurnLog> {
    run_rl_with(agents, train, cfg, rng, |_, _| {})
}
