//! Experiment configuration: a single TOML file with nested sections, every
//! field optional and defaulting to the reference setup, so an empty config
//! reproduces the shipped experiment.
//!
//! Seed derivation is fixed: for pair `p` of a run with `base_seed` `b`, the
//! two agents use seeds `b + 2p` and `b + 2p + 1` (so 50 pairs consume 100
//! distinct seeds). Phase substreams are selected by stream id on top of
//! those seeds: agent streams INIT=1, CORPUS=2, SL=3; pair streams (on the
//! pair seed `b + 2p`) SPLIT=10, RL=11, EVAL_CORPUS=12, EVAL=13.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::AgentDims;
use crate::language::{Inventory, LanguageSpec};
use crate::training::{RlConfig, SlConfig};
use crate::{Error, Result};

/// Agent-stream ids (keyed by the agent seed).
pub const STREAM_INIT: u64 = 1;
pub const STREAM_CORPUS: u64 = 2;
pub const STREAM_SL: u64 = 3;
/// Pair-stream ids (keyed by the pair seed).
pub const STREAM_SPLIT: u64 = 10;
pub const STREAM_RL: u64 = 11;
pub const STREAM_EVAL_CORPUS: u64 = 12;
pub const STREAM_EVAL: u64 = 13;

/// The three shipped languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    DominantObj,
    NeutralObj,
    NeutralSubj,
}

impl Preset {
    pub fn spec(&self) -> LanguageSpec {
        match self {
            Preset::DominantObj => LanguageSpec::dominant_object(),
            Preset::NeutralObj => LanguageSpec::neutral_object(),
            Preset::NeutralSubj => LanguageSpec::neutral_subject(),
        }
    }

    pub const ALL: [Preset; 3] = [Preset::DominantObj, Preset::NeutralObj, Preset::NeutralSubj];
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::DominantObj => write!(f, "dominant-obj"),
            Preset::NeutralObj => write!(f, "neutral-obj"),
            Preset::NeutralSubj => write!(f, "neutral-subj"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dominant-obj" => Ok(Preset::DominantObj),
            "neutral-obj" => Ok(Preset::NeutralObj),
            "neutral-subj" => Ok(Preset::NeutralSubj),
            other => Err(Error::Config(format!(
                "unknown preset {:?} (expected dominant-obj, neutral-obj or neutral-subj)",
                other
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct InventoryConfig {
    pub amb: usize,
    pub unamb: usize,
    pub actions: usize,
}

impl Default for InventoryConfig {
    fn default() -> Self {
        InventoryConfig {
            amb: 10,
            unamb: 10,
            actions: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub meaning_dim: usize,
    pub word_dim: usize,
    pub hidden_dim: usize,
    pub max_utterance_len: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            meaning_dim: 8,
            word_dim: 16,
            hidden_dim: 16,
            max_utterance_len: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Evaluate with sampled instead of greedy decoding.
    pub sampled: bool,
    /// Test-set accuracy curve interval in turns (rows are always written
    /// for turn 0 and the final turn).
    pub curve_every: usize,
    pub bootstrap_resamples: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            sampled: false,
            curve_every: 1,
            bootstrap_resamples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// One of the shipped languages; ignored when `language` is given.
    pub preset: Option<Preset>,
    /// Custom language overriding the preset.
    pub language: Option<LanguageSpec>,
    pub n_pairs: usize,
    pub base_seed: u64,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub inventory: InventoryConfig,
    pub network: NetworkConfig,
    pub sl: SlConfig,
    pub rl: RlConfig,
    pub eval: EvalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: None,
            language: None,
            n_pairs: 50,
            base_seed: 1,
            jobs: 0,
            out_dir: PathBuf::from("out"),
            inventory: InventoryConfig::default(),
            network: NetworkConfig::default(),
            sl: SlConfig::default(),
            rl: RlConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {}", path.display(), e)))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// The language this run uses: explicit custom spec, then preset, then
    /// the dominant-order object-marking default.
    pub fn resolved_language(&self) -> LanguageSpec {
        self.language
            .unwrap_or_else(|| self.preset.unwrap_or(Preset::DominantObj).spec())
    }

    pub fn inventory(&self) -> Inventory {
        Inventory::new(self.inventory.amb, self.inventory.unamb, self.inventory.actions)
    }

    pub fn dims(&self) -> AgentDims {
        let inv = self.inventory();
        AgentDims {
            n_entities: inv.n_entities(),
            n_actions: inv.n_actions(),
            meaning_dim: self.network.meaning_dim,
            word_dim: self.network.word_dim,
            hidden_dim: self.network.hidden_dim,
            max_len: self.network.max_utterance_len,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::Config("n_pairs must be >= 1".into()));
        }
        let iv = &self.inventory;
        if iv.amb < 1 || iv.amb + iv.unamb < 2 || iv.actions < 1 {
            return Err(Error::Config(format!(
                "inventory too small: amb={} unamb={} actions={}",
                iv.amb, iv.unamb, iv.actions
            )));
        }
        let net = &self.network;
        if net.meaning_dim == 0 || net.word_dim == 0 || net.hidden_dim == 0 || net.max_utterance_len < 4
        {
            return Err(Error::Config(
                "network dims must be positive and max_utterance_len >= 4 \
                 (the longest grammar template has 4 tokens)"
                    .into(),
            ));
        }
        if self.eval.curve_every == 0 {
            return Err(Error::Config("eval.curve_every must be >= 1".into()));
        }
        self.resolved_language().validate()?;
        self.sl.validate()?;
        self.rl.validate()?;
        Ok(())
    }

    /// Hash of everything that determines the run's outputs (scheduling
    /// knobs like `jobs` and `out_dir` excluded).
    pub fn config_hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            language: LanguageSpec,
            n_pairs: usize,
            base_seed: u64,
            inventory: &'a InventoryConfig,
            network: &'a NetworkConfig,
            sl: &'a SlConfig,
            rl: &'a RlConfig,
            eval: &'a EvalConfig,
        }
        let view = Hashed {
            language: self.resolved_language(),
            n_pairs: self.n_pairs,
            base_seed: self.base_seed,
            inventory: &self.inventory,
            network: &self.network,
            sl: &self.sl,
            rl: &self.rl,
            eval: &self.eval,
        };
        let text = toml::to_string(&view).expect("hash view serializes");
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{:02x}", b)).collect()
    }

    pub fn agent_seed(&self, pair: usize, agent: usize) -> u64 {
        debug_assert!(agent < 2);
        self.base_seed + 2 * pair as u64 + agent as u64
    }

    pub fn pair_seed(&self, pair: usize) -> u64 {
        self.base_seed + 2 * pair as u64
    }
}
