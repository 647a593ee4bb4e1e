//! Typicality-structured meaning spaces, miniature artificial languages, and
//! utterance parsing.
//!
//! A meaning is an (action, agent, patient) triple over an entity inventory
//! in which half the entities are role-ambiguous (they occur as both agents
//! and patients) and half are role-unambiguous. A language spec fixes the
//! marking target (object or subject), the word-order profile `p(SOV)`, and
//! the order-conditioned marking probabilities; utterances are verb-final
//! with an optional case marker `mk` placed immediately after the marked
//! noun.

mod grammar;
mod io;
mod space;

pub use grammar::{generate_corpus, parse, sample_utterance, sample_utterance_tagged};
pub use io::{read_corpus, write_corpus, write_lexicon};
pub use space::{build_meaning_space, classify_ambiguity, resample_sl_subset, split_dataset};

use serde::{Deserialize, Serialize};

/// Maximum utterance length in external tokens.
pub const MAX_UTTERANCE_LEN: usize = 10;

/// Fraction of the meaning space held out for evaluation.
pub const TEST_FRACTION_DENOM: usize = 5;

/// Fraction of the train split resampled for each agent's SL corpus.
pub const SL_RESAMPLE_FRACTION: f64 = 0.667;

/// Symbol inventory. Ids are assigned contiguously:
/// ambiguous entities, unambiguous entities, actions, marker, then the
/// internal end-of-sequence token (never part of corpora).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    n_amb: usize,
    n_unamb: usize,
    n_actions: usize,
}

impl Default for Inventory {
    fn default() -> Self {
        Inventory::new(10, 10, 8)
    }
}

impl Inventory {
    pub fn new(n_amb: usize, n_unamb: usize, n_actions: usize) -> Self {
        assert!(
            n_amb >= 1 && n_amb + n_unamb >= 2 && n_actions >= 1,
            "inventory too small: need at least one ambiguous entity, two entities, one action"
        );
        Inventory {
            n_amb,
            n_unamb,
            n_actions,
        }
    }

    pub fn n_amb(&self) -> usize {
        self.n_amb
    }

    pub fn n_unamb(&self) -> usize {
        self.n_unamb
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_entities(&self) -> usize {
        self.n_amb + self.n_unamb
    }

    /// Entities plus actions: the ids that can occur in a meaning.
    pub fn n_symbols(&self) -> usize {
        self.n_entities() + self.n_actions
    }

    pub fn marker_id(&self) -> usize {
        self.n_symbols()
    }

    /// Internal token; never appears in corpora.
    pub fn eos_id(&self) -> usize {
        self.marker_id() + 1
    }

    /// Number of external tokens: entities + actions + marker.
    pub fn external_vocab(&self) -> usize {
        self.n_symbols() + 1
    }

    /// External vocabulary plus the internal eos token.
    pub fn total_vocab(&self) -> usize {
        self.external_vocab() + 1
    }

    pub fn amb_entities(&self) -> std::ops::Range<usize> {
        0..self.n_amb
    }

    pub fn unamb_entities(&self) -> std::ops::Range<usize> {
        self.n_amb..self.n_entities()
    }

    pub fn entities(&self) -> std::ops::Range<usize> {
        0..self.n_entities()
    }

    pub fn actions(&self) -> std::ops::Range<usize> {
        self.n_entities()..self.n_symbols()
    }

    pub fn is_amb(&self, entity: usize) -> bool {
        entity < self.n_amb
    }

    pub fn is_entity(&self, id: usize) -> bool {
        id < self.n_entities()
    }

    pub fn is_action(&self, id: usize) -> bool {
        self.actions().contains(&id)
    }

    /// Human-readable display string for a token id (logs and lexicon files).
    pub fn display(&self, id: usize) -> String {
        const AMB_NAMES: [&str; 10] = [
            "alice", "bob", "carol", "dave", "erin", "frank", "grace", "henry", "ivy", "jack",
        ];
        const UNAMB_NAMES: [&str; 10] = [
            "cake", "ball", "book", "lamp", "stone", "chair", "apple", "brush", "cloud", "drum",
        ];
        const ACTION_NAMES: [&str; 8] = [
            "eat", "see", "push", "lift", "find", "hold", "chase", "paint",
        ];
        if id < self.n_amb {
            return AMB_NAMES
                .get(id)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("amb{}", id));
        }
        if id < self.n_entities() {
            let i = id - self.n_amb;
            return UNAMB_NAMES
                .get(i)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("una{}", i));
        }
        if id < self.n_symbols() {
            let i = id - self.n_entities();
            return ACTION_NAMES
                .get(i)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("act{}", i));
        }
        if id == self.marker_id() {
            return "mk".to_string();
        }
        if id == self.eos_id() {
            return "<eos>".to_string();
        }
        format!("?{}", id)
    }

    /// Looks up a display string; ids for entities, actions and the marker.
    pub fn id_of(&self, name: &str) -> Option<usize> {
        (0..=self.eos_id()).find(|&id| self.display(id) == name)
    }
}

/// An action/agent/patient triple (all fields are symbol ids).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Meaning {
    pub action: usize,
    pub agent: usize,
    pub patient: usize,
}

/// Which grammatical role carries the optional case marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    ObjectMarking,
    SubjectMarking,
}

impl Condition {
    /// The noun the marker attaches to for meaning `m`.
    pub fn marked_noun(&self, m: &Meaning) -> usize {
        match self {
            Condition::ObjectMarking => m.patient,
            Condition::SubjectMarking => m.agent,
        }
    }

    /// The role slot that is free to hold either entity class: the patient in
    /// the object-marking condition, the agent in the subject-marking one.
    pub fn free_role_entity(&self, m: &Meaning) -> usize {
        match self {
            Condition::ObjectMarking => m.patient,
            Condition::SubjectMarking => m.agent,
        }
    }
}

/// Role-ambiguity class of a meaning (see [`classify_ambiguity`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ambiguity {
    Amb,
    NotAmb,
}

/// A miniature language: marking condition plus order and order-conditioned
/// marking probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanguageSpec {
    pub condition: Condition,
    pub p_sov: f64,
    pub p_mk_sov: f64,
    pub p_mk_osv: f64,
}

impl LanguageSpec {
    /// Object-marking, 60% SOV, 67% marking given SOV, 50% given OSV.
    pub fn dominant_object() -> Self {
        LanguageSpec {
            condition: Condition::ObjectMarking,
            p_sov: 0.60,
            p_mk_sov: 0.67,
            p_mk_osv: 0.50,
        }
    }

    /// Object-marking, 50% SOV, 67% marking in both orders.
    pub fn neutral_object() -> Self {
        LanguageSpec {
            condition: Condition::ObjectMarking,
            p_sov: 0.50,
            p_mk_sov: 0.67,
            p_mk_osv: 0.67,
        }
    }

    /// Subject-marking, 50% SOV, 67% marking in both orders.
    pub fn neutral_subject() -> Self {
        LanguageSpec {
            condition: Condition::SubjectMarking,
            p_sov: 0.50,
            p_mk_sov: 0.67,
            p_mk_osv: 0.67,
        }
    }

    pub fn overall_marking(&self) -> f64 {
        self.p_sov * self.p_mk_sov + (1.0 - self.p_sov) * self.p_mk_osv
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (name, p) in [
            ("p_sov", self.p_sov),
            ("p_mk_sov", self.p_mk_sov),
            ("p_mk_osv", self.p_mk_osv),
        ] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(crate::Error::Config(format!(
                    "{} must be a probability in [0,1], got {}",
                    name, p
                )));
            }
        }
        Ok(())
    }
}

/// A bounded sequence of external token ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Utterance {
    tokens: Vec<usize>,
}

impl Utterance {
    pub fn new(tokens: Vec<usize>) -> Self {
        assert!(
            tokens.len() <= MAX_UTTERANCE_LEN,
            "utterance longer than {} tokens",
            MAX_UTTERANCE_LEN
        );
        Utterance { tokens }
    }

    pub fn tokens(&self) -> &[usize] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn display(&self, inv: &Inventory) -> String {
        self.tokens
            .iter()
            .map(|&t| inv.display(t))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Surface word order of a well-formed utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Sov,
    Osv,
}

/// Outcome of parsing an utterance against an intended meaning. Order and
/// marking are only defined for well-formed utterances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseResult {
    Illformed,
    WellFormed { order: Order, marked: bool },
}

impl ParseResult {
    pub fn is_well_formed(&self) -> bool {
        matches!(self, ParseResult::WellFormed { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_inventory_vocabulary_is_29_external() {
        let inv = Inventory::default();
        assert_eq!(inv.n_entities(), 20);
        assert_eq!(inv.n_actions(), 8);
        assert_eq!(inv.external_vocab(), 29);
        assert_eq!(inv.total_vocab(), 30);
        assert_eq!(inv.marker_id(), 28);
        assert_eq!(inv.eos_id(), 29);
    }

    #[test]
    fn id_ranges_are_disjoint_and_cover() {
        let inv = Inventory::default();
        let amb: Vec<usize> = inv.amb_entities().collect();
        let unamb: Vec<usize> = inv.unamb_entities().collect();
        let actions: Vec<usize> = inv.actions().collect();
        assert_eq!(amb.len(), 10);
        assert_eq!(unamb.len(), 10);
        assert_eq!(actions.len(), 8);
        let mut all: Vec<usize> = amb
            .into_iter()
            .chain(unamb)
            .chain(actions)
            .chain([inv.marker_id(), inv.eos_id()])
            .collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 30);
    }

    #[test]
    fn table_presets_match_published_proportions() {
        let dom = LanguageSpec::dominant_object();
        assert_eq!(
            (dom.p_sov, dom.p_mk_sov, dom.p_mk_osv),
            (0.60, 0.67, 0.50)
        );
        assert_eq!(dom.condition, Condition::ObjectMarking);
        assert!((dom.overall_marking() - 0.60).abs() < 0.01);

        let nob = LanguageSpec::neutral_object();
        assert_eq!((nob.p_sov, nob.p_mk_sov, nob.p_mk_osv), (0.50, 0.67, 0.67));
        assert_eq!(nob.condition, Condition::ObjectMarking);

        let nsb = LanguageSpec::neutral_subject();
        assert_eq!((nsb.p_sov, nsb.p_mk_sov, nsb.p_mk_osv), (0.50, 0.67, 0.67));
        assert_eq!(nsb.condition, Condition::SubjectMarking);
    }

    #[test]
    fn display_names_round_trip() {
        let inv = Inventory::default();
        assert_eq!(inv.display(0), "alice");
        assert_eq!(inv.display(10), "cake");
        assert_eq!(inv.display(20), "eat");
        assert_eq!(inv.display(28), "mk");
        assert_eq!(inv.id_of("alice"), Some(0));
        assert_eq!(inv.id_of("mk"), Some(28));
        assert_eq!(inv.id_of("nope"), None);
    }

    #[test]
    #[should_panic]
    fn overlong_utterance_panics() {
        Utterance::new(vec![0; MAX_UTTERANCE_LEN + 1]);
    }

    #[test]
    fn spec_validation_rejects_bad_probabilities() {
        let mut spec = LanguageSpec::dominant_object();
        spec.p_sov = 1.5;
        assert!(spec.validate().is_err());
        spec.p_sov = f64::NAN;
        assert!(spec.validate().is_err());
        assert!(LanguageSpec::neutral_subject().validate().is_ok());
    }
}
