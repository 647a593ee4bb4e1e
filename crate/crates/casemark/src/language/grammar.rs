//! Utterance sampling from a language spec and template-based parsing.

use super::{Condition, Inventory, LanguageSpec, Meaning, Order, ParseResult, Utterance};
use crate::rng::SimRng;

/// Samples one utterance for `m`, also returning the drawn order and marking
/// flags (used by round-trip tests and corpus statistics).
pub fn sample_utterance_tagged(
    inv: &Inventory,
    m: &Meaning,
    spec: &LanguageSpec,
    rng: &mut SimRng,
) -> (Utterance, Order, bool) {
    let order = if rng.bernoulli(spec.p_sov) {
        Order::Sov
    } else {
        Order::Osv
    };
    let p_mk = match order {
        Order::Sov => spec.p_mk_sov,
        Order::Osv => spec.p_mk_osv,
    };
    let marked = rng.bernoulli(p_mk);

    let subj = m.agent;
    let obj = m.patient;
    let verb = m.action;
    let mk = inv.marker_id();

    let tokens = match (spec.condition, order, marked) {
        (_, Order::Sov, false) => vec![subj, obj, verb],
        (_, Order::Osv, false) => vec![obj, subj, verb],
        (Condition::ObjectMarking, Order::Sov, true) => vec![subj, obj, mk, verb],
        (Condition::ObjectMarking, Order::Osv, true) => vec![obj, mk, subj, verb],
        (Condition::SubjectMarking, Order::Sov, true) => vec![subj, mk, obj, verb],
        (Condition::SubjectMarking, Order::Osv, true) => vec![obj, subj, mk, verb],
    };
    (Utterance::new(tokens), order, marked)
}

/// Draws order ~ Bernoulli(p_sov) and marking ~ Bernoulli(p_mk | order),
/// then emits the verb-final template with `mk` immediately after the
/// marked noun.
pub fn sample_utterance(
    inv: &Inventory,
    m: &Meaning,
    spec: &LanguageSpec,
    rng: &mut SimRng,
) -> Utterance {
    sample_utterance_tagged(inv, m, spec, rng).0
}

/// One sampled utterance per meaning, in list order.
pub fn generate_corpus(
    inv: &Inventory,
    meanings: &[Meaning],
    spec: &LanguageSpec,
    rng: &mut SimRng,
) -> Vec<(Meaning, Utterance)> {
    meanings
        .iter()
        .map(|m| (*m, sample_utterance(inv, m, spec, rng)))
        .collect()
}

/// Checks `tokens` against the grammar templates for intended meaning `m`:
/// `[N1 N2 V]`, `[N1 N2 mk V]`, `[N1 mk N2 V]`, where V is the meaning's
/// action, {N1, N2} are exactly its two entities, and any marker immediately
/// follows the noun filling the spec's marked role. The word order is
/// determined against the intended meaning: SOV iff the agent precedes the
/// patient.
pub fn parse(inv: &Inventory, tokens: &[usize], m: &Meaning, spec: &LanguageSpec) -> ParseResult {
    let mk = inv.marker_id();
    let (n1, n2, verb, marked) = match *tokens {
        [n1, n2, v] => (n1, n2, v, false),
        [n1, n2, t, v] if t == mk => {
            // marker after the second noun
            if n2 != spec.condition.marked_noun(m) {
                return ParseResult::Illformed;
            }
            (n1, n2, v, true)
        }
        [n1, t, n2, v] if t == mk => {
            // marker after the first noun
            if n1 != spec.condition.marked_noun(m) {
                return ParseResult::Illformed;
            }
            (n1, n2, v, true)
        }
        _ => return ParseResult::Illformed,
    };
    if verb != m.action {
        return ParseResult::Illformed;
    }
    let nouns_match = (n1 == m.agent && n2 == m.patient) || (n1 == m.patient && n2 == m.agent);
    if !nouns_match || n1 == n2 {
        return ParseResult::Illformed;
    }
    let order = if n1 == m.agent { Order::Sov } else { Order::Osv };
    ParseResult::WellFormed { order, marked }
}
