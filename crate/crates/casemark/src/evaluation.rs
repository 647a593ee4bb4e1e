//! Measurements over trained agents: speaking/listening accuracy,
//! communication accuracy, production preferences with well-formedness
//! filtering, ambiguity-split statistics, and their differences.
//!
//! All evaluation is read-only and, by default, uses greedy decoding so the
//! reported preferences carry no sampling noise (sampled-mode evaluation is
//! available behind [`crate::agents::DecodeMode`]). Proportions are computed
//! over well-formed productions only and flagged undefined when an agent
//! produced none.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::{predict_meaning, DecodeMode};
use crate::language::{
    classify_ambiguity, parse, Ambiguity, Inventory, LanguageSpec, Meaning, Order, ParseResult,
    Utterance,
};
use crate::rng::SimRng;
use crate::{AgentParams, Real};

/// Evaluation phase relative to the communication game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    PostSl,
    PostRl,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::PostSl => write!(f, "post_sl"),
            Phase::PostRl => write!(f, "post_rl"),
        }
    }
}

impl FromStr for Phase {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "post_sl" => Ok(Phase::PostSl),
            "post_rl" => Ok(Phase::PostRl),
            other => Err(crate::Error::Schema(format!("unknown phase {:?}", other))),
        }
    }
}

/// Reporting class: everything, ambiguous meanings, or unambiguous ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportClass {
    All,
    Amb,
    NotAmb,
}

pub const REPORT_CLASSES: [ReportClass; 3] =
    [ReportClass::All, ReportClass::Amb, ReportClass::NotAmb];

impl ReportClass {
    pub fn index(&self) -> usize {
        match self {
            ReportClass::All => 0,
            ReportClass::Amb => 1,
            ReportClass::NotAmb => 2,
        }
    }

    fn matches(&self, amb: Ambiguity) -> bool {
        match self {
            ReportClass::All => true,
            ReportClass::Amb => amb == Ambiguity::Amb,
            ReportClass::NotAmb => amb == Ambiguity::NotAmb,
        }
    }
}

impl fmt::Display for ReportClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportClass::All => write!(f, "all"),
            ReportClass::Amb => write!(f, "amb"),
            ReportClass::NotAmb => write!(f, "not_amb"),
        }
    }
}

impl FromStr for ReportClass {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "all" => Ok(ReportClass::All),
            "amb" => Ok(ReportClass::Amb),
            "not_amb" => Ok(ReportClass::NotAmb),
            other => Err(crate::Error::Schema(format!("unknown class {:?}", other))),
        }
    }
}

/// Counts over one agent's productions for a set of meanings. Proportions
/// are taken over well-formed productions only and are undefined (`None`)
/// when there are none.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProductionStats {
    pub n_total: usize,
    pub n_wellformed: usize,
    pub n_marked: usize,
    pub n_sov: usize,
}

impl ProductionStats {
    fn record(&mut self, result: ParseResult) {
        self.n_total += 1;
        if let ParseResult::WellFormed { order, marked } = result {
            self.n_wellformed += 1;
            if marked {
                self.n_marked += 1;
            }
            if order == Order::Sov {
                self.n_sov += 1;
            }
        }
    }

    pub fn p_sov(&self) -> Option<Real> {
        (self.n_wellformed > 0).then(|| self.n_sov as Real / self.n_wellformed as Real)
    }

    pub fn p_marked(&self) -> Option<Real> {
        (self.n_wellformed > 0).then(|| self.n_marked as Real / self.n_wellformed as Real)
    }

    pub fn illformed_ratio(&self) -> Real {
        if self.n_total == 0 {
            return 0.0;
        }
        (self.n_total - self.n_wellformed) as Real / self.n_total as Real
    }
}

/// Per-class metrics for one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub production: ProductionStats,
    /// Exact-match reconstruction accuracy with this agent speaking to its
    /// partner.
    pub comm_accuracy: Real,
    /// Proportion of this agent's productions that are well-formed.
    pub speaking_accuracy: Real,
    /// Exact-match rate of this agent's listener on reference pairs.
    pub listening_accuracy: Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentReport {
    pub agent: usize,
    /// Indexed by [`ReportClass::index`].
    pub classes: [ClassMetrics; 3],
}

impl AgentReport {
    pub fn class(&self, c: ReportClass) -> &ClassMetrics {
        &self.classes[c.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub phase: Phase,
    pub agents: [AgentReport; 2],
}

/// Speaker greedy-decodes (or samples) each meaning; the listener's argmax
/// triple must match the whole meaning. Returned per report class, indexed
/// by [`ReportClass::index`].
pub fn communication_accuracy(
    speaker: &AgentParams,
    listener: &AgentParams,
    meanings: &[Meaning],
    inv: &Inventory,
    spec: &LanguageSpec,
    mode: DecodeMode,
    rng: &mut SimRng,
) -> [Real; 3] {
    let mut hits = [0usize; 3];
    let mut totals = [0usize; 3];
    for m in meanings {
        let amb = classify_ambiguity(inv, m, spec.condition);
        let rec = speaker.speak(m, mode, rng);
        let ok = predict_meaning(&listener.listen(&rec.tokens)) == *m;
        for c in REPORT_CLASSES {
            if c.matches(amb) {
                totals[c.index()] += 1;
                hits[c.index()] += usize::from(ok);
            }
        }
    }
    std::array::from_fn(|i| {
        if totals[i] == 0 {
            0.0
        } else {
            hits[i] as Real / totals[i] as Real
        }
    })
}

/// Decodes each meaning and parses the production against it; counts are
/// split per report class.
pub fn production_preferences(
    agent: &AgentParams,
    meanings: &[Meaning],
    inv: &Inventory,
    spec: &LanguageSpec,
    mode: DecodeMode,
    rng: &mut SimRng,
) -> [ProductionStats; 3] {
    let mut stats = [ProductionStats::default(); 3];
    for m in meanings {
        let amb = classify_ambiguity(inv, m, spec.condition);
        let rec = agent.speak(m, mode, rng);
        let result = parse(inv, &rec.tokens, m, spec);
        for c in REPORT_CLASSES {
            if c.matches(amb) {
                stats[c.index()].record(result);
            }
        }
    }
    stats
}

/// Proportion of decoded productions that are well-formed for their meaning
/// (any valid variant accepted).
pub fn speaking_accuracy(
    agent: &AgentParams,
    meanings: &[Meaning],
    inv: &Inventory,
    spec: &LanguageSpec,
    mode: DecodeMode,
    rng: &mut SimRng,
) -> Real {
    if meanings.is_empty() {
        return 0.0;
    }
    let wf = meanings
        .iter()
        .filter(|m| {
            let rec = agent.speak(m, mode, rng);
            parse(inv, &rec.tokens, m, spec).is_well_formed()
        })
        .count();
    wf as Real / meanings.len() as Real
}

/// Exact-match rate of `predict_meaning` over reference pairs.
pub fn listening_accuracy(agent: &AgentParams, corpus: &[(Meaning, Utterance)]) -> Real {
    if corpus.is_empty() {
        return 0.0;
    }
    let hits = corpus
        .iter()
        .filter(|(m, u)| predict_meaning(&agent.listen(u.tokens())) == *m)
        .count();
    hits as Real / corpus.len() as Real
}

fn listening_accuracy_by_class(
    agent: &AgentParams,
    corpus: &[(Meaning, Utterance)],
    inv: &Inventory,
    spec: &LanguageSpec,
) -> [Real; 3] {
    let mut hits = [0usize; 3];
    let mut totals = [0usize; 3];
    for (m, u) in corpus {
        let amb = classify_ambiguity(inv, m, spec.condition);
        let ok = predict_meaning(&agent.listen(u.tokens())) == *m;
        for c in REPORT_CLASSES {
            if c.matches(amb) {
                totals[c.index()] += 1;
                hits[c.index()] += usize::from(ok);
            }
        }
    }
    std::array::from_fn(|i| {
        if totals[i] == 0 {
            0.0
        } else {
            hits[i] as Real / totals[i] as Real
        }
    })
}

/// Full evaluation of one pair: production preferences, communication
/// accuracy (each agent speaking to the other), and speaking/listening
/// accuracy, all split by ambiguity class. Never mutates the agents.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_pair(
    agents: &[AgentParams; 2],
    test_meanings: &[Meaning],
    eval_corpus: &[(Meaning, Utterance)],
    inv: &Inventory,
    spec: &LanguageSpec,
    phase: Phase,
    mode: DecodeMode,
    rng: &mut SimRng,
) -> EvalReport {
    let reports: [AgentReport; 2] = std::array::from_fn(|a| {
        let speaker = &agents[a];
        let partner = &agents[1 - a];
        let production = production_preferences(speaker, test_meanings, inv, spec, mode, rng);
        let comm = communication_accuracy(speaker, partner, test_meanings, inv, spec, mode, rng);
        let listening = listening_accuracy_by_class(speaker, eval_corpus, inv, spec);
        AgentReport {
            agent: a,
            classes: std::array::from_fn(|i| ClassMetrics {
                production: production[i],
                comm_accuracy: comm[i],
                speaking_accuracy: 1.0 - production[i].illformed_ratio(),
                listening_accuracy: listening[i],
            }),
        }
    });
    EvalReport {
        phase,
        agents: reports,
    }
}

/// Per-agent production difference between ambiguity classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcmDelta {
    pub agent: usize,
    /// p_marked(Amb) - p_marked(NotAmb); `None` when either side is
    /// undefined (no well-formed productions).
    pub d_marked: Option<Real>,
    /// p_sov(Amb) - p_sov(NotAmb).
    pub d_sov: Option<Real>,
}

/// Differential-marking deltas for both agents of a report.
pub fn dcm_delta(report: &EvalReport) -> [DcmDelta; 2] {
    std::array::from_fn(|a| {
        let amb = &report.agents[a].class(ReportClass::Amb).production;
        let namb = &report.agents[a].class(ReportClass::NotAmb).production;
        DcmDelta {
            agent: a,
            d_marked: match (amb.p_marked(), namb.p_marked()) {
                (Some(x), Some(y)) => Some(x - y),
                _ => None,
            },
            d_sov: match (amb.p_sov(), namb.p_sov()) {
                (Some(x), Some(y)) => Some(x - y),
                _ => None,
            },
        }
    })
}

/// One row of the tidy evaluation export.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub pair_id: usize,
    pub agent: usize,
    pub phase: Phase,
    pub class_: ReportClass,
    pub n_total: usize,
    pub n_wellformed: usize,
    pub n_marked: usize,
    pub n_sov: usize,
    pub comm_acc: Real,
    pub speaking_acc: Real,
    pub listening_acc: Real,
}

pub const EVAL_CSV_HEADER: &str =
    "pair_id,agent,phase,ambiguity_class,n_total,n_wellformed,n_marked,n_sov,comm_acc,speaking_acc,listening_acc";

impl EvalRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.pair_id,
            self.agent,
            self.phase,
            self.class_,
            self.n_total,
            self.n_wellformed,
            self.n_marked,
            self.n_sov,
            self.comm_acc,
            self.speaking_acc,
            self.listening_acc
        )
    }

    pub fn from_csv_line(line: &str) -> crate::Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(crate::Error::Schema(format!(
                "eval row needs 11 fields, got {}: {:?}",
                f.len(),
                line
            )));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| crate::Error::Schema(format!("bad integer {:?}", s)))
        };
        let num = |s: &str| {
            s.parse::<Real>()
                .map_err(|_| crate::Error::Schema(format!("bad number {:?}", s)))
        };
        Ok(EvalRow {
            pair_id: int(f[0])?,
            agent: int(f[1])?,
            phase: f[2].parse()?,
            class_: f[3].parse()?,
            n_total: int(f[4])?,
            n_wellformed: int(f[5])?,
            n_marked: int(f[6])?,
            n_sov: int(f[7])?,
            comm_acc: num(f[8])?,
            speaking_acc: num(f[9])?,
            listening_acc: num(f[10])?,
        })
    }
}

/// Flattens a report into six tidy rows (2 agents x 3 classes).
pub fn rows_from_report(pair_id: usize, report: &EvalReport) -> Vec<EvalRow> {
    let mut rows = Vec::with_capacity(6);
    for agent in &report.agents {
        for c in REPORT_CLASSES {
            let m = agent.class(c);
            rows.push(EvalRow {
                pair_id,
                agent: agent.agent,
                phase: report.phase,
                class_: c,
                n_total: m.production.n_total,
                n_wellformed: m.production.n_wellformed,
                n_marked: m.production.n_marked,
                n_sov: m.production.n_sov,
                comm_acc: m.comm_accuracy,
                speaking_acc: m.speaking_accuracy,
                listening_acc: m.listening_accuracy,
            });
        }
    }
    rows
}

pub mod stats {
    //! Means, standard deviations, percentile bootstrap intervals, and the
    //! exact one-sided sign test.

    use crate::rng::SimRng;
    use crate::Real;

    pub fn mean(xs: &[Real]) -> Real {
        if xs.is_empty() {
            return Real::NAN;
        }
        xs.iter().sum::<Real>() / xs.len() as Real
    }

    /// Sample standard deviation (n - 1 denominator); 0 for fewer than two
    /// observations.
    pub fn std_dev(xs: &[Real]) -> Real {
        if xs.len() < 2 {
            return 0.0;
        }
        let m = mean(xs);
        (xs.iter().map(|x| (x - m) * (x - m)).sum::<Real>() / (xs.len() - 1) as Real).sqrt()
    }

    /// Percentile bootstrap confidence interval for the mean.
    pub fn bootstrap_ci(
        xs: &[Real],
        resamples: usize,
        alpha: Real,
        rng: &mut SimRng,
    ) -> (Real, Real) {
        assert!(!xs.is_empty(), "bootstrap of empty sample");
        let mut means = Vec::with_capacity(resamples);
        for _ in 0..resamples {
            let s: Real = (0..xs.len()).map(|_| xs[rng.below(xs.len())]).sum();
            means.push(s / xs.len() as Real);
        }
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pick = |q: Real| {
            let i = ((resamples as Real - 1.0) * q).round() as usize;
            means[i.min(resamples - 1)]
        };
        (pick(alpha / 2.0), pick(1.0 - alpha / 2.0))
    }

    /// Exact one-sided sign test for "median > 0": ties (exact zeros) are
    /// excluded, and the p-value is the binomial upper tail
    /// P(Bin(n, 1/2) >= positive).
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct SignTest {
        pub n: usize,
        pub positive: usize,
        pub p_greater: Real,
    }

    pub fn sign_test_greater(xs: &[Real]) -> SignTest {
        let nonzero: Vec<Real> = xs.iter().copied().filter(|&x| x != 0.0).collect();
        let n = nonzero.len();
        let positive = nonzero.iter().filter(|&&x| x > 0.0).count();
        SignTest {
            n,
            positive,
            p_greater: binom_tail_geq_half(n, positive),
        }
    }

    /// P(Bin(n, 1/2) >= k), exact, in log space.
    fn binom_tail_geq_half(n: usize, k: usize) -> Real {
        if k == 0 {
            return 1.0;
        }
        let ln_fact = |m: usize| (1..=m).map(|i| (i as Real).ln()).sum::<Real>();
        let ln_n_fact = ln_fact(n);
        let ln2 = (2.0_f64).ln();
        let mut p = 0.0;
        for i in k..=n {
            let ln_c = ln_n_fact - ln_fact(i) - ln_fact(n - i);
            p += (ln_c - n as Real * ln2).exp();
        }
        p.min(1.0)
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentDims;
    use crate::language::{build_meaning_space, generate_corpus, split_dataset};

    fn setup() -> (
        Inventory,
        LanguageSpec,
        [AgentParams; 2],
        Vec<Meaning>,
        Vec<(Meaning, Utterance)>,
    ) {
        let inv = Inventory::default();
        let spec = LanguageSpec::dominant_object();
        let dims = AgentDims::for_inventory(&inv);
        let agents = [
            AgentParams::init(dims, &mut SimRng::with_stream(100, 1)),
            AgentParams::init(dims, &mut SimRng::with_stream(101, 1)),
        ];
        let space = build_meaning_space(&inv, spec.condition);
        let mut rng = SimRng::with_stream(100, 10);
        let (_, test) = split_dataset(&space, &mut rng);
        let corpus = generate_corpus(&inv, &test, &spec, &mut rng);
        (inv, spec, agents, test, corpus)
    }

    #[test]
    fn class_accuracies_average_to_overall() {
        let (inv, spec, agents, test, corpus) = setup();
        let mut rng = SimRng::new(0);
        let report = evaluate_pair(
            &agents,
            &test,
            &corpus,
            &inv,
            &spec,
            Phase::PostSl,
            DecodeMode::Greedy,
            &mut rng,
        );
        for agent in &report.agents {
            let all = agent.class(ReportClass::All);
            let amb = agent.class(ReportClass::Amb);
            let namb = agent.class(ReportClass::NotAmb);
            let n_all = all.production.n_total as Real;
            let n_amb = amb.production.n_total as Real;
            let n_namb = namb.production.n_total as Real;
            assert_eq!(n_all, n_amb + n_namb);
            let weighted = (amb.comm_accuracy * n_amb + namb.comm_accuracy * n_namb) / n_all;
            assert!((weighted - all.comm_accuracy).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluation_is_read_only() {
        let (inv, spec, agents, test, corpus) = setup();
        let bits = |a: &AgentParams| {
            let mut out = Vec::new();
            a.visit_params(&mut |_, _, p| {
                out.extend(p.value().as_slice().iter().map(|v| v.to_bits()));
                out.extend(p.grad().as_slice().iter().map(|v| v.to_bits()));
                out.push(p.step_count());
            });
            out
        };
        let before = [bits(&agents[0]), bits(&agents[1])];
        let mut rng = SimRng::new(1);
        let _ = evaluate_pair(
            &agents,
            &test,
            &corpus,
            &inv,
            &spec,
            Phase::PostRl,
            DecodeMode::Greedy,
            &mut rng,
        );
        assert_eq!(bits(&agents[0]), before[0]);
        assert_eq!(bits(&agents[1]), before[1]);
    }

    #[test]
    fn untrained_agents_sit_at_chance_level() {
        let (inv, spec, agents, test, corpus) = setup();
        let mut rng = SimRng::new(2);
        // listening chance is 1/(8 * 20 * 20) ~ 3.1e-4
        let listen = listening_accuracy(&agents[0], &corpus);
        assert!(listen < 0.02, "listening accuracy {} at init", listen);
        let speak = speaking_accuracy(&agents[0], &test, &inv, &spec, DecodeMode::Greedy, &mut rng);
        assert!(speak < 0.05, "speaking accuracy {} at init", speak);
        let comm = communication_accuracy(
            &agents[0],
            &agents[1],
            &test,
            &inv,
            &spec,
            DecodeMode::Greedy,
            &mut rng,
        );
        assert!(comm[0] < 0.02, "communication accuracy {} at init", comm[0]);
    }

    #[test]
    fn dcm_delta_zero_and_undefined_propagation() {
        let stats_with = |n_wf: usize, n_marked: usize, n_sov: usize| ProductionStats {
            n_total: 10,
            n_wellformed: n_wf,
            n_marked,
            n_sov,
        };
        let metrics = |p: ProductionStats| ClassMetrics {
            production: p,
            comm_accuracy: 0.0,
            speaking_accuracy: 0.0,
            listening_accuracy: 0.0,
        };
        let agent = |amb: ProductionStats, namb: ProductionStats| AgentReport {
            agent: 0,
            classes: [metrics(amb), metrics(amb), metrics(namb)],
        };
        // identical stats -> zero deltas
        let same = stats_with(8, 4, 6);
        let report = EvalReport {
            phase: Phase::PostRl,
            agents: [agent(same, same), agent(same, same)],
        };
        let deltas = dcm_delta(&report);
        assert_eq!(deltas[0].d_marked, Some(0.0));
        assert_eq!(deltas[0].d_sov, Some(0.0));
        // no well-formed productions in one class -> undefined delta
        let empty = stats_with(0, 0, 0);
        let report = EvalReport {
            phase: Phase::PostRl,
            agents: [agent(same, empty), agent(same, same)],
        };
        let deltas = dcm_delta(&report);
        assert_eq!(deltas[0].d_marked, None);
        assert_eq!(deltas[0].d_sov, None);
    }

    #[test]
    fn eval_rows_round_trip_through_csv() {
        let row = EvalRow {
            pair_id: 3,
            agent: 1,
            phase: Phase::PostRl,
            class_: ReportClass::NotAmb,
            n_total: 304,
            n_wellformed: 280,
            n_marked: 130,
            n_sov: 200,
            comm_acc: 0.625,
            speaking_acc: 0.9210526315789473,
            listening_acc: 0.78,
        };
        let line = row.to_csv_line();
        assert_eq!(
            line,
            "3,1,post_rl,not_amb,304,280,130,200,0.625,0.9210526315789473,0.78"
        );
        assert_eq!(EvalRow::from_csv_line(&line).unwrap(), row);
        assert!(EvalRow::from_csv_line("1,2,3").is_err());
        assert!(EvalRow::from_csv_line("x,1,post_rl,all,1,1,1,1,0,0,0").is_err());
    }

    #[test]
    fn production_stats_proportions() {
        let mut s = ProductionStats::default();
        s.record(ParseResult::WellFormed {
            order: Order::Sov,
            marked: true,
        });
        s.record(ParseResult::WellFormed {
            order: Order::Osv,
            marked: false,
        });
        s.record(ParseResult::Illformed);
        assert_eq!(s.n_total, 3);
        assert_eq!(s.n_wellformed, 2);
        assert_eq!(s.p_sov(), Some(0.5));
        assert_eq!(s.p_marked(), Some(0.5));
        assert!((s.illformed_ratio() - 1.0 / 3.0).abs() < 1e-15);
        let empty = ProductionStats {
            n_total: 5,
            ..ProductionStats::default()
        };
        assert_eq!(empty.p_sov(), None);
        assert_eq!(empty.illformed_ratio(), 1.0);
    }
}
