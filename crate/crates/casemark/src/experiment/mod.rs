//! Orchestration: runs the full pipeline (corpus generation, supervised
//! learning, reinforcement learning, evaluation) for N agent pairs in
//! parallel, with resumable per-pair artifacts and CSV/SVG outputs.
//!
//! Output layout under the run directory:
//!
//! ```text
//! config.toml            resolved configuration echo
//! lexicon.tsv            id -> display string
//! manifest.json          config hash + per-pair status and artifact paths
//! pairs/pairNNN/         per-pair artifacts
//!   agent{0,1}_post_sl.ckpt, agent{0,1}_post_rl.ckpt
//!   turns.csv  curve.csv  eval.csv
//! eval.csv turns.csv curve.csv    combined, in pair order
//! plots/*.svg            written by the plot command
//! ```
//!
//! Pairs are fully independent: the same configuration produces
//! byte-identical CSVs whether pairs run serially or in parallel, and a
//! deleted pair directory is regenerated bit-for-bit on resume.

mod checkpoint;
mod config;
mod plot;
mod report;

pub use checkpoint::{load as load_checkpoint, save as save_checkpoint, Checkpoint};
pub use config::{
    EvalConfig, ExperimentConfig, InventoryConfig, NetworkConfig, Preset, STREAM_CORPUS,
    STREAM_EVAL, STREAM_EVAL_CORPUS, STREAM_INIT, STREAM_RL, STREAM_SL, STREAM_SPLIT,
};
pub use plot::{plot_accuracy_curves, plot_preferences, plot_run};
pub use report::report;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::DecodeMode;
use crate::evaluation::{
    communication_accuracy, evaluate_pair, rows_from_report, EvalReport, EvalRow, Phase,
    EVAL_CSV_HEADER,
};
use crate::language::{
    build_meaning_space, generate_corpus, resample_sl_subset, split_dataset, write_lexicon,
    Inventory, LanguageSpec, Meaning,
};
use crate::rng::SimRng;
use crate::training::{run_rl_with, train_supervised, TurnLog};
use crate::{AgentParams, Error, Real, Result};

pub const TURNS_CSV_HEADER: &str = "pair_id,turn,self_play,speaker_agent,mean_reward,mean_acc";
pub const CURVE_CSV_HEADER: &str = "pair_id,turn,acc_all,acc_amb,acc_not_amb";

/// One row of the test-set accuracy curve (pair-level: both speaking
/// directions averaged). Turn 0 is the pre-RL state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub pair_id: usize,
    pub turn: usize,
    pub acc_all: Real,
    pub acc_amb: Real,
    pub acc_not_amb: Real,
}

impl CurveRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.pair_id, self.turn, self.acc_all, self.acc_amb, self.acc_not_amb
        )
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::Schema(format!(
                "curve row needs 5 fields, got {}: {:?}",
                f.len(),
                line
            )));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Schema(format!("bad integer {:?}", s)))
        };
        let num = |s: &str| {
            s.parse::<Real>()
                .map_err(|_| Error::Schema(format!("bad number {:?}", s)))
        };
        Ok(CurveRow {
            pair_id: int(f[0])?,
            turn: int(f[1])?,
            acc_all: num(f[2])?,
            acc_amb: num(f[3])?,
            acc_not_amb: num(f[4])?,
        })
    }
}

pub fn turn_csv_line(pair_id: usize, log: &TurnLog) -> String {
    format!(
        "{},{},{},{},{},{}",
        pair_id, log.turn, log.self_play, log.speaker, log.mean_reward, log.mean_accuracy
    )
}

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe partial content.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Everything one pair produces, in memory.
#[derive(Debug, Clone)]
pub struct PairResult {
    pub pair: usize,
    pub post_sl: EvalReport,
    pub post_rl: EvalReport,
    pub turns: Vec<TurnLog>,
    pub curve: Vec<CurveRow>,
    /// Checkpoints in order agent0/agent1 post-SL, agent0/agent1 post-RL.
    pub checkpoints: [Checkpoint; 4],
}

impl PairResult {
    pub fn eval_rows(&self) -> Vec<EvalRow> {
        let mut rows = rows_from_report(self.pair, &self.post_sl);
        rows.extend(rows_from_report(self.pair, &self.post_rl));
        rows
    }
}

fn pair_curve_row(
    pair: usize,
    turn: usize,
    agents: &[AgentParams; 2],
    test: &[Meaning],
    inv: &Inventory,
    lang: &LanguageSpec,
) -> CurveRow {
    // greedy decoding consumes no randomness
    let mut rng = SimRng::new(0);
    let fwd = communication_accuracy(
        &agents[0],
        &agents[1],
        test,
        inv,
        lang,
        DecodeMode::Greedy,
        &mut rng,
    );
    let bwd = communication_accuracy(
        &agents[1],
        &agents[0],
        test,
        inv,
        lang,
        DecodeMode::Greedy,
        &mut rng,
    );
    CurveRow {
        pair_id: pair,
        turn,
        acc_all: (fwd[0] + bwd[0]) / 2.0,
        acc_amb: (fwd[1] + bwd[1]) / 2.0,
        acc_not_amb: (fwd[2] + bwd[2]) / 2.0,
    }
}

/// Runs the complete pipeline for one pair: split, per-agent corpora,
/// supervised learning, post-SL evaluation, the RL turns with the accuracy
/// curve observer, post-RL evaluation.
pub fn run_pair(cfg: &ExperimentConfig, pair: usize) -> Result<PairResult> {
    let lang = cfg.resolved_language();
    let inv = cfg.inventory();
    let dims = cfg.dims();
    let pair_seed = cfg.pair_seed(pair);

    let space = build_meaning_space(&inv, lang.condition);
    let mut split_rng = SimRng::with_stream(pair_seed, STREAM_SPLIT);
    let (train, test) = split_dataset(&space, &mut split_rng);

    let mut agents_vec = Vec::with_capacity(2);
    let mut sl_states = Vec::with_capacity(2);
    for a in 0..2 {
        let seed = cfg.agent_seed(pair, a);
        let mut agent = AgentParams::init(dims, &mut SimRng::with_stream(seed, STREAM_INIT));
        let mut corpus_rng = SimRng::with_stream(seed, STREAM_CORPUS);
        let subset = resample_sl_subset(&train, &mut corpus_rng)?;
        let corpus = generate_corpus(&inv, &subset, &lang, &mut corpus_rng);
        let mut sl_rng = SimRng::with_stream(seed, STREAM_SL);
        train_supervised(&mut agent, &corpus, &cfg.sl, &mut sl_rng);
        agents_vec.push(agent);
        sl_states.push(sl_rng.state());
    }
    let mut agents: [AgentParams; 2] = match agents_vec.try_into() {
        Ok(a) => a,
        Err(_) => unreachable!(),
    };

    let mut eval_corpus_rng = SimRng::with_stream(pair_seed, STREAM_EVAL_CORPUS);
    let eval_corpus = generate_corpus(&inv, &test, &lang, &mut eval_corpus_rng);
    let mode = if cfg.eval.sampled {
        DecodeMode::Sample
    } else {
        DecodeMode::Greedy
    };
    let mut eval_rng = SimRng::with_stream(pair_seed, STREAM_EVAL);

    let post_sl = evaluate_pair(
        &agents,
        &test,
        &eval_corpus,
        &inv,
        &lang,
        Phase::PostSl,
        mode,
        &mut eval_rng,
    );
    let ckpt_sl: [Checkpoint; 2] = std::array::from_fn(|a| Checkpoint {
        params: agents[a].clone(),
        rng: sl_states[a],
    });

    let mut curve = vec![pair_curve_row(pair, 0, &agents, &test, &inv, &lang)];
    let mut rl_rng = SimRng::with_stream(pair_seed, STREAM_RL);
    let curve_every = cfg.eval.curve_every;
    let last_turn = cfg.rl.inter_turns;
    let turns = {
        let curve_ref = &mut curve;
        run_rl_with(&mut agents, &train, &cfg.rl, &mut rl_rng, |turn, ag| {
            if turn % curve_every == 0 || turn == last_turn {
                curve_ref.push(pair_curve_row(pair, turn, ag, &test, &inv, &lang));
            }
        })
    };

    let post_rl = evaluate_pair(
        &agents,
        &test,
        &eval_corpus,
        &inv,
        &lang,
        Phase::PostRl,
        mode,
        &mut eval_rng,
    );
    let rl_state = rl_rng.state();
    let ckpt_rl: [Checkpoint; 2] = std::array::from_fn(|a| Checkpoint {
        params: agents[a].clone(),
        rng: rl_state,
    });
    let [c0, c1] = ckpt_sl;
    let [c2, c3] = ckpt_rl;

    Ok(PairResult {
        pair,
        post_sl,
        post_rl,
        turns,
        curve,
        checkpoints: [c0, c1, c2, c3],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairEntry {
    pub pair: usize,
    pub status: PairStatus,
    pub agent_seeds: [u64; 2],
    pub dir: String,
    pub artifacts: Vec<String>,
    pub wall_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub config_hash: String,
    pub pairs: Vec<PairEntry>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {}", path.display(), e)))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(path, text.as_bytes())
    }

    pub fn completed(&self) -> usize {
        self.pairs
            .iter()
            .filter(|p| p.status == PairStatus::Completed)
            .count()
    }

    pub fn failed(&self) -> usize {
        self.pairs.len() - self.completed()
    }
}

pub const CHECKPOINT_FILES: [&str; 4] = [
    "agent0_post_sl.ckpt",
    "agent1_post_sl.ckpt",
    "agent0_post_rl.ckpt",
    "agent1_post_rl.ckpt",
];
const PAIR_CSV_FILES: [&str; 3] = ["turns.csv", "curve.csv", "eval.csv"];

fn pair_dir_name(pair: usize) -> String {
    format!("pair{:03}", pair)
}

fn pair_dir(out: &Path, pair: usize) -> PathBuf {
    out.join("pairs").join(pair_dir_name(pair))
}

fn pair_artifact_names() -> Vec<String> {
    CHECKPOINT_FILES
        .iter()
        .chain(PAIR_CSV_FILES.iter())
        .map(|s| s.to_string())
        .collect()
}

fn pair_files_exist(out: &Path, pair: usize) -> bool {
    let dir = pair_dir(out, pair);
    pair_artifact_names().iter().all(|f| dir.join(f).is_file())
}

fn write_pair_artifacts(out: &Path, res: &PairResult) -> Result<()> {
    let dir = pair_dir(out, res.pair);
    fs::create_dir_all(&dir)?;
    for (name, ckpt) in CHECKPOINT_FILES.iter().zip(&res.checkpoints) {
        save_checkpoint(&dir.join(name), &ckpt.params, ckpt.rng)?;
    }
    let mut turns = String::from(TURNS_CSV_HEADER);
    turns.push('\n');
    for log in &res.turns {
        turns.push_str(&turn_csv_line(res.pair, log));
        turns.push('\n');
    }
    write_atomic(&dir.join("turns.csv"), turns.as_bytes())?;

    let mut curve = String::from(CURVE_CSV_HEADER);
    curve.push('\n');
    for row in &res.curve {
        curve.push_str(&row.to_csv_line());
        curve.push('\n');
    }
    write_atomic(&dir.join("curve.csv"), curve.as_bytes())?;

    let mut eval = String::from(EVAL_CSV_HEADER);
    eval.push('\n');
    for row in res.eval_rows() {
        eval.push_str(&row.to_csv_line());
        eval.push('\n');
    }
    write_atomic(&dir.join("eval.csv"), eval.as_bytes())?;
    Ok(())
}

/// Rebuilds a combined CSV from the per-pair files, in pair order.
fn combine_csv(out: &Path, name: &str, header: &str, pairs: &[usize]) -> Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for &p in pairs {
        let body = fs::read_to_string(pair_dir(out, p).join(name))?;
        for line in body.lines().skip(1) {
            text.push_str(line);
            text.push('\n');
        }
    }
    write_atomic(&out.join(name), text.as_bytes())
}

/// Runs (or resumes) the full sweep. Pairs already completed with intact
/// artifacts are skipped; failed or missing pairs are (re)computed. Worker
/// failures mark single pairs failed without aborting the sweep.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let out = cfg.out_dir.clone();
    fs::create_dir_all(out.join("pairs"))?;
    let hash = cfg.config_hash();

    let manifest_path = out.join("manifest.json");
    let prior = if manifest_path.is_file() {
        let m = RunManifest::load(&manifest_path)?;
        if m.config_hash != hash {
            return Err(Error::Config(format!(
                "{} holds a run with a different configuration (hash {} != {}); \
                 use a fresh --out directory",
                out.display(),
                m.config_hash,
                hash
            )));
        }
        Some(m)
    } else {
        None
    };

    let mut echo = cfg.clone();
    echo.language = Some(cfg.resolved_language());
    write_atomic(&out.join("config.toml"), echo.to_toml().as_bytes())?;
    write_lexicon(&out.join("lexicon.tsv"), &cfg.inventory())?;

    let mut entries: BTreeMap<usize, PairEntry> = BTreeMap::new();
    if let Some(m) = prior {
        for e in m.pairs {
            entries.insert(e.pair, e);
        }
    }
    let pending: Vec<usize> = (0..cfg.n_pairs)
        .filter(|&p| {
            let done = entries
                .get(&p)
                .map_or(false, |e| e.status == PairStatus::Completed);
            !(done && pair_files_exist(&out, p))
        })
        .collect();
    log::info!(
        "running {} of {} pairs ({} already complete)",
        pending.len(),
        cfg.n_pairs,
        cfg.n_pairs - pending.len()
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {}", e)))?;
    let fresh: Vec<PairEntry> = pool.install(|| {
        pending
            .par_iter()
            .map(|&pair| {
                let started = Instant::now();
                let outcome = catch_unwind(AssertUnwindSafe(|| {
                    run_pair(cfg, pair).and_then(|res| write_pair_artifacts(&out, &res))
                }));
                let error = match outcome {
                    Ok(Ok(())) => None,
                    Ok(Err(e)) => Some(e.to_string()),
                    Err(panic) => Some(match panic.downcast_ref::<&str>() {
                        Some(s) => format!("panic: {}", s),
                        None => match panic.downcast_ref::<String>() {
                            Some(s) => format!("panic: {}", s),
                            None => "panic".to_string(),
                        },
                    }),
                };
                if let Some(e) = &error {
                    log::warn!("pair {} failed: {}", pair, e);
                }
                PairEntry {
                    pair,
                    status: if error.is_none() {
                        PairStatus::Completed
                    } else {
                        PairStatus::Failed
                    },
                    agent_seeds: [cfg.agent_seed(pair, 0), cfg.agent_seed(pair, 1)],
                    dir: format!("pairs/{}", pair_dir_name(pair)),
                    artifacts: pair_artifact_names(),
                    wall_secs: started.elapsed().as_secs_f64(),
                    error,
                }
            })
            .collect()
    });
    for e in fresh {
        entries.insert(e.pair, e);
    }

    let completed: Vec<usize> = (0..cfg.n_pairs)
        .filter(|p| {
            entries
                .get(p)
                .map_or(false, |e| e.status == PairStatus::Completed)
        })
        .collect();
    combine_csv(&out, "eval.csv", EVAL_CSV_HEADER, &completed)?;
    combine_csv(&out, "turns.csv", TURNS_CSV_HEADER, &completed)?;
    combine_csv(&out, "curve.csv", CURVE_CSV_HEADER, &completed)?;

    let manifest = RunManifest {
        version: 1,
        config_hash: hash,
        pairs: entries.into_values().collect(),
    };
    manifest.save(&manifest_path)?;
    Ok(manifest)
}

/// Runs SL + RL for a single pair and writes its artifacts under the
/// configured output directory; returns the pair directory.
pub fn train_pair(cfg: &ExperimentConfig, pair: usize) -> Result<PathBuf> {
    cfg.validate()?;
    fs::create_dir_all(cfg.out_dir.join("pairs"))?;
    let mut echo = cfg.clone();
    echo.language = Some(cfg.resolved_language());
    write_atomic(&cfg.out_dir.join("config.toml"), echo.to_toml().as_bytes())?;
    write_lexicon(&cfg.out_dir.join("lexicon.tsv"), &cfg.inventory())?;
    let res = run_pair(cfg, pair)?;
    write_pair_artifacts(&cfg.out_dir, &res)?;
    Ok(pair_dir(&cfg.out_dir, pair))
}

/// Re-evaluates existing checkpoints in a run directory and rewrites the
/// eval CSVs. Returns the number of pairs processed.
pub fn reevaluate(out_dir: &Path) -> Result<usize> {
    let cfg = ExperimentConfig::load(&out_dir.join("config.toml"))?;
    cfg.validate()?;
    let manifest = RunManifest::load(&out_dir.join("manifest.json"))?;
    let lang = cfg.resolved_language();
    let inv = cfg.inventory();
    let mode = if cfg.eval.sampled {
        DecodeMode::Sample
    } else {
        DecodeMode::Greedy
    };

    let mut done = Vec::new();
    for entry in &manifest.pairs {
        if entry.status != PairStatus::Completed {
            continue;
        }
        let pair = entry.pair;
        let dir = pair_dir(out_dir, pair);
        let pair_seed = cfg.pair_seed(pair);
        let space = build_meaning_space(&inv, lang.condition);
        let (_, test) = split_dataset(&space, &mut SimRng::with_stream(pair_seed, STREAM_SPLIT));
        let eval_corpus = generate_corpus(
            &inv,
            &test,
            &lang,
            &mut SimRng::with_stream(pair_seed, STREAM_EVAL_CORPUS),
        );
        let mut eval_rng = SimRng::with_stream(pair_seed, STREAM_EVAL);

        let mut rows = Vec::new();
        for (phase, files) in [
            (Phase::PostSl, [CHECKPOINT_FILES[0], CHECKPOINT_FILES[1]]),
            (Phase::PostRl, [CHECKPOINT_FILES[2], CHECKPOINT_FILES[3]]),
        ] {
            let a0 = load_checkpoint(&dir.join(files[0]))?;
            let a1 = load_checkpoint(&dir.join(files[1]))?;
            let agents = [a0.params, a1.params];
            let report = evaluate_pair(
                &agents,
                &test,
                &eval_corpus,
                &inv,
                &lang,
                phase,
                mode,
                &mut eval_rng,
            );
            rows.extend(rows_from_report(pair, &report));
        }
        let mut eval = String::from(EVAL_CSV_HEADER);
        eval.push('\n');
        for row in rows {
            eval.push_str(&row.to_csv_line());
            eval.push('\n');
        }
        write_atomic(&dir.join("eval.csv"), eval.as_bytes())?;
        done.push(pair);
    }
    combine_csv(out_dir, "eval.csv", EVAL_CSV_HEADER, &done)?;
    Ok(done.len())
}

/// Emits the corpus files for one pair: the lexicon, each agent's SL corpus,
/// and the reference corpus for the test split.
pub fn generate_corpora(cfg: &ExperimentConfig, pair: usize, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let lang = cfg.resolved_language();
    let inv = cfg.inventory();
    let pair_seed = cfg.pair_seed(pair);
    let space = build_meaning_space(&inv, lang.condition);
    let (train, test) = split_dataset(&space, &mut SimRng::with_stream(pair_seed, STREAM_SPLIT));

    let mut written = Vec::new();
    let lex = out.join("lexicon.tsv");
    write_lexicon(&lex, &inv)?;
    written.push(lex);
    for a in 0..2 {
        let seed = cfg.agent_seed(pair, a);
        let mut corpus_rng = SimRng::with_stream(seed, STREAM_CORPUS);
        let subset = resample_sl_subset(&train, &mut corpus_rng)?;
        let corpus = generate_corpus(&inv, &subset, &lang, &mut corpus_rng);
        let path = out.join(format!("agent{}_sl_corpus.tsv", a));
        crate::language::write_corpus(&path, &corpus)?;
        written.push(path);
    }
    let eval_corpus = generate_corpus(
        &inv,
        &test,
        &lang,
        &mut SimRng::with_stream(pair_seed, STREAM_EVAL_CORPUS),
    );
    let path = out.join("test_reference.tsv");
    crate::language::write_corpus(&path, &eval_corpus)?;
    written.push(path);
    Ok(written)
}

/// Loads all rows of a combined eval CSV.
pub fn load_eval_csv(path: &Path) -> Result<Vec<EvalRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == EVAL_CSV_HEADER => {}
        Some(h) => {
            return Err(Error::Schema(format!(
                "unexpected eval.csv header {:?}; expected {:?}",
                h, EVAL_CSV_HEADER
            )))
        }
        None => return Err(Error::Schema("empty eval.csv".into())),
    }
    lines.map(EvalRow::from_csv_line).collect()
}

/// Loads all rows of a combined curve CSV.
pub fn load_curve_csv(path: &Path) -> Result<Vec<CurveRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CURVE_CSV_HEADER => {}
        Some(h) => {
            return Err(Error::Schema(format!(
                "unexpected curve.csv header {:?}; expected {:?}",
                h, CURVE_CSV_HEADER
            )))
        }
        None => return Err(Error::Schema("empty curve.csv".into())),
    }
    lines.map(CurveRow::from_csv_line).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_config(out: &Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.n_pairs = 2;
        cfg.base_seed = 400;
        cfg.jobs = 2;
        cfg.out_dir = out.to_path_buf();
        cfg.inventory = InventoryConfig {
            amb: 2,
            unamb: 4,
            actions: 2,
        };
        cfg.network = NetworkConfig {
            meaning_dim: 4,
            word_dim: 6,
            hidden_dim: 8,
            max_utterance_len: 10,
        };
        cfg.sl.epochs = 4;
        cfg.sl.batch_size = 8;
        cfg.rl.inter_turns = 10;
        cfg.rl.meanings_per_turn = 8;
        cfg.rl.batch_size = 4;
        cfg
    }

    fn read_all_csvs(out: &Path) -> Vec<(String, Vec<u8>)> {
        let mut files = Vec::new();
        for name in ["eval.csv", "turns.csv", "curve.csv"] {
            files.push((name.to_string(), fs::read(out.join(name)).unwrap()));
        }
        for pair in 0..2 {
            for name in PAIR_CSV_FILES {
                let p = pair_dir(out, pair).join(name);
                files.push((p.display().to_string(), fs::read(&p).unwrap()));
            }
        }
        files
    }

    #[test]
    fn toy_sweep_produces_manifest_and_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = toy_config(&dir.path().join("run"));
        let manifest = run_experiment(&cfg).unwrap();
        assert_eq!(manifest.pairs.len(), 2);
        assert_eq!(manifest.completed(), 2);
        assert_eq!(manifest.failed(), 0);
        for pair in 0..2 {
            assert!(pair_files_exist(&cfg.out_dir, pair));
        }
        // 2 pairs x 2 phases x 2 agents x 3 classes rows
        let rows = load_eval_csv(&cfg.out_dir.join("eval.csv")).unwrap();
        assert_eq!(rows.len(), 24);
        let reports = rows
            .iter()
            .map(|r| (r.pair_id, r.agent, r.phase))
            .collect::<std::collections::BTreeSet<_>>();
        assert_eq!(reports.len(), 8, "4 eval reports, one per agent and phase");
        let curve = load_curve_csv(&cfg.out_dir.join("curve.csv")).unwrap();
        // 2 pairs x (turn 0 + 10 turns)
        assert_eq!(curve.len(), 22);
        let turns = fs::read_to_string(cfg.out_dir.join("turns.csv")).unwrap();
        assert_eq!(turns.lines().count(), 1 + 2 * 10);
    }

    #[test]
    fn parallel_and_serial_runs_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg_par = toy_config(&dir.path().join("par"));
        cfg_par.jobs = 2;
        let mut cfg_ser = toy_config(&dir.path().join("ser"));
        cfg_ser.jobs = 1;
        run_experiment(&cfg_par).unwrap();
        run_experiment(&cfg_ser).unwrap();
        let a = read_all_csvs(&cfg_par.out_dir);
        let b = read_all_csvs(&cfg_ser.out_dir);
        for ((name_a, bytes_a), (_, bytes_b)) in a.iter().zip(b.iter()) {
            assert_eq!(bytes_a, bytes_b, "{} differs", name_a);
        }
    }

    #[test]
    fn resume_regenerates_deleted_pairs_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = toy_config(&dir.path().join("run"));
        run_experiment(&cfg).unwrap();
        let before = read_all_csvs(&cfg.out_dir);
        let ckpt_before = fs::read(pair_dir(&cfg.out_dir, 1).join(CHECKPOINT_FILES[3])).unwrap();

        fs::remove_dir_all(pair_dir(&cfg.out_dir, 1)).unwrap();
        let manifest = run_experiment(&cfg).unwrap();
        assert_eq!(manifest.completed(), 2);
        let after = read_all_csvs(&cfg.out_dir);
        for ((name, a), (_, b)) in before.iter().zip(after.iter()) {
            assert_eq!(a, b, "{} differs after resume", name);
        }
        let ckpt_after = fs::read(pair_dir(&cfg.out_dir, 1).join(CHECKPOINT_FILES[3])).unwrap();
        assert_eq!(ckpt_before, ckpt_after);
    }

    #[test]
    fn mismatched_config_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = toy_config(&dir.path().join("run"));
        run_experiment(&cfg).unwrap();
        let mut other = cfg.clone();
        other.base_seed += 1;
        let err = run_experiment(&other).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn reevaluate_reproduces_eval_csv() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = toy_config(&dir.path().join("run"));
        run_experiment(&cfg).unwrap();
        let before = fs::read(cfg.out_dir.join("eval.csv")).unwrap();
        fs::remove_file(cfg.out_dir.join("eval.csv")).unwrap();
        let n = reevaluate(&cfg.out_dir).unwrap();
        assert_eq!(n, 2);
        let after = fs::read(cfg.out_dir.join("eval.csv")).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn degenerate_inventory_marks_pairs_failed_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = toy_config(&dir.path().join("run"));
        // 1x1x8: the resample constraint is unsatisfiable
        cfg.inventory = InventoryConfig {
            amb: 1,
            unamb: 1,
            actions: 8,
        };
        let manifest = run_experiment(&cfg).unwrap();
        assert_eq!(manifest.failed(), 2);
        assert!(manifest.pairs.iter().all(|p| p.error.is_some()));
        // combined CSVs still exist, header-only
        let rows = load_eval_csv(&cfg.out_dir.join("eval.csv")).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn generate_writes_corpora_with_the_documented_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.base_seed = 9;
        let files = generate_corpora(&cfg, 0, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        let corpus =
            crate::language::read_corpus(&dir.path().join("agent0_sl_corpus.tsv")).unwrap();
        assert_eq!(corpus.len(), 811);
        let other =
            crate::language::read_corpus(&dir.path().join("agent1_sl_corpus.tsv")).unwrap();
        assert_ne!(corpus, other, "agents must get distinct corpora");
        let test_ref =
            crate::language::read_corpus(&dir.path().join("test_reference.tsv")).unwrap();
        assert_eq!(test_ref.len(), 304);
    }
}
