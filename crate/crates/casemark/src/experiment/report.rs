//! Aggregate statistics table over a run's evaluation rows.

use std::fmt::Write as _;
use std::path::Path;

use crate::evaluation::stats::{bootstrap_ci, mean, sign_test_greater, std_dev};
use crate::evaluation::{EvalRow, Phase, ReportClass, REPORT_CLASSES};
use crate::rng::SimRng;
use crate::{Real, Result};

use super::{load_eval_csv, ExperimentConfig};

fn f3(x: Real) -> String {
    format!("{:.3}", x)
}

fn mean_sd(xs: &[Real]) -> String {
    if xs.is_empty() {
        return "-".to_string();
    }
    format!("{}±{}", f3(mean(xs)), f3(std_dev(xs)))
}

/// Paired per-agent differences between ambiguity classes at one phase.
fn deltas(rows: &[EvalRow], phase: Phase, value: fn(&EvalRow) -> Option<Real>) -> (Vec<Real>, usize) {
    let mut out = Vec::new();
    let mut excluded = 0usize;
    for amb in rows
        .iter()
        .filter(|r| r.phase == phase && r.class_ == ReportClass::Amb)
    {
        let namb = rows.iter().find(|r| {
            r.phase == phase
                && r.class_ == ReportClass::NotAmb
                && r.pair_id == amb.pair_id
                && r.agent == amb.agent
        });
        match (value(amb), namb.and_then(value)) {
            (Some(a), Some(b)) => out.push(a - b),
            _ => excluded += 1,
        }
    }
    (out, excluded)
}

fn p_marked(r: &EvalRow) -> Option<Real> {
    (r.n_wellformed > 0).then(|| r.n_marked as Real / r.n_wellformed as Real)
}

fn p_sov(r: &EvalRow) -> Option<Real> {
    (r.n_wellformed > 0).then(|| r.n_sov as Real / r.n_wellformed as Real)
}

/// Builds the aggregate table for a run directory.
pub fn report(out_dir: &Path) -> Result<String> {
    let cfg = ExperimentConfig::load(&out_dir.join("config.toml"))?;
    let rows = load_eval_csv(&out_dir.join("eval.csv"))?;
    let lang = cfg.resolved_language();

    let mut out = String::new();
    writeln!(out, "run: {}", out_dir.display()).unwrap();
    writeln!(
        out,
        "language: {:?}, p_sov={}, p_mk|sov={}, p_mk|osv={} (overall marking {})",
        lang.condition,
        lang.p_sov,
        lang.p_mk_sov,
        lang.p_mk_osv,
        f3(lang.overall_marking())
    )
    .unwrap();
    let n_pairs: std::collections::BTreeSet<usize> = rows.iter().map(|r| r.pair_id).collect();
    writeln!(out, "pairs with results: {}", n_pairs.len()).unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "{:<8} {:<8} {:>4} {:>4} {:>15} {:>15} {:>15} {:>15} {:>15} {:>15}",
        "phase",
        "class",
        "n",
        "excl",
        "p_sov",
        "p_marked",
        "comm_acc",
        "speaking",
        "listening",
        "illformed"
    )
    .unwrap();
    for phase in [Phase::PostSl, Phase::PostRl] {
        for class in REPORT_CLASSES {
            let sel: Vec<&EvalRow> = rows
                .iter()
                .filter(|r| r.phase == phase && r.class_ == class)
                .collect();
            if sel.is_empty() {
                continue;
            }
            let sovs: Vec<Real> = sel.iter().filter_map(|r| p_sov(r)).collect();
            let marks: Vec<Real> = sel.iter().filter_map(|r| p_marked(r)).collect();
            let excluded = sel.len() - sovs.len();
            let comm: Vec<Real> = sel.iter().map(|r| r.comm_acc).collect();
            let speak: Vec<Real> = sel.iter().map(|r| r.speaking_acc).collect();
            let listen: Vec<Real> = sel.iter().map(|r| r.listening_acc).collect();
            let illformed: Vec<Real> = sel
                .iter()
                .map(|r| (r.n_total - r.n_wellformed) as Real / r.n_total.max(1) as Real)
                .collect();
            writeln!(
                out,
                "{:<8} {:<8} {:>4} {:>4} {:>15} {:>15} {:>15} {:>15} {:>15} {:>15}",
                phase.to_string(),
                class.to_string(),
                sel.len(),
                excluded,
                mean_sd(&sovs),
                mean_sd(&marks),
                mean_sd(&comm),
                mean_sd(&speak),
                mean_sd(&listen),
                mean_sd(&illformed)
            )
            .unwrap();
        }
    }

    writeln!(out).unwrap();
    writeln!(out, "post-communication differences (amb - not_amb), per agent:").unwrap();
    let mut boot_rng = SimRng::with_stream(cfg.base_seed, 999);
    for (label, pick) in [
        ("d_marked", p_marked as fn(&EvalRow) -> Option<Real>),
        ("d_sov", p_sov as fn(&EvalRow) -> Option<Real>),
    ] {
        let (ds, excluded) = deltas(&rows, Phase::PostRl, pick);
        if ds.is_empty() {
            writeln!(out, "  {:<9} no defined values ({} excluded)", label, excluded).unwrap();
            continue;
        }
        let (lo, hi) = bootstrap_ci(&ds, cfg.eval.bootstrap_resamples, 0.05, &mut boot_rng);
        let t = sign_test_greater(&ds);
        writeln!(
            out,
            "  {:<9} n={} excluded={} mean={} sd={} ci95=[{}, {}] positive={}/{} sign-test p={:.4}",
            label,
            ds.len(),
            excluded,
            f3(mean(&ds)),
            f3(std_dev(&ds)),
            f3(lo),
            f3(hi),
            t.positive,
            t.n,
            t.p_greater
        )
        .unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::EVAL_CSV_HEADER;

    #[test]
    fn report_summarizes_rows_and_runs_the_sign_test() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::default();
        super::super::write_atomic(
            &dir.path().join("config.toml"),
            cfg.to_toml().as_bytes(),
        )
        .unwrap();
        let mut csv = String::from(EVAL_CSV_HEADER);
        csv.push('\n');
        // two agents of one pair; markers retained more often for amb
        for (agent, amb_marked, namb_marked) in [(0, 40, 20), (1, 35, 25)] {
            for (class, marked) in [("amb", amb_marked), ("not_amb", namb_marked)] {
                csv.push_str(&format!(
                    "0,{},post_rl,{},100,80,{},50,0.6,0.9,0.8\n",
                    agent, class, marked
                ));
            }
            csv.push_str(&format!(
                "0,{},post_rl,all,200,160,{},100,0.6,0.9,0.8\n",
                agent,
                amb_marked + namb_marked
            ));
        }
        super::super::write_atomic(&dir.path().join("eval.csv"), csv.as_bytes()).unwrap();

        let text = report(dir.path()).unwrap();
        assert!(text.contains("post_rl"), "{}", text);
        assert!(text.contains("d_marked  n=2 excluded=0"), "{}", text);
        assert!(text.contains("positive=2/2"), "{}", text);
        // two positive deltas: sign-test p = 0.25
        assert!(text.contains("p=0.2500"), "{}", text);
    }
}
