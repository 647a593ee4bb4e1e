//! Command-line interface for the case-marking emergence simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use casemark::experiment::{
    generate_corpora, plot_run, reevaluate, report, run_experiment, train_pair, ExperimentConfig,
};
use casemark::{Error, Result};

#[derive(Parser)]
#[command(
    name = "casemark",
    version,
    about = "Neural-agent simulation of differential case marking: supervised language \
             learning followed by a reinforcement-learned meaning-reconstruction game"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML configuration file; omitted fields use the reference defaults
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed (agents of pair p use seeds base+2p and base+2p+1)
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Number of agent pairs
    #[arg(long, value_name = "N")]
    pairs: Option<usize>,
    /// Language preset: dominant-obj | neutral-obj | neutral-subj
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Worker threads (0 = one per core)
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit the lexicon and corpus files for one pair
    Generate {
        #[command(flatten)]
        common: CommonArgs,
        /// Pair index
        #[arg(long, default_value_t = 0)]
        pair: usize,
    },
    /// Train one pair (SL + RL) and write its artifacts
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Pair index
        #[arg(long, default_value_t = 0)]
        pair: usize,
    },
    /// Run (or resume) the full sweep across all pairs
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-evaluate the checkpoints of an existing run directory
    Eval {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Render SVG plots from a run directory's CSVs
    Plot {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the aggregate statistics table for a run directory
    Report {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn resolve_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    if let Some(pairs) = common.pairs {
        cfg.n_pairs = pairs;
    }
    if let Some(name) = &common.preset {
        cfg.preset = Some(name.parse()?);
        cfg.language = None;
    }
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir_of(common: &CommonArgs) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Generate { common, pair } => {
            let cfg = resolve_config(&common)?;
            let files = generate_corpora(&cfg, pair, &cfg.out_dir)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(0)
        }
        Cmd::Train { common, pair } => {
            let cfg = resolve_config(&common)?;
            let dir = train_pair(&cfg, pair)?;
            println!("pair {} trained, artifacts in {}", pair, dir.display());
            Ok(0)
        }
        Cmd::Run { common } => {
            let cfg = resolve_config(&common)?;
            let manifest = run_experiment(&cfg)?;
            println!(
                "{} pairs completed, {} failed, outputs in {}",
                manifest.completed(),
                manifest.failed(),
                cfg.out_dir.display()
            );
            for entry in manifest.pairs.iter().filter(|p| p.error.is_some()) {
                eprintln!(
                    "pair {} failed: {}",
                    entry.pair,
                    entry.error.as_deref().unwrap_or("unknown")
                );
            }
            Ok(if manifest.failed() > 0 { 2 } else { 0 })
        }
        Cmd::Eval { common } => {
            let out = out_dir_of(&common);
            let n = reevaluate(&out)?;
            println!("re-evaluated {} pairs in {}", n, out.display());
            Ok(0)
        }
        Cmd::Plot { common } => {
            let out = out_dir_of(&common);
            let files = plot_run(&out)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(0)
        }
        Cmd::Report { common } => {
            let out = out_dir_of(&common);
            print!("{}", report(&out)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes; anything else is a usage
            // (configuration) error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e);
            let code = match e {
                Error::Config(_) | Error::DegenerateInventory(_) => 1,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
