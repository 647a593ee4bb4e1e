//! Scratch probe: supervised-learning dynamics for one agent.
//!
//! Usage: probe_sl [init_limit] [epochs] [seed]

use casemark::agents::{AgentDims, DecodeMode};
use casemark::evaluation::{listening_accuracy, speaking_accuracy};
use casemark::language::{
    build_meaning_space, generate_corpus, resample_sl_subset, split_dataset, Inventory,
    LanguageSpec,
};
use casemark::rng::SimRng;
use casemark::training::{train_supervised, SlConfig};
use casemark::AgentParams;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let init_limit: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.1);
    let epochs: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(60);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1);

    let inv = Inventory::default();
    let spec = LanguageSpec::dominant_object();
    let dims = AgentDims::for_inventory(&inv);
    let space = build_meaning_space(&inv, spec.condition);
    let (train, test) = split_dataset(&space, &mut SimRng::with_stream(seed, 10));

    let emb_limit: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(init_limit);
    let mut agent = AgentParams::new(dims);
    let mut init_rng = SimRng::with_stream(seed, 1);
    agent.visit_params_mut(&mut |name, _, p| {
        if name.contains("emb") {
            p.init_uniform(&mut init_rng, emb_limit);
        } else if p.value().rows() > 1 {
            p.init_uniform(&mut init_rng, init_limit);
        }
    });

    let mut corpus_rng = SimRng::with_stream(seed, 2);
    let subset = resample_sl_subset(&train, &mut corpus_rng).unwrap();
    let corpus = generate_corpus(&inv, &subset, &spec, &mut corpus_rng);
    let eval_corpus = generate_corpus(&inv, &test, &spec, &mut SimRng::with_stream(seed, 12));

    let cfg = SlConfig {
        epochs: 10,
        ..SlConfig::default()
    };
    let mut sl_rng = SimRng::with_stream(seed, 3);
    let mut rng = SimRng::new(0);
    let rounds = epochs / 10;
    for round in 1..=rounds {
        let curve = train_supervised(&mut agent, &corpus, &cfg, &mut sl_rng);
        let li = listening_accuracy(&agent, &eval_corpus);
        let sp = speaking_accuracy(&agent, &test, &inv, &spec, DecodeMode::Greedy, &mut rng);
        let train_li = listening_accuracy(&agent, &corpus);
        println!(
            "epoch {:>3}  sp_loss {:.4}  li_loss {:.4}  speak(test) {:.3}  listen(test) {:.3}  listen(train) {:.3}",
            round * 10,
            curve.last().unwrap().speaker_loss,
            curve.last().unwrap().listener_loss,
            sp,
            li,
            train_li
        );
    }
}
