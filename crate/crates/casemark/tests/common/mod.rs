//! Shared helpers for the integration test targets.

use casemark::agents::AgentDims;
use casemark::language::{build_meaning_space, Condition, Inventory, Meaning};
use casemark::nn::{softmax_xent, GruParams, Linear};
use casemark::rng::SimRng;
use casemark::tensor::Tensor1;
use casemark::{AgentParams, Real};

pub const EPS: Real = 1e-5;
pub const REL_TOL: Real = 1e-4;
pub const ABS_FLOOR: Real = 1e-8;

/// Relative-error gradient comparison with an absolute floor: central
/// differences of an O(1) loss at eps = 1e-5 carry ~1e-11 rounding noise,
/// so differences below the floor are noise, not disagreement.
pub fn assert_grad_close(analytic: Real, numeric: Real, what: &str) {
    let diff = (analytic - numeric).abs();
    if diff < ABS_FLOOR {
        return;
    }
    let rel = diff / analytic.abs().max(numeric.abs());
    assert!(
        rel < REL_TOL,
        "{}: analytic {} vs fd {} (rel {})",
        what,
        analytic,
        numeric,
        rel
    );
}

pub fn rand_vec(rng: &mut SimRng, n: usize, scale: f64) -> Tensor1<Real> {
    Tensor1::from_fn(n, |_| rng.uniform_in(-scale, scale))
}

pub fn gru_param<'a>(g: &'a GruParams<Real>, name: &str) -> &'a casemark::Param {
    match name {
        "w_z" => &g.w_z,
        "w_r" => &g.w_r,
        "w_h" => &g.w_h,
        "u_z" => &g.u_z,
        "u_r" => &g.u_r,
        "u_h" => &g.u_h,
        "b_z" => &g.b_z,
        "b_r" => &g.b_r,
        "b_h" => &g.b_h,
        _ => unreachable!(),
    }
}

pub fn gru_param_mut<'a>(g: &'a mut GruParams<Real>, name: &str) -> &'a mut casemark::Param {
    match name {
        "w_z" => &mut g.w_z,
        "w_r" => &mut g.w_r,
        "w_h" => &mut g.w_h,
        "u_z" => &mut g.u_z,
        "u_r" => &mut g.u_r,
        "u_h" => &mut g.u_h,
        "b_z" => &mut g.b_z,
        "b_r" => &mut g.b_r,
        "b_h" => &mut g.b_h,
        _ => unreachable!(),
    }
}

pub const GRU_PARAM_NAMES: [&str; 9] = [
    "w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h",
];

/// One GRU instance checked against central differences; returns the number
/// of scalar comparisons made.
pub fn check_gru_instance(rng: &mut SimRng, label: &str) -> usize {
    let (in_dim, hid_dim) = (3, 4);
    let mut gru: GruParams<Real> = GruParams::new(in_dim, hid_dim);
    gru.init_uniform(rng, 0.7);
    for b in [&mut gru.b_z, &mut gru.b_r, &mut gru.b_h] {
        b.init_uniform(rng, 0.5);
    }
    let x = rand_vec(rng, in_dim, 1.5);
    let h = rand_vec(rng, hid_dim, 1.5);
    let w = rand_vec(rng, hid_dim, 1.0);
    let loss = |g: &GruParams<Real>, x: &Tensor1<Real>, h: &Tensor1<Real>| -> Real {
        g.step(x, h).dot(&w)
    };
    let mut checks = 0;

    let (_, cache) = gru.step_cached(&x, &h);
    let (dx, dh) = gru.backward(&cache, &w);
    for i in 0..in_dim {
        let mut xp = x.clone();
        xp[i] += EPS;
        let mut xm = x.clone();
        xm[i] -= EPS;
        let fd = (loss(&gru, &xp, &h) - loss(&gru, &xm, &h)) / (2.0 * EPS);
        assert_grad_close(dx[i], fd, &format!("{} dx[{}]", label, i));
        checks += 1;
    }
    for i in 0..hid_dim {
        let mut hp = h.clone();
        hp[i] += EPS;
        let mut hm = h.clone();
        hm[i] -= EPS;
        let fd = (loss(&gru, &x, &hp) - loss(&gru, &x, &hm)) / (2.0 * EPS);
        assert_grad_close(dh[i], fd, &format!("{} dh[{}]", label, i));
        checks += 1;
    }
    for name in GRU_PARAM_NAMES {
        let len = gru_param(&gru, name).value().len();
        for i in 0..len {
            let analytic = gru_param(&gru, name).grad().as_slice()[i];
            let orig = gru_param(&gru, name).value().as_slice()[i];
            gru_param_mut(&mut gru, name).value_mut().as_mut_slice()[i] = orig + EPS;
            let lp = loss(&gru, &x, &h);
            gru_param_mut(&mut gru, name).value_mut().as_mut_slice()[i] = orig - EPS;
            let lm = loss(&gru, &x, &h);
            gru_param_mut(&mut gru, name).value_mut().as_mut_slice()[i] = orig;
            assert_grad_close(analytic, (lp - lm) / (2.0 * EPS), &format!("{} {}[{}]", label, name, i));
            checks += 1;
        }
    }
    checks
}

/// One dense-layer instance against central differences.
pub fn check_linear_instance(rng: &mut SimRng, label: &str) -> usize {
    let (in_dim, out_dim) = (1 + rng.below(5), 1 + rng.below(5));
    let mut lin: Linear<Real> = Linear::new(in_dim, out_dim);
    lin.init_uniform(rng, 1.0);
    lin.b.init_uniform(rng, 1.0);
    let x = rand_vec(rng, in_dim, 2.0);
    let w = rand_vec(rng, out_dim, 1.0);
    let loss = |l: &Linear<Real>, x: &Tensor1<Real>| l.forward(x).dot(&w);
    let mut checks = 0;

    let dx = lin.backward(&x, &w);
    for i in 0..in_dim {
        let mut xp = x.clone();
        xp[i] += EPS;
        let mut xm = x.clone();
        xm[i] -= EPS;
        let fd = (loss(&lin, &xp) - loss(&lin, &xm)) / (2.0 * EPS);
        assert_grad_close(dx[i], fd, &format!("{} dx[{}]", label, i));
        checks += 1;
    }
    for i in 0..lin.w.value().len() {
        let analytic = lin.w.grad().as_slice()[i];
        let orig = lin.w.value().as_slice()[i];
        lin.w.value_mut().as_mut_slice()[i] = orig + EPS;
        let lp = loss(&lin, &x);
        lin.w.value_mut().as_mut_slice()[i] = orig - EPS;
        let lm = loss(&lin, &x);
        lin.w.value_mut().as_mut_slice()[i] = orig;
        assert_grad_close(analytic, (lp - lm) / (2.0 * EPS), &format!("{} w[{}]", label, i));
        checks += 1;
    }
    for i in 0..out_dim {
        let analytic = lin.b.grad().as_slice()[i];
        let orig = lin.b.value().as_slice()[i];
        lin.b.value_mut().as_mut_slice()[i] = orig + EPS;
        let lp = loss(&lin, &x);
        lin.b.value_mut().as_mut_slice()[i] = orig - EPS;
        let lm = loss(&lin, &x);
        lin.b.value_mut().as_mut_slice()[i] = orig;
        assert_grad_close(analytic, (lp - lm) / (2.0 * EPS), &format!("{} b[{}]", label, i));
        checks += 1;
    }
    checks
}

/// One softmax cross-entropy instance against central differences, at the
/// tighter 1e-5 relative tolerance.
pub fn check_softmax_xent_instance(rng: &mut SimRng, label: &str) -> usize {
    let n = 2 + rng.below(29);
    let logits = rand_vec(rng, n, 4.0);
    let target = rng.below(n);
    let (_, grad) = softmax_xent(&logits, target);
    let mut checks = 0;
    for i in 0..n {
        let mut lp = logits.clone();
        lp[i] += EPS;
        let mut lm = logits.clone();
        lm[i] -= EPS;
        let fd = (softmax_xent(&lp, target).0 - softmax_xent(&lm, target).0) / (2.0 * EPS);
        let denom = grad[i].abs().max(fd.abs());
        if denom > 1e-7 {
            let rel = (grad[i] - fd).abs() / denom;
            assert!(
                rel < 1e-5,
                "{} grad[{}]: {} vs {} (rel {})",
                label,
                i,
                grad[i],
                fd,
                rel
            );
        }
        checks += 1;
    }
    checks
}

/// A minimal inventory (2 entities, 1 action) agent plus a fixed well-formed
/// utterance, used for end-to-end gradient checks.
pub fn tiny_setup(seed: u64) -> (AgentParams, Meaning, Vec<usize>) {
    let inv = Inventory::new(1, 1, 1);
    let dims = AgentDims {
        meaning_dim: 3,
        word_dim: 4,
        hidden_dim: 5,
        ..AgentDims::for_inventory(&inv)
    };
    let agent = AgentParams::init(dims, &mut SimRng::with_stream(seed, 1));
    let space = build_meaning_space(&inv, Condition::ObjectMarking);
    let m = space[0];
    let tokens = vec![m.agent, m.patient, inv.marker_id(), m.action];
    (agent, m, tokens)
}

pub fn param_value(agent: &AgentParams, name: &str, i: usize) -> Real {
    let mut out = None;
    agent.visit_params(&mut |n, _, p| {
        if n == name {
            out = Some(p.value().as_slice()[i]);
        }
    });
    out.expect("param name")
}

pub fn param_grad(agent: &AgentParams, name: &str, i: usize) -> Real {
    let mut out = None;
    agent.visit_params(&mut |n, _, p| {
        if n == name {
            out = Some(p.grad().as_slice()[i]);
        }
    });
    out.expect("param name")
}

pub fn set_param_value(agent: &mut AgentParams, name: &str, i: usize, v: Real) {
    agent.visit_params_mut(&mut |n, _, p| {
        if n == name {
            p.value_mut().as_mut_slice()[i] = v;
        }
    });
}

pub fn param_layout(agent: &AgentParams) -> Vec<(&'static str, usize)> {
    let mut layout = Vec::new();
    agent.visit_params(&mut |n, _, p| layout.push((n, p.value().len())));
    layout
}

/// Central-difference check of every agent parameter against the gradients
/// already accumulated in the agent; returns the comparison count.
pub fn check_all_params(
    agent: &mut AgentParams,
    loss: &dyn Fn(&AgentParams) -> Real,
    label: &str,
) -> usize {
    let mut checks = 0;
    for (name, len) in param_layout(agent) {
        for i in 0..len {
            let analytic = param_grad(agent, name, i);
            let orig = param_value(agent, name, i);
            set_param_value(agent, name, i, orig + EPS);
            let lp = loss(agent);
            set_param_value(agent, name, i, orig - EPS);
            let lm = loss(agent);
            set_param_value(agent, name, i, orig);
            let fd = (lp - lm) / (2.0 * EPS);
            assert_grad_close(analytic, fd, &format!("{} {}[{}]", label, name, i));
            checks += 1;
        }
    }
    checks
}

/// End-to-end speaker-loss gradient check for one random agent instance.
pub fn check_speaker_instance(seed: u64) -> usize {
    let (mut agent, m, tokens) = tiny_setup(seed);
    let mut targets = tokens;
    targets.push(agent.dims().eos_id());
    agent.speaker_forward_backward(&m, &targets, 1.0, 0.0);
    let t = targets.clone();
    check_all_params(
        &mut agent,
        &move |a: &AgentParams| a.speaker_loss(&m, &t),
        &format!("speaker seed {}", seed),
    )
}

/// End-to-end listener-loss gradient check for one random agent instance.
pub fn check_listener_instance(seed: u64) -> usize {
    let (mut agent, m, tokens) = tiny_setup(seed);
    agent.listener_forward_backward(&tokens, &m, 1.0);
    let t = tokens.clone();
    check_all_params(
        &mut agent,
        &move |a: &AgentParams| a.listener_loss(&t, &m),
        &format!("listener seed {}", seed),
    )
}
