//! Random small models and games shared by the integration tests.
#![allow(dead_code)]

use prodform::finite::{FactorKind, FiniteFactor};
use prodform::preferences::{
    Belief, Objective, PlayerData, PlayerPartition, RiskMeasure, Sense, WGame,
};
use prodform::wmodel::{AgentId, AgentSpec, InfoSpec, StrategyProfile, WModel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Nature with at most four points, as one or two factors.
fn random_nature(r: &mut ChaCha8Rng) -> Vec<FiniteFactor> {
    let sizes: Vec<usize> = match r.gen_range(0..4) {
        0 => vec![1],
        1 => vec![r.gen_range(2..=4)],
        2 => vec![2, 2],
        _ => vec![r.gen_range(1..=2), 2],
    };
    sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| FiniteFactor::new(&format!("n{i}"), FactorKind::NatureExogenous, labels(n)))
        .collect()
}

/// Random partition of `space_len` points that is a coarsening of `fine`.
fn coarsen(r: &mut ChaCha8Rng, fine: &[u32], atoms: usize) -> Vec<usize> {
    let k = r.gen_range(1..=atoms.max(1));
    let merge: Vec<usize> = (0..atoms).map(|_| r.gen_range(0..k)).collect();
    fine.iter().map(|&a| merge[a as usize]).collect()
}

/// A model that is sequential by construction: agents decided in a hidden
/// causal order, each observing some Nature factors and some earlier
/// actions, declared in shuffled order.
pub fn random_sequential_model(r: &mut ChaCha8Rng) -> WModel {
    let nature = random_nature(r);
    let n_agents = r.gen_range(1..=3);
    let mut order: Vec<usize> = (0..n_agents).collect();
    order.shuffle(r);
    let sizes: Vec<usize> = (0..n_agents).map(|_| r.gen_range(1..=3)).collect();
    // rank[k] = causal position of declared agent k
    let mut specs = Vec::new();
    for k in 0..n_agents {
        let rank = order[k];
        let mut visible: Vec<String> = nature
            .iter()
            .filter(|_| r.gen_bool(0.5))
            .map(|f| f.id.clone())
            .collect();
        for (j, &before) in order.iter().enumerate() {
            if before < rank && r.gen_bool(0.6) {
                visible.push(format!("u{j}"));
            }
        }
        specs.push(AgentSpec::new(
            AgentId::new(&format!("a{k}")),
            FiniteFactor::new(&format!("u{k}"), FactorKind::Action, labels(sizes[k])),
            InfoSpec::Cylinder(visible),
        ));
    }
    let model = WModel::new(nature.clone(), specs.clone()).expect("valid by construction");
    if !r.gen_bool(0.4) {
        return model;
    }
    // replace some cylinders by random coarsenings, still causal
    for (k, spec) in specs.iter_mut().enumerate() {
        if r.gen_bool(0.5) {
            let p = model.info(k);
            spec.info = InfoSpec::Explicit(coarsen(r, p.labels(), p.atom_count()));
        }
    }
    WModel::new(nature, specs).expect("coarsening keeps validity")
}

pub fn random_profile(r: &mut ChaCha8Rng, model: &WModel) -> StrategyProfile {
    StrategyProfile::from_tables(
        (0..model.agent_count())
            .map(|a| {
                (0..model.info(a).atom_count())
                    .map(|_| r.gen_range(0..model.action_size(a)))
                    .collect()
            })
            .collect(),
    )
}

fn random_belief(r: &mut ChaCha8Rng, model: &WModel) -> Belief {
    Belief::Product(
        model
            .nature()
            .factors()
            .iter()
            .map(|f| {
                let n = f.size();
                if r.gen_bool(0.3) {
                    let mut v = vec![0.0; n];
                    v[r.gen_range(0..n)] = 1.0;
                    v
                } else {
                    let w: Vec<f64> = (0..n).map(|_| r.gen_range(1..=4) as f64).collect();
                    let s: f64 = w.iter().sum();
                    w.iter().map(|x| x / s).collect()
                }
            })
            .collect(),
    )
}

fn random_risk(r: &mut ChaCha8Rng, model: &WModel) -> RiskMeasure {
    let b = random_belief(r, model);
    match r.gen_range(0..4) {
        0 | 1 => RiskMeasure::Expectation(b),
        2 => RiskMeasure::WorstCase(Some(b)),
        _ => RiskMeasure::CVaR {
            alpha: [0.25, 0.5, 1.0][r.gen_range(0..3)],
            belief: b,
        },
    }
}

/// Small integer values make ties frequent.
fn random_table(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(0..6) as f64).collect()
}

fn random_sense(r: &mut ChaCha8Rng) -> Sense {
    if r.gen_bool(0.5) {
        Sense::Cost
    } else {
        Sense::Payoff
    }
}

/// Two players, `leader` and `follower`, one agent each. The follower
/// observes the leader's action (so the model is sequential) and possibly
/// one Nature factor.
pub fn random_leader_follower(r: &mut ChaCha8Rng) -> WGame {
    let nature = random_nature(r);
    let mut leader_sees = Vec::new();
    if r.gen_bool(0.5) {
        leader_sees.push(nature[0].id.clone());
    }
    let mut follower_sees = vec!["u_leader".to_string()];
    if r.gen_bool(0.3) {
        follower_sees.push(nature[nature.len() - 1].id.clone());
    }
    let agents = vec![
        AgentSpec::new(
            AgentId::new("leader"),
            FiniteFactor::new("u_leader", FactorKind::Action, labels(r.gen_range(1..=3))),
            InfoSpec::Cylinder(leader_sees),
        ),
        AgentSpec::new(
            AgentId::new("follower"),
            FiniteFactor::new("u_follower", FactorKind::Action, labels(r.gen_range(1..=2))),
            InfoSpec::Cylinder(follower_sees),
        ),
    ];
    let model = WModel::new(nature, agents).expect("valid");
    finish_game(r, model, Some((&["leader"], &["follower"])))
}

/// `n` single-agent players with trivial information over a one-point
/// Nature: a plain normal-form game with `actions` moves each.
pub fn random_matrix_game(r: &mut ChaCha8Rng, n: usize, actions: usize) -> WGame {
    let agents = (0..n)
        .map(|i| {
            AgentSpec::new(
                AgentId::new(&format!("p{i}")),
                FiniteFactor::new(&format!("u{i}"), FactorKind::Action, labels(actions)),
                InfoSpec::Cylinder(vec![]),
            )
        })
        .collect();
    let model = WModel::new(vec![], agents).expect("valid");
    finish_game(r, model, None)
}

/// One leader and two followers, all with trivial information.
pub fn random_two_follower_game(r: &mut ChaCha8Rng) -> WGame {
    let agents = ["leader", "f1", "f2"]
        .iter()
        .map(|p| {
            AgentSpec::new(
                AgentId::new(p),
                FiniteFactor::new(&format!("u_{p}"), FactorKind::Action, labels(2)),
                InfoSpec::Cylinder(vec![]),
            )
        })
        .collect();
    let model = WModel::new(vec![], agents).expect("valid");
    finish_game(r, model, Some((&["leader"], &["f1", "f2"])))
}

fn finish_game(r: &mut ChaCha8Rng, model: WModel, roles: Option<(&[&str], &[&str])>) -> WGame {
    let n = model.configuration().len();
    let players = PlayerPartition::by_agent_player(&model);
    let data = players
        .players()
        .iter()
        .map(|p| PlayerData {
            player: p.clone(),
            objective: Objective::new(random_sense(r), random_table(r, n)),
            risk: random_risk(r, &model),
        })
        .collect();
    let g = WGame::new(model, players, data).expect("valid");
    match roles {
        Some((l, f)) => g.with_roles(l, f).expect("roles"),
        None => g,
    }
}
