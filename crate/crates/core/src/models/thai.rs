//! The Thai demand-response program: a utility (leader) sets reduction
//! targets, consumers (followers) choose their consumption and are rewarded
//! for the effective reduction below their baseline.
//!
//! Production cost and utility are quadratic, φ(x) = c1·x − c2·x², with
//! (c1, c2) read from the owner's type and c1 shifted by the exogenous state
//! of the stage.

use serde::{Deserialize, Serialize};

use super::grid_labels;
use crate::error::{Error, Result};
use crate::finite::{FactorKind, FiniteFactor};
use crate::normal_form::{format_ext, DEFAULT_PROFILE_CAP};
use crate::preferences::{
    make_dirac, Belief, Objective, PlayerData, PlayerPartition, RiskMeasure, Sense, WGame,
};
use crate::wmodel::{AgentId, AgentSpec, InfoSpec, WModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticType {
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
}

impl QuadraticType {
    pub fn eval(&self, shift: f64, x: f64) -> f64 {
        (self.c1 + shift) * x - self.c2 * x * x
    }
}

/// A player's type factor: candidate types, the masses the other players
/// assign to them, and the true type (a Dirac for the owner).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeGrid {
    pub types: Vec<QuadraticType>,
    pub masses: Vec<f64>,
    #[serde(default)]
    pub known: usize,
}

impl TypeGrid {
    pub fn single(c1: f64, c2: f64) -> Self {
        TypeGrid {
            types: vec![QuadraticType { c1, c2 }],
            masses: vec![1.0],
            known: 0,
        }
    }

    fn labels(&self) -> Vec<String> {
        self.types
            .iter()
            .map(|q| format!("{}:{}", format_ext(q.c1), format_ext(q.c2)))
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        let bad = |reason: String| Error::InvalidParameter {
            name: name.to_string(),
            reason,
        };
        if self.types.is_empty() {
            return Err(bad("no types".into()));
        }
        if self.masses.len() != self.types.len() {
            return Err(bad(format!(
                "{} masses for {} types",
                self.masses.len(),
                self.types.len()
            )));
        }
        if self.known >= self.types.len() {
            return Err(bad(format!("known index {} out of range", self.known)));
        }
        if self
            .types
            .iter()
            .any(|q| !q.c1.is_finite() || !q.c2.is_finite() || q.c2 < 0.0)
        {
            return Err(bad("coefficients must be finite with c2 ≥ 0".into()));
        }
        Ok(())
    }
}

/// Exogenous state of one stage: additive shifts of the linear coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExoState {
    #[serde(default)]
    pub leader_shift: f64,
    #[serde(default)]
    pub follower_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExoGrid {
    pub states: Vec<ExoState>,
    /// Shared by every player.
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerSpec {
    pub id: String,
    /// B_{f,t}, one per stage.
    pub baseline: Vec<f64>,
    pub types: TypeGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfoMode {
    /// Every information field is trivial.
    OpenLoop,
    /// The largest fields allowed: own type, past exogenous states, past
    /// actions of everyone, and for followers the current target.
    #[default]
    FullHistory,
    /// Own type, plus the current target for followers.
    CurrentStage,
}

/// How the reward is computed with several followers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// min{u_t, Σ_f (B_{f,t} − x_{f,t})}, shared in proportion to each
    /// follower's own reduction.
    #[default]
    Aggregate,
    /// Σ_f min{u_t, B_{f,t} − x_{f,t}}.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThaiParams {
    pub horizon: usize,
    /// p_t, one per stage.
    pub price: Vec<f64>,
    pub reward: f64,
    pub target_grid: Vec<f64>,
    pub consumption_grid: Vec<f64>,
    pub leader_types: TypeGrid,
    pub followers: Vec<FollowerSpec>,
    /// One grid per stage, or none at all.
    #[serde(default)]
    pub exogenous: Vec<ExoGrid>,
    #[serde(default)]
    pub info_mode: InfoMode,
    /// Floor the effective reduction at zero, so over-consumption earns no
    /// (negative) reward.
    #[serde(default = "default_true")]
    pub clamp_reduction: bool,
    #[serde(default)]
    pub aggregation: Aggregation,
    /// Cap on strategy profiles, checked at build time.
    #[serde(default = "default_cap")]
    pub cap: u64,
}

fn default_true() -> bool {
    true
}

fn default_cap() -> u64 {
    DEFAULT_PROFILE_CAP
}

impl ThaiParams {
    /// B = 10, p = 1, r = 0.5, u ∈ {0, 2, 4}, x ∈ {6, 8, 10},
    /// φ^f = 2x − 0.1x², φ^ℓ = 0.3x, types known.
    pub fn small_instance() -> Self {
        ThaiParams {
            horizon: 1,
            price: vec![1.0],
            reward: 0.5,
            target_grid: vec![0.0, 2.0, 4.0],
            consumption_grid: vec![6.0, 8.0, 10.0],
            leader_types: TypeGrid::single(0.3, 0.0),
            followers: vec![FollowerSpec {
                id: "follower".into(),
                baseline: vec![10.0],
                types: TypeGrid::single(2.0, 0.1),
            }],
            exogenous: vec![],
            info_mode: InfoMode::FullHistory,
            clamp_reduction: true,
            aggregation: Aggregation::Aggregate,
            cap: DEFAULT_PROFILE_CAP,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: String| Error::InvalidParameter {
            name: name.into(),
            reason,
        };
        let t = self.horizon;
        if t == 0 {
            return Err(bad("horizon", "must be at least 1".into()));
        }
        if self.price.len() != t {
            return Err(bad(
                "price",
                format!("{} values for horizon {t}", self.price.len()),
            ));
        }
        if self.price.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(bad("price", "must be finite and ≥ 0".into()));
        }
        if !self.reward.is_finite() || self.reward < 0.0 {
            return Err(bad("reward", "must be finite and ≥ 0".into()));
        }
        for (name, g) in [
            ("target_grid", &self.target_grid),
            ("consumption_grid", &self.consumption_grid),
        ] {
            if g.is_empty() {
                return Err(bad(name, "empty grid".into()));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(bad(name, "values must be finite".into()));
            }
        }
        self.leader_types.validate("leader_types")?;
        if self.followers.is_empty() {
            return Err(bad("followers", "need at least one follower".into()));
        }
        for (i, f) in self.followers.iter().enumerate() {
            if f.id == "leader" || self.followers[..i].iter().any(|g| g.id == f.id) {
                return Err(bad(
                    "followers",
                    format!("duplicate or reserved id `{}`", f.id),
                ));
            }
            if f.baseline.len() != t {
                return Err(bad(
                    &format!("baseline of `{}`", f.id),
                    format!("{} values for horizon {t}", f.baseline.len()),
                ));
            }
            if f.baseline.iter().any(|b| !b.is_finite() || *b < 0.0) {
                return Err(bad(
                    &format!("baseline of `{}`", f.id),
                    "must be finite and ≥ 0".into(),
                ));
            }
            f.types.validate(&format!("types of `{}`", f.id))?;
        }
        if !self.exogenous.is_empty() && self.exogenous.len() != t {
            return Err(bad(
                "exogenous",
                format!("{} grids for horizon {t}", self.exogenous.len()),
            ));
        }
        for (s, g) in self.exogenous.iter().enumerate() {
            if g.states.is_empty() || g.masses.len() != g.states.len() {
                return Err(bad(
                    &format!("exogenous[{s}]"),
                    "states and masses must be nonempty and aligned".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Single leader, single follower, single stage.
pub fn build_thai_slsf_st(params: &ThaiParams) -> Result<WGame> {
    params.validate()?;
    if params.horizon != 1 || params.followers.len() != 1 || !params.exogenous.is_empty() {
        return Err(Error::InvalidParameter {
            name: "params".into(),
            reason: "single-stage model needs horizon 1, one follower and no exogenous factor"
                .into(),
        });
    }
    build(params, false)
}

/// Single leader, single follower, several stages.
pub fn build_thai_slsf_mt(params: &ThaiParams) -> Result<WGame> {
    params.validate()?;
    if params.followers.len() != 1 {
        return Err(Error::InvalidParameter {
            name: "followers".into(),
            reason: format!("expected one follower, got {}", params.followers.len()),
        });
    }
    build(params, true)
}

/// Single leader, several followers, several stages.
pub fn build_thai_slmf_mt(params: &ThaiParams) -> Result<WGame> {
    params.validate()?;
    build(params, true)
}

/// Positions of the factors in the configuration space.
struct Layout {
    horizon: usize,
    exo: bool,
    followers: usize,
}

impl Layout {
    fn n_exo(&self) -> usize {
        if self.exo {
            self.horizon
        } else {
            0
        }
    }
    fn leader_type(&self) -> usize {
        self.n_exo()
    }
    fn follower_type(&self, i: usize) -> usize {
        self.n_exo() + 1 + i
    }
    fn target(&self, t: usize) -> usize {
        self.n_exo() + 1 + self.followers + t
    }
    fn consumption(&self, i: usize, t: usize) -> usize {
        self.n_exo() + 1 + self.followers + self.horizon + i * self.horizon + t
    }
}

fn build(params: &ThaiParams, staged: bool) -> Result<WGame> {
    let p = params;
    let horizon = p.horizon;
    let nf = p.followers.len();
    let lay = Layout {
        horizon,
        exo: !p.exogenous.is_empty(),
        followers: nf,
    };
    let target_id = |t: usize| {
        if staged {
            format!("u_leader_{}", t + 1)
        } else {
            "u_leader".into()
        }
    };
    let cons_id = |i: usize, t: usize| {
        if staged {
            format!("x_{}_{}", p.followers[i].id, t + 1)
        } else {
            format!("x_{}", p.followers[i].id)
        }
    };
    let agent_id = |player: &str, t: usize| {
        if staged {
            AgentId::staged(player, t as u32 + 1)
        } else {
            AgentId::new(player)
        }
    };
    let exo_id = |t: usize| format!("e_{}", t + 1);
    let type_id = |i: usize| format!("w_{}", p.followers[i].id);

    let mut nature = Vec::new();
    for (t, g) in p.exogenous.iter().enumerate() {
        let labels = g
            .states
            .iter()
            .map(|s| {
                format!(
                    "{}:{}",
                    format_ext(s.leader_shift),
                    format_ext(s.follower_shift)
                )
            })
            .collect::<Vec<_>>();
        nature.push(FiniteFactor::new(
            &exo_id(t),
            FactorKind::NatureExogenous,
            labels,
        ));
    }
    nature.push(
        FiniteFactor::new("w_leader", FactorKind::NatureType, p.leader_types.labels())
            .with_label("leader type"),
    );
    for (i, f) in p.followers.iter().enumerate() {
        nature.push(FiniteFactor::new(
            &type_id(i),
            FactorKind::NatureType,
            f.types.labels(),
        ));
    }

    let history = |upto: usize| -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        if lay.exo {
            v.extend((0..upto).map(exo_id));
        }
        v.extend((0..upto).map(target_id));
        for i in 0..nf {
            v.extend((0..upto).map(|s| cons_id(i, s)));
        }
        v
    };
    let leader_info = |t: usize| -> Vec<String> {
        match p.info_mode {
            InfoMode::OpenLoop => vec![],
            InfoMode::CurrentStage => vec!["w_leader".into()],
            InfoMode::FullHistory => {
                let mut v = vec!["w_leader".to_string()];
                v.extend(history(t));
                v
            }
        }
    };
    let follower_info = |i: usize, t: usize| -> Vec<String> {
        match p.info_mode {
            InfoMode::OpenLoop => vec![],
            InfoMode::CurrentStage => vec![type_id(i), target_id(t)],
            InfoMode::FullHistory => {
                let mut v = vec![type_id(i), target_id(t)];
                v.extend(history(t));
                v
            }
        }
    };

    let targets = grid_labels(&p.target_grid);
    let consumptions = grid_labels(&p.consumption_grid);
    let mut agents = Vec::new();
    for t in 0..horizon {
        agents.push(AgentSpec::new(
            agent_id("leader", t),
            FiniteFactor::new(&target_id(t), FactorKind::Action, targets.clone())
                .with_label("target reduction"),
            InfoSpec::Cylinder(leader_info(t)),
        ));
    }
    for (i, f) in p.followers.iter().enumerate() {
        for t in 0..horizon {
            agents.push(AgentSpec::new(
                agent_id(&f.id, t),
                FiniteFactor::new(&cons_id(i, t), FactorKind::Action, consumptions.clone())
                    .with_label("consumption"),
                InfoSpec::Cylinder(follower_info(i, t)),
            ));
        }
    }
    let model = WModel::new(nature, agents)?;

    let profiles = (0..model.agent_count()).try_fold(1u128, |acc, a| {
        model.count_strategies(a).and_then(|c| acc.checked_mul(c))
    });
    match profiles {
        Some(c) if c <= p.cap as u128 => {}
        c => {
            return Err(Error::CapacityExceeded {
                what: "strategy profiles of the demand-response model".into(),
                count: c.unwrap_or(u128::MAX),
                cap: p.cap,
            })
        }
    }

    let values = evaluate_all(p, &lay, &model);
    let mut data = Vec::with_capacity(nf + 1);
    let exo_masses = || {
        p.exogenous
            .iter()
            .map(|g| g.masses.clone())
            .collect::<Vec<_>>()
    };
    let dirac = |g: &TypeGrid| make_dirac(g.types.len(), g.known).expect("validated");

    let mut leader_belief = exo_masses();
    leader_belief.push(dirac(&p.leader_types));
    leader_belief.extend(p.followers.iter().map(|f| f.types.masses.clone()));
    data.push(PlayerData {
        player: "leader".into(),
        objective: Objective::new(Sense::Cost, values.iter().map(|v| v[0]).collect()),
        risk: RiskMeasure::Expectation(Belief::Product(leader_belief)),
    });
    for (i, f) in p.followers.iter().enumerate() {
        let mut belief = exo_masses();
        belief.push(p.leader_types.masses.clone());
        for (j, g) in p.followers.iter().enumerate() {
            belief.push(if i == j {
                dirac(&g.types)
            } else {
                g.types.masses.clone()
            });
        }
        data.push(PlayerData {
            player: f.id.clone(),
            objective: Objective::new(Sense::Payoff, values.iter().map(|v| v[i + 1]).collect()),
            risk: RiskMeasure::Expectation(Belief::Product(belief)),
        });
    }
    let players = PlayerPartition::by_agent_player(&model);
    let follower_ids: Vec<&str> = p.followers.iter().map(|f| f.id.as_str()).collect();
    WGame::new(model, players, data)?.with_roles(&["leader"], &follower_ids)
}

/// (leader cost, follower payoffs...) at every configuration point.
fn evaluate_all(p: &ThaiParams, lay: &Layout, model: &WModel) -> Vec<Vec<f64>> {
    let space = model.configuration();
    let nf = p.followers.len();
    let clamp = |v: f64| if p.clamp_reduction { v.max(0.0) } else { v };
    (0..space.len())
        .map(|idx| {
            let h = space.point(idx);
            let lt = &p.leader_types.types[h[lay.leader_type()]];
            let mut out = vec![0.0; nf + 1];
            for t in 0..p.horizon {
                let exo = if lay.exo {
                    p.exogenous[t].states[h[t]]
                } else {
                    ExoState::default()
                };
                let u = p.target_grid[h[lay.target(t)]];
                let xs: Vec<f64> = (0..nf)
                    .map(|i| p.consumption_grid[h[lay.consumption(i, t)]])
                    .collect();
                let reds: Vec<f64> = (0..nf)
                    .map(|i| p.followers[i].baseline[t] - xs[i])
                    .collect();
                let shares: Vec<f64> = match p.aggregation {
                    Aggregation::Literal => reds.iter().map(|&r| clamp(u.min(r))).collect(),
                    Aggregation::Aggregate => {
                        let eff = clamp(u.min(reds.iter().sum()));
                        let weights: Vec<f64> = reds.iter().map(|&r| clamp(r)).collect();
                        let total: f64 = weights.iter().sum();
                        if total != 0.0 {
                            weights.iter().map(|&w| eff * (w / total)).collect()
                        } else {
                            vec![eff / nf as f64; nf]
                        }
                    }
                };
                let paid: f64 = match p.aggregation {
                    Aggregation::Literal => shares.iter().sum(),
                    Aggregation::Aggregate => clamp(u.min(reds.iter().sum())),
                };
                for i in 0..nf {
                    let ft = &p.followers[i].types.types[h[lay.follower_type(i)]];
                    out[0] += p.price[t] * xs[i] - lt.eval(exo.leader_shift, xs[i]);
                    out[i + 1] += p.reward * shares[i] + ft.eval(exo.follower_shift, xs[i])
                        - p.price[t] * xs[i];
                }
                out[0] -= p.reward * paid;
            }
            out
        })
        .collect()
}
