//! Players, objectives over the configuration space, beliefs on Nature and
//! risk measures.
//!
//! Objective values are extended reals stored as `f64` (`±inf` allowed, NaN
//! never produced). Impossible configurations carry the *adverse* infinity of
//! the player's sense: `+inf` for a cost, `-inf` for a payoff.
//!
//! CVaR at level α is the probability-weighted mean of the adverse tail of
//! total mass α, splitting the boundary atom fractionally:
//! for a cost, values are sorted from largest to smallest and the first α
//! units of mass are averaged; for a payoff, from smallest to largest.
//! CVaR(1) is the expectation and CVaR(α → 0) tends to the worst case.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::ProductSpace;
use crate::wmodel::WModel;

const MASS_TOLERANCE: f64 = 1e-12;

/// Whether a player minimizes or maximizes its objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Cost,
    Payoff,
}

impl Sense {
    /// The value marking an impossible configuration.
    pub fn adverse_infinity(self) -> f64 {
        match self {
            Sense::Cost => f64::INFINITY,
            Sense::Payoff => f64::NEG_INFINITY,
        }
    }

    /// Orders values from best to worst for this sense.
    pub fn compare_best_first(self, a: f64, b: f64) -> Ordering {
        match self {
            Sense::Cost => a.total_cmp(&b),
            Sense::Payoff => b.total_cmp(&a),
        }
    }

    /// True iff `a` is strictly better than `b` beyond the tie tolerance.
    pub fn strictly_better(self, a: f64, b: f64) -> bool {
        !approx_eq(a, b) && self.compare_best_first(a, b) == Ordering::Less
    }

    /// The best of two values.
    pub fn best(self, a: f64, b: f64) -> f64 {
        if self.compare_best_first(a, b) == Ordering::Greater {
            b
        } else {
            a
        }
    }

    pub fn worst(self, a: f64, b: f64) -> f64 {
        if self.compare_best_first(a, b) == Ordering::Greater {
            a
        } else {
            b
        }
    }
}

/// Relative tolerance under which two finite normal-form values tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Extended-real equality with a relative tolerance on finite values.
pub fn approx_eq(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= TIE_TOLERANCE * 1f64.max(a.abs()).max(b.abs())
}

/// j^p: one extended-real value per configuration point.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    pub values: Vec<f64>,
}

impl Objective {
    pub fn new(sense: Sense, values: Vec<f64>) -> Self {
        Objective { sense, values }
    }

    /// Evaluates `f` at every configuration point.
    pub fn tabulate<F: Fn(&[usize]) -> f64>(sense: Sense, model: &WModel, f: F) -> Self {
        let space = model.configuration();
        let values = (0..space.len()).map(|i| f(&space.point(i))).collect();
        Objective { sense, values }
    }

    fn validate(&self, model: &WModel, player: &str) -> Result<()> {
        if self.values.len() != model.configuration().len() {
            return Err(Error::DimensionMismatch {
                what: format!("objective of player `{player}`"),
                expected: model.configuration().len(),
                got: self.values.len(),
            });
        }
        if self.values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParameter {
                name: format!("objective of player `{player}`"),
                reason: "NaN value".into(),
            });
        }
        Ok(())
    }
}

/// Unit mass on `element` of a factor of size `size`.
pub fn make_dirac(size: usize, element: usize) -> Result<Vec<f64>> {
    if element >= size {
        return Err(Error::OutOfRange {
            what: "Dirac element".into(),
            index: element,
            size,
        });
    }
    let mut v = vec![0.0; size];
    v[element] = 1.0;
    Ok(v)
}

pub fn uniform(size: usize) -> Vec<f64> {
    vec![1.0 / size as f64; size]
}

/// A probability distribution on Nature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Belief {
    /// One mass per Nature point, row-major.
    Joint(Vec<f64>),
    /// Independent per-factor distributions; the joint mass is their product.
    Product(Vec<Vec<f64>>),
}

fn check_vector(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(Error::InvalidDistribution {
            what: what.to_string(),
            reason: "masses must be finite and nonnegative".into(),
        });
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidDistribution {
            what: what.to_string(),
            reason: format!("masses sum to {s}, not 1"),
        });
    }
    Ok(())
}

impl Belief {
    pub fn validate(&self, nature: &ProductSpace) -> Result<()> {
        match self {
            Belief::Joint(v) => {
                if v.len() != nature.len() {
                    return Err(Error::DimensionMismatch {
                        what: "joint belief".into(),
                        expected: nature.len(),
                        got: v.len(),
                    });
                }
                check_vector(v, "joint belief")
            }
            Belief::Product(vs) => {
                if vs.len() != nature.dims() {
                    return Err(Error::DimensionMismatch {
                        what: "product belief factors".into(),
                        expected: nature.dims(),
                        got: vs.len(),
                    });
                }
                for (k, v) in vs.iter().enumerate() {
                    let f = nature.factor(k);
                    if v.len() != f.size() {
                        return Err(Error::DimensionMismatch {
                            what: format!("belief on factor `{}`", f.id),
                            expected: f.size(),
                            got: v.len(),
                        });
                    }
                    check_vector(v, &format!("belief on factor `{}`", f.id))?;
                }
                Ok(())
            }
        }
    }

    /// Uniform product belief over all of Nature.
    pub fn uniform(nature: &ProductSpace) -> Belief {
        Belief::Product(nature.factors().iter().map(|f| uniform(f.size())).collect())
    }

    /// Probability of Nature point `omega`.
    pub fn mass(&self, nature: &ProductSpace, omega: usize) -> f64 {
        match self {
            Belief::Joint(v) => v[omega],
            Belief::Product(vs) => vs
                .iter()
                .enumerate()
                .map(|(k, v)| v[nature.coord(omega, k)])
                .product(),
        }
    }

    /// Masses of every Nature point.
    pub fn masses(&self, nature: &ProductSpace) -> Vec<f64> {
        (0..nature.len()).map(|w| self.mass(nature, w)).collect()
    }
}

pub fn belief_mass(belief: &Belief, nature: &ProductSpace, omega: usize) -> f64 {
    belief.mass(nature, omega)
}

/// F^p: maps a Nature-indexed value table to one extended real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMeasure {
    Expectation(Belief),
    /// Worst value over the support of the belief, or over all of Nature.
    WorstCase(Option<Belief>),
    #[serde(rename = "cvar")]
    CVaR {
        alpha: f64,
        belief: Belief,
    },
}

impl RiskMeasure {
    pub fn validate(&self, nature: &ProductSpace) -> Result<()> {
        match self {
            RiskMeasure::Expectation(b) | RiskMeasure::WorstCase(Some(b)) => b.validate(nature),
            RiskMeasure::WorstCase(None) => Ok(()),
            RiskMeasure::CVaR { alpha, belief } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "alpha".into(),
                        reason: format!("{alpha} not in (0, 1]"),
                    });
                }
                belief.validate(nature)
            }
        }
    }

    pub fn masses(&self, nature: &ProductSpace) -> Vec<f64> {
        match self {
            RiskMeasure::Expectation(b)
            | RiskMeasure::WorstCase(Some(b))
            | RiskMeasure::CVaR { belief: b, .. } => b.masses(nature),
            RiskMeasure::WorstCase(None) => vec![1.0 / nature.len() as f64; nature.len()],
        }
    }

    /// Applies the measure to `values` given precomputed point masses.
    pub fn apply_with_masses(&self, masses: &[f64], values: &[f64], sense: Sense) -> Result<f64> {
        match self {
            RiskMeasure::Expectation(_) => expectation(masses, values),
            RiskMeasure::WorstCase(_) => worst_case(masses, values, sense),
            RiskMeasure::CVaR { alpha, .. } => cvar(*alpha, masses, values, sense),
        }
    }
}

/// Applies `risk` to a value table over Nature.
pub fn apply_risk(
    risk: &RiskMeasure,
    nature: &ProductSpace,
    values: &[f64],
    sense: Sense,
) -> Result<f64> {
    if values.len() != nature.len() {
        return Err(Error::DimensionMismatch {
            what: "value table".into(),
            expected: nature.len(),
            got: values.len(),
        });
    }
    risk.apply_with_masses(&risk.masses(nature), values, sense)
}

/// Σ w·v over positive weights; a mix of +inf and -inf is indeterminate.
fn weighted_sum<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Result<f64> {
    let mut sum = 0.0;
    let (mut pos_inf, mut neg_inf) = (false, false);
    for (w, v) in pairs {
        if w <= 0.0 {
            continue;
        }
        if v == f64::INFINITY {
            pos_inf = true;
        } else if v == f64::NEG_INFINITY {
            neg_inf = true;
        } else {
            sum += w * v;
        }
    }
    match (pos_inf, neg_inf) {
        (true, true) => Err(Error::IndeterminateValue),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        (false, false) => Ok(sum),
    }
}

pub(crate) fn expectation(masses: &[f64], values: &[f64]) -> Result<f64> {
    weighted_sum(masses.iter().copied().zip(values.iter().copied()))
}

pub(crate) fn worst_case(masses: &[f64], values: &[f64], sense: Sense) -> Result<f64> {
    masses
        .iter()
        .zip(values)
        .filter(|(&m, _)| m > 0.0)
        .map(|(_, &v)| v)
        .reduce(|a, b| sense.worst(a, b))
        .ok_or_else(|| Error::InvalidDistribution {
            what: "risk measure".into(),
            reason: "no point with positive mass".into(),
        })
}

pub(crate) fn cvar(alpha: f64, masses: &[f64], values: &[f64], sense: Sense) -> Result<f64> {
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| masses[i] > 0.0).collect();
    // adverse first; ties broken by index for determinism
    order.sort_by(|&i, &j| {
        sense
            .compare_best_first(values[j], values[i])
            .then(i.cmp(&j))
    });
    let mut remaining = alpha;
    let mut taken = Vec::with_capacity(order.len());
    for i in order {
        if remaining <= 0.0 {
            break;
        }
        let w = masses[i].min(remaining);
        taken.push((w, values[i]));
        remaining -= w;
    }
    let total: f64 = taken.iter().map(|(w, _)| w).sum();
    let s = weighted_sum(taken)?;
    Ok(if s.is_infinite() { s } else { s / total })
}

/// Assignment of agents to players; every player owns at least one agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerPartition {
    players: Vec<String>,
    assignment: Vec<usize>,
}

impl PlayerPartition {
    /// `assignment[a]` is the index into `players` of agent `a`'s player.
    pub fn new(players: Vec<String>, assignment: Vec<usize>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for p in &players {
            if !seen.insert(p.as_str()) {
                return Err(Error::InvalidPlayers(format!("duplicate player `{p}`")));
            }
        }
        let mut owned = vec![false; players.len()];
        for (a, &p) in assignment.iter().enumerate() {
            if p >= players.len() {
                return Err(Error::InvalidPlayers(format!(
                    "agent {a} assigned to unknown player index {p}"
                )));
            }
            owned[p] = true;
        }
        if let Some(p) = owned.iter().position(|o| !o) {
            return Err(Error::InvalidPlayers(format!(
                "player `{}` owns no agent",
                players[p]
            )));
        }
        Ok(PlayerPartition {
            players,
            assignment,
        })
    }

    /// Groups agents by their `player` field, in order of first appearance.
    pub fn by_agent_player(model: &WModel) -> Self {
        let mut players: Vec<String> = Vec::new();
        let mut assignment = Vec::new();
        for a in model.agents() {
            let idx = match players.iter().position(|p| *p == a.player) {
                Some(i) => i,
                None => {
                    players.push(a.player.clone());
                    players.len() - 1
                }
            };
            assignment.push(idx);
        }
        PlayerPartition {
            players,
            assignment,
        }
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn player_of(&self, agent: usize) -> usize {
        self.assignment[agent]
    }

    /// Agents of player `p`, in model order.
    pub fn agents_of(&self, p: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&a| self.assignment[a] == p)
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.players.iter().position(|p| p == name)
    }
}

/// d^p: objective plus risk measure.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerData {
    pub player: String,
    pub objective: Objective,
    pub risk: RiskMeasure,
}

/// Declared leader and follower players (indices into the player partition).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Roles {
    pub leaders: Vec<usize>,
    pub followers: Vec<usize>,
}

/// A W-model with players and their data.
#[derive(Debug, Clone)]
pub struct WGame {
    pub model: WModel,
    pub players: PlayerPartition,
    pub data: Vec<PlayerData>,
    pub roles: Option<Roles>,
    masses: Vec<Vec<f64>>,
}

impl WGame {
    /// Validates and assembles a game. `data` may be in any order; it is
    /// matched to players by name.
    pub fn new(model: WModel, players: PlayerPartition, data: Vec<PlayerData>) -> Result<Self> {
        if players.assignment.len() != model.agent_count() {
            return Err(Error::InvalidPlayers(format!(
                "partition covers {} agents, model has {}",
                players.assignment.len(),
                model.agent_count()
            )));
        }
        let mut ordered = Vec::with_capacity(players.len());
        for name in players.players() {
            let d = data
                .iter()
                .find(|d| &d.player == name)
                .ok_or_else(|| Error::MissingPlayerData(name.clone()))?;
            d.objective.validate(&model, name)?;
            d.risk.validate(model.nature())?;
            ordered.push(d.clone());
        }
        if let Some(extra) = data.iter().find(|d| players.index_of(&d.player).is_none()) {
            return Err(Error::InvalidPlayers(format!(
                "data given for unknown player `{}`",
                extra.player
            )));
        }
        let masses = ordered
            .iter()
            .map(|d| d.risk.masses(model.nature()))
            .collect();
        Ok(WGame {
            model,
            players,
            data: ordered,
            roles: None,
            masses,
        })
    }

    /// Declares leaders and followers by player name; together they must
    /// cover every player exactly once.
    pub fn with_roles(mut self, leaders: &[&str], followers: &[&str]) -> Result<Self> {
        let resolve = |names: &[&str]| -> Result<Vec<usize>> {
            names
                .iter()
                .map(|n| {
                    self.players
                        .index_of(n)
                        .ok_or_else(|| Error::InvalidPlayers(format!("unknown player `{n}`")))
                })
                .collect()
        };
        let roles = Roles {
            leaders: resolve(leaders)?,
            followers: resolve(followers)?,
        };
        let mut all: Vec<usize> = roles
            .leaders
            .iter()
            .chain(&roles.followers)
            .copied()
            .collect();
        all.sort_unstable();
        if all != (0..self.players.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidPlayers(
                "leaders and followers must partition the players".into(),
            ));
        }
        if roles.leaders.is_empty() || roles.followers.is_empty() {
            return Err(Error::InvalidPlayers(
                "need at least one leader and one follower".into(),
            ));
        }
        self.roles = Some(roles);
        Ok(self)
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn sense(&self, player: usize) -> Sense {
        self.data[player].objective.sense
    }

    /// Masses used by the player's risk measure, per Nature point.
    pub fn masses(&self, player: usize) -> &[f64] {
        &self.masses[player]
    }

    /// Returns a copy with player `p`'s finite objective values mapped by `f`.
    pub fn map_objective<F: Fn(f64) -> f64>(&self, p: usize, f: F) -> WGame {
        let mut g = self.clone();
        for v in &mut g.data[p].objective.values {
            if v.is_finite() {
                *v = f(*v);
            }
        }
        g
    }
}

pub fn make_wgame(model: WModel, players: PlayerPartition, data: Vec<PlayerData>) -> Result<WGame> {
    WGame::new(model, players, data)
}
