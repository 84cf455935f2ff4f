//! Time-of-use pricing: a producer (leader) sets peak and off-peak prices, a
//! consumer (follower) chooses the fraction α of its demand consumed at peak.

use serde::{Deserialize, Serialize};

use super::grid_labels;
use crate::error::{Error, Result};
use crate::finite::{FactorKind, FiniteFactor};
use crate::normal_form::format_ext;
use crate::preferences::{
    make_dirac, Belief, Objective, PlayerData, PlayerPartition, RiskMeasure, Sense, WGame,
};
use crate::wmodel::{AgentId, AgentSpec, InfoSpec, WModel};

/// A discretized Nature factor: values, the masses other players assign to
/// them, and the index of the true value (a Dirac for whoever knows it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub values: Vec<f64>,
    pub masses: Vec<f64>,
    #[serde(default)]
    pub known: usize,
}

impl Grid {
    /// Single known value.
    pub fn point(v: f64) -> Self {
        Grid {
            values: vec![v],
            masses: vec![1.0],
            known: 0,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let bad = |reason: String| Error::InvalidParameter {
            name: name.to_string(),
            reason,
        };
        if self.values.is_empty() {
            return Err(bad("empty grid".into()));
        }
        if self.masses.len() != self.values.len() {
            return Err(bad(format!(
                "{} masses for {} values",
                self.masses.len(),
                self.values.len()
            )));
        }
        if self.known >= self.values.len() {
            return Err(bad(format!("known index {} out of range", self.known)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(bad("values must be finite".into()));
        }
        Ok(())
    }

    fn dirac(&self) -> Vec<f64> {
        make_dirac(self.values.len(), self.known).expect("validated")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TouParams {
    /// Demand d (kWh), exogenous.
    pub demand: Grid,
    /// Leader's unitary production cost (€/kWh).
    pub cost: Grid,
    /// Follower's unwillingness to shift to off-peak (€/kWh).
    pub unwillingness: Grid,
    pub peak_prices: Vec<f64>,
    pub offpeak_prices: Vec<f64>,
    /// Peak fractions α ∈ [0, 1].
    pub shifts: Vec<f64>,
}

impl TouParams {
    /// d = 100, c = 0.05, w = 0.15 (all known), p̄ ∈ {0.2, 0.3}, p̲ = 0.1,
    /// α ∈ {0, 0.5, 1}.
    pub fn small_instance() -> Self {
        TouParams {
            demand: Grid::point(100.0),
            cost: Grid::point(0.05),
            unwillingness: Grid::point(0.15),
            peak_prices: vec![0.2, 0.3],
            offpeak_prices: vec![0.1],
            shifts: vec![0.0, 0.5, 1.0],
        }
    }

    /// Admissible (peak, off-peak) pairs, peak-major.
    pub fn price_pairs(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &hi in &self.peak_prices {
            for &lo in &self.offpeak_prices {
                if hi >= lo {
                    out.push((hi, lo));
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        self.demand.validate("demand")?;
        self.cost.validate("cost")?;
        self.unwillingness.validate("unwillingness")?;
        let bad = |name: &str, reason: &str| Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        };
        if self.shifts.is_empty() {
            return Err(bad("shifts", "empty grid"));
        }
        if self.shifts.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(bad("shifts", "α must lie in [0, 1]"));
        }
        if self.price_pairs().is_empty() {
            return Err(bad("prices", "no pair with peak ≥ off-peak"));
        }
        Ok(())
    }
}

pub fn build_tou_game(params: &TouParams) -> Result<WGame> {
    params.validate()?;
    let pairs = params.price_pairs();
    let pair_labels: Vec<String> = pairs
        .iter()
        .map(|(h, l)| format!("{}/{}", format_ext(*h), format_ext(*l)))
        .collect();
    let nature = vec![
        FiniteFactor::new(
            "d",
            FactorKind::NatureExogenous,
            grid_labels(&params.demand.values),
        )
        .with_label("demand"),
        FiniteFactor::new(
            "c",
            FactorKind::NatureType,
            grid_labels(&params.cost.values),
        )
        .with_label("production cost"),
        FiniteFactor::new(
            "w",
            FactorKind::NatureType,
            grid_labels(&params.unwillingness.values),
        )
        .with_label("unwillingness to shift"),
    ];
    let agents = vec![
        AgentSpec::new(
            AgentId::new("leader"),
            FiniteFactor::new("prices", FactorKind::Action, pair_labels)
                .with_label("peak/off-peak"),
            InfoSpec::Cylinder(vec!["c".into()]),
        ),
        AgentSpec::new(
            AgentId::new("follower"),
            FiniteFactor::new("alpha", FactorKind::Action, grid_labels(&params.shifts))
                .with_label("peak fraction"),
            InfoSpec::Cylinder(vec!["d".into(), "w".into(), "prices".into()]),
        ),
    ];
    let model = WModel::new(nature, agents)?;

    let p = params;
    let leader = Objective::tabulate(Sense::Payoff, &model, |h| {
        let (d, c) = (p.demand.values[h[0]], p.cost.values[h[1]]);
        let (hi, lo) = pairs[h[3]];
        let a = p.shifts[h[4]];
        d * a * hi + d * (1.0 - a) * lo - d * c
    });
    let follower = Objective::tabulate(Sense::Cost, &model, |h| {
        let (d, w) = (p.demand.values[h[0]], p.unwillingness.values[h[2]]);
        let (hi, lo) = pairs[h[3]];
        let a = p.shifts[h[4]];
        d * a * hi + d * (1.0 - a) * lo + d * (1.0 - a) * w
    });
    let data = vec![
        PlayerData {
            player: "leader".into(),
            objective: leader,
            risk: RiskMeasure::Expectation(Belief::Product(vec![
                p.demand.masses.clone(),
                p.cost.dirac(),
                p.unwillingness.masses.clone(),
            ])),
        },
        PlayerData {
            player: "follower".into(),
            objective: follower,
            risk: RiskMeasure::Expectation(Belief::Product(vec![
                p.demand.dirac(),
                p.cost.masses.clone(),
                p.unwillingness.dirac(),
            ])),
        },
    ];
    let players = PlayerPartition::by_agent_player(&model);
    WGame::new(model, players, data)?.with_roles(&["leader"], &["follower"])
}
