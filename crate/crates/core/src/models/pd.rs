use crate::error::Result;
use crate::finite::{FactorKind, FiniteFactor};
use crate::preferences::{
    Belief, Objective, PlayerData, PlayerPartition, RiskMeasure, Sense, WGame,
};
use crate::wmodel::{AgentId, AgentSpec, InfoSpec, WModel};

/// The prisoner's dilemma with costs (years in prison): players `p1` (rows)
/// and `p2` (columns), actions `C` (cooperate) and `D` (defect).
pub fn build_prisoners_dilemma() -> Result<WGame> {
    let agent = |name: &str| {
        AgentSpec::new(
            AgentId::new(name),
            FiniteFactor::new(&format!("u_{name}"), FactorKind::Action, ["C", "D"]),
            InfoSpec::Cylinder(vec![]),
        )
    };
    let model = WModel::new(vec![], vec![agent("p1"), agent("p2")])?;
    // configuration = (nature, u_p1, u_p2), last fastest
    let costs = [(0.5, 0.5), (10.0, 0.0), (0.0, 10.0), (5.0, 5.0)];
    let table = |pick: fn(&(f64, f64)) -> f64| costs.iter().map(pick).collect::<Vec<f64>>();
    let belief = Belief::uniform(model.nature());
    let data = vec![
        PlayerData {
            player: "p1".into(),
            objective: Objective::new(Sense::Cost, table(|c| c.0)),
            risk: RiskMeasure::Expectation(belief.clone()),
        },
        PlayerData {
            player: "p2".into(),
            objective: Objective::new(Sense::Cost, table(|c| c.1)),
            risk: RiskMeasure::Expectation(belief),
        },
    ];
    let players = PlayerPartition::by_agent_player(&model);
    WGame::new(model, players, data)
}
