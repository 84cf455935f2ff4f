use crate::error::Result;
use crate::finite::{FactorKind, FiniteFactor};
use crate::preferences::{
    Belief, Objective, PlayerData, PlayerPartition, RiskMeasure, Sense, WGame,
};
use crate::wmodel::{AgentId, AgentSpec, InfoSpec, WModel};

/// Two agents with binary actions, each observing only the other's action.
/// Valid (no self-information) but not sequential.
pub fn mutual_observation_model() -> Result<WModel> {
    let agent = |me: &str, other: &str| {
        AgentSpec::new(
            AgentId::new(me),
            FiniteFactor::new(&format!("u_{me}"), FactorKind::Action, ["0", "1"]),
            InfoSpec::Cylinder(vec![format!("u_{other}")]),
        )
    };
    WModel::new(vec![], vec![agent("a", "b"), agent("b", "a")])
}

/// The mutual-observation model with zero costs, for the CLI.
pub fn mutual_observation_game() -> Result<WGame> {
    let model = mutual_observation_model()?;
    let n = model.configuration().len();
    let data = ["a", "b"]
        .iter()
        .map(|p| PlayerData {
            player: p.to_string(),
            objective: Objective::new(Sense::Cost, vec![0.0; n]),
            risk: RiskMeasure::Expectation(Belief::uniform(model.nature())),
        })
        .collect();
    let players = PlayerPartition::by_agent_player(&model);
    WGame::new(model, players, data)
}
