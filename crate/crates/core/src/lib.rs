//! Finite games in product form: Witsenhausen intrinsic models with players,
//! beliefs and risk measures, solved by exhaustive enumeration for Nash,
//! Stackelberg and Nash-Stackelberg equilibria.
//!
//! Everything lives on finite sets. A σ-field is represented by the partition
//! generating it, a strategy by one action per information atom, and
//! extended reals by `f64` with `±inf`.

pub mod equilibria;
pub mod error;
pub mod exec;
pub mod finite;
pub mod models;
pub mod normal_form;
pub mod preferences;
pub mod wmodel;

pub use equilibria::{
    best_responses, follower_outcomes, followers_nash, leader_value, nash_equilibria,
    nash_stackelberg, stackelberg_strategies, BestResponseSet, EquilibriumReport, ResponseRisk,
    StackelbergMode, StackelbergSet,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use finite::{FactorKind, FiniteFactor, Partition, ProductSpace};
pub use normal_form::{normal_form_matrix, Evaluator, NormalFormMatrix, SolveOptions};
pub use preferences::{
    apply_risk, Belief, Objective, PlayerData, PlayerPartition, RiskMeasure, Sense, WGame,
};
pub use wmodel::{AgentId, AgentSpec, InfoSpec, Strategy, StrategyProfile, WModel};
