//! Built-in games.

mod mutual;
mod pd;
mod thai;
mod tou;

pub use mutual::{mutual_observation_game, mutual_observation_model};
pub use pd::build_prisoners_dilemma;
pub use thai::{
    build_thai_slmf_mt, build_thai_slsf_mt, build_thai_slsf_st, Aggregation, ExoGrid, ExoState,
    FollowerSpec, InfoMode, QuadraticType, ThaiParams, TypeGrid,
};
pub use tou::{build_tou_game, Grid, TouParams};

use crate::normal_form::format_ext;

pub(crate) fn grid_labels(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| format_ext(v)).collect()
}
