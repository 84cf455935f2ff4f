use thiserror::Error;

/// Errors raised while building or solving a game.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate factor id `{0}`")]
    DuplicateFactor(String),

    #[error("factor `{0}` has no elements")]
    EmptyFactor(String),

    #[error("factor `{factor}` has duplicate element label `{label}`")]
    DuplicateElement { factor: String, label: String },

    #[error("product space needs at least one factor")]
    NoFactors,

    #[error("unknown factor id `{0}`")]
    UnknownFactor(String),

    #[error("partitions are defined over different spaces")]
    MismatchedSpaces,

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("index {index} out of range for {what} of size {size}")]
    OutOfRange {
        what: String,
        index: usize,
        size: usize,
    },

    #[error(
        "agent {agent} observes its own action: configurations {first:?} and {second:?} differ only in its action but lie in different information atoms"
    )]
    SelfInformationViolation {
        agent: String,
        first: Vec<usize>,
        second: Vec<usize>,
    },

    #[error("duplicate agent {0}")]
    DuplicateAgent(String),

    #[error("{what}: count {count} exceeds cap {cap}")]
    CapacityExceeded { what: String, count: u128, cap: u64 },

    #[error("profile is not playable at nature point {omega:?}: {solutions} solutions of the closed-loop equation")]
    NotPlayable { omega: Vec<usize>, solutions: usize },

    #[error("indeterminate value: both +inf and -inf carry positive weight")]
    IndeterminateValue,

    #[error("invalid distribution for {what}: {reason}")]
    InvalidDistribution { what: String, reason: String },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("player partition: {0}")]
    InvalidPlayers(String),

    #[error("missing data for player `{0}`")]
    MissingPlayerData(String),

    #[error("normal-form matrix requires exactly 2 players, game has {0}")]
    NotTwoPlayers(usize),

    #[error("game has no leader/follower roles declared")]
    NoRoles,

    #[error("followers have no equilibrium response to leader profile {leader_profile:?}")]
    EmptyFollowerResponse { leader_profile: Vec<u64> },
}

pub type Result<T> = std::result::Result<T, Error>;
