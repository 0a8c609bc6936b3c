use thiserror::Error;

use crate::game::Profile;

/// Errors from game construction and structural validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("{intervals} strategy intervals but {payoffs} payoff evaluators")]
    ShapeMismatch { intervals: usize, payoffs: usize },
    #[error("a game needs at least one player")]
    NoPlayers,
    #[error("group split m = {m} exceeds the number of players n = {n}")]
    SplitOutOfRange { m: usize, n: usize },
    #[error("invalid game structure: {0}")]
    Structure(String),
    #[error("profile has {found} entries, game has {expected} players")]
    ProfileLength { expected: usize, found: usize },
    #[error("player {} strategy {value} lies outside [{lo}, {hi}]", player + 1)]
    OutOfBox { player: usize, value: f64, lo: f64, hi: f64 },
    #[error("relativization needs a group of at least 2 players, got {0}")]
    GroupTooSmall(usize),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("solver setting `{field}` {reason}")]
    InvalidConfig { field: &'static str, reason: String },
}

/// Errors raised by the numerical solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("payoff is not finite ({value}) at strategy {at}")]
    NonFinite { at: f64, value: f64 },
    #[error("invalid search interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("invalid slice: {0}")]
    BadSlice(String),
    #[error("no convergence after {iterations} iterations (last update {residual:e})")]
    NotConverged { iterations: usize, residual: f64, last: Profile },
    #[error("precondition failed: {0}")]
    Precondition(String),
}
