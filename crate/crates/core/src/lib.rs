//! Solvers for n-player games split into two groups, each zero-sum and
//! symmetric internally.
//!
//! The crate computes maximin/minimax points of in-group slices, the
//! symmetric fixed point of the group maximin maps, and Nash equilibria by
//! damped best-response iteration, and checks that these objects coincide.
//! [`oligopoly`] ships the six-firm relative-profit Cournot game and its
//! closed-form equilibrium; [`dsl`] parses payoff expressions for
//! user-defined games.

pub mod dsl;
pub mod equilibrium;
pub mod error;
pub mod fixed_point;
pub mod game;
pub mod minimax;
pub mod oligopoly;

pub use error::{GameError, SolveError};
pub use game::{
    check_symmetry_in_group, relativize_group, validate_structure, zero_sum_residual, GameSpec, Group,
    Interval, Payoff, Profile, SolverConfig, SymmetryReport, TieBreak, ValidationReport,
};
pub use minimax::{maximin, minimax, quasi_shape_probe, saddle, unimodal_max, unimodal_min, Extremum, SaddleResult, Slice};
