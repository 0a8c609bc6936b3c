//! Command-line front end for the `twogroup` solvers: config loading,
//! command dispatch and report rendering.

pub mod args;
pub mod config;
pub mod report;
pub mod run;

pub use args::{Cli, Command, Options};
pub use config::{load_game_config, parse_game_config, ConfigError, LoadedGame};
pub use report::{Format, Report, Row, Verdict};
pub use run::{run, Outcome};
