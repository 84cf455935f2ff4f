//! Command-line front end: game files, commands and reports.

pub mod commands;
pub mod gamefile;
pub mod report;

pub use commands::{run, Cli, Command, Outcome, EXIT_CAPACITY, EXIT_INVALID, EXIT_OK};
pub use gamefile::{build_game, export_custom, load_game, parse_game_file, GameFile, LoadError};
pub use report::{Format, Report};
