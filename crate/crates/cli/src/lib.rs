//! File formats and subcommands behind the `leantd` binary.

pub mod commands;
pub mod format;
