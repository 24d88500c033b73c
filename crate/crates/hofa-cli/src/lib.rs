//! Library side of the `hofa` command: configuration, table output, the
//! acceptance suite and the subcommands.

pub mod commands;
pub mod config;
pub mod suite;
pub mod table;
