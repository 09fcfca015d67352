//! Library surface of the `kgz` command line tool: configuration schema,
//! binary snapshot codec, and the subcommand drivers. The `kgz` binary is a
//! thin argument-parsing shell over this crate; integration tests exercise
//! the same entry points directly.

pub mod commands;
pub mod config;
pub mod error;
pub mod snapshot;
