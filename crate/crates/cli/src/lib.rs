//! Configuration and command implementations behind the `rfharm` binary.

pub mod commands;
pub mod config;
