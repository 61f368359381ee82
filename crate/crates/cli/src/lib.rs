//! Library surface of the experiment harness: config parsing, the seeded
//! grid runner, and metrics persistence. The `graphon-embed` binary is a thin
//! wrapper over these.

pub mod commands;
pub mod config;
pub mod experiment;
