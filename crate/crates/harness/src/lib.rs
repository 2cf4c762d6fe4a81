//! Configuration, persistence and sweep orchestration for the `khm` binary.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;

pub use error::{HarnessError, Result};
