//! Command-line planner and parallel simulator for test & roll experiments,
//! built on [`testroll_core`].

pub mod cli;
pub mod commands;
pub mod config;
mod error;
pub mod io;
pub mod simulate;

pub use crate::error::{AppError, AppResult};
