//! Experiment harness for the stochastic Hamiltonian methods: configuration,
//! multi-seed runs, CSV and SVG output, the verification suite and the CLI.

pub mod app;
pub mod checks;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod experiment;
pub mod presets;
pub mod svg;
pub mod verify;

pub use error::{CliError, Result};
