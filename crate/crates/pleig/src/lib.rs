//! Command-line front end for `pleig-core`: argument parsing, CSV and JSON
//! formats, synthetic point clouds and the built-in verification suites.

pub mod cli;
pub mod error;
pub mod formats;
pub mod report;
pub mod synth;
pub mod verify;

pub use error::{CliError, Result};
