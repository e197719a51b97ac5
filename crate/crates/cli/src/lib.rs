//! Library side of the `plate` command.

pub mod corpus;
pub mod error;
pub mod manifest;
pub mod params;
pub mod pipeline;
pub mod report;
pub mod service;

pub use error::{CliError, Result};
pub use params::PipelineParams;
pub use pipeline::{Pipeline, Truth};
pub use report::{ImageReport, Rate, RunReport, Totals};
