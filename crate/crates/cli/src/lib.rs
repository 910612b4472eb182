//! Batch front end for `torque-stirap`: config ingestion, experiment
//! dispatch and CSV output.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Experiment, Overrides, RunConfig};
