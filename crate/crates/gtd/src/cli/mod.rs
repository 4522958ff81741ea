//! The `gtd` command-line front end: JSON run configurations in, CSV or JSON
//! tables out, with deterministic bytes for identical inputs.

mod config;
mod run;

pub use config::{
    GeodesicConfig, GridConfig, LegendreConfig, MetricConfig, OutputConfig, OutputFormat,
    RunConfig, SystemConfig, Tolerances,
};
pub use run::{dispatch, run, Command};
