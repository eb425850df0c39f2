//! Monte Carlo harness and output writers behind the `icacdma` binary.
//!
//! [`harness`] runs an [`ExperimentPlan`] into a [`SerReport`]; [`config`]
//! builds plans from TOML; [`table`] and [`plot`] write the CSV tables and
//! SVG plots.

pub mod config;
pub mod harness;
pub mod plot;
pub mod table;

pub use config::{parse_config, parse_config_str, ConfigError};
pub use harness::{run_plan, run_point, Detector, ExperimentPlan, PointRecord, SerReport};
pub use plot::render_plot;
pub use table::write_csv;
