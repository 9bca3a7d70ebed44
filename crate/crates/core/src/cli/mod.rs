//! Command-line front end: configuration parsing, the sweep subcommands, and
//! their CSV/manifest outputs.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_dor_sweep, cmd_prp_sweep, cmd_rate_sweep, cmd_validate, load_config, run, RunManifest, RunOptions,
    Subcommand, DOR_HEADER, MANIFEST_FILE, PRP_HEADER, RATE_HEADER,
};
pub use config::{parse_config, ExperimentConfig, SweepSettings};
pub use output::fmt_sig9;
