//! Monte Carlo simulator for hybrid RF/VLC vehicle-to-infrastructure uplinks
//! at a road intersection.
//!
//! The crate estimates packet reception probability (PRP), delay outage rate
//! (DOR) and achievable data rate for pure-VLC, pure-RF, link-aggregated and
//! selection (non-LA) operation under clear, rain, fog and dry-snow weather.

pub mod cli;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod rf_channel;
pub mod scenario;
pub mod vlc_channel;

pub use engine::{derive_seed, run_sweep, MetricEstimate, Metric, SweepSpec, SweepTable, SweepVariable};
pub use error::{Error, Result, Violation};
pub use metrics::{Mode, TrialModel, TrialOutcome};
pub use scenario::{ScenarioConfig, WeatherCondition, WeatherKind};
