//! Decoy-assisted anti-jamming for status updates over fading channels.
//!
//! A transmitter sends status updates to a receiver while a reactive jammer
//! listens. Idle blocks can be filled with decoy transmissions that draw the
//! jammer's fire and drain its average power budget. This crate evaluates the
//! resulting peak age of information both in closed form and by Monte Carlo
//! simulation, and runs parameter sweeps over either engine.

pub mod adversary;
pub mod aoi;
pub mod channel;
pub mod detection;
pub mod error;
pub mod experiments;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod units;

pub use adversary::{jam_power, JamPower, Jammer, JammerConfig, JammerMode, SlotTruth};
pub use aoi::{closed_loop_paoi, optimal_lambda_md1, paoi_jit, paoi_md1, AnalyticResult, JamWeight, TrafficConfig, UpdateModel};
pub use channel::{outage_probability, sinr_cdf, snr_cdf, ChannelConfig, PowerConfig};
pub use detection::{prob_jammer_declares_busy, prob_jammer_declares_idle, DetectorModel, DetectorTable, IdlePrior, RocPair};
pub use error::{Error, Result};
pub use scenario::{load_scenario, Conventions, DetectorSpec, Scenario, ScenarioFile};
pub use sim::{compare_with_analytic, run, AoiStats, AoiTracker, Comparison, SlotRecord};
pub use experiments::{recipe, run_sweep, ResultRow, ResultTable, SweepSpec};
