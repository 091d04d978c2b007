//! Packet-level discrete-event simulator for mmWave and DSRC downlink to
//! connected vehicles on a road corridor.
//!
//! Pipeline: [`mobility`] moves vehicles, [`channel`] turns geometry into
//! link quality, [`mac`] moves packets over the air, [`traffic`] creates
//! them and [`metrics`] accounts for them. [`sim::run`] wires one scenario
//! together; [`sweep`] and [`report`] sit on top.

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod mac;
pub mod metrics;
pub mod mobility;
pub mod output;
pub mod presets;
pub mod report;
pub mod sim;
pub mod sweep;
pub mod traffic;

pub use config::ScenarioConfig;
pub use engine::{RngStreams, Scheduler, SimTime};
pub use error::{Error, Result};
pub use sim::{run, RunResult};

/// Embedded in every summary row.
pub const VERSION: &str = concat!("corridor-sim ", env!("CARGO_PKG_VERSION"));
