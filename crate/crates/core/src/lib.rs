//! Direct ecological cost models for IoT deployments.
//!
//! - [`frame`]: NB-IoT downlink signalling grid and its sleep opportunities.
//! - [`power`]: base-station idle energy under that grid, and calibration of
//!   the power model to a target idle penalty.
//! - [`lca`]: lifecycle GWP bookkeeping for nodes (servicing break-even,
//!   energy provisioning, WPT threshold, standby offsets).
//! - [`fleet`]: embodied carbon stranded in offline gateways.
//! - [`scenario`] / [`report`]: JSON scenario files and CSV/ASCII output.
//!
//! Batch work goes through [`exec::Execution`], which uses rayon when the
//! `parallel` feature is enabled.

pub mod cli;
pub mod error;
pub mod exec;
pub mod fleet;
pub mod frame;
pub mod lca;
pub mod power;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
pub use exec::Execution;
