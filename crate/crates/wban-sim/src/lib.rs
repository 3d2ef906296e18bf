//! Discrete-event simulator for thermal-aware, energy-balanced and
//! reliability-aware routing in wireless body area networks.
//!
//! The crate models a body-surface sensor field reporting to sink nodes
//! over a shared TDMA medium. The flagship protocol selects routes with a
//! weighted multi-criteria cost (temperature, link reliability, residual
//! energy, delay), excludes overheated relays, and demotes congested paths;
//! three simplified comparison protocols run behind the same engine so the
//! differences isolate routing policy.
pub mod baselines;
pub mod config;
pub mod energy;
pub mod engine;
pub mod error;
pub mod link;
pub mod metrics;
pub mod model;
pub mod protocol;
pub mod routing;
pub mod scheduler;
pub mod thermal;
pub use config::{ProtocolKind, ScenarioConfig};
pub use engine::{run, run_on_topology, run_verbose, RunResult};
pub use metrics::MetricsReport;
pub use error::{Result, SimError};
