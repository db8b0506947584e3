//! Popularity dynamics under cumulative advantage and quality signals.
//!
//! * [`model`]: the probability-matching update and its expected-change law.
//! * [`simulator`]: Monte Carlo markets of traders and synthetic trade and
//!   mirror logs.
//! * [`ingest`]: log parsing, copier-count reconstruction and the rolling
//!   performance metric.
//! * [`analysis`]: user-day observations, subset filters, the interaction
//!   regression and binned summaries.
//! * [`pipeline`]: the above wired together for a pair of logs.

pub mod analysis;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod simulator;

pub use analysis::{AnalysisError, BinMode, Condition, RegressionResult, UserDayPoint};
pub use ingest::{IngestError, MirrorEvent, TradeRecord, TraderId};
pub use model::{FSpec, ModelError, ModelParams, SignalModel};
pub use pipeline::{analyze_logs, AnalysisOptions, AnalysisReport};
pub use simulator::{emit_logs, simulate_market, GroundTruth, MarketConfig, Quality, Trajectory};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
