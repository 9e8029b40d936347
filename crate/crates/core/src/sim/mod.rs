//! Discrete-event simulation of one UE's downlink queue under DRX.

mod engine;
mod scenario;
mod stats;

pub use engine::{run, run_with, CycleRecord, Metrics, PacketRecord, RunOptions, RunOutput, WindowMetrics};
pub use scenario::{Scenario, Traffic};
pub use stats::{confidence_interval, run_many, run_replicated, summarize, ReplicatedSummary, SummaryStats};
