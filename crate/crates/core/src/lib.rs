//! Flow-level, discrete-epoch simulator of a private-5G data plane.
//!
//! UE requests arrive at UPFs (per-QoS compute buckets), are optionally
//! forwarded over a UPF→MEC link, and are processed by a MEC with a single
//! FCFS queue. Four assignment schemes decide which UPF and MEC serve each
//! request:
//!
//! - `baseline`: the geo-local UPF and its co-located MEC;
//! - `bestfit-upf-no-pe`: least-loaded UPF, origin MEC;
//! - `bestfit-upf-pe`: least-loaded UPF, path extended to its co-located MEC;
//! - `bestfit-upf-mec`: least-loaded UPF and least-loaded MEC chosen independently.
//!
//! ```text
//! Scenario ──▶ engine (epochs) ──▶ RunResult ──▶ metrics ──▶ CSV / JSON
//!                 │
//!                 └── schemes ── delay formulas
//! oracle: exhaustive references for the heuristics on small instances
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod delay;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod schemes;

pub use delay::{DelayBreakdown, Load};
pub use engine::{run_to_completion, EpochReport, RunResult, SimulationRun};
pub use error::{Result, SimError};
pub use metrics::{build_cdf, capex_sweep, summarize, CapexPoint, CdfTable, SummaryReport};
pub use model::{
    validate_scenario, PerQos, QosClass, Scenario, SchemeKind, SystemState, UeRequest,
    ValidationReport,
};
pub use schemes::AssignmentDecision;
