//! Scenario configuration, experiment orchestration, persistence, and the
//! pieces behind the CLI.

pub mod config;
pub mod report;
pub mod runner;
pub mod scenarios;
pub mod sweep;

pub use config::{AnchorsSpec, DampingDescriptor, PotentialDescriptor, ScenarioConfig};
pub use report::{diagnostics_ndjson, trajectory_csv, CheckResult, RunReport, RunStats, Verdict};
pub use runner::{
    build_specs, compare_oracle, explore_limit_case, run_in_memory, run_scenario, OracleComparison,
    RunOutcome,
};
pub use scenarios::{all_bundled, bundled_ids, load_bundled, BUNDLED};
pub use sweep::{sweep_k, SweepRow, SweepTable};
