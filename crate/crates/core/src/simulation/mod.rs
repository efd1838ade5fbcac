//! Scenario-driven data generation and Monte Carlo studies.

pub mod generate;
pub mod metrics;
pub mod scenario;
pub mod study;

pub use generate::{invert_cum_hazard, simulate_dataset, Simulator};
pub use metrics::{mc_metrics, mc_metrics_lenient, McMetricsRow};
pub use scenario::{Censoring, CovariateKind, Scenario, StudyFitSettings, TrueBaseline};
pub use study::{
    run_monte_carlo, run_selection_study, Candidate, McStudy, McmcFitter, ReplicaFit,
    ReplicaFitter, ReplicaRecord, ReplicaStatus, SelectionReplica, SelectionStudy,
};
