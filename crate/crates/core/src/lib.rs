//! Diverse weighted bipartite b-matching.
//!
//! Left nodes carry cluster labels; a matching is scored either by total
//! weight (`f1`) or by the sum over right nodes and clusters of squared
//! per-cluster weight (`f2`, minimized to spread each right node across
//! clusters). Solvers: min-cost flow for `f1`, branch and bound and a
//! round-based greedy for `f2`, plus a brute-force oracle for small inputs.

pub mod error;
pub mod exact;
pub mod experiment;
pub mod feasibility;
pub mod flow;
pub mod greedy;
pub mod instance;
pub mod io;
pub mod metrics;
pub mod objective;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod wbm;

pub use error::{Error, Result, Violation};
pub use exact::{solve_dwbm_exact, solve_dwbm_exact_with, ExactOptions};
pub use feasibility::{is_feasible_bounds, Feasibility};
pub use greedy::{solve_gdwbm, solve_gdwbm_with, GreedyOptions};
pub use instance::{
    check_matching, transform_max_to_min, DegreeBounds, Instance, Matching, MatchingCheck, Side,
};
pub use io::{load_instance, load_matching, save_instance, save_matching};
pub use metrics::{metrics_report, MetricsReport, Ratio};
pub use objective::{f1, f2, ClusterSums};
pub use oracle::{brute_force, EnumerationBudget, Objective};
pub use report::{SolveReport, Status, Telemetry};
pub use scalar::Scalar;
pub use wbm::solve_wbm;

pub type Instance32 = Instance<f32>;
pub type Instance64 = Instance<f64>;
pub type SolveReport32 = SolveReport<f32>;
pub type SolveReport64 = SolveReport<f64>;
pub type ClusterSums32 = ClusterSums<f32>;
pub type ClusterSums64 = ClusterSums<f64>;
pub type MetricsReport32 = MetricsReport<f32>;
pub type MetricsReport64 = MetricsReport<f64>;
