use std::time::Duration;

use serde::Serialize;

use crate::instance::{Instance, Matching};
use crate::objective::{f1, f2};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Proven optimal for the solver's objective.
    Optimal,
    Infeasible,
    /// Budget ran out before any feasible matching was found.
    BudgetExhausted,
    /// Budget ran out; the matching is the best feasible one found.
    FeasibleIncumbent,
    /// Feasible, with no optimality claim (heuristics).
    Feasible,
}

impl Status {
    pub fn has_matching(self) -> bool {
        matches!(
            self,
            Status::Optimal | Status::FeasibleIncumbent | Status::Feasible
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::BudgetExhausted => "budget_exhausted",
            Status::FeasibleIncumbent => "feasible_incumbent",
            Status::Feasible => "feasible",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solver-specific counters. Unused counters stay zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Telemetry {
    /// Shortest-path augmentations (flow solver).
    pub augmentations: u64,
    /// Zero-cost cycles pushed while canonicalising a flow optimum.
    pub canonical_cycles: u64,
    /// Branch-and-bound nodes expanded.
    pub nodes_expanded: u64,
    pub nodes_pruned: u64,
    /// Largest frontier size reached.
    pub frontier_peak: u64,
    /// Marginal-gain evaluations (greedy).
    pub gain_evaluations: u64,
    /// `(seconds since start, incumbent f2)` at every incumbent improvement.
    pub incumbent_updates: Vec<(f64, f64)>,
    /// Edge subsets visited (oracle).
    pub subsets_enumerated: u64,
    /// Node that could not be served, for greedy dead ends.
    pub stuck_node: Option<(crate::instance::Side, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport<T = f64> {
    pub matching: Matching,
    pub objective_f1: T,
    pub objective_f2: T,
    pub status: Status,
    /// Seconds.
    pub wall_time: f64,
    pub telemetry: Telemetry,
}

impl<T: Scalar> SolveReport<T> {
    pub(crate) fn new(
        inst: &Instance<T>,
        matching: Matching,
        status: Status,
        elapsed: Duration,
        telemetry: Telemetry,
    ) -> Self {
        Self {
            objective_f1: f1(inst, &matching),
            objective_f2: f2(inst, &matching),
            matching,
            status,
            wall_time: elapsed.as_secs_f64(),
            telemetry,
        }
    }

    pub(crate) fn without_matching(
        status: Status,
        elapsed: Duration,
        telemetry: Telemetry,
    ) -> Self {
        Self {
            matching: Matching::empty(),
            objective_f1: T::nan(),
            objective_f2: T::nan(),
            status,
            wall_time: elapsed.as_secs_f64(),
            telemetry,
        }
    }
}
