//! Exact efficiency-only matching (minimise `f1` under degree bounds).
//!
//! The degree system over a bipartite graph is totally unimodular, so the
//! integer optimum equals the min-cost circulation optimum on
//!
//! ```text
//! source -[l_lo, l_hi]-> left i -[0, 1; w_ij]-> right j -[r_lo, r_hi]-> sink -[0, inf)-> source
//! ```
//!
//! The free return arc lets the solver pick the cheapest feasible edge count.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::feasibility::is_feasible_bounds;
use crate::flow::{FlowNetwork, UNBOUNDED};
use crate::instance::{Instance, Matching};
use crate::report::{SolveReport, Status, Telemetry};
use crate::scalar::Scalar;

/// Circulation network of an instance together with the index layout
/// needed to read a matching back.
#[derive(Debug, Clone)]
pub struct MatchingNetwork<T> {
    pub network: FlowNetwork<T>,
    m: usize,
    n: usize,
    edge_base: usize,
}

impl<T: Scalar> MatchingNetwork<T> {
    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        1
    }

    pub fn left(&self, i: usize) -> usize {
        2 + i
    }

    pub fn right(&self, j: usize) -> usize {
        2 + self.m + j
    }

    /// Arc carrying edge `(i, j)`.
    pub fn edge_arc(&self, i: usize, j: usize) -> usize {
        self.edge_base + i * self.n + j
    }
}

/// Builds the circulation network for `inst`.
pub fn reduce_to_circulation<T: Scalar>(inst: &Instance<T>) -> MatchingNetwork<T> {
    let (m, n) = (inst.m(), inst.n());
    let b = inst.bounds();
    let mut net = FlowNetwork::new(m + n + 2);
    for i in 0..m {
        net.add_arc(0, 2 + i, b.l_lo[i] as i64, b.l_hi[i] as i64, T::zero());
    }
    for j in 0..n {
        net.add_arc(2 + m + j, 1, b.r_lo[j] as i64, b.r_hi[j] as i64, T::zero());
    }
    net.add_arc(1, 0, 0, UNBOUNDED, T::zero());
    let edge_base = net.arcs.len();
    for i in 0..m {
        for j in 0..n {
            net.add_arc(2 + i, 2 + m + j, 0, 1, inst.weight(i, j));
        }
    }
    MatchingNetwork {
        network: net,
        m,
        n,
        edge_base,
    }
}

/// Reads the matching off an integral circulation.
pub fn lift_solution<T: Scalar>(net: &MatchingNetwork<T>, flow: &[i64]) -> Result<Matching> {
    let mut edges = Vec::new();
    for i in 0..net.m {
        for j in 0..net.n {
            match flow[net.edge_arc(i, j)] {
                0 => {}
                1 => edges.push((i, j)),
                f => {
                    return Err(Error::Internal(format!(
                        "edge arc ({i}, {j}) carries flow {f}"
                    )))
                }
            }
        }
    }
    Ok(Matching::from_sorted(edges))
}

/// Minimises `f1` subject to the degree bounds.
///
/// Among equal-cost optima the returned edge set is canonical: edges are
/// decided in `(left, right)` order and each is included whenever some
/// optimum containing the previously included edges also contains it.
pub fn solve_wbm<T: Scalar>(inst: &Instance<T>) -> SolveReport<T> {
    let start = Instant::now();
    let mut telemetry = Telemetry::default();
    if !is_feasible_bounds(inst).feasible {
        return SolveReport::without_matching(Status::Infeasible, start.elapsed(), telemetry);
    }
    let net = reduce_to_circulation(inst);
    let Some(circ) = net.network.min_cost_circulation() else {
        return SolveReport::without_matching(Status::Infeasible, start.elapsed(), telemetry);
    };
    telemetry.augmentations = circ.augmentations;
    let mut flow = circ.flow;
    let priority: Vec<usize> = (0..inst.m())
        .flat_map(|i| (0..inst.n()).map(move |j| (i, j)))
        .map(|(i, j)| net.edge_arc(i, j))
        .collect();
    let tol = T::of(1e-9) * T::one().max(inst.max_weight());
    telemetry.canonical_cycles = net.network.canonicalize(&mut flow, &priority, tol);
    let matching = lift_solution(&net, &flow).expect("unit-capacity arcs carry 0 or 1");
    SolveReport::new(inst, matching, Status::Optimal, start.elapsed(), telemetry)
}
