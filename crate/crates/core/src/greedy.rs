//! Greedy diverse matching.
//!
//! Lower bounds are raised one unit per round. Within a round every node
//! still below its round bound takes the not-yet-selected incident edge with
//! the smallest marginal increase of `f2`, preferring edges whose other
//! endpoint is also below its round bound. Gains come from [`ClusterSums`]
//! in O(1).

use std::cmp::Ordering;
use std::time::Instant;

use crate::feasibility::{degree_subgraph_feasible, is_feasible_bounds, DegreeWindow};
use crate::instance::{Instance, Side};
use crate::objective::ClusterSums;
use crate::report::{SolveReport, Status, Telemetry};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GreedyOptions {
    /// Visit right nodes before left nodes within a round.
    pub right_first: bool,
}

/// Run-confined state of the greedy construction.
#[derive(Debug, Clone)]
pub struct GreedyState<T = f64> {
    pub sums: ClusterSums<T>,
    pub left_degree: Vec<usize>,
    pub right_degree: Vec<usize>,
    pub round: usize,
}

impl<T: Scalar> GreedyState<T> {
    fn new(inst: &Instance<T>) -> Self {
        Self {
            sums: ClusterSums::new(inst),
            left_degree: vec![0; inst.m()],
            right_degree: vec![0; inst.n()],
            round: 0,
        }
    }

    /// Round lower bound `min(round, lo)` of a node.
    pub fn round_lower(&self, inst: &Instance<T>, side: Side, v: usize) -> usize {
        let b = inst.bounds();
        let lo = match side {
            Side::Left => b.l_lo[v],
            Side::Right => b.r_lo[v],
        };
        self.round.min(lo)
    }

    fn owes(&self, inst: &Instance<T>, side: Side, v: usize) -> bool {
        let deg = match side {
            Side::Left => self.left_degree[v],
            Side::Right => self.right_degree[v],
        };
        deg < self.round_lower(inst, side, v)
    }

    fn open(&self, inst: &Instance<T>, i: usize, j: usize) -> bool {
        let b = inst.bounds();
        !self.sums.is_selected(i, j)
            && self.left_degree[i] < b.l_hi[i]
            && self.right_degree[j] < b.r_hi[j]
    }

    /// Whether the full lower bounds stay reachable after adding `(i, j)`.
    fn completable_after(&self, inst: &Instance<T>, i: usize, j: usize) -> bool {
        let b = inst.bounds();
        let mut ld = self.left_degree.clone();
        let mut rd = self.right_degree.clone();
        ld[i] += 1;
        rd[j] += 1;
        let l_lo: Vec<_> = b
            .l_lo
            .iter()
            .zip(&ld)
            .map(|(lo, d)| lo.saturating_sub(*d))
            .collect();
        let l_hi: Vec<_> = b.l_hi.iter().zip(&ld).map(|(hi, d)| hi - d).collect();
        let r_lo: Vec<_> = b
            .r_lo
            .iter()
            .zip(&rd)
            .map(|(lo, d)| lo.saturating_sub(*d))
            .collect();
        let r_hi: Vec<_> = b.r_hi.iter().zip(&rd).map(|(hi, d)| hi - d).collect();
        let win = DegreeWindow {
            l_lo: &l_lo,
            l_hi: &l_hi,
            r_lo: &r_lo,
            r_hi: &r_hi,
        };
        degree_subgraph_feasible(&win, |a, c| {
            (a, c) != (i, j) && !self.sums.is_selected(a, c)
        })
    }

    fn add(&mut self, inst: &Instance<T>, i: usize, j: usize) {
        self.sums
            .apply_edge(inst, i, j)
            .expect("candidate edges are unselected and in range");
        self.left_degree[i] += 1;
        self.right_degree[j] += 1;
    }
}

struct Candidate<T> {
    gain: T,
    edge: (usize, usize),
    preferred: bool,
}

fn by_gain<T: Scalar>(a: &Candidate<T>, b: &Candidate<T>) -> Ordering {
    b.preferred
        .cmp(&a.preferred)
        .then(a.gain.partial_cmp(&b.gain).unwrap_or(Ordering::Equal))
        .then(a.edge.cmp(&b.edge))
}

/// Greedy diverse matching with the default visiting order.
pub fn solve_gdwbm<T: Scalar>(inst: &Instance<T>) -> SolveReport<T> {
    solve_gdwbm_with(inst, GreedyOptions::default())
}

pub fn solve_gdwbm_with<T: Scalar>(inst: &Instance<T>, opts: GreedyOptions) -> SolveReport<T> {
    let start = Instant::now();
    let mut telemetry = Telemetry::default();
    if !is_feasible_bounds(inst).feasible {
        return SolveReport::without_matching(Status::Infeasible, start.elapsed(), telemetry);
    }
    let b = inst.bounds();
    let rounds = b.l_lo.iter().chain(&b.r_lo).copied().max().unwrap_or(0);
    let left = (0..inst.m()).map(|v| (Side::Left, v));
    let right = (0..inst.n()).map(|v| (Side::Right, v));
    let order: Vec<(Side, usize)> = if opts.right_first {
        right.chain(left).collect()
    } else {
        left.chain(right).collect()
    };

    let mut state = GreedyState::new(inst);
    let mut candidates = Vec::new();
    for round in 1..=rounds {
        state.round = round;
        for &(side, v) in &order {
            if !state.owes(inst, side, v) {
                continue;
            }
            candidates.clear();
            let incident: Box<dyn Iterator<Item = (usize, usize)>> = match side {
                Side::Left => Box::new((0..inst.n()).map(move |j| (v, j))),
                Side::Right => Box::new((0..inst.m()).map(move |i| (i, v))),
            };
            for (i, j) in incident {
                if !state.open(inst, i, j) {
                    continue;
                }
                telemetry.gain_evaluations += 1;
                let preferred = match side {
                    Side::Left => state.owes(inst, Side::Right, j),
                    Side::Right => state.owes(inst, Side::Left, i),
                };
                candidates.push(Candidate {
                    gain: state.sums.gain(inst, i, j),
                    edge: (i, j),
                    preferred,
                });
            }
            candidates.sort_by(by_gain);
            let pick = candidates
                .iter()
                .map(|c| c.edge)
                .find(|&(i, j)| state.completable_after(inst, i, j));
            match pick {
                Some((i, j)) => state.add(inst, i, j),
                None => {
                    telemetry.stuck_node = Some((side, v));
                    return SolveReport::without_matching(
                        Status::Infeasible,
                        start.elapsed(),
                        telemetry,
                    );
                }
            }
        }
    }
    let matching = state.sums.to_matching();
    SolveReport::new(inst, matching, Status::Feasible, start.elapsed(), telemetry)
}

/// True when right nodes decouple: no left lower bounds and left upper
/// bounds that can never bind.
pub fn is_right_constrained<T: Scalar>(inst: &Instance<T>) -> bool {
    let b = inst.bounds();
    b.l_lo.iter().all(|&lo| lo == 0) && b.l_hi.iter().all(|&hi| hi >= inst.n())
}

/// Greedy solved independently per right node. Gives the same matching as
/// [`solve_gdwbm`]; falls back to it when [`is_right_constrained`] fails.
pub fn right_constrained_fast_path<T: Scalar>(inst: &Instance<T>) -> SolveReport<T> {
    if !is_right_constrained(inst) {
        return solve_gdwbm(inst);
    }
    let start = Instant::now();
    let mut telemetry = Telemetry::default();
    let mut sums = ClusterSums::new(inst);
    let b = inst.bounds();
    for j in 0..inst.n() {
        for _ in 0..b.r_lo[j] {
            let mut best: Option<(T, usize)> = None;
            for i in 0..inst.m() {
                if sums.is_selected(i, j) {
                    continue;
                }
                telemetry.gain_evaluations += 1;
                let g = sums.gain(inst, i, j);
                if best.is_none_or(|(bg, _)| g < bg) {
                    best = Some((g, i));
                }
            }
            let (_, i) = best.expect("r_lo <= m leaves an unselected left node");
            sums.apply_edge(inst, i, j).expect("unselected edge");
        }
    }
    let matching = sums.to_matching();
    SolveReport::new(inst, matching, Status::Feasible, start.elapsed(), telemetry)
}
