//! Exact minimisation of the diversity objective by best-first
//! branch-and-bound.
//!
//! Each search node fixes some edges in or out. Its lower bound is the
//! committed `f2` plus the larger of two completion bounds:
//!
//! * per right node owing `d` more edges: the cheapest way to add `d`
//!   available edges to that node alone. Within a cluster the `c` lightest
//!   edges are best and the per-cluster cost is convex in `c`, so merging
//!   the cluster increment sequences greedily is exact.
//! * per left node owing `d` more edges: the `d` smallest current marginal
//!   gains at that node (valid because gains only grow as edges are added).
//!
//! When the right-node completion also respects every left bound it is a
//! feasible solution that attains the bound, and the node is closed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use bitvec::vec::BitVec;

use crate::feasibility::{degree_subgraph_feasible, is_feasible_bounds, DegreeWindow};
use crate::greedy::solve_gdwbm;
use crate::instance::{Instance, Matching};
use crate::objective::ClusterSums;
use crate::report::{SolveReport, Status, Telemetry};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct ExactOptions<T> {
    /// Wall-clock budget; `None` searches to completion.
    pub budget: Option<Duration>,
    /// Frontier size beyond which new nodes are explored depth-first.
    pub frontier_cap: usize,
    /// A node is pruned when its bound is at least `incumbent - prune_tol`.
    pub prune_tol: T,
    /// Seed the incumbent with the greedy solution.
    pub warm_start: bool,
}

impl<T: Scalar> Default for ExactOptions<T> {
    fn default() -> Self {
        Self {
            budget: None,
            frontier_cap: 1_000_000,
            prune_tol: T::of(1e-9),
            warm_start: true,
        }
    }
}

/// A partial assignment in the search tree.
#[derive(Debug, Clone)]
pub struct SearchNode<T> {
    /// Committed-in edges and their cluster sums.
    pub sums: ClusterSums<T>,
    pub excluded: BitVec,
    /// `f2` of the committed-in edges.
    pub committed: T,
    pub left_degree: Vec<usize>,
    pub right_degree: Vec<usize>,
    pub depth: usize,
}

enum Evaluation<T> {
    Infeasible,
    /// Best completion is known: value and the edges to add.
    Solved(T, Vec<(usize, usize)>),
    Open {
        bound: T,
        branch: (usize, usize),
    },
}

struct Queued<T> {
    bound: T,
    depth: usize,
    seq: u64,
    node: SearchNode<T>,
}

impl<T: Scalar> PartialEq for Queued<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Queued<T> {}

impl<T: Scalar> PartialOrd for Queued<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Queued<T> {
    // BinaryHeap is a max-heap: smallest bound, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Search<'a, T> {
    inst: &'a Instance<T>,
    /// `by_cluster[j][c]`: left nodes of cluster `c`, lightest edge to `j` first.
    by_cluster: Vec<Vec<Vec<usize>>>,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(inst: &'a Instance<T>) -> Self {
        let by_cluster = (0..inst.n())
            .map(|j| {
                let mut lists = vec![Vec::new(); inst.k()];
                for i in 0..inst.m() {
                    lists[inst.cluster(i)].push(i);
                }
                for list in &mut lists {
                    list.sort_by(|&a, &b| {
                        inst.weight(a, j)
                            .partial_cmp(&inst.weight(b, j))
                            .unwrap_or(Ordering::Equal)
                            .then(a.cmp(&b))
                    });
                }
                lists
            })
            .collect();
        Self { inst, by_cluster }
    }

    fn root(&self) -> SearchNode<T> {
        let (m, n) = (self.inst.m(), self.inst.n());
        SearchNode {
            sums: ClusterSums::new(self.inst),
            excluded: BitVec::repeat(false, m * n),
            committed: T::zero(),
            left_degree: vec![0; m],
            right_degree: vec![0; n],
            depth: 0,
        }
    }

    fn undecided(&self, node: &SearchNode<T>, i: usize, j: usize) -> bool {
        !node.sums.is_selected(i, j) && !node.excluded[i * self.inst.n() + j]
    }

    fn evaluate(&self, node: &SearchNode<T>) -> Evaluation<T> {
        let inst = self.inst;
        let b = inst.bounds();
        let l_lo: Vec<usize> = b
            .l_lo
            .iter()
            .zip(&node.left_degree)
            .map(|(lo, d)| lo.saturating_sub(*d))
            .collect();
        let r_lo: Vec<usize> = b
            .r_lo
            .iter()
            .zip(&node.right_degree)
            .map(|(lo, d)| lo.saturating_sub(*d))
            .collect();
        if l_lo.iter().all(|&d| d == 0) && r_lo.iter().all(|&d| d == 0) {
            return Evaluation::Solved(node.committed, Vec::new());
        }
        let l_hi: Vec<usize> = b
            .l_hi
            .iter()
            .zip(&node.left_degree)
            .map(|(hi, d)| hi - d)
            .collect();
        let r_hi: Vec<usize> = b
            .r_hi
            .iter()
            .zip(&node.right_degree)
            .map(|(hi, d)| hi - d)
            .collect();
        let win = DegreeWindow {
            l_lo: &l_lo,
            l_hi: &l_hi,
            r_lo: &r_lo,
            r_hi: &r_hi,
        };
        if !degree_subgraph_feasible(&win, |i, j| self.undecided(node, i, j)) {
            return Evaluation::Infeasible;
        }

        // Right-node completion bound and its witness.
        let mut right_total = T::zero();
        let mut completion = Vec::new();
        let mut chosen: Vec<usize> = Vec::new();
        let mut added: Vec<T> = Vec::new();
        for (j, &owed) in r_lo.iter().enumerate() {
            if owed == 0 {
                continue;
            }
            let lists = &self.by_cluster[j];
            // per cluster: available left nodes, lightest first, at most `owed`
            let avail: Vec<Vec<usize>> = lists
                .iter()
                .map(|list| {
                    list.iter()
                        .copied()
                        .filter(|&i| l_hi[i] > 0 && self.undecided(node, i, j))
                        .take(owed)
                        .collect()
                })
                .collect();
            chosen.clear();
            chosen.resize(inst.k(), 0);
            added.clear();
            added.resize(inst.k(), T::zero());
            for _ in 0..owed {
                let mut best: Option<(T, usize)> = None;
                for (c, cand) in avail.iter().enumerate() {
                    if let Some(&i) = cand.get(chosen[c]) {
                        let w = inst.weight(i, j);
                        let inc = w * w + (w + w) * (node.sums.get(j, c) + added[c]);
                        if best.is_none_or(|(bi, _)| inc < bi) {
                            best = Some((inc, c));
                        }
                    }
                }
                let Some((inc, c)) = best else {
                    return Evaluation::Infeasible;
                };
                let i = avail[c][chosen[c]];
                right_total = right_total + inc;
                added[c] = added[c] + inst.weight(i, j);
                chosen[c] += 1;
                completion.push((i, j));
            }
        }

        // Left-node completion bound.
        let mut left_total = T::zero();
        let mut gains = Vec::new();
        for (i, &owed) in l_lo.iter().enumerate() {
            if owed == 0 {
                continue;
            }
            gains.clear();
            gains.extend(
                (0..inst.n())
                    .filter(|&j| r_hi[j] > 0 && self.undecided(node, i, j))
                    .map(|j| node.sums.gain(inst, i, j)),
            );
            if gains.len() < owed {
                return Evaluation::Infeasible;
            }
            gains.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            left_total = left_total + gains[..owed].iter().copied().sum::<T>();
        }

        let mut extra = vec![0usize; inst.m()];
        for &(i, _) in &completion {
            extra[i] += 1;
        }
        let completes = extra
            .iter()
            .enumerate()
            .all(|(i, &x)| x >= l_lo[i] && x <= l_hi[i]);
        if completes {
            completion.sort_unstable();
            return Evaluation::Solved(node.committed + right_total, completion);
        }

        let branch = self.branch_edge(node, &r_lo, &l_lo, &l_hi, &r_hi);
        match branch {
            Some(edge) => Evaluation::Open {
                bound: node.committed + right_total.max(left_total),
                branch: edge,
            },
            None => Evaluation::Infeasible,
        }
    }

    /// Heaviest undecided, open edge at a node with an unmet lower bound
    /// (right nodes first); ties go to the smallest `(left, right)`.
    fn branch_edge(
        &self,
        node: &SearchNode<T>,
        r_lo: &[usize],
        l_lo: &[usize],
        l_hi: &[usize],
        r_hi: &[usize],
    ) -> Option<(usize, usize)> {
        let inst = self.inst;
        let open = |i: usize, j: usize| l_hi[i] > 0 && r_hi[j] > 0 && self.undecided(node, i, j);
        let pick = |edges: &mut dyn Iterator<Item = (usize, usize)>| {
            let mut best: Option<(T, (usize, usize))> = None;
            for (i, j) in edges {
                let w = inst.weight(i, j);
                let better = match best {
                    None => true,
                    Some((bw, be)) => w > bw || (w == bw && (i, j) < be),
                };
                if better {
                    best = Some((w, (i, j)));
                }
            }
            best.map(|(_, e)| e)
        };
        let mut right = (0..inst.n())
            .filter(|&j| r_lo[j] > 0)
            .flat_map(|j| (0..inst.m()).map(move |i| (i, j)))
            .filter(|&(i, j)| open(i, j));
        if let Some(e) = pick(&mut right) {
            return Some(e);
        }
        let mut left = (0..inst.m())
            .filter(|&i| l_lo[i] > 0)
            .flat_map(|i| (0..inst.n()).map(move |j| (i, j)))
            .filter(|&(i, j)| open(i, j));
        pick(&mut left)
    }

    fn with_edge(&self, node: &SearchNode<T>, i: usize, j: usize) -> SearchNode<T> {
        let mut child = node.clone();
        let gain = child.sums.gain(self.inst, i, j);
        child
            .sums
            .apply_edge(self.inst, i, j)
            .expect("branch edge is undecided");
        child.committed = child.committed + gain;
        child.left_degree[i] += 1;
        child.right_degree[j] += 1;
        child.depth += 1;
        debug_assert!(
            (child.committed - child.sums.f2()).abs()
                <= T::of(1e-9) * T::one().max(child.committed)
        );
        child
    }

    fn without_edge(&self, mut node: SearchNode<T>, i: usize, j: usize) -> SearchNode<T> {
        node.excluded.set(i * self.inst.n() + j, true);
        node.depth += 1;
        node
    }
}

/// Greedy matching used to seed the incumbent.
pub fn warm_start<T: Scalar>(inst: &Instance<T>) -> Option<Matching> {
    let r = solve_gdwbm(inst);
    r.status.has_matching().then_some(r.matching)
}

/// Minimises `f2` under the degree bounds within `budget`.
pub fn solve_dwbm_exact<T: Scalar>(inst: &Instance<T>, budget: Option<Duration>) -> SolveReport<T> {
    solve_dwbm_exact_with(
        inst,
        &ExactOptions {
            budget,
            ..ExactOptions::default()
        },
    )
}

pub fn solve_dwbm_exact_with<T: Scalar>(
    inst: &Instance<T>,
    opts: &ExactOptions<T>,
) -> SolveReport<T> {
    let start = Instant::now();
    let mut telemetry = Telemetry::default();
    if !is_feasible_bounds(inst).feasible {
        return SolveReport::without_matching(Status::Infeasible, start.elapsed(), telemetry);
    }
    let search = Search::new(inst);

    let mut incumbent: Option<(T, Matching)> = None;
    let record =
        |value: T, matching: Matching, incumbent: &mut Option<(T, Matching)>, t: &mut Telemetry| {
            t.incumbent_updates
                .push((start.elapsed().as_secs_f64(), value.as_f64()));
            *incumbent = Some((value, matching));
        };
    if opts.warm_start {
        if let Some(m) = warm_start(inst) {
            let value = ClusterSums::from_matching(inst, &m)
                .expect("greedy edges are in range")
                .f2();
            record(value, m, &mut incumbent, &mut telemetry);
        }
    }

    let mut heap = BinaryHeap::new();
    let mut dive: Vec<Queued<T>> = Vec::new();
    let mut seq = 0u64;
    let mut timed_out = false;

    let mut pending = vec![search.root()];
    loop {
        for node in pending.drain(..) {
            match search.evaluate(&node) {
                Evaluation::Infeasible => telemetry.nodes_pruned += 1,
                Evaluation::Solved(value, extra) => {
                    let better = incumbent
                        .as_ref()
                        .is_none_or(|(best, _)| value < *best - opts.prune_tol);
                    if better {
                        let mut edges = node.sums.to_matching().edges().to_vec();
                        edges.extend(extra);
                        let m = Matching::new(edges).expect("completion edges are undecided");
                        record(value, m, &mut incumbent, &mut telemetry);
                    } else {
                        telemetry.nodes_pruned += 1;
                    }
                }
                Evaluation::Open { bound, branch } => {
                    if incumbent
                        .as_ref()
                        .is_some_and(|(best, _)| bound >= *best - opts.prune_tol)
                    {
                        telemetry.nodes_pruned += 1;
                        continue;
                    }
                    let (i, j) = branch;
                    let inside = search.with_edge(&node, i, j);
                    let outside = search.without_edge(node, i, j);
                    for child in [outside, inside] {
                        seq += 1;
                        let q = Queued {
                            bound,
                            depth: child.depth,
                            seq,
                            node: child,
                        };
                        if heap.len() + dive.len() >= opts.frontier_cap {
                            dive.push(q);
                        } else {
                            heap.push(q);
                        }
                    }
                    telemetry.frontier_peak = telemetry
                        .frontier_peak
                        .max((heap.len() + dive.len()) as u64);
                }
            }
        }
        if opts.budget.is_some_and(|b| start.elapsed() >= b) {
            timed_out = !(heap.is_empty() && dive.is_empty());
            break;
        }
        let Some(q) = dive.pop().or_else(|| heap.pop()) else {
            break;
        };
        if incumbent
            .as_ref()
            .is_some_and(|(best, _)| q.bound >= *best - opts.prune_tol)
        {
            telemetry.nodes_pruned += 1;
            continue;
        }
        telemetry.nodes_expanded += 1;
        pending.push(q.node);
    }

    match incumbent {
        Some((_, m)) => {
            let status = if timed_out {
                Status::FeasibleIncumbent
            } else {
                Status::Optimal
            };
            SolveReport::new(inst, m, status, start.elapsed(), telemetry)
        }
        None => {
            let status = if timed_out {
                Status::BudgetExhausted
            } else {
                Status::Infeasible
            };
            SolveReport::without_matching(status, start.elapsed(), telemetry)
        }
    }
}
