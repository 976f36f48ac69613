//! Minimum-cost circulation with arc lower bounds.
//!
//! Lower bounds are removed by the excess/deficit transformation and the
//! resulting transshipment is solved by successive shortest paths with
//! Dijkstra on reduced costs. All arc costs are nonnegative, so the initial
//! zero potentials are valid.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::scalar::Scalar;

/// Capacity used for the uncapacitated return arc.
pub const UNBOUNDED: i64 = i64::MAX / 4;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowArc<T> {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    pub cap: i64,
    pub cost: T,
}

#[derive(Debug, Clone, Default)]
pub struct FlowNetwork<T> {
    pub nodes: usize,
    pub arcs: Vec<FlowArc<T>>,
}

/// Outcome of [`FlowNetwork::min_cost_circulation`].
#[derive(Debug, Clone)]
pub struct Circulation {
    /// Flow on every arc of the network, in arc order.
    pub flow: Vec<i64>,
    pub augmentations: u64,
}

struct Residual<T> {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<T>,
}

impl<T: Scalar> Residual<T> {
    fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: T) -> usize {
        let id = self.to.len();
        self.adj[from].push(id);
        self.to.push(to);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adj[to].push(id + 1);
        self.to.push(from);
        self.cap.push(0);
        self.cost.push(-cost);
        id
    }
}

#[derive(PartialEq)]
struct Entry<T>(T, usize);

impl<T: PartialOrd> Eq for Entry<T> {}

impl<T: PartialOrd> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: PartialOrd> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node id
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl<T: Scalar> FlowNetwork<T> {
    pub fn new(nodes: usize) -> Self {
        Self {
            nodes,
            arcs: Vec::new(),
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, lower: i64, cap: i64, cost: T) -> usize {
        debug_assert!(lower <= cap && cost >= T::zero());
        self.arcs.push(FlowArc {
            from,
            to,
            lower,
            cap,
            cost,
        });
        self.arcs.len() - 1
    }

    /// Cheapest flow meeting every arc's `[lower, cap]` window with
    /// conservation at every node; `None` when no circulation exists.
    pub fn min_cost_circulation(&self) -> Option<Circulation> {
        let (ss, tt) = (self.nodes, self.nodes + 1);
        let mut res = Residual::new(self.nodes + 2);
        let mut excess = vec![0i64; self.nodes];
        for a in &self.arcs {
            res.add(a.from, a.to, a.cap - a.lower, a.cost);
            excess[a.to] += a.lower;
            excess[a.from] -= a.lower;
        }
        let mut demand = 0;
        for (v, &e) in excess.iter().enumerate() {
            if e > 0 {
                res.add(ss, v, e, T::zero());
                demand += e;
            } else if e < 0 {
                res.add(v, tt, -e, T::zero());
            }
        }

        let size = self.nodes + 2;
        let mut potential = vec![T::zero(); size];
        let mut dist = vec![T::infinity(); size];
        let mut prev = vec![usize::MAX; size];
        let mut sent = 0;
        let mut augmentations = 0;
        while sent < demand {
            dist.iter_mut().for_each(|d| *d = T::infinity());
            prev.iter_mut().for_each(|p| *p = usize::MAX);
            dist[ss] = T::zero();
            let mut heap = BinaryHeap::new();
            heap.push(Entry(T::zero(), ss));
            while let Some(Entry(d, v)) = heap.pop() {
                if d > dist[v] {
                    continue;
                }
                for &e in &res.adj[v] {
                    if res.cap[e] == 0 {
                        continue;
                    }
                    let w = res.to[e];
                    let reduced = (res.cost[e] + potential[v] - potential[w]).max(T::zero());
                    let nd = d + reduced;
                    if nd < dist[w] {
                        dist[w] = nd;
                        prev[w] = e;
                        heap.push(Entry(nd, w));
                    }
                }
            }
            if !dist[tt].is_finite() {
                return None;
            }
            for v in 0..size {
                if dist[v].is_finite() {
                    potential[v] = potential[v] + dist[v];
                }
            }
            let mut push = demand - sent;
            let mut v = tt;
            while v != ss {
                let e = prev[v];
                push = push.min(res.cap[e]);
                v = res.to[e ^ 1];
            }
            let mut v = tt;
            while v != ss {
                let e = prev[v];
                res.cap[e] -= push;
                res.cap[e ^ 1] += push;
                v = res.to[e ^ 1];
            }
            sent += push;
            augmentations += 1;
        }

        let flow = self
            .arcs
            .iter()
            .enumerate()
            .map(|(idx, a)| a.lower + res.cap[2 * idx + 1])
            .collect();
        Some(Circulation {
            flow,
            augmentations,
        })
    }

    /// Node potentials with nonnegative reduced cost on every residual arc of
    /// `flow` (Bellman-Ford from a virtual root).
    fn potentials(&self, flow: &[i64]) -> Vec<T> {
        let mut pi = vec![T::zero(); self.nodes];
        for _ in 0..=self.nodes {
            let mut changed = false;
            for (a, &f) in self.arcs.iter().zip(flow) {
                if f < a.cap && pi[a.from] + a.cost < pi[a.to] {
                    pi[a.to] = pi[a.from] + a.cost;
                    changed = true;
                }
                if f > a.lower && pi[a.to] - a.cost < pi[a.from] {
                    pi[a.from] = pi[a.to] - a.cost;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        pi
    }

    /// Re-shapes an optimal circulation so that, among all optimal
    /// circulations, the arcs listed in `priority` carry one unit whenever
    /// possible, deciding them in list order. Each listed arc must have
    /// capacity 1 and lower bound 0.
    ///
    /// Works on the subgraph of zero reduced-cost residual arcs: an arc can
    /// be switched on at equal cost iff it closes a cycle in that subgraph
    /// that avoids already-decided arcs. Returns the number of cycles pushed.
    pub fn canonicalize(&self, flow: &mut [i64], priority: &[usize], tol: T) -> u64 {
        let pi = self.potentials(flow);
        let reduced: Vec<T> = self
            .arcs
            .iter()
            .map(|a| a.cost + pi[a.from] - pi[a.to])
            .collect();
        let tight: Vec<bool> = reduced.iter().map(|r| r.abs() <= tol).collect();
        let mut out_arcs = vec![Vec::new(); self.nodes];
        let mut in_arcs = vec![Vec::new(); self.nodes];
        for (idx, a) in self.arcs.iter().enumerate() {
            if tight[idx] {
                out_arcs[a.from].push(idx);
                in_arcs[a.to].push(idx);
            }
        }
        let mut frozen = vec![false; self.arcs.len()];
        let mut pushed = 0;
        // (arc, forward?) used to reach each node
        let mut via: Vec<Option<(usize, bool)>> = vec![None; self.nodes];
        let mut queue = VecDeque::new();
        for &e in priority {
            let arc = &self.arcs[e];
            debug_assert!(arc.lower == 0 && arc.cap == 1);
            frozen[e] = true;
            if flow[e] == 1 || !tight[e] {
                continue;
            }
            // search head -> tail in the tight residual graph
            via.iter_mut().for_each(|v| *v = None);
            queue.clear();
            let (start, goal) = (arc.to, arc.from);
            via[start] = Some((usize::MAX, true));
            queue.push_back(start);
            'bfs: while let Some(v) = queue.pop_front() {
                for &a in &out_arcs[v] {
                    let w = self.arcs[a].to;
                    if !frozen[a] && flow[a] < self.arcs[a].cap && via[w].is_none() {
                        via[w] = Some((a, true));
                        if w == goal {
                            break 'bfs;
                        }
                        queue.push_back(w);
                    }
                }
                for &a in &in_arcs[v] {
                    let w = self.arcs[a].from;
                    if !frozen[a] && flow[a] > self.arcs[a].lower && via[w].is_none() {
                        via[w] = Some((a, false));
                        if w == goal {
                            break 'bfs;
                        }
                        queue.push_back(w);
                    }
                }
            }
            if via[goal].is_none() {
                continue;
            }
            flow[e] += 1;
            let mut v = goal;
            while v != start {
                let (a, forward) = via[v].expect("path recorded");
                if forward {
                    flow[a] += 1;
                    v = self.arcs[a].from;
                } else {
                    flow[a] -= 1;
                    v = self.arcs[a].to;
                }
            }
            pushed += 1;
        }
        pushed
    }

    pub fn cost(&self, flow: &[i64]) -> T {
        crate::scalar::compensated_sum(
            self.arcs
                .iter()
                .zip(flow)
                .filter(|(_, &f)| f != 0)
                .map(|(a, &f)| a.cost * T::of(f as f64)),
        )
    }
}
