//! Exact degree-feasibility via max-flow with lower bounds.

use serde::Serialize;

use crate::instance::{Instance, Side};
use crate::scalar::Scalar;

const INF: i64 = i64::MAX / 4;

/// Dinic's max-flow on integer capacities.
pub(crate) struct MaxFlow {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl MaxFlow {
    pub(crate) fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; nodes],
            iter: vec![0; nodes],
        }
    }

    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let id = self.to.len();
        self.adj[from].push(id);
        self.to.push(to);
        self.cap.push(cap);
        self.adj[to].push(id + 1);
        self.to.push(from);
        self.cap.push(0);
        id
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &a in &self.adj[v] {
                let w = self.to[a];
                if self.cap[a] > 0 && self.level[w] < 0 {
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, limit: i64) -> i64 {
        if v == t {
            return limit;
        }
        while self.iter[v] < self.adj[v].len() {
            let a = self.adj[v][self.iter[v]];
            let w = self.to[a];
            if self.cap[a] > 0 && self.level[v] < self.level[w] {
                let pushed = self.dfs(w, t, limit.min(self.cap[a]));
                if pushed > 0 {
                    self.cap[a] -= pushed;
                    self.cap[a ^ 1] += pushed;
                    return pushed;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    pub(crate) fn run(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, INF);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
    }
}

/// Degree bounds for a (possibly residual) subproblem.
pub(crate) struct DegreeWindow<'a> {
    pub l_lo: &'a [usize],
    pub l_hi: &'a [usize],
    pub r_lo: &'a [usize],
    pub r_hi: &'a [usize],
}

/// True iff some subset of the allowed edges meets every degree window.
///
/// Circulation with demands: `s -> i [l_lo, l_hi]`, `i -> j [0, 1]`,
/// `j -> t [r_lo, r_hi]`, `t -> s [0, inf)`; lower bounds are moved into
/// node excesses and served from a super source.
pub(crate) fn degree_subgraph_feasible(
    win: &DegreeWindow<'_>,
    mut allowed: impl FnMut(usize, usize) -> bool,
) -> bool {
    let (m, n) = (win.l_lo.len(), win.r_lo.len());
    let l_lo_sum: usize = win.l_lo.iter().sum();
    let r_lo_sum: usize = win.r_lo.iter().sum();
    if l_lo_sum > win.r_hi.iter().sum() || r_lo_sum > win.l_hi.iter().sum() {
        return false;
    }
    if win.l_lo.iter().zip(win.l_hi).any(|(a, b)| a > b)
        || win.r_lo.iter().zip(win.r_hi).any(|(a, b)| a > b)
    {
        return false;
    }
    if l_lo_sum == 0 && r_lo_sum == 0 {
        return true;
    }
    let (s, t, ss, tt) = (m + n, m + n + 1, m + n + 2, m + n + 3);
    let mut net = MaxFlow::new(m + n + 4);
    let mut excess = vec![0i64; m + n + 2];
    for i in 0..m {
        net.add_arc(s, i, (win.l_hi[i] - win.l_lo[i]) as i64);
        excess[i] += win.l_lo[i] as i64;
        excess[s] -= win.l_lo[i] as i64;
        for j in 0..n {
            if allowed(i, j) {
                net.add_arc(i, m + j, 1);
            }
        }
    }
    for j in 0..n {
        net.add_arc(m + j, t, (win.r_hi[j] - win.r_lo[j]) as i64);
        excess[t] += win.r_lo[j] as i64;
        excess[m + j] -= win.r_lo[j] as i64;
    }
    net.add_arc(t, s, INF);
    let mut demand = 0;
    for (v, &e) in excess.iter().enumerate() {
        if e > 0 {
            net.add_arc(ss, v, e);
            demand += e;
        } else if e < 0 {
            net.add_arc(v, tt, -e);
        }
    }
    net.run(ss, tt) == demand
}

/// Result of [`is_feasible_bounds`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// The side whose lower bounds cannot be served, when that is decidable
    /// by counting alone.
    pub violated_side: Option<Side>,
    pub diagnostic: Option<String>,
}

/// Decides whether any matching satisfies all degree bounds.
pub fn is_feasible_bounds<T: Scalar>(inst: &Instance<T>) -> Feasibility {
    let b = inst.bounds();
    let win = DegreeWindow {
        l_lo: &b.l_lo,
        l_hi: &b.l_hi,
        r_lo: &b.r_lo,
        r_hi: &b.r_hi,
    };
    if degree_subgraph_feasible(&win, |_, _| true) {
        return Feasibility {
            feasible: true,
            violated_side: None,
            diagnostic: None,
        };
    }
    let r_demand: usize = b.r_lo.iter().sum();
    let l_supply: usize = b.l_hi.iter().sum();
    let l_demand: usize = b.l_lo.iter().sum();
    let r_supply: usize = b.r_hi.iter().sum();
    let (side, msg) = if r_demand > l_supply {
        (
            Some(Side::Right),
            format!(
                "right lower bounds demand {r_demand} edges but left upper bounds allow {l_supply}"
            ),
        )
    } else if l_demand > r_supply {
        (
            Some(Side::Left),
            format!(
                "left lower bounds demand {l_demand} edges but right upper bounds allow {r_supply}"
            ),
        )
    } else {
        (
            None,
            "no subgraph meets every degree bound (a subset of nodes is over-constrained)"
                .to_string(),
        )
    };
    Feasibility {
        feasible: false,
        violated_side: side,
        diagnostic: Some(msg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{check_matching, DegreeBounds, Matching};
    use proptest::prelude::*;

    fn unit(m: usize, n: usize, b: DegreeBounds) -> Instance {
        Instance::new(vec![vec![1.0; n]; m], vec![0; m], 1, b).unwrap()
    }

    fn brute_force_exists(inst: &Instance) -> bool {
        let (m, n) = (inst.m(), inst.n());
        (0u32..1 << (m * n)).any(|mask| {
            let edges = (0..m * n)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| (b / n, b % n))
                .collect();
            check_matching(inst, &Matching::new(edges).unwrap())
                .unwrap()
                .is_feasible()
        })
    }

    #[test]
    fn synthetic_experiment_bounds_are_feasible() {
        let inst = unit(10, 10, DegreeBounds::uniform(10, 10, (0, 10), (5, 10)));
        assert!(is_feasible_bounds(&inst).feasible);
    }

    #[test]
    fn demand_exceeding_supply_names_right_side() {
        let inst = unit(3, 3, DegreeBounds::uniform(3, 3, (0, 1), (2, 3)));
        let f = is_feasible_bounds(&inst);
        assert!(!f.feasible);
        assert_eq!(f.violated_side, Some(Side::Right));
        assert!(f.diagnostic.unwrap().contains("right"));
    }

    #[test]
    fn four_by_two_with_unit_left_capacity() {
        let b = DegreeBounds {
            l_lo: vec![0; 4],
            l_hi: vec![1; 4],
            r_lo: vec![2, 2],
            r_hi: vec![4, 4],
        };
        let inst = unit(4, 2, b);
        assert!(brute_force_exists(&inst));
        assert!(is_feasible_bounds(&inst).feasible);
    }

    #[test]
    fn non_counting_obstruction() {
        // Right node 0 needs 2 edges but only left 0 may take any edge.
        let b = DegreeBounds {
            l_lo: vec![0, 0],
            l_hi: vec![2, 0],
            r_lo: vec![2, 0],
            r_hi: vec![2, 2],
        };
        let inst = unit(2, 2, b);
        let f = is_feasible_bounds(&inst);
        assert!(!f.feasible);
        assert_eq!(f.violated_side, None);
    }

    fn bounds_strategy() -> impl Strategy<Value = Instance> {
        (1usize..=4, 1usize..=4)
            .prop_filter("m*n <= 16", |(m, n)| m * n <= 16)
            .prop_flat_map(|(m, n)| {
                (
                    proptest::collection::vec((0..=n, 0..=n), m),
                    proptest::collection::vec((0..=m, 0..=m), n),
                )
                    .prop_map(move |(l, r)| {
                        let b = DegreeBounds {
                            l_lo: l.iter().map(|&(a, b)| a.min(b)).collect(),
                            l_hi: l.iter().map(|&(a, b)| a.max(b)).collect(),
                            r_lo: r.iter().map(|&(a, b)| a.min(b)).collect(),
                            r_hi: r.iter().map(|&(a, b)| a.max(b)).collect(),
                        };
                        unit(m, n, b)
                    })
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn agrees_with_subset_enumeration(inst in bounds_strategy()) {
            prop_assert_eq!(is_feasible_bounds(&inst).feasible, brute_force_exists(&inst));
        }
    }
}
