//! Brute-force ground truth for small instances.
//!
//! Every edge subset is visited by binary counting over the
//! `(left, right)`-ordered edge list (bit `i * n + j` is edge `(i, j)`).
//! Degrees and objective values are maintained incrementally only to skip
//! subsets quickly; every candidate optimum is re-evaluated from scratch with
//! [`f1`]/[`f2`] before it is accepted.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{check_matching, Instance, Matching};
use crate::metrics::{entropy_gain, price_of_diversity, Ratio};
use crate::objective::{f1, f2};
use crate::report::{SolveReport, Status, Telemetry};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    F1,
    F2,
}

impl Objective {
    pub fn eval<T: Scalar>(self, inst: &Instance<T>, matching: &Matching) -> T {
        match self {
            Objective::F1 => f1(inst, matching),
            Objective::F2 => f2(inst, matching),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    pub max_subsets: u64,
    pub max_time: Option<Duration>,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_subsets: 1 << 20,
            max_time: None,
        }
    }
}

impl EnumerationBudget {
    pub fn admits<T: Scalar>(&self, inst: &Instance<T>) -> bool {
        let edges = inst.m() * inst.n();
        edges < 64 && (1u64 << edges) <= self.max_subsets
    }
}

struct Best<T> {
    value: T,
    edges: Vec<(usize, usize)>,
}

fn edges_of(mask: u64, n: usize, e: usize) -> Vec<(usize, usize)> {
    (0..e)
        .filter(|b| mask >> b & 1 == 1)
        .map(|b| (b / n, b % n))
        .collect()
}

/// Single pass over all subsets, tracking the optimum of each objective.
fn enumerate<T: Scalar>(
    inst: &Instance<T>,
    budget: &EnumerationBudget,
    objectives: &[Objective],
) -> Result<(Vec<Option<Best<T>>>, u64)> {
    let (m, n) = (inst.m(), inst.n());
    let e = m * n;
    if !budget.admits(inst) {
        return Err(Error::EnumerationBudget {
            edges: e,
            budget: budget.max_subsets,
        });
    }
    let start = Instant::now();
    let b = inst.bounds();
    let k = inst.k();
    let mut ldeg = vec![0usize; m];
    let mut rdeg = vec![0usize; n];
    let ok = |d: usize, lo: usize, hi: usize| d >= lo && d <= hi;
    let mut violated = (0..m).filter(|&i| !ok(0, b.l_lo[i], b.l_hi[i])).count()
        + (0..n).filter(|&j| !ok(0, b.r_lo[j], b.r_hi[j])).count();
    let mut sums = vec![T::zero(); n * k];
    let mut inc_f1 = T::zero();
    let mut inc_f2 = T::zero();
    let mut best: Vec<Option<Best<T>>> = objectives.iter().map(|_| None).collect();
    let filter =
        T::of(1e-6) * T::one().max(inst.max_weight() * inst.max_weight() * T::of_usize(e * e));
    let tie = T::of(1e-12);

    let total: u64 = 1 << e;
    for mask in 0..total {
        if mask > 0 {
            let on = mask.trailing_zeros() as usize;
            for bit in 0..=on {
                let (i, j) = (bit / n, bit % n);
                let before = !ok(ldeg[i], b.l_lo[i], b.l_hi[i]) as usize
                    + !ok(rdeg[j], b.r_lo[j], b.r_hi[j]) as usize;
                let w = inst.weight(i, j);
                let slot = j * k + inst.cluster(i);
                let s = sums[slot];
                if bit == on {
                    ldeg[i] += 1;
                    rdeg[j] += 1;
                    inc_f1 = inc_f1 + w;
                    inc_f2 = inc_f2 + w * w + (w + w) * s;
                    sums[slot] = s + w;
                } else {
                    ldeg[i] -= 1;
                    rdeg[j] -= 1;
                    inc_f1 = inc_f1 - w;
                    inc_f2 = inc_f2 - ((w + w) * s - w * w);
                    sums[slot] = s - w;
                }
                let after = !ok(ldeg[i], b.l_lo[i], b.l_hi[i]) as usize
                    + !ok(rdeg[j], b.r_lo[j], b.r_hi[j]) as usize;
                violated = violated + after - before;
            }
            if mask & 0xffff == 0 {
                if let Some(limit) = budget.max_time {
                    if start.elapsed() > limit {
                        return Err(Error::EnumerationTimeout(limit));
                    }
                }
            }
        }
        if violated != 0 {
            continue;
        }
        for (slot, &obj) in best.iter_mut().zip(objectives) {
            let approx = match obj {
                Objective::F1 => inc_f1,
                Objective::F2 => inc_f2,
            };
            if let Some(cur) = slot.as_ref() {
                if approx > cur.value + filter {
                    continue;
                }
            }
            let edges = edges_of(mask, n, e);
            let matching = Matching::from_sorted(edges.clone());
            debug_assert!(check_matching(inst, &matching).unwrap().is_feasible());
            let value = obj.eval(inst, &matching);
            let replace = match slot.as_ref() {
                None => true,
                Some(cur) => {
                    let scale = T::one().max(cur.value.abs());
                    if value < cur.value - tie * scale {
                        true
                    } else if value <= cur.value + tie * scale {
                        edges < cur.edges
                    } else {
                        false
                    }
                }
            };
            if replace {
                *slot = Some(Best { value, edges });
            }
        }
    }
    Ok((best, total))
}

fn report<T: Scalar>(
    inst: &Instance<T>,
    best: Option<Best<T>>,
    elapsed: Duration,
    subsets: u64,
) -> SolveReport<T> {
    let telemetry = Telemetry {
        subsets_enumerated: subsets,
        ..Telemetry::default()
    };
    match best {
        Some(b) => SolveReport::new(
            inst,
            Matching::from_sorted(b.edges),
            Status::Optimal,
            elapsed,
            telemetry,
        ),
        None => SolveReport::without_matching(Status::Infeasible, elapsed, telemetry),
    }
}

/// Exhaustive optimum of `objective`; ties go to the lexicographically
/// smallest sorted edge list.
pub fn brute_force<T: Scalar>(
    inst: &Instance<T>,
    objective: Objective,
    budget: &EnumerationBudget,
) -> Result<SolveReport<T>> {
    let start = Instant::now();
    let (mut best, subsets) = enumerate(inst, budget, &[objective])?;
    Ok(report(inst, best.pop().flatten(), start.elapsed(), subsets))
}

#[derive(Debug, Clone)]
pub struct PodWitness<T = f64> {
    pub pod: Ratio<T>,
    pub eg: Ratio<T>,
    pub wbm: SolveReport<T>,
    pub diverse: SolveReport<T>,
}

/// Price of diversity and entropy gain from the exhaustive optima of both
/// objectives.
pub fn enumerate_pod<T: Scalar>(
    inst: &Instance<T>,
    budget: &EnumerationBudget,
) -> Result<PodWitness<T>> {
    let start = Instant::now();
    let (mut best, subsets) = enumerate(inst, budget, &[Objective::F1, Objective::F2])?;
    let elapsed = start.elapsed();
    let diverse = report(inst, best.pop().flatten(), elapsed, subsets);
    let wbm = report(inst, best.pop().flatten(), elapsed, subsets);
    if wbm.status != Status::Optimal {
        let why = || Ratio::Undefined("instance is infeasible".into());
        return Ok(PodWitness {
            pod: why(),
            eg: why(),
            wbm,
            diverse,
        });
    }
    Ok(PodWitness {
        pod: price_of_diversity(wbm.objective_f1, diverse.objective_f1),
        eg: entropy_gain(inst, &wbm.matching, &diverse.matching),
        wbm,
        diverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::DegreeBounds;

    #[test]
    fn forced_two_regular_matching() {
        let inst: Instance = Instance::new(
            vec![vec![1.0; 3]; 3],
            vec![0, 0, 1],
            2,
            DegreeBounds::uniform(3, 3, (2, 2), (2, 2)),
        )
        .unwrap();
        let r = brute_force(&inst, Objective::F1, &EnumerationBudget::default()).unwrap();
        assert_eq!(r.objective_f1, 6.0);
        let d = brute_force(&inst, Objective::F2, &EnumerationBudget::default()).unwrap();
        assert_eq!(d.objective_f1, 6.0);
        assert!(d.objective_f2 <= r.objective_f2);
    }

    #[test]
    fn tie_goes_to_smaller_edge_list() {
        let inst: Instance = Instance::new(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![0, 0],
            1,
            DegreeBounds::uniform(2, 2, (1, 1), (1, 1)),
        )
        .unwrap();
        let r = brute_force(&inst, Objective::F1, &EnumerationBudget::default()).unwrap();
        assert_eq!(r.objective_f1, 5.0);
        assert_eq!(r.matching.edges(), &[(0, 0), (1, 1)]);
        assert_eq!(r.telemetry.subsets_enumerated, 16);
    }

    #[test]
    fn empty_lower_bounds_give_empty_optimum() {
        let inst: Instance = Instance::new(
            vec![vec![0.3, 0.2], vec![0.1, 0.9]],
            vec![0, 1],
            2,
            DegreeBounds::unconstrained(2, 2),
        )
        .unwrap();
        let r = brute_force(&inst, Objective::F1, &EnumerationBudget::default()).unwrap();
        assert!(r.matching.is_empty());
        assert_eq!(r.objective_f1, 0.0);
    }

    #[test]
    fn refuses_over_budget() {
        let inst: Instance = Instance::new(
            vec![vec![1.0; 5]; 5],
            vec![0; 5],
            1,
            DegreeBounds::unconstrained(5, 5),
        )
        .unwrap();
        assert!(matches!(
            brute_force(&inst, Objective::F1, &EnumerationBudget::default()),
            Err(Error::EnumerationBudget { edges: 25, .. })
        ));
    }

    #[test]
    fn infeasible_instance() {
        let inst: Instance = Instance::new(
            vec![vec![1.0; 2]; 2],
            vec![0; 2],
            1,
            DegreeBounds::uniform(2, 2, (0, 1), (2, 2)),
        )
        .unwrap();
        let r = brute_force(&inst, Objective::F2, &EnumerationBudget::default()).unwrap();
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn single_cluster_eg_is_undefined() {
        let inst: Instance = Instance::new(
            vec![vec![0.4, 0.5], vec![0.6, 0.1], vec![0.3, 0.3]],
            vec![0, 0, 0],
            1,
            DegreeBounds::uniform(3, 2, (0, 2), (2, 3)),
        )
        .unwrap();
        let w = enumerate_pod(&inst, &EnumerationBudget::default()).unwrap();
        assert!(!w.eg.is_defined());
        assert!(w.pod.is_defined());
    }

    #[test]
    fn already_even_optimum_has_unit_pod() {
        // Cheapest pair at the single right node already spans both clusters.
        let b = DegreeBounds::uniform(4, 1, (0, 1), (2, 2));
        let inst: Instance = Instance::new(
            vec![vec![0.1], vec![0.9], vec![0.2], vec![0.8]],
            vec![0, 0, 1, 1],
            2,
            b,
        )
        .unwrap();
        let w = enumerate_pod(&inst, &EnumerationBudget::default()).unwrap();
        assert_eq!(w.pod, Ratio::Defined(1.0));
        assert_eq!(w.wbm.matching, w.diverse.matching);
    }
}
