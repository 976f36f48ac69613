//! Entropy gain, price of diversity and its worst-case lower bound.

use serde::Serialize;

use crate::instance::{Instance, Matching};
use crate::objective::f1;
use crate::scalar::Scalar;

/// A ratio that may be undefined (zero denominator, no data).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio<T> {
    Defined(T),
    Undefined(String),
}

impl<T: Scalar> Ratio<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Ratio::Defined(v) => Some(*v),
            Ratio::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Ratio::Defined(_))
    }
}

fn cluster_counts<T: Scalar>(inst: &Instance<T>, matching: &Matching, j: usize) -> Vec<usize> {
    let mut counts = vec![0usize; inst.k()];
    for i in matching.left_neighbors(j) {
        counts[inst.cluster(i)] += 1;
    }
    counts
}

/// Shannon entropy of the cluster labels of `j`'s selected edges, in units
/// of `ln(base)`; `None` when `j` has no selected edge.
pub fn node_entropy_base<T: Scalar>(
    inst: &Instance<T>,
    matching: &Matching,
    j: usize,
    base: T,
) -> Option<T> {
    let counts = cluster_counts(inst, matching, j);
    let total: usize = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let total = T::of_usize(total);
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = T::of_usize(c) / total;
            -(p * p.ln())
        })
        .sum::<T>();
    Some(h.max(T::zero()) / base.ln())
}

/// Entropy in nats.
pub fn node_entropy<T: Scalar>(inst: &Instance<T>, matching: &Matching, j: usize) -> Option<T> {
    node_entropy_base(inst, matching, j, T::one().exp())
}

/// Per-right-node entropies of both matchings, and the ratio of their
/// averages over the nodes where both are defined.
pub fn entropy_gain_base<T: Scalar>(
    inst: &Instance<T>,
    wbm: &Matching,
    diverse: &Matching,
    base: T,
) -> (Ratio<T>, Option<T>, Option<T>) {
    let mut sum_w = T::zero();
    let mut sum_d = T::zero();
    let mut count = 0usize;
    for j in 0..inst.n() {
        let w = node_entropy_base(inst, wbm, j, base);
        let d = node_entropy_base(inst, diverse, j, base);
        if let (Some(w), Some(d)) = (w, d) {
            sum_w = sum_w + w;
            sum_d = sum_d + d;
            count += 1;
        }
    }
    if count == 0 {
        return (
            Ratio::Undefined("no right node has edges in both matchings".into()),
            None,
            None,
        );
    }
    let avg_w = sum_w / T::of_usize(count);
    let avg_d = sum_d / T::of_usize(count);
    let eg = if avg_w > T::zero() {
        Ratio::Defined(avg_d / avg_w)
    } else {
        Ratio::Undefined("average entropy of the efficiency-only matching is zero".into())
    };
    (eg, Some(avg_w), Some(avg_d))
}

/// Ratio of average right-node entropy, diverse over efficiency-only.
pub fn entropy_gain<T: Scalar>(inst: &Instance<T>, wbm: &Matching, diverse: &Matching) -> Ratio<T> {
    entropy_gain_base(inst, wbm, diverse, T::one().exp()).0
}

/// `f1_wbm / f1_diverse`; at most 1 when the efficiency-only matching is
/// optimal, with 1 meaning diversity cost nothing.
pub fn price_of_diversity<T: Scalar>(f1_wbm: T, f1_diverse: T) -> Ratio<T> {
    if f1_diverse > T::zero() {
        Ratio::Defined(f1_wbm / f1_diverse)
    } else {
        Ratio::Undefined("diverse matching has zero total weight".into())
    }
}

/// Worst-case price-of-diversity term of one right node with lower bound
/// `r_lo` and weight ratio `z = sum / min` (infinite when the minimum is 0).
pub fn pod_bound_term<T: Scalar>(z: T, r_lo: usize) -> T {
    if r_lo <= 1 {
        return T::one();
    }
    let spread = T::of_usize(r_lo - 1).sqrt();
    if z.is_infinite() {
        return T::one() / spread;
    }
    z / (T::one() + spread * (z * z - T::one()).max(T::zero()).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PodBound<T> {
    /// Mean of the per-node terms computed from the efficiency-only weights.
    pub value: T,
    /// Mean of the zero-minimum-weight limits `1 / sqrt(r_lo - 1)`.
    pub universal: T,
    pub terms: Vec<Option<T>>,
    /// Right nodes without selected edges, left out of both means.
    pub excluded: Vec<usize>,
}

/// Worst-case price-of-diversity bound evaluated on the efficiency-only
/// matching: `z_l` is the sum over the minimum of node `l`'s selected weights.
pub fn pod_lower_bound<T: Scalar>(inst: &Instance<T>, wbm: &Matching) -> PodBound<T> {
    let mut terms = Vec::with_capacity(inst.n());
    let mut excluded = Vec::new();
    let mut sum = T::zero();
    let mut universal = T::zero();
    for j in 0..inst.n() {
        let weights: Vec<T> = wbm.left_neighbors(j).map(|i| inst.weight(i, j)).collect();
        if weights.is_empty() {
            excluded.push(j);
            terms.push(None);
            continue;
        }
        let total = weights.iter().copied().sum::<T>();
        let min = weights.iter().copied().fold(T::infinity(), T::min);
        let z = if min > T::zero() {
            total / min
        } else {
            T::infinity()
        };
        let r_lo = inst.bounds().r_lo[j];
        let term = pod_bound_term(z, r_lo);
        sum = sum + term;
        universal = universal + pod_bound_term(T::infinity(), r_lo);
        terms.push(Some(term));
    }
    let count = inst.n() - excluded.len();
    let (value, universal) = if count == 0 {
        (T::one(), T::one())
    } else {
        let c = T::of_usize(count);
        (sum / c, universal / c)
    };
    PodBound {
        value,
        universal,
        terms,
        excluded,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport<T = f64> {
    pub f1_wbm: T,
    pub f1_diverse: T,
    pub pod: Ratio<T>,
    pub entropy_wbm: Vec<Option<T>>,
    pub entropy_diverse: Vec<Option<T>>,
    pub avg_entropy_wbm: Option<T>,
    pub avg_entropy_diverse: Option<T>,
    pub eg: Ratio<T>,
    pub pod_bound: PodBound<T>,
}

pub fn metrics_report<T: Scalar>(
    inst: &Instance<T>,
    wbm: &Matching,
    diverse: &Matching,
) -> MetricsReport<T> {
    let f1_wbm = f1(inst, wbm);
    let f1_diverse = f1(inst, diverse);
    let (eg, avg_w, avg_d) = entropy_gain_base(inst, wbm, diverse, T::one().exp());
    MetricsReport {
        f1_wbm,
        f1_diverse,
        pod: price_of_diversity(f1_wbm, f1_diverse),
        entropy_wbm: (0..inst.n()).map(|j| node_entropy(inst, wbm, j)).collect(),
        entropy_diverse: (0..inst.n())
            .map(|j| node_entropy(inst, diverse, j))
            .collect(),
        avg_entropy_wbm: avg_w,
        avg_entropy_diverse: avg_d,
        eg,
        pod_bound: pod_lower_bound(inst, wbm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::DegreeBounds;

    fn inst(clusters: Vec<usize>, k: usize) -> Instance {
        let m = clusters.len();
        Instance::new(
            vec![vec![1.0, 1.0]; m],
            clusters,
            k,
            DegreeBounds::unconstrained(m, 2),
        )
        .unwrap()
    }

    fn mm(edges: &[(usize, usize)]) -> Matching {
        Matching::new(edges.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let g = inst(vec![0, 0, 1, 1, 2, 2], 3);
        assert_eq!(node_entropy(&g, &mm(&[(0, 0), (1, 0)]), 0), Some(0.0));
        let even = node_entropy(&g, &mm(&[(0, 0), (2, 0), (4, 0)]), 0).unwrap();
        assert!((even - 3f64.ln()).abs() < 1e-12);
        let h = node_entropy(&g, &mm(&[(0, 0), (1, 0), (2, 0)]), 0).unwrap();
        let want = -(2.0 / 3.0 * (2.0f64 / 3.0).ln() + 1.0 / 3.0 * (1.0f64 / 3.0).ln());
        assert!((h - want).abs() < 1e-12);
        assert!((h - 0.63651).abs() < 1e-5);
        assert_eq!(node_entropy(&g, &Matching::empty(), 1), None);
    }

    #[test]
    fn entropy_gain_identity_and_zero_denominator() {
        let g = inst(vec![0, 0, 1, 1], 2);
        let a = mm(&[(0, 0), (2, 0), (1, 1), (3, 1)]);
        assert_eq!(entropy_gain(&g, &a, &a), Ratio::Defined(1.0));
        let same = mm(&[(0, 0), (1, 0), (2, 1), (3, 1)]);
        assert!(!entropy_gain(&g, &same, &a).is_defined());
    }

    #[test]
    fn entropy_gain_is_base_invariant() {
        let g = inst(vec![0, 0, 1, 1, 2], 3);
        let w = mm(&[(0, 0), (1, 0), (2, 0), (2, 1), (3, 1)]);
        let d = mm(&[(0, 0), (2, 0), (4, 0), (1, 1), (3, 1)]);
        let e = entropy_gain_base(&g, &w, &d, std::f64::consts::E)
            .0
            .value()
            .unwrap();
        let two = entropy_gain_base(&g, &w, &d, 2.0).0.value().unwrap();
        assert!((e - two).abs() < 1e-12);
    }

    #[test]
    fn pod_examples() {
        assert_eq!(price_of_diversity(6.0, 6.0), Ratio::Defined(1.0));
        assert!(!price_of_diversity(1.0, 0.0).is_defined());
    }

    #[test]
    fn pod_bound_terms() {
        assert_eq!(pod_bound_term(f64::INFINITY, 5), 0.5);
        let t = pod_bound_term(2.0, 2);
        assert!((t - 2.0 / (1.0 + 3f64.sqrt())).abs() < 1e-12);
        assert!((t - 0.73205).abs() < 1e-5);
        assert_eq!(pod_bound_term(3.0, 1), 1.0);
        assert_eq!(pod_bound_term(1.0, 4), 1.0);
    }

    #[test]
    fn pod_bound_nonincreasing_in_r_lo() {
        for zi in 1..=50 {
            let z = 1.0 + zi as f64 * 0.37;
            for r in 1..30 {
                assert!(pod_bound_term(z, r + 1) <= pod_bound_term(z, r) + 1e-15);
            }
        }
    }

    #[test]
    fn pod_bound_with_single_edge_nodes_is_one() {
        let b = DegreeBounds::uniform(2, 2, (0, 2), (1, 2));
        let g = Instance::new(vec![vec![0.2, 0.4]; 2], vec![0, 1], 2, b).unwrap();
        let bound = pod_lower_bound(&g, &mm(&[(0, 0), (1, 1)]));
        assert_eq!(bound.value, 1.0);
        assert_eq!(bound.universal, 1.0);
    }

    #[test]
    fn pod_bound_excludes_empty_nodes() {
        let b = DegreeBounds::unconstrained(2, 2);
        let g = Instance::new(vec![vec![1.0, 1.0]; 2], vec![0, 1], 2, b).unwrap();
        let bound = pod_lower_bound(&g, &mm(&[(0, 0)]));
        assert_eq!(bound.excluded, vec![1]);
        assert_eq!(bound.terms, vec![Some(1.0), None]);
    }

    #[test]
    fn entropy_is_label_permutation_invariant() {
        let a = inst(vec![0, 0, 1, 2], 3);
        let b = inst(vec![2, 2, 0, 1], 3);
        let x = mm(&[(0, 0), (1, 0), (2, 0), (3, 0)]);
        assert_eq!(node_entropy(&a, &x, 0), node_entropy(&b, &x, 0));
    }
}
