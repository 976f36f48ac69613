//! Problem instances, matchings and degree-feasibility semantics.
//!
//! The bipartite graph is complete: every (left, right) pair is a candidate
//! edge. Left nodes are indexed `0..m`, right nodes `0..n`, each side in its
//! own index space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::scalar::Scalar;

/// Per-node lower and upper degree bounds for both sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeBounds {
    pub l_lo: Vec<usize>,
    pub l_hi: Vec<usize>,
    pub r_lo: Vec<usize>,
    pub r_hi: Vec<usize>,
}

impl DegreeBounds {
    /// Broadcasts scalar bounds to every node of each side.
    pub fn uniform(m: usize, n: usize, l: (usize, usize), r: (usize, usize)) -> Self {
        Self {
            l_lo: vec![l.0; m],
            l_hi: vec![l.1; m],
            r_lo: vec![r.0; n],
            r_hi: vec![r.1; n],
        }
    }

    /// Bounds that every subgraph satisfies.
    pub fn unconstrained(m: usize, n: usize) -> Self {
        Self::uniform(m, n, (0, n), (0, m))
    }

    fn violations(&self, m: usize, n: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let sides = [
            ("L", &self.l_lo, &self.l_hi, m, n),
            ("R", &self.r_lo, &self.r_hi, n, m),
        ];
        for (side, lo, hi, len, cap) in sides {
            if lo.len() != len {
                out.push(Violation {
                    field: format!("bounds.{side}_lo"),
                    message: format!("expected {len} entries, found {}", lo.len()),
                });
            }
            if hi.len() != len {
                out.push(Violation {
                    field: format!("bounds.{side}_hi"),
                    message: format!("expected {len} entries, found {}", hi.len()),
                });
            }
            for (idx, (&a, &b)) in lo.iter().zip(hi.iter()).enumerate() {
                if a > b {
                    out.push(Violation {
                        field: format!("bounds.{side}_lo[{idx}]"),
                        message: format!("lower bound {a} exceeds upper bound {b}"),
                    });
                }
                if b > cap {
                    out.push(Violation {
                        field: format!("bounds.{side}_hi[{idx}]"),
                        message: format!("upper bound {b} exceeds opposite side size {cap}"),
                    });
                }
            }
        }
        out
    }
}

/// A weighted, clustered, complete bipartite instance.
///
/// Weights are costs (the solvers minimise). Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T = f64> {
    m: usize,
    n: usize,
    k: usize,
    weights: Vec<T>,
    clusters: Vec<usize>,
    bounds: DegreeBounds,
}

impl<T: Scalar> Instance<T> {
    /// Builds an instance from an `m x n` weight table.
    ///
    /// All structural violations are collected and returned together.
    pub fn new(
        weights: Vec<Vec<T>>,
        clusters: Vec<usize>,
        k: usize,
        bounds: DegreeBounds,
    ) -> Result<Self> {
        let m = weights.len();
        let n = weights.first().map_or(0, Vec::len);
        let mut violations = Vec::new();
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                violations.push(Violation {
                    field: format!("weights[{i}]"),
                    message: format!("expected {n} entries, found {}", row.len()),
                });
            }
        }
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        let flat = weights.into_iter().flatten().collect();
        Self::from_flat(m, n, flat, clusters, k, bounds)
    }

    /// Builds an instance from row-major weights.
    pub fn from_flat(
        m: usize,
        n: usize,
        weights: Vec<T>,
        clusters: Vec<usize>,
        k: usize,
        bounds: DegreeBounds,
    ) -> Result<Self> {
        let mut v = Vec::new();
        if m == 0 {
            v.push(Violation {
                field: "m".into(),
                message: "must be positive".into(),
            });
        }
        if n == 0 {
            v.push(Violation {
                field: "n".into(),
                message: "must be positive".into(),
            });
        }
        if k == 0 {
            v.push(Violation {
                field: "k".into(),
                message: "must be positive".into(),
            });
        }
        if weights.len() != m * n {
            v.push(Violation {
                field: "weights".into(),
                message: format!("expected {} entries, found {}", m * n, weights.len()),
            });
        }
        for (idx, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < T::zero() {
                let (i, j) = (idx / n.max(1), idx % n.max(1));
                v.push(Violation {
                    field: format!("weights[{i}][{j}]"),
                    message: format!("weight {w} must be finite and nonnegative"),
                });
            }
        }
        if clusters.len() != m {
            v.push(Violation {
                field: "clusters".into(),
                message: format!("expected {m} entries, found {}", clusters.len()),
            });
        }
        let mut used = vec![false; k];
        for (i, &c) in clusters.iter().enumerate() {
            if c >= k {
                v.push(Violation {
                    field: format!("clusters[{i}]"),
                    message: format!("cluster id {c} is not below k = {k}"),
                });
            } else {
                used[c] = true;
            }
        }
        for (c, _) in used.iter().enumerate().filter(|(_, &u)| !u) {
            v.push(Violation {
                field: "k".into(),
                message: format!("cluster {c} has no left node"),
            });
        }
        v.extend(bounds.violations(m, n));
        if !v.is_empty() {
            return Err(Error::Invalid(v));
        }
        Ok(Self {
            m,
            n,
            k,
            weights,
            clusters,
            bounds,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.n + j]
    }

    /// Row-major `m x n` weights.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn cluster(&self, i: usize) -> usize {
        self.clusters[i]
    }

    pub fn clusters(&self) -> &[usize] {
        &self.clusters
    }

    pub fn bounds(&self) -> &DegreeBounds {
        &self.bounds
    }

    /// Same graph with different degree bounds.
    pub fn with_bounds(&self, bounds: DegreeBounds) -> Result<Self> {
        Self::from_flat(
            self.m,
            self.n,
            self.weights.clone(),
            self.clusters.clone(),
            self.k,
            bounds,
        )
    }

    /// Converts the weights to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Instance<U> {
        Instance {
            m: self.m,
            n: self.n,
            k: self.k,
            weights: self.weights.iter().map(|w| U::of(w.as_f64())).collect(),
            clusters: self.clusters.clone(),
            bounds: self.bounds.clone(),
        }
    }

    /// Largest weight in the table.
    pub fn max_weight(&self) -> T {
        self.weights.iter().copied().fold(T::zero(), T::max)
    }

    #[inline]
    pub(crate) fn edge_index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub(crate) fn check_edge(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.m || j >= self.n {
            return Err(Error::EdgeOutOfRange {
                left: i,
                right: j,
                m: self.m,
                n: self.n,
            });
        }
        Ok(())
    }
}

/// Turns a "higher is better" instance into a cost instance:
/// `w'_ij = max(w) - w_ij`.
pub fn transform_max_to_min<T: Scalar>(inst: &Instance<T>) -> Instance<T> {
    let top = inst.max_weight();
    Instance {
        weights: inst.weights.iter().map(|&w| top - w).collect(),
        ..inst.clone()
    }
}

/// A set of selected edges, kept sorted by `(left, right)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Matching {
    edges: Vec<(usize, usize)>,
}

impl Matching {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Sorts the edges; duplicates are rejected.
    pub fn new(mut edges: Vec<(usize, usize)>) -> Result<Self> {
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }
        Ok(Self { edges })
    }

    /// Caller guarantees the edges are strictly increasing.
    pub(crate) fn from_sorted(edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        Self { edges }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i, j)).is_ok()
    }

    /// Edges incident to right node `j`.
    pub fn left_neighbors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == j).map(|e| e.0)
    }

    /// Left and right degree sequences; errors on out-of-range edges.
    pub fn degrees<T: Scalar>(&self, inst: &Instance<T>) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut left = vec![0; inst.m()];
        let mut right = vec![0; inst.n()];
        for &(i, j) in &self.edges {
            inst.check_edge(i, j)?;
            left[i] += 1;
            right[j] += 1;
        }
        Ok((left, right))
    }
}

impl<'de> Deserialize<'de> for Matching {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            edges: Vec<(usize, usize)>,
        }
        let raw = Raw::deserialize(d)?;
        Matching::new(raw.edges).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// A node whose degree falls outside its bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeViolation {
    pub side: Side,
    pub node: usize,
    pub degree: usize,
    pub lo: usize,
    pub hi: usize,
}

/// Outcome of [`check_matching`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MatchingCheck {
    pub violations: Vec<DegreeViolation>,
}

impl MatchingCheck {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every node's degree against its bounds.
pub fn check_matching<T: Scalar>(inst: &Instance<T>, matching: &Matching) -> Result<MatchingCheck> {
    let (left, right) = matching.degrees(inst)?;
    let b = inst.bounds();
    let mut violations = Vec::new();
    let sides = [
        (Side::Left, &left, &b.l_lo, &b.l_hi),
        (Side::Right, &right, &b.r_lo, &b.r_hi),
    ];
    for (side, deg, lo, hi) in sides {
        for (node, &d) in deg.iter().enumerate() {
            if d < lo[node] || d > hi[node] {
                violations.push(DegreeViolation {
                    side,
                    node,
                    degree: d,
                    lo: lo[node],
                    hi: hi[node],
                });
            }
        }
    }
    Ok(MatchingCheck { violations })
}
