//! The efficiency objective `f1` and the diversity objective `f2`.
//!
//! `f2` sums, over right nodes `l` and clusters `c`, the square of the total
//! weight of selected edges from cluster `c` into `l`. It is evaluated two
//! ways: through per-(right node, cluster) sums ([`ClusterSums`], used by
//! every solver) and as a dense quadratic form `x' B x` ([`BlockMatrix`],
//! used only for cross-checks and visualisation).

use bitvec::vec::BitVec;

use crate::error::{Error, Result};
use crate::instance::{Instance, Matching};
use crate::scalar::{compensated_sum, Scalar};

/// Incremental updates between two from-scratch recomputations.
pub const RESYNC_INTERVAL: usize = 1 << 16;

/// Default cap on `m * m * n` entries for the dense block matrix.
pub const DEFAULT_DENSE_CAP: u64 = 10_000_000;

/// Total weight of the selected edges.
pub fn f1<T: Scalar>(inst: &Instance<T>, matching: &Matching) -> T {
    compensated_sum(matching.edges().iter().map(|&(i, j)| {
        assert!(i < inst.m() && j < inst.n(), "edge ({i}, {j}) out of range");
        inst.weight(i, j)
    }))
}

/// Diversity objective computed from cluster sums.
pub fn f2<T: Scalar>(inst: &Instance<T>, matching: &Matching) -> T {
    ClusterSums::from_matching(inst, matching)
        .unwrap_or_else(|e| panic!("{e}"))
        .f2()
}

/// Diversity objective restricted to right node `j`.
pub fn node_f2<T: Scalar>(inst: &Instance<T>, matching: &Matching, j: usize) -> T {
    ClusterSums::from_matching(inst, matching)
        .unwrap_or_else(|e| panic!("{e}"))
        .node_value(j)
}

/// Selected edge set together with its per-(right node, cluster) weight sums.
#[derive(Debug, Clone)]
pub struct ClusterSums<T = f64> {
    m: usize,
    n: usize,
    k: usize,
    sums: Vec<T>,
    selected: BitVec,
    updates: usize,
}

impl<T: Scalar> ClusterSums<T> {
    /// No edges selected.
    pub fn new(inst: &Instance<T>) -> Self {
        Self {
            m: inst.m(),
            n: inst.n(),
            k: inst.k(),
            sums: vec![T::zero(); inst.n() * inst.k()],
            selected: BitVec::repeat(false, inst.m() * inst.n()),
            updates: 0,
        }
    }

    pub fn from_matching(inst: &Instance<T>, matching: &Matching) -> Result<Self> {
        let mut out = Self::new(inst);
        for &(i, j) in matching.edges() {
            inst.check_edge(i, j)?;
            out.selected.set(inst.edge_index(i, j), true);
        }
        out.resync(inst);
        Ok(out)
    }

    /// Sum of selected weights from cluster `c` into right node `j`.
    #[inline]
    pub fn get(&self, j: usize, c: usize) -> T {
        self.sums[j * self.k + c]
    }

    /// Cluster sums of right node `j`.
    pub fn node(&self, j: usize) -> &[T] {
        &self.sums[j * self.k..(j + 1) * self.k]
    }

    #[inline]
    pub fn is_selected(&self, i: usize, j: usize) -> bool {
        self.selected[i * self.n + j]
    }

    pub fn node_value(&self, j: usize) -> T {
        compensated_sum(self.node(j).iter().map(|&s| s * s))
    }

    pub fn f2(&self) -> T {
        compensated_sum(self.sums.iter().map(|&s| s * s))
    }

    pub fn to_matching(&self) -> Matching {
        Matching::from_sorted(
            self.selected
                .iter_ones()
                .map(|e| (e / self.n, e % self.n))
                .collect(),
        )
    }

    /// Increase of `f2` if edge `(i, j)` were added.
    pub fn marginal_gain(&self, inst: &Instance<T>, i: usize, j: usize) -> Result<T> {
        inst.check_edge(i, j)?;
        if self.is_selected(i, j) {
            return Err(Error::EdgeAlreadySelected(i, j));
        }
        Ok(self.gain(inst, i, j))
    }

    /// `w^2 + 2 w s` with `s` the current sum of the edge's cluster at `j`.
    #[inline]
    pub(crate) fn gain(&self, inst: &Instance<T>, i: usize, j: usize) -> T {
        let w = inst.weight(i, j);
        let s = self.get(j, inst.cluster(i));
        w * w + (w + w) * s
    }

    /// Adds edge `(i, j)`.
    pub fn apply_edge(&mut self, inst: &Instance<T>, i: usize, j: usize) -> Result<()> {
        inst.check_edge(i, j)?;
        if self.is_selected(i, j) {
            return Err(Error::EdgeAlreadySelected(i, j));
        }
        self.selected.set(inst.edge_index(i, j), true);
        let slot = j * self.k + inst.cluster(i);
        self.sums[slot] = self.sums[slot] + inst.weight(i, j);
        self.updates += 1;
        if self.updates >= RESYNC_INTERVAL {
            self.resync(inst);
        }
        Ok(())
    }

    /// Recomputes every sum from the selected set with compensated summation.
    pub fn resync(&mut self, inst: &Instance<T>) {
        let mut buckets: Vec<Vec<T>> = vec![Vec::new(); self.n * self.k];
        for e in self.selected.iter_ones() {
            let (i, j) = (e / self.n, e % self.n);
            buckets[j * self.k + inst.cluster(i)].push(inst.weight(i, j));
        }
        for (slot, b) in self.sums.iter_mut().zip(buckets) {
            *slot = compensated_sum(b);
        }
        self.updates = 0;
    }

    pub fn left_count(&self) -> usize {
        self.m
    }
}

/// Dense per-right-node diversity matrices `B_l[i][j] = w_il * w_jl` when
/// left nodes `i` and `j` share a cluster, else 0.
#[derive(Debug, Clone)]
pub struct BlockMatrix<T = f64> {
    m: usize,
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> BlockMatrix<T> {
    /// Refuses when `m * m * n` exceeds `cap`.
    pub fn build(inst: &Instance<T>, cap: u64) -> Result<Self> {
        let (m, n) = (inst.m(), inst.n());
        let required = (m as u64) * (m as u64) * (n as u64);
        if required > cap {
            return Err(Error::SizeCapExceeded { required, cap });
        }
        let mut entries = vec![T::zero(); m * m * n];
        for l in 0..n {
            let block = &mut entries[l * m * m..(l + 1) * m * m];
            for a in 0..m {
                for b in 0..m {
                    if inst.cluster(a) == inst.cluster(b) {
                        block[a * m + b] = inst.weight(a, l) * inst.weight(b, l);
                    }
                }
            }
        }
        Ok(Self { m, n, entries })
    }

    /// Row-major `m x m` block of right node `l`.
    pub fn block(&self, l: usize) -> &[T] {
        &self.entries[l * self.m * self.m..(l + 1) * self.m * self.m]
    }

    /// `x' B x` where `x[l * m + i]` indicates edge `(i, l)`.
    pub fn quadratic_form(&self, x: &[bool]) -> T {
        assert_eq!(x.len(), self.m * self.n);
        let mut terms = Vec::new();
        for l in 0..self.n {
            let block = self.block(l);
            let xl = &x[l * self.m..(l + 1) * self.m];
            for a in 0..self.m {
                if !xl[a] {
                    continue;
                }
                for b in 0..self.m {
                    if xl[b] {
                        terms.push(block[a * self.m + b]);
                    }
                }
            }
        }
        compensated_sum(terms)
    }

    /// Block of right node `l` as CSV, rows and columns ordered by cluster
    /// then left index. The header row lists the left indices.
    pub fn block_csv(&self, inst: &Instance<T>, l: usize) -> String {
        let mut order: Vec<usize> = (0..self.m).collect();
        order.sort_by_key(|&i| (inst.cluster(i), i));
        let block = self.block(l);
        let mut out = String::from("left");
        for &i in &order {
            out.push_str(&format!(",{i}"));
        }
        out.push('\n');
        for &a in &order {
            out.push_str(&a.to_string());
            for &b in &order {
                out.push_str(&format!(",{}", block[a * self.m + b]));
            }
            out.push('\n');
        }
        out
    }
}

/// `f2` as the quadratic form `x' B x` over the dense block matrix.
pub fn f2_quadratic_form<T: Scalar>(
    inst: &Instance<T>,
    matching: &Matching,
    cap: u64,
) -> Result<T> {
    let b = BlockMatrix::build(inst, cap)?;
    let mut x = vec![false; inst.m() * inst.n()];
    for &(i, j) in matching.edges() {
        inst.check_edge(i, j)?;
        x[j * inst.m() + i] = true;
    }
    Ok(b.quadratic_form(&x))
}
