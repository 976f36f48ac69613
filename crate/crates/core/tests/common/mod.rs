#![allow(dead_code)]

use divmatch::{ClusterSums, DegreeBounds, Instance, Matching};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn labels(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Vec<usize> {
    loop {
        let c: Vec<usize> = (0..m).map(|_| rng.gen_range(0..k)).collect();
        if (0..k).all(|x| c.contains(&x)) {
            return c;
        }
    }
}

/// Weights are continuous most of the time and drawn from a coarse grid
/// otherwise, so ties and zero weights show up.
fn weights(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<f64> {
    let coarse = rng.gen_bool(0.25);
    (0..m * n)
        .map(|_| {
            if coarse {
                rng.gen_range(0..=4) as f64 / 4.0
            } else {
                rng.gen::<f64>()
            }
        })
        .collect()
}

fn window(rng: &mut ChaCha8Rng, size: usize, lo_cap: usize) -> (usize, usize) {
    let lo = rng.gen_range(0..=lo_cap.min(size));
    let hi = rng.gen_range(lo.max(1)..=size);
    (lo, hi)
}

/// Random two-sided bounds; roughly half of these instances are infeasible.
pub fn random_instance(
    seed: u64,
    m_range: (usize, usize),
    n_range: (usize, usize),
    k_max: usize,
) -> Instance {
    let mut r = rng(seed);
    let m = r.gen_range(m_range.0..=m_range.1);
    let n = r.gen_range(n_range.0..=n_range.1);
    let k = r.gen_range(1..=k_max.min(m));
    let w = weights(&mut r, m, n);
    let clusters = labels(&mut r, m, k);
    let (mut l_lo, mut l_hi, mut r_lo, mut r_hi) = (vec![], vec![], vec![], vec![]);
    for _ in 0..m {
        let (a, b) = window(&mut r, n, 2);
        l_lo.push(a);
        l_hi.push(b);
    }
    for _ in 0..n {
        let (a, b) = window(&mut r, m, 3);
        r_lo.push(a);
        r_hi.push(b);
    }
    let bounds = DegreeBounds {
        l_lo,
        l_hi,
        r_lo,
        r_hi,
    };
    Instance::from_flat(m, n, w, clusters, k, bounds).unwrap()
}

/// Left side unconstrained (`[0, n]`), right lower bounds in `1..=m`.
pub fn right_constrained(seed: u64, m: usize, n: usize, k: usize) -> Instance {
    let mut r = rng(seed);
    let w = weights(&mut r, m, n);
    let clusters = labels(&mut r, m, k);
    let r_lo: Vec<usize> = (0..n).map(|_| r.gen_range(1..=m)).collect();
    let bounds = DegreeBounds {
        l_lo: vec![0; m],
        l_hi: vec![n; m],
        r_hi: vec![m; n],
        r_lo,
    };
    Instance::from_flat(m, n, w, clusters, k, bounds).unwrap()
}

pub fn naive_f1(inst: &Instance, edges: &[(usize, usize)]) -> f64 {
    edges
        .iter()
        .map(|&(i, j)| inst.weights()[i * inst.n() + j])
        .sum()
}

pub fn naive_f2(inst: &Instance, edges: &[(usize, usize)]) -> f64 {
    let mut total = 0.0;
    for j in 0..inst.n() {
        for c in 0..inst.k() {
            let s: f64 = edges
                .iter()
                .filter(|&&(i, l)| l == j && inst.clusters()[i] == c)
                .map(|&(i, l)| inst.weights()[i * inst.n() + l])
                .sum();
            total += s * s;
        }
    }
    total
}

pub fn naive_feasible(inst: &Instance, edges: &[(usize, usize)]) -> bool {
    let b = inst.bounds();
    let ok_left = (0..inst.m()).all(|i| {
        let d = edges.iter().filter(|e| e.0 == i).count();
        b.l_lo[i] <= d && d <= b.l_hi[i]
    });
    let ok_right = (0..inst.n()).all(|j| {
        let d = edges.iter().filter(|e| e.1 == j).count();
        b.r_lo[j] <= d && d <= b.r_hi[j]
    });
    ok_left && ok_right
}

/// Minimum of `value` over all feasible edge subsets, recomputed from
/// scratch for every subset. Ties within `1e-12` keep the lexicographically
/// smaller edge list.
pub fn naive_best(
    inst: &Instance,
    value: impl Fn(&Instance, &[(usize, usize)]) -> f64,
) -> Option<(f64, Vec<(usize, usize)>)> {
    let (m, n) = (inst.m(), inst.n());
    let all: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    assert!(all.len() <= 16, "naive enumeration is for tiny instances");
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    for mask in 0u32..(1 << all.len()) {
        let edges: Vec<(usize, usize)> = (0..all.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| all[b])
            .collect();
        if !naive_feasible(inst, &edges) {
            continue;
        }
        let v = value(inst, &edges);
        let better = match &best {
            None => true,
            Some((bv, be)) => v < bv - 1e-12 || (v <= bv + 1e-12 && edges < *be),
        };
        if better {
            best = Some((v, edges));
        }
    }
    best
}

/// Checks `gain(C', e) >= gain(C, e)` for every `C ⊆ C'` and `e ∉ C'`.
/// Returns (pairs checked, violations, pairs where the difference was
/// required to be strict and was).
pub fn increasing_differences(inst: &Instance) -> (u64, u64, u64) {
    let (m, n) = (inst.m(), inst.n());
    let e = m * n;
    assert!(e <= 12);
    let edge = |b: usize| (b / n, b % n);
    let sums_of = |mask: u32| {
        let edges: Vec<(usize, usize)> = (0..e).filter(|b| mask >> b & 1 == 1).map(edge).collect();
        ClusterSums::from_matching(inst, &Matching::new(edges).unwrap()).unwrap()
    };
    let (mut checked, mut bad, mut strict) = (0, 0, 0);
    for big in 0u32..(1 << e) {
        let sb = sums_of(big);
        let mut small = big;
        loop {
            let ss = sums_of(small);
            for b in (0..e).filter(|b| big >> b & 1 == 0) {
                let (i, j) = edge(b);
                let g_big = sb.marginal_gain(inst, i, j).unwrap();
                let g_small = ss.marginal_gain(inst, i, j).unwrap();
                checked += 1;
                if g_big < g_small - 1e-12 {
                    bad += 1;
                }
                let w = inst.weight(i, j);
                let shares = (0..e).any(|x| {
                    let (a, l) = edge(x);
                    big >> x & 1 == 1
                        && small >> x & 1 == 0
                        && l == j
                        && inst.cluster(a) == inst.cluster(i)
                        && inst.weight(a, l) > 0.0
                });
                if shares && w > 0.0 {
                    if g_big > g_small {
                        strict += 1;
                    } else {
                        bad += 1;
                    }
                }
            }
            if small == 0 {
                break;
            }
            small = (small - 1) & big;
        }
    }
    (checked, bad, strict)
}
