//! Seeded instance generation and the repeated-trial experiments.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`: weights are
//! drawn row-major as `rng.gen::<f64>()` (53 random mantissa bits, uniform
//! on `[0, 1)`), then cluster labels uniformly on `0..k`, re-drawing the
//! whole label vector until every cluster is used. Trial `t` of cluster
//! count `k` uses seed `base + 1_000_003 * k + t` (wrapping).

use std::io::Write;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::solve_dwbm_exact;
use crate::greedy::solve_gdwbm;
use crate::instance::{DegreeBounds, Instance};
use crate::metrics::{metrics_report, MetricsReport};
use crate::report::{SolveReport, Status};
use crate::scalar::approx_eq;
use crate::wbm::solve_wbm;

/// Generator settings for one synthetic instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l_lo: usize,
    pub l_hi: usize,
    pub r_lo: usize,
    pub r_hi: usize,
    pub seed: u64,
}

impl GenConfig {
    /// The synthetic market used for the PoD/EG battery: 10 x 10,
    /// right lower bound 5, left side unconstrained.
    pub fn synthetic(k: usize, seed: u64) -> Self {
        Self {
            m: 10,
            n: 10,
            k,
            l_lo: 0,
            l_hi: 10,
            r_lo: 5,
            r_hi: 10,
            seed,
        }
    }
}

/// Draws a random instance.
pub fn gen(cfg: &GenConfig) -> Result<Instance> {
    if cfg.k == 0 || cfg.k > cfg.m {
        return Err(Error::Config(format!(
            "need 1 <= k <= m, got k = {} and m = {}",
            cfg.k, cfg.m
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights: Vec<f64> = (0..cfg.m * cfg.n).map(|_| rng.gen::<f64>()).collect();
    let clusters = loop {
        let labels: Vec<usize> = (0..cfg.m).map(|_| rng.gen_range(0..cfg.k)).collect();
        let mut used = vec![false; cfg.k];
        labels.iter().for_each(|&c| used[c] = true);
        if used.iter().all(|&u| u) {
            break labels;
        }
    };
    let bounds = DegreeBounds::uniform(cfg.m, cfg.n, (cfg.l_lo, cfg.l_hi), (cfg.r_lo, cfg.r_hi));
    Instance::from_flat(cfg.m, cfg.n, weights, clusters, cfg.k, bounds)
}

pub fn trial_seed(base: u64, k: usize, trial: usize) -> u64 {
    base.wrapping_add(1_000_003u64.wrapping_mul(k as u64))
        .wrapping_add(trial as u64)
}

/// One row of experiment output.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub instance: String,
    pub trial: usize,
    pub k: usize,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub r_lo: usize,
    pub f1_wbm: Option<f64>,
    pub f1_div: Option<f64>,
    pub pod: Option<f64>,
    pub pod_bound: Option<f64>,
    pub pod_bound_universal: Option<f64>,
    pub eg: Option<f64>,
    pub avg_entropy_wbm: Option<f64>,
    pub avg_entropy_div: Option<f64>,
    pub f2_exact: Option<f64>,
    pub f2_greedy: Option<f64>,
    pub greedy_agrees: Option<bool>,
    pub status_wbm: Status,
    pub status_dwbm: Status,
    pub status_greedy: Status,
    pub time_wbm: f64,
    pub time_dwbm: f64,
    pub time_greedy: f64,
}

/// Tolerance used when comparing greedy and exact objective values.
pub const AGREEMENT_TOL: f64 = 1e-9;

fn value(r: &SolveReport<f64>, f: impl Fn(&SolveReport<f64>) -> f64) -> Option<f64> {
    r.status.has_matching().then(|| f(r))
}

/// Solves one instance with all three solvers and computes its metrics.
pub fn run_trial(
    inst: &Instance,
    budget: Option<Duration>,
) -> (TrialRecord, Option<MetricsReport>) {
    let wbm = solve_wbm(inst);
    let exact = solve_dwbm_exact(inst, budget);
    let greedy = solve_gdwbm(inst);
    let report = (wbm.status.has_matching() && exact.status.has_matching())
        .then(|| metrics_report(inst, &wbm.matching, &exact.matching));
    let f2_exact = value(&exact, |r| r.objective_f2);
    let f2_greedy = value(&greedy, |r| r.objective_f2);
    let agrees = match (f2_exact, f2_greedy) {
        (Some(e), Some(g)) => Some(approx_eq(e, g, AGREEMENT_TOL)),
        _ => None,
    };
    let record = TrialRecord {
        instance: String::new(),
        trial: 0,
        k: inst.k(),
        seed: 0,
        m: inst.m(),
        n: inst.n(),
        r_lo: inst.bounds().r_lo.iter().copied().max().unwrap_or(0),
        f1_wbm: value(&wbm, |r| r.objective_f1),
        f1_div: value(&exact, |r| r.objective_f1),
        pod: report.as_ref().and_then(|r| r.pod.value()),
        pod_bound: report.as_ref().map(|r| r.pod_bound.value),
        pod_bound_universal: report.as_ref().map(|r| r.pod_bound.universal),
        eg: report.as_ref().and_then(|r| r.eg.value()),
        avg_entropy_wbm: report.as_ref().and_then(|r| r.avg_entropy_wbm),
        avg_entropy_div: report.as_ref().and_then(|r| r.avg_entropy_diverse),
        f2_exact,
        f2_greedy,
        greedy_agrees: agrees,
        status_wbm: wbm.status,
        status_dwbm: exact.status,
        status_greedy: greedy.status,
        time_wbm: wbm.wall_time,
        time_dwbm: exact.wall_time,
        time_greedy: greedy.wall_time,
    };
    (record, report)
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig2Config {
    pub m: usize,
    pub n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub trials: usize,
    pub l_lo: usize,
    pub l_hi: usize,
    pub r_lo: usize,
    pub r_hi: usize,
    pub seed: u64,
    /// Per-solve budget of the exact diverse solver.
    pub budget: Duration,
    /// Run trials on the rayon pool.
    pub parallel: bool,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            m: 10,
            n: 10,
            k_min: 2,
            k_max: 10,
            trials: 100,
            l_lo: 0,
            l_hi: 10,
            r_lo: 5,
            r_hi: 10,
            seed: 2019,
            budget: Duration::from_secs(60),
            parallel: true,
        }
    }
}

/// Per-k summary across trials.
#[derive(Debug, Clone, Serialize)]
pub struct KAggregate {
    pub k: usize,
    pub trials: usize,
    pub pod_mean: Option<f64>,
    pub pod_p5: Option<f64>,
    pub pod_p95: Option<f64>,
    pub pod_min: Option<f64>,
    pub eg_mean: Option<f64>,
    pub eg_p5: Option<f64>,
    pub eg_p95: Option<f64>,
    /// Trials whose entropy gain was defined.
    pub eg_defined: usize,
    pub agreement_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialBatch {
    pub config: Fig2Config,
    pub trials: Vec<TrialRecord>,
    pub aggregates: Vec<KAggregate>,
}

/// Percentile with linear interpolation between closest ranks.
pub fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs
}

pub fn aggregate(k: usize, rows: &[&TrialRecord]) -> KAggregate {
    let pods = sorted(rows.iter().filter_map(|r| r.pod).collect());
    let egs = sorted(rows.iter().filter_map(|r| r.eg).collect());
    let agree: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.greedy_agrees)
        .map(|a| if a { 1.0 } else { 0.0 })
        .collect();
    KAggregate {
        k,
        trials: rows.len(),
        pod_mean: mean(&pods),
        pod_p5: percentile(&pods, 5.0),
        pod_p95: percentile(&pods, 95.0),
        pod_min: pods.first().copied(),
        eg_mean: mean(&egs),
        eg_p5: percentile(&egs, 5.0),
        eg_p95: percentile(&egs, 95.0),
        eg_defined: egs.len(),
        agreement_rate: mean(&agree),
    }
}

/// Repeated trials over a sweep of cluster counts.
pub fn run_fig2(cfg: &Fig2Config) -> Result<TrialBatch> {
    if cfg.k_min == 0 || cfg.k_min > cfg.k_max || cfg.k_max > cfg.m {
        return Err(Error::Config(format!(
            "cluster sweep {}..={} must lie in 1..={}",
            cfg.k_min, cfg.k_max, cfg.m
        )));
    }
    let jobs: Vec<(usize, usize)> = (cfg.k_min..=cfg.k_max)
        .flat_map(|k| (0..cfg.trials).map(move |t| (k, t)))
        .collect();
    let run = |&(k, t): &(usize, usize)| -> Result<TrialRecord> {
        let seed = trial_seed(cfg.seed, k, t);
        let inst = gen(&GenConfig {
            m: cfg.m,
            n: cfg.n,
            k,
            l_lo: cfg.l_lo,
            l_hi: cfg.l_hi,
            r_lo: cfg.r_lo,
            r_hi: cfg.r_hi,
            seed,
        })?;
        let (mut rec, _) = run_trial(&inst, Some(cfg.budget));
        rec.instance = format!("k{k}-t{t}");
        rec.trial = t;
        rec.seed = seed;
        Ok(rec)
    };
    let trials: Vec<TrialRecord> = if cfg.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };
    let aggregates = (cfg.k_min..=cfg.k_max)
        .map(|k| {
            let rows: Vec<&TrialRecord> = trials.iter().filter(|r| r.k == k).collect();
            aggregate(k, &rows)
        })
        .collect();
    Ok(TrialBatch {
        config: cfg.clone(),
        trials,
        aggregates,
    })
}

pub fn write_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l_lo: usize,
    pub l_hi: usize,
    pub seed: u64,
    pub budget: Duration,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            m: 10,
            n: 10,
            k: 5,
            l_lo: 0,
            l_hi: 10,
            seed: 2019,
            budget: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub r_lo: usize,
    pub f1_wbm: Option<f64>,
    pub f1_div: Option<f64>,
    pub pod: Option<f64>,
    pub eg: Option<f64>,
    /// Why the entropy gain is undefined, when it is.
    pub eg_flag: Option<String>,
    pub pod_bound: Option<f64>,
    pub status_wbm: Status,
    pub status_dwbm: Status,
}

/// Sweeps the right lower bound from 1 to `m` on one generated instance
/// (right upper bound `m`).
pub fn run_bounds(cfg: &BoundsConfig) -> Result<Vec<BoundsRow>> {
    let base = gen(&GenConfig {
        m: cfg.m,
        n: cfg.n,
        k: cfg.k,
        l_lo: cfg.l_lo,
        l_hi: cfg.l_hi,
        r_lo: 0,
        r_hi: cfg.m,
        seed: cfg.seed,
    })?;
    (1..=cfg.m)
        .map(|r| {
            let bounds = DegreeBounds::uniform(cfg.m, cfg.n, (cfg.l_lo, cfg.l_hi), (r, cfg.m));
            let inst = base.with_bounds(bounds)?;
            let wbm = solve_wbm(&inst);
            let exact = solve_dwbm_exact(&inst, Some(cfg.budget));
            let report = (wbm.status.has_matching() && exact.status.has_matching())
                .then(|| metrics_report(&inst, &wbm.matching, &exact.matching));
            Ok(BoundsRow {
                r_lo: r,
                f1_wbm: value(&wbm, |r| r.objective_f1),
                f1_div: value(&exact, |r| r.objective_f1),
                pod: report.as_ref().and_then(|x| x.pod.value()),
                eg: report.as_ref().and_then(|x| x.eg.value()),
                eg_flag: report.as_ref().and_then(|x| match &x.eg {
                    crate::metrics::Ratio::Undefined(why) => Some(why.clone()),
                    _ => None,
                }),
                pod_bound: report.as_ref().map(|x| x.pod_bound.value),
                status_wbm: wbm.status,
                status_dwbm: exact.status,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub n: usize,
    pub k: usize,
    pub l_lo: usize,
    pub r_lo: usize,
    pub seed: u64,
    pub budget: Duration,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            sizes: vec![25, 50, 100, 200],
            n: 20,
            k: 5,
            l_lo: 1,
            r_lo: 3,
            seed: 2019,
            budget: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub m: usize,
    pub n: usize,
    pub budget_ms: u128,
    pub time_wbm: f64,
    pub time_dwbm: f64,
    pub time_greedy: f64,
    pub status_wbm: Status,
    pub status_dwbm: Status,
    pub status_greedy: Status,
    pub f2_dwbm: Option<f64>,
    pub f2_greedy: Option<f64>,
    pub dwbm_nodes: u64,
}

/// Wall times of the three solvers on growing left sides (left bounds
/// `[l_lo, n]`, right bounds `[r_lo, m]`).
pub fn run_scaling(cfg: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    cfg.sizes
        .iter()
        .map(|&m| {
            let inst = gen(&GenConfig {
                m,
                n: cfg.n,
                k: cfg.k,
                l_lo: cfg.l_lo,
                l_hi: cfg.n,
                r_lo: cfg.r_lo,
                r_hi: m,
                seed: cfg.seed.wrapping_add(m as u64),
            })?;
            let wbm = solve_wbm(&inst);
            let greedy = solve_gdwbm(&inst);
            let exact = solve_dwbm_exact(&inst, Some(cfg.budget));
            Ok(ScalingRow {
                m,
                n: cfg.n,
                budget_ms: cfg.budget.as_millis(),
                time_wbm: wbm.wall_time,
                time_dwbm: exact.wall_time,
                time_greedy: greedy.wall_time,
                status_wbm: wbm.status,
                status_dwbm: exact.status,
                status_greedy: greedy.status,
                f2_dwbm: value(&exact, |r| r.objective_f2),
                f2_greedy: value(&greedy, |r| r.objective_f2),
                dwbm_nodes: exact.telemetry.nodes_expanded,
            })
        })
        .collect()
}

/// Least-squares slope of `ln(time)` against `ln(size)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
