mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{increasing_differences, random_instance};
use divmatch::experiment::{
    log_log_slope, run_bounds, run_fig2, run_scaling, BoundsConfig, Fig2Config, ScalingConfig,
};
use divmatch::metrics::{pod_bound_term, pod_lower_bound};
use divmatch::objective::{f2_quadratic_form, node_f2, DEFAULT_DENSE_CAP};
use divmatch::oracle::{enumerate_pod, PodWitness};
use divmatch::{
    f2, solve_dwbm_exact, solve_wbm, DegreeBounds, EnumerationBudget, Instance, Matching, Status,
};

const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn battery() -> Vec<(Instance, PodWitness)> {
    let budget = EnumerationBudget {
        max_subsets: 1 << 25,
        max_time: None,
    };
    (0..500u64)
        .map(|seed| {
            let inst = random_instance(seed, (2, 5), (2, 5), 3);
            let w = enumerate_pod(&inst, &budget).expect("battery fits the enumeration budget");
            (inst, w)
        })
        .collect()
}

fn oracle_equivalence(battery: &[(Instance, PodWitness)]) -> Outcome {
    let (mut feasible, mut optimal, mut failures) = (0, 0, Vec::new());
    for (seed, (inst, o)) in battery.iter().enumerate() {
        let w = solve_wbm(inst);
        let d = solve_dwbm_exact(inst, Some(Duration::from_secs(10)));
        if o.wbm.status == Status::Infeasible {
            if w.status != Status::Infeasible || d.status != Status::Infeasible {
                failures.push(format!(
                    "seed {seed}: solvers found a matching on an infeasible instance"
                ));
            }
            continue;
        }
        feasible += 1;
        if w.status != Status::Optimal || (w.objective_f1 - o.wbm.objective_f1).abs() > TOL {
            failures.push(format!(
                "seed {seed}: wbm f1 {} vs oracle {}",
                w.objective_f1, o.wbm.objective_f1
            ));
        }
        if d.status == Status::Optimal {
            optimal += 1;
            if (d.objective_f2 - o.diverse.objective_f2).abs() > TOL {
                failures.push(format!(
                    "seed {seed}: dwbm f2 {} vs oracle {}",
                    d.objective_f2, o.diverse.objective_f2
                ));
            }
        }
    }
    let detail = format!(
        "{} instances, {feasible} feasible, {optimal} exact optima compared, {} mismatches{}",
        battery.len(),
        failures.len(),
        failures
            .first()
            .map(|f| format!(" (first: {f})"))
            .unwrap_or_default()
    );
    outcome(failures.is_empty() && feasible > 0, detail)
}

fn worked_example() -> Outcome {
    let inst: Instance = Instance::new(
        vec![vec![1.0; 3]; 3],
        vec![0, 0, 1],
        2,
        DegreeBounds::uniform(3, 3, (2, 2), (2, 2)),
    )
    .unwrap();
    let same = Matching::new(vec![(0, 0), (1, 0)]).unwrap();
    let cross = Matching::new(vec![(0, 0), (2, 0)]).unwrap();
    let values = [
        node_f2(&inst, &same, 0),
        f2(&inst, &same),
        f2_quadratic_form(&inst, &same, DEFAULT_DENSE_CAP).unwrap(),
        node_f2(&inst, &cross, 0),
        f2(&inst, &cross),
        f2_quadratic_form(&inst, &cross, DEFAULT_DENSE_CAP).unwrap(),
    ];
    let pass = values == [4.0, 4.0, 4.0, 2.0, 2.0, 2.0];
    outcome(
        pass,
        format!(
            "same-cluster pair {:?}, cross-cluster pair {:?}",
            &values[..3],
            &values[3..]
        ),
    )
}

fn fig2_replication() -> Outcome {
    let start = Instant::now();
    let batch = run_fig2(&Fig2Config::default()).expect("default battery configuration is valid");
    let min_mean = batch
        .aggregates
        .iter()
        .filter_map(|g| g.pod_mean)
        .fold(f64::INFINITY, f64::min);
    let pods: Vec<f64> = batch.trials.iter().filter_map(|r| r.pod).collect();
    let min_trial = pods.iter().copied().fold(f64::INFINITY, f64::min);
    let agreed = batch
        .trials
        .iter()
        .filter(|r| r.greedy_agrees == Some(true))
        .count();
    let rate = agreed as f64 / batch.trials.len() as f64;
    let all_defined = pods.len() == batch.trials.len();
    let (a, b, c) = (min_mean >= 0.88, min_trial >= 0.5 - TOL, rate >= 0.95);
    let per_k: Vec<String> = batch
        .aggregates
        .iter()
        .map(|g| format!("k={} {:.3}", g.k, g.pod_mean.unwrap_or(f64::NAN)))
        .collect();
    let eg_mean: Vec<f64> = batch.aggregates.iter().filter_map(|g| g.eg_mean).collect();
    outcome(
        a && b && c && all_defined,
        format!(
            "(a) min per-k mean PoD {min_mean:.4} [{}]; (b) min trial PoD {min_trial:.4}; (c) greedy agreement {agreed}/{} = {:.1}%; mean EG per k from {:.3} to {:.3}; {:.1}s",
            per_k.join(", "),
            batch.trials.len(),
            100.0 * rate,
            eg_mean.iter().copied().fold(f64::INFINITY, f64::min),
            eg_mean.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn pod_bound_consistency(battery: &[(Instance, PodWitness)]) -> Outcome {
    let limit = pod_bound_term(f64::INFINITY, 5);
    let (mut checked, mut undefined, mut violations) = (0, 0, Vec::new());
    for (seed, (inst, o)) in battery.iter().enumerate() {
        if o.wbm.status != Status::Optimal {
            continue;
        }
        let Some(pod) = o.pod.value() else {
            undefined += 1;
            continue;
        };
        checked += 1;
        let bound = pod_lower_bound(inst, &o.wbm.matching).value;
        if pod < bound - TOL {
            violations.push((seed, pod, bound));
        }
    }
    let worst = violations
        .iter()
        .max_by(|a, b| (a.2 - a.1).total_cmp(&(b.2 - b.1)))
        .map(|(s, p, b)| format!(" (largest gap: seed {s}, PoD {p:.4} < bound {b:.4})"))
        .unwrap_or_default();
    outcome(
        violations.is_empty() && limit == 0.5,
        format!(
            "limit term for R-=5 is {limit}; {checked} instances with defined PoD ({undefined} undefined), {} below the bound{worst}",
            violations.len()
        ),
    )
}

fn supermodularity() -> Outcome {
    let (mut instances, mut pairs, mut bad, mut strict) = (0, 0, 0, 0);
    let mut seed = 0u64;
    let shapes = [
        (2, 2),
        (2, 3),
        (3, 2),
        (2, 4),
        (4, 2),
        (3, 3),
        (2, 5),
        (5, 2),
        (2, 6),
        (6, 2),
        (3, 4),
        (4, 3),
    ];
    for &(m, n) in &shapes {
        for _ in 0..3 {
            let inst = random_instance(70_000 + seed, (m, m), (n, n), 3);
            seed += 1;
            let (c, b, s) = increasing_differences(&inst);
            instances += 1;
            pairs += c;
            bad += b;
            strict += s;
        }
    }
    outcome(
        bad == 0,
        format!(
            "{instances} instances, {pairs} (C, C', e) checks, {strict} strict, {bad} violations"
        ),
    )
}

fn scaling() -> Outcome {
    let cfg = ScalingConfig {
        budget: Duration::from_secs(10),
        ..ScalingConfig::default()
    };
    let rows = run_scaling(&cfg).expect("scaling configuration is valid");
    let last = rows.last().expect("at least one size");
    let faster = last.time_greedy < last.time_dwbm;
    let quick = rows
        .iter()
        .all(|r| r.time_greedy < 5.0 && r.status_greedy == Status::Feasible);
    let wbm_ok = rows.iter().all(|r| r.status_wbm == Status::Optimal);
    let slope = log_log_slope(
        &rows
            .iter()
            .map(|r| (r.m as f64, r.time_greedy))
            .collect::<Vec<_>>(),
    );
    let sizes: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "m={} greedy {:.3}s wbm {:.3}s dwbm {:.3}s ({})",
                r.m, r.time_greedy, r.time_wbm, r.time_dwbm, r.status_dwbm
            )
        })
        .collect();
    outcome(
        faster && quick && wbm_ok && slope.is_some_and(|s| s <= 3.0),
        format!(
            "budget {} ms; {}; greedy log-log slope {:.2}",
            cfg.budget.as_millis(),
            sizes.join("; "),
            slope.unwrap_or(f64::NAN)
        ),
    )
}

fn bounds_endpoints() -> Outcome {
    let rows = run_bounds(&BoundsConfig::default()).expect("bounds configuration is valid");
    let first = rows.first().expect("sweep starts at 1");
    let last = rows.last().expect("sweep ends at m");
    let top = last.pod == Some(1.0);
    let bottom = first.r_lo == 1 && (first.eg.is_some() || first.eg_flag.is_some());
    outcome(
        top && bottom && rows.len() == BoundsConfig::default().m,
        format!(
            "R-={}: PoD {:?}; R-=1: PoD {:?}, EG {:?}{}",
            last.r_lo,
            last.pod,
            first.pod,
            first.eg,
            first
                .eg_flag
                .as_ref()
                .map(|f| format!(" ({f})"))
                .unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut line = |n: u32, name: &str, o: Outcome| {
        println!(
            "criterion {n} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += !o.pass as u32;
    };
    let start = Instant::now();
    let battery = battery();
    let enumerated = start.elapsed().as_secs_f64();
    let mut o = oracle_equivalence(&battery);
    o.detail = format!("{}; {:.1}s", o.detail, start.elapsed().as_secs_f64());
    o.pass &= start.elapsed() < Duration::from_secs(120);
    line(1, "oracle equivalence", o);
    line(2, "worked example", worked_example());
    line(3, "synthetic 10x10 battery", fig2_replication());
    line(4, "PoD bound consistency", pod_bound_consistency(&battery));
    line(5, "supermodularity", supermodularity());
    line(6, "scaling trend", scaling());
    line(7, "bounds sweep endpoints", bounds_endpoints());
    println!(
        "criterion 8 [DOCUMENTED] real-data table values: not reproducible without the recommender and clustering pipelines; see README"
    );
    println!("(exhaustive enumeration of the 500-instance battery took {enumerated:.1}s)");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
