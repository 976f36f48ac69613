use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use divmatch::experiment::{
    gen, log_log_slope, run_bounds, run_fig2, run_scaling, write_csv, BoundsConfig, Fig2Config,
    GenConfig, ScalingConfig,
};
use divmatch::{
    brute_force, check_matching, load_instance, load_matching, metrics_report, save_instance,
    solve_dwbm_exact, solve_gdwbm, solve_wbm, transform_max_to_min, EnumerationBudget, Error,
    Instance, Matching, Objective, Ratio, SolveReport, Status,
};
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

const VERIFY_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "divmatch",
    version,
    about = "Diverse weighted bipartite b-matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance file and write the matching with its report.
    Solve(SolveArgs),
    /// Compare an efficiency matching and a diverse matching as one CSV row.
    Metrics(MetricsArgs),
    /// Repeated trials over a sweep of cluster counts.
    RunFig2(Fig2Args),
    /// Sweep the right lower bound on one instance.
    RunBounds(BoundsArgs),
    /// Solver wall times on growing instances.
    RunScaling(ScalingArgs),
    /// Rewrite weights as (max weight - w) so maximization data can be minimized.
    ConvertMaxMin(ConvertArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    l_lo: usize,
    #[arg(long)]
    l_hi: Option<usize>,
    #[arg(long, default_value_t = 5)]
    r_lo: usize,
    #[arg(long)]
    r_hi: Option<usize>,
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Wbm,
    Dwbm,
    Greedy,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    alg: Alg,
    /// Budget for the exact diverse solver.
    #[arg(long, default_value_t = 60_000)]
    budget_ms: u64,
    /// Cross-check against exhaustive enumeration when the instance is small enough.
    #[arg(long)]
    verify: bool,
    /// Largest number of subsets the verifier may enumerate.
    #[arg(long, default_value_t = 1 << 20)]
    verify_subsets: u64,
    input: PathBuf,
    /// Output file; `--out` is accepted as an alternative.
    output: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    input: PathBuf,
    wbm: PathBuf,
    div: PathBuf,
    /// Instance id for the CSV row (defaults to the input file stem).
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Fig2Args {
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    l_lo: usize,
    /// Defaults to `n`.
    #[arg(long)]
    l_hi: Option<usize>,
    #[arg(long, default_value_t = 5)]
    r_lo: usize,
    /// Defaults to `m`.
    #[arg(long)]
    r_hi: Option<usize>,
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    #[arg(long, default_value_t = 60_000)]
    budget_ms: u64,
    /// Per-trial CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-k aggregate CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    l_lo: usize,
    /// Defaults to `n`.
    #[arg(long)]
    l_hi: Option<usize>,
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    #[arg(long, default_value_t = 60_000)]
    budget_ms: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![25, 50, 100, 200])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    l_lo: usize,
    #[arg(long, default_value_t = 3)]
    r_lo: usize,
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    #[arg(long, default_value_t = 60_000)]
    budget_ms: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    details: Value,
}

impl Failure {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
            details: Value::Null,
        }
    }

    fn with(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    fn document(&self) -> Value {
        json!({
            "error": {
                "kind": self.kind,
                "message": self.message,
                "exit_code": self.code,
                "details": self.details,
            }
        })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Parse { line, column, .. } => Failure::new(EXIT_USAGE, "parse", message)
                .with(json!({ "line": line, "column": column })),
            Error::Invalid(vs) => {
                Failure::new(EXIT_USAGE, "invalid_instance", message).with(Value::Array(
                    vs.iter()
                        .map(|v| json!({ "field": v.field, "message": v.message }))
                        .collect(),
                ))
            }
            Error::EdgeOutOfRange { .. } | Error::DuplicateEdge(..) => {
                Failure::new(EXIT_USAGE, "invalid_matching", message)
            }
            Error::Config(_) => Failure::new(EXIT_USAGE, "config", message),
            Error::Io(_) => Failure::new(EXIT_USAGE, "io", message),
            _ => Failure::new(EXIT_INTERNAL, "internal", message),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let kind = e.kind();
            let f = Failure::new(EXIT_USAGE, "usage", e.to_string().trim_end())
                .with(json!({ "clap_kind": format!("{kind:?}") }));
            return fail(&f);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::RunFig2(a) => cmd_fig2(a),
        Command::RunBounds(a) => cmd_bounds(a),
        Command::RunScaling(a) => cmd_scaling(a),
        Command::ConvertMaxMin(a) => cmd_convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(&f),
    }
}

fn fail(f: &Failure) -> ExitCode {
    let doc = serde_json::to_string_pretty(&f.document()).unwrap_or_default();
    let _ = writeln!(io::stderr(), "{doc}");
    ExitCode::from(f.code)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| {
            Failure::new(
                EXIT_USAGE,
                "io",
                format!("cannot write {}: {e}", p.display()),
            )
        }),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::new(EXIT_INTERNAL, "io", e.to_string())),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Failure::new(
            EXIT_USAGE,
            "io",
            format!("cannot read {}: {e}", path.display()),
        )
    })
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    load_instance(&read(path)?).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(buf)
}

fn cmd_gen(a: GenArgs) -> CliResult {
    let inst = gen(&GenConfig {
        m: a.m,
        n: a.n,
        k: a.k,
        l_lo: a.l_lo,
        l_hi: a.l_hi.unwrap_or(a.n),
        r_lo: a.r_lo,
        r_hi: a.r_hi.unwrap_or(a.m),
        seed: a.seed,
    })?;
    emit(a.out.as_deref(), save_instance(&inst).as_bytes())
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn verify(
    inst: &Instance,
    alg: Alg,
    report: &SolveReport,
    max_subsets: u64,
) -> Result<Value, Failure> {
    let budget = EnumerationBudget {
        max_subsets,
        max_time: None,
    };
    if !budget.admits(inst) {
        return Ok(json!({
            "performed": false,
            "reason": format!("2^{} subsets exceed the verification budget", inst.m() * inst.n()),
        }));
    }
    let (objective, value): (Objective, fn(&SolveReport) -> f64) = match alg {
        Alg::Wbm => (Objective::F1, |r| r.objective_f1),
        Alg::Dwbm | Alg::Greedy => (Objective::F2, |r| r.objective_f2),
    };
    let oracle = brute_force(inst, objective, &budget)?;
    let feasible_agrees = oracle.status.has_matching() == report.status.has_matching();
    let (ok, gap) = if !oracle.status.has_matching() || !report.status.has_matching() {
        (feasible_agrees, None)
    } else {
        let (got, want) = (value(report), value(&oracle));
        let tol = VERIFY_TOL * want.abs().max(1.0);
        let ok = match (alg, report.status) {
            (Alg::Greedy, _) | (_, Status::FeasibleIncumbent) => got >= want - tol,
            _ => (got - want).abs() <= tol,
        };
        (ok, Some(got - want))
    };
    let doc = json!({
        "performed": true,
        "agrees": ok,
        "oracle_status": oracle.status,
        "oracle_objective": number(value(&oracle)),
        "gap": gap.map(number),
        "subsets": oracle.telemetry.subsets_enumerated,
    });
    if ok {
        Ok(doc)
    } else {
        Err(Failure::new(
            EXIT_INTERNAL,
            "verification_failed",
            "solver disagrees with exhaustive enumeration",
        )
        .with(doc))
    }
}

fn cmd_solve(a: SolveArgs) -> CliResult {
    let out = match (a.output, a.out) {
        (Some(_), Some(_)) => {
            return Err(Failure::new(
                EXIT_USAGE,
                "usage",
                "give the output path either positionally or with --out",
            ))
        }
        (p, q) => p.or(q),
    };
    let inst = read_instance(&a.input)?;
    let budget = Duration::from_millis(a.budget_ms);
    let report = match a.alg {
        Alg::Wbm => solve_wbm(&inst),
        Alg::Dwbm => solve_dwbm_exact(&inst, Some(budget)),
        Alg::Greedy => solve_gdwbm(&inst),
    };
    let alg = match a.alg {
        Alg::Wbm => "wbm",
        Alg::Dwbm => "dwbm",
        Alg::Greedy => "greedy",
    };
    let summary = json!({
        "algorithm": alg,
        "status": report.status,
        "wall_time": report.wall_time,
        "telemetry": report.telemetry,
    });
    match report.status {
        Status::Infeasible => {
            return Err(Failure::new(
                EXIT_INFEASIBLE,
                "infeasible",
                "no matching satisfies the degree bounds",
            )
            .with(summary))
        }
        Status::BudgetExhausted => {
            return Err(Failure::new(
                EXIT_BUDGET,
                "budget_exhausted",
                format!("no feasible matching found within {} ms", a.budget_ms),
            )
            .with(summary))
        }
        _ => {}
    }
    let verification = if a.verify {
        Some(verify(&inst, a.alg, &report, a.verify_subsets))
    } else {
        None
    };
    let mut doc = json!({
        "edges": report.matching.edges(),
        "algorithm": alg,
        "status": report.status,
        "objective_f1": number(report.objective_f1),
        "objective_f2": number(report.objective_f2),
        "wall_time": report.wall_time,
        "budget_ms": a.budget_ms,
        "telemetry": report.telemetry,
    });
    let failed = match verification {
        Some(Ok(v)) => {
            doc["verify"] = v;
            None
        }
        Some(Err(f)) => {
            doc["verify"] = f.details.clone();
            Some(f)
        }
        None => None,
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Failure::new(EXIT_INTERNAL, "internal", e.to_string()))?;
    emit(out.as_deref(), format!("{text}\n").as_bytes())?;
    failed.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct MetricsRow {
    instance: String,
    m: usize,
    n: usize,
    k: usize,
    r_lo: usize,
    f1_wbm: f64,
    f1_div: f64,
    pod: Option<f64>,
    pod_bound: f64,
    pod_bound_universal: f64,
    eg: Option<f64>,
    eg_note: Option<String>,
    status_wbm: Option<String>,
    status_div: Option<String>,
    time_wbm: Option<f64>,
    time_div: Option<f64>,
}

fn read_solution(path: &Path, inst: &Instance) -> Result<(Matching, Value), Failure> {
    let text = read(path)?;
    let matching = load_matching(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })?;
    let check = check_matching(inst, &matching)?;
    if !check.is_feasible() {
        return Err(Failure::new(
            EXIT_INFEASIBLE,
            "infeasible_matching",
            format!("{} violates the degree bounds", path.display()),
        )
        .with(json!(check.violations)));
    }
    let extra: Value = serde_json::from_str(&text).unwrap_or(Value::Null);
    Ok((matching, extra))
}

fn cmd_metrics(a: MetricsArgs) -> CliResult {
    let inst = read_instance(&a.input)?;
    let (wbm, wbm_doc) = read_solution(&a.wbm, &inst)?;
    let (div, div_doc) = read_solution(&a.div, &inst)?;
    let r = metrics_report(&inst, &wbm, &div);
    let status = |d: &Value| d.get("status").and_then(Value::as_str).map(str::to_owned);
    let time = |d: &Value| d.get("wall_time").and_then(Value::as_f64);
    let row = MetricsRow {
        instance: a.id.unwrap_or_else(|| {
            a.input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        }),
        m: inst.m(),
        n: inst.n(),
        k: inst.k(),
        r_lo: inst.bounds().r_lo.iter().copied().max().unwrap_or(0),
        f1_wbm: r.f1_wbm,
        f1_div: r.f1_diverse,
        pod: r.pod.value(),
        pod_bound: r.pod_bound.value,
        pod_bound_universal: r.pod_bound.universal,
        eg: r.eg.value(),
        eg_note: match &r.eg {
            Ratio::Undefined(why) => Some(why.clone()),
            _ => None,
        },
        status_wbm: status(&wbm_doc),
        status_div: status(&div_doc),
        time_wbm: time(&wbm_doc),
        time_div: time(&div_doc),
    };
    emit(a.out.as_deref(), &csv_bytes(&[row])?)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn cmd_fig2(a: Fig2Args) -> CliResult {
    let cfg = Fig2Config {
        m: a.m,
        n: a.n,
        k_min: a.k_min,
        k_max: a.k_max,
        trials: a.trials,
        l_lo: a.l_lo,
        l_hi: a.l_hi.unwrap_or(a.n),
        r_lo: a.r_lo,
        r_hi: a.r_hi.unwrap_or(a.m),
        seed: a.seed,
        budget: Duration::from_millis(a.budget_ms),
        parallel: !a.serial,
    };
    let batch = run_fig2(&cfg)?;
    emit(a.out.as_deref(), &csv_bytes(&batch.trials)?)?;
    if let Some(p) = &a.summary {
        emit(Some(p), &csv_bytes(&batch.aggregates)?)?;
    }
    let mut err = io::stderr();
    for g in &batch.aggregates {
        let _ = writeln!(
            err,
            "k={:<2} pod mean {} [p5 {}, p95 {}] min {}  eg mean {}  greedy agreement {}",
            g.k,
            opt(g.pod_mean),
            opt(g.pod_p5),
            opt(g.pod_p95),
            opt(g.pod_min),
            opt(g.eg_mean),
            opt(g.agreement_rate),
        );
    }
    Ok(())
}

fn cmd_bounds(a: BoundsArgs) -> CliResult {
    let rows = run_bounds(&BoundsConfig {
        m: a.m,
        n: a.n,
        k: a.k,
        l_lo: a.l_lo,
        l_hi: a.l_hi.unwrap_or(a.n),
        seed: a.seed,
        budget: Duration::from_millis(a.budget_ms),
    })?;
    emit(a.out.as_deref(), &csv_bytes(&rows)?)
}

fn cmd_scaling(a: ScalingArgs) -> CliResult {
    let rows = run_scaling(&ScalingConfig {
        sizes: a.sizes,
        n: a.n,
        k: a.k,
        l_lo: a.l_lo,
        r_lo: a.r_lo,
        seed: a.seed,
        budget: Duration::from_millis(a.budget_ms),
    })?;
    emit(a.out.as_deref(), &csv_bytes(&rows)?)?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, r.time_greedy)).collect();
    let _ = writeln!(
        io::stderr(),
        "greedy log-log slope {}",
        opt(log_log_slope(&pts))
    );
    Ok(())
}

fn cmd_convert(a: ConvertArgs) -> CliResult {
    let inst = read_instance(&a.input)?;
    emit(
        a.out.as_deref(),
        save_instance(&transform_max_to_min(&inst)).as_bytes(),
    )
}
