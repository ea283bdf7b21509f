//! Command-line front end: minimize an objective with one of the trajectory
//! methods, reproduce the failure-rate table, or dump regularization
//! surfaces and trajectories as CSV.
//!
//! Exit codes are a contract: 0 success, 1 usage error, 2 algorithmic
//! failure (a run that did not reach `t = 0`).

mod objective;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use steklov::bench::{BenchMethod, TableConfig, run_failure_table};
use steklov::oracle::{OracleResult, grid_global_min, poly_global_min};
use steklov::regularize::{
    ObjectiveFunction, quartic_mu_partials, steklov_partials, steklov_value,
};
use steklov::trajectories::{
    Classification, RunConfig, RunResult, RunStatus, T0Mode, Verdict, classify, run_quadratic,
    run_steklov, run_steklov_quartic,
};

#[derive(Parser)]
#[command(
    name = "steklov",
    about = "Global minimization of univariate coercive functions by regularization trajectories",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory method on an objective and report the minimizer.
    Minimize(MinimizeArgs),
    /// Failure-rate table over randomly generated polynomials.
    Bench(BenchArgs),
    /// Regularization surface values on an (x, t) grid, as CSV.
    Surface(SurfaceArgs),
    /// Accepted trajectory steps with the valley diagnostics, as CSV.
    Trajectory(TrajectoryArgs),
}

#[derive(Args)]
struct FunctionArgs {
    /// Polynomial coefficients, descending degree (e.g. "1,-8,-18,56,0").
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
    /// Named builtin objective (e.g. quad_sine, p4_sec61).
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Steklov,
    SteklovQuartic,
    Quadratic,
}

impl MethodArg {
    fn as_str(self) -> &'static str {
        match self {
            MethodArg::Steklov => "steklov",
            MethodArg::SteklovQuartic => "steklov-quartic",
            MethodArg::Quadratic => "quadratic",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct MinimizeArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Explicit window size; computed from the objective when absent.
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
    #[arg(long, value_enum, default_value = "text")]
    out: OutputFormat,
    /// Grade the result against the brute-force oracle.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated even degrees (e.g. "4,6,8").
    #[arg(long)]
    degrees: String,
    #[arg(long)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    method: BenchMethodArg,
    /// Per-degree t0 overrides as "degree=value" pairs (e.g. "4=6,6=7").
    #[arg(long)]
    t0: Option<String>,
    /// Output files; format chosen by extension (.csv or .json). Repeatable.
    #[arg(long)]
    out: Vec<PathBuf>,
    /// Run instances on one thread (default uses all cores).
    #[arg(long)]
    serial: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchMethodArg {
    Steklov,
    Quadratic,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegularizerArg {
    Steklov,
    Quadratic,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long)]
    t0: f64,
    /// x interval as "lo:hi".
    #[arg(long, allow_hyphen_values = true)]
    xrange: String,
    /// Grid sizes "nx" or "nx,nt" (default 200,50).
    #[arg(long, default_value = "200,50")]
    grid: String,
    #[arg(long, value_enum, default_value = "steklov")]
    regularizer: RegularizerArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{e}");
            return 1;
        }
    };
    match cli.command {
        Command::Minimize(args) => cmd_minimize(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Surface(args) => cmd_surface(args),
        Command::Trajectory(args) => cmd_trajectory(args),
    }
}

fn usage_error(message: &str) -> i32 {
    eprintln!("error: {message}");
    1
}

fn run_config(t0: Option<f64>, rtol: f64, record: bool) -> RunConfig {
    RunConfig {
        t0,
        t0_mode: if t0.is_some() {
            T0Mode::Explicit
        } else {
            T0Mode::Convexify
        },
        rtol,
        record_trajectory: record,
        ..RunConfig::default()
    }
}

/// Runs the requested method; `Err` carries a usage-class message.
fn dispatch(
    obj: &ObjectiveFunction,
    method: MethodArg,
    cfg: &RunConfig,
) -> Result<RunResult, String> {
    let run = match method {
        MethodArg::Steklov => run_steklov(obj, cfg),
        MethodArg::SteklovQuartic => {
            run_steklov_quartic(obj.poly().expect("validated as polynomial"), cfg)
        }
        MethodArg::Quadratic => run_quadratic(obj, cfg),
    };
    run.map_err(|e| format!("{e} (supply --t0 to choose the window size directly)"))
}

fn oracle_truth(obj: &ObjectiveFunction) -> OracleResult {
    match obj.poly() {
        Some(p) => poly_global_min(p).expect("validated as coercive"),
        None => grid_global_min(obj, -20.0, 20.0, 100_000),
    }
}

fn cmd_minimize(args: MinimizeArgs) -> i32 {
    let obj = match objective::resolve(
        args.function.poly.as_deref(),
        args.function.builtin.as_deref(),
    ) {
        Ok(obj) => obj,
        Err(e) => return usage_error(e.message()),
    };
    if let Err(e) = objective::validate_for_trajectory(&obj, args.method.as_str()) {
        return usage_error(e.message());
    }
    let cfg = run_config(args.t0, args.rtol, false);
    let result = match dispatch(&obj, args.method, &cfg) {
        Ok(r) => r,
        Err(message) => return usage_error(&message),
    };
    let verification = args.verify.then(|| {
        let truth = oracle_truth(&obj);
        (classify(&result, &truth), truth)
    });

    match args.out {
        OutputFormat::Text => print_text(&result, args.method, verification.as_ref()),
        OutputFormat::Json => print_json(&result, args.method, verification.as_ref()),
    }
    if result.status == RunStatus::ReachedZero {
        0
    } else {
        2
    }
}

fn print_text(
    result: &RunResult,
    method: MethodArg,
    verification: Option<&(Classification, OracleResult)>,
) {
    println!("method: {}", method.as_str());
    println!("status: {}", result.status.as_str());
    println!("x: {}", result.x_final);
    println!("f: {}", result.f_final);
    if let Some(alt) = result.alt_minimizer {
        println!("x_alt: {alt}");
    }
    match &result.start {
        Some(s) => {
            println!("t0: {}", s.t0);
            println!("x0: {}", s.x0);
        }
        None => {
            println!("t0: -");
            println!("x0: -");
        }
    }
    println!("steps: {}", result.trajectory.steps_taken);
    for w in &result.warnings {
        println!("note: {w}");
    }
    if let Some((class, truth)) = verification {
        match class.verdict {
            Verdict::GlobalSuccess => println!("verify: global minimum (oracle check)"),
            Verdict::LocalOnly => println!(
                "warning: local minimum (oracle check); global minimizers {:?} with f = {}",
                truth.minimizers, truth.min_value
            ),
            Verdict::DidNotConverge => println!("verify: did not converge"),
        }
    }
}

fn print_json(
    result: &RunResult,
    method: MethodArg,
    verification: Option<&(Classification, OracleResult)>,
) {
    let mut doc = serde_json::json!({
        "schema": 1,
        "method": method.as_str(),
        "status": result.status.as_str(),
        "x": result.x_final,
        "f": result.f_final,
        "t0": result.start.as_ref().map(|s| s.t0),
        "x0": result.start.as_ref().map(|s| s.x0),
        "steps": result.trajectory.steps_taken,
        "warnings": result.warnings,
    });
    if let Some(alt) = result.alt_minimizer {
        doc["x_alt"] = serde_json::json!(alt);
    }
    if let Some((class, truth)) = verification {
        let verdict = match class.verdict {
            Verdict::GlobalSuccess => "global-success",
            Verdict::LocalOnly => "local-only",
            Verdict::DidNotConverge => "did-not-converge",
        };
        doc["verify"] = serde_json::json!({
            "verdict": verdict,
            "gap": class.gap,
            "distance": class.distance,
            "oracle_minimizers": truth.minimizers,
            "oracle_min_value": truth.min_value,
        });
    }
    println!("{doc}");
}

fn cmd_bench(args: BenchArgs) -> i32 {
    let mut degrees = Vec::new();
    for part in args.degrees.split(',') {
        match part.trim().parse::<usize>() {
            Ok(d) if d >= 4 && d % 2 == 0 => degrees.push(d),
            _ => return usage_error(&format!("invalid degree {part:?}: need even integers >= 4")),
        }
    }
    if degrees.is_empty() {
        return usage_error("--degrees needs at least one degree");
    }
    if args.samples == 0 {
        return usage_error("--samples must be at least 1");
    }
    let mut t0_map = BTreeMap::new();
    if let Some(spec) = &args.t0 {
        for pair in spec.split(',') {
            let mut it = pair.splitn(2, '=');
            let (Some(d), Some(v)) = (it.next(), it.next()) else {
                return usage_error(&format!(
                    "invalid --t0 entry {pair:?}: expected degree=value"
                ));
            };
            match (d.trim().parse::<usize>(), v.trim().parse::<f64>()) {
                (Ok(d), Ok(v)) if v > 0.0 => {
                    t0_map.insert(d, v);
                }
                _ => return usage_error(&format!("invalid --t0 entry {pair:?}")),
            }
        }
    }
    for path in &args.out {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") | Some("json") => {}
            _ => {
                return usage_error(&format!(
                    "--out {} must end in .csv or .json",
                    path.display()
                ));
            }
        }
    }

    let method = match args.method {
        BenchMethodArg::Steklov => BenchMethod::Steklov,
        BenchMethodArg::Quadratic => BenchMethod::Quadratic,
        BenchMethodArg::Both => BenchMethod::Both,
    };
    let mut cfg = TableConfig::new(degrees, args.samples, method, args.seed);
    cfg.t0_map = t0_map;
    cfg.parallel = !args.serial;
    let report = run_failure_table(&cfg);

    // Echo in the failure-table layout: one block per method.
    for m in ["steklov", "quadratic"] {
        let rows: Vec<_> = report
            .rows
            .iter()
            .filter(|r| r.method.as_str() == m)
            .collect();
        if rows.is_empty() {
            continue;
        }
        println!("Algorithm: {m}");
        println!("  {:>3}  {:>10}  {:>8}", "n", "t0", "failure");
        for r in rows {
            println!(
                "  {:>3}  {:>10}  {:>7.1}%",
                r.degree,
                r.t0,
                100.0 * r.failure_rate
            );
        }
    }

    for path in &args.out {
        let payload = match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => report.to_csv(),
            _ => match serde_json::to_string_pretty(&report) {
                Ok(s) => s + "\n",
                Err(e) => {
                    eprintln!("error: serializing report: {e}");
                    return 2;
                }
            },
        };
        if let Err(e) = fs::write(path, payload) {
            eprintln!("error: writing {}: {e}", path.display());
            return 2;
        }
    }
    0
}

fn cmd_surface(args: SurfaceArgs) -> i32 {
    let obj = match objective::resolve(
        args.function.poly.as_deref(),
        args.function.builtin.as_deref(),
    ) {
        Ok(obj) => obj,
        Err(e) => return usage_error(e.message()),
    };
    if args.t0 <= 0.0 {
        return usage_error("--t0 must be positive");
    }
    let Some((lo, hi)) = args.xrange.split_once(':').and_then(|(a, b)| {
        let lo = a.trim().parse::<f64>().ok()?;
        let hi = b.trim().parse::<f64>().ok()?;
        (lo < hi).then_some((lo, hi))
    }) else {
        return usage_error("--xrange must be \"lo:hi\" with lo < hi");
    };
    let (nx, nt) = match parse_grid(&args.grid) {
        Some(g) => g,
        None => return usage_error("--grid must be \"nx\" or \"nx,nt\" with sizes >= 2"),
    };
    if args.regularizer == RegularizerArg::Quadratic && !obj.has_d2f() {
        return usage_error("the quadratic regularization needs a second derivative");
    }

    let mut out = String::from("x,t,value\n");
    for j in 0..nt {
        let t = args.t0 * j as f64 / (nt - 1) as f64;
        for i in 0..nx {
            let x = lo + (hi - lo) * i as f64 / (nx - 1) as f64;
            let value = match args.regularizer {
                RegularizerArg::Steklov => {
                    if t == 0.0 {
                        obj.f(x)
                    } else {
                        match steklov_value(&obj, x, t) {
                            Ok(v) => v,
                            Err(e) => {
                                eprintln!("error: {e}");
                                return 2;
                            }
                        }
                    }
                }
                RegularizerArg::Quadratic => obj.f(x) + 0.5 * t * x * x,
            };
            out.push_str(&format!("{x},{t},{value}\n"));
        }
    }
    if let Err(e) = fs::write(&args.out, out) {
        eprintln!("error: writing {}: {e}", args.out.display());
        return 2;
    }
    0
}

fn parse_grid(text: &str) -> Option<(usize, usize)> {
    let mut parts = text.split(',');
    let nx = parts.next()?.trim().parse::<usize>().ok()?;
    let nt = match parts.next() {
        Some(p) => p.trim().parse::<usize>().ok()?,
        None => 50,
    };
    if parts.next().is_some() || nx < 2 || nt < 2 {
        return None;
    }
    Some((nx, nt))
}

fn cmd_trajectory(args: TrajectoryArgs) -> i32 {
    let obj = match objective::resolve(
        args.function.poly.as_deref(),
        args.function.builtin.as_deref(),
    ) {
        Ok(obj) => obj,
        Err(e) => return usage_error(e.message()),
    };
    if let Err(e) = objective::validate_for_trajectory(&obj, args.method.as_str()) {
        return usage_error(e.message());
    }
    let cfg = run_config(args.t0, args.rtol, true);
    let result = match dispatch(&obj, args.method, &cfg) {
        Ok(r) => r,
        Err(message) => return usage_error(&message),
    };

    let quartic = (args.method == MethodArg::SteklovQuartic).then(|| {
        obj.poly()
            .expect("validated")
            .depress_quartic()
            .expect("validated")
    });
    let header = match args.method {
        MethodArg::Quadratic => "t,x,phi_x,phi_xx",
        _ => "t,x,mu_x,mu_xx",
    };
    let mut out = String::from(header);
    out.push('\n');
    for &(t, x) in &result.trajectory.samples {
        let (gx, gxx) = match args.method {
            MethodArg::Quadratic => {
                let d2 = obj.d2f(x).unwrap_or(f64::NAN);
                (obj.df(x) + t * x, d2 + t)
            }
            MethodArg::SteklovQuartic => {
                let q = quartic.as_ref().expect("set above");
                let (mu_x, mu_xx, _) = quartic_mu_partials(q, q.to_depressed(x), t);
                (mu_x, mu_xx)
            }
            MethodArg::Steklov => {
                if t == 0.0 {
                    (obj.df(x), obj.d2f(x).unwrap_or(f64::NAN))
                } else {
                    match steklov_partials(&obj, x, t) {
                        Ok((mu_x, mu_xx, _)) => (mu_x, mu_xx),
                        Err(_) => (f64::NAN, f64::NAN),
                    }
                }
            }
        };
        out.push_str(&format!("{t},{x},{gx},{gxx}\n"));
    }
    if result.status != RunStatus::ReachedZero {
        out.push_str(&format!("# status={}\n", result.status.as_str()));
    }
    if args.verify {
        let truth = oracle_truth(&obj);
        let class = classify(&result, &truth);
        let verdict = match class.verdict {
            Verdict::GlobalSuccess => "global-success",
            Verdict::LocalOnly => "local-only",
            Verdict::DidNotConverge => "did-not-converge",
        };
        out.push_str(&format!("# classification={verdict}\n"));
    }
    if let Err(e) = fs::write(&args.out, out) {
        eprintln!("error: writing {}: {e}", args.out.display());
        return 2;
    }
    if result.status == RunStatus::ReachedZero {
        0
    } else {
        2
    }
}
