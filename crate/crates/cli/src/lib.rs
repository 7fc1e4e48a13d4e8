//! Batch front end: `solve`, `diag`, `bench` and `summarize`.
//!
//! Exit codes are 0 for success (including runs that hit the iteration
//! cap), 1 for usage or configuration errors and 2 for runtime failures.

pub mod params;
pub mod trace;

use clap::{Args, Parser, Subcommand};
use gradsamp::testbed::{self, TestFunction};
use gradsamp::{
    classify_outcome, degeneracy_report, gs_solve, gs_solve_fixed_radius, nudge_into_smooth_set,
    rho_estimate, subdiff_approx_experiment, ClassifierConfig, GsError, GsParams, Objective,
    RngStream, RunTrace, Vector,
};
use params::{ParamOverrides, ParamsEcho};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use trace::{Header, Summary};

/// Radius used to move a start point off the nonsmooth set.
pub const NUDGE_RADIUS: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "gradsamp", version, about = "Gradient sampling runs and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimize a test function from a start point.
    Solve(SolveArgs),
    /// Diagnostics at a point.
    #[command(subcommand)]
    Diag(DiagCommand),
    /// Run a suite of solves and write one CSV row per (entry, seed).
    Bench(BenchArgs),
    /// Re-summarize a saved trace.
    Summarize {
        trace: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Test function, e.g. `abs_sum:2` or `tilted_root:beta=0.5`.
    #[arg(long = "fn")]
    pub function: String,
    /// Comma-separated start point.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    pub x0: Point,
    #[arg(long, env = "GS_DEFAULT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub params: ParamOverrides,
    /// Write a JSON-lines trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write `k,f,g_norm,eps` CSV here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PointArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    pub at: Point,
}

#[derive(Subcommand, Debug)]
pub enum DiagCommand {
    /// Sampled estimate of the distance from 0 to the gradient hull over a ball.
    Rho {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, env = "GS_DEFAULT_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Degeneracy test on the analytic subdifferential at a known point.
    Degeneracy {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Sampled gradient hulls over shrinking balls.
    Approx {
        #[command(flatten)]
        point: PointArgs,
        /// Strictly decreasing radii, comma-separated.
        #[arg(long, value_parser = parse_point)]
        deltas: Point,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, env = "GS_DEFAULT_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// JSON list of `{"fn", "x0", "params", "seeds"}` entries.
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides applied on top of every entry's params.
    #[command(flatten)]
    pub params: ParamOverrides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

fn parse_point(s: &str) -> Result<Point, String> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("`{c}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Point)
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<GsError> for CliError {
    fn from(e: GsError) -> Self {
        match e {
            GsError::ParameterOutOfRange { .. } | GsError::DimensionMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Diag(d) => cmd_diag(&d),
        Command::Bench(b) => cmd_bench(&b),
        Command::Summarize { trace } => trace::summarize_file(&trace)
            .map_err(CliError::from)
            .and_then(|s| emit(&s.to_string())),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn lookup(name: &str) -> Result<TestFunction, CliError> {
    testbed::lookup(name).map_err(|e| CliError::Usage(e.to_string()))
}

fn point_for(f: &TestFunction, p: &Point) -> Result<Vector, CliError> {
    if p.0.len() != f.dim() {
        return Err(GsError::DimensionMismatch {
            expected: f.dim(),
            got: p.0.len(),
        }
        .into());
    }
    Ok(Vector::from_vec(p.0.clone()))
}

/// A finished solve together with the start actually used.
pub struct SolveOutput {
    pub trace: RunTrace,
    pub start: Vector,
    pub params: GsParams,
}

/// Runs one solve. Starts on the nonsmooth set are moved into the smooth set
/// by at most [`NUDGE_RADIUS`].
pub fn run_solve(
    f: &TestFunction,
    x0: &Vector,
    seed: u64,
    overrides: &ParamOverrides,
) -> Result<SolveOutput, CliError> {
    let params = overrides.resolve(f.dim(), seed);
    let start = nudge_into_smooth_set(f, x0, NUDGE_RADIUS, seed, params.max_perturb_attempts.max(1))
        .ok_or_else(|| CliError::Runtime("start point is not differentiable and could not be moved off the kink".into()))?;
    let trace = if overrides.fixed_radius() {
        gs_solve_fixed_radius(f, &start, &params)?
    } else {
        gs_solve(f, &start, &params)?
    };
    Ok(SolveOutput { trace, start, params })
}

fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    let f = lookup(&a.function)?;
    let x0 = point_for(&f, &a.x0)?;
    let out = run_solve(&f, &x0, a.seed, &a.params)?;
    if out.start != x0 {
        eprintln!("note: start moved into the smooth set: {:?}", out.start.as_slice());
    }
    if let Some(path) = &a.trace {
        let header = Header {
            function: a.function.clone(),
            x0: a.x0.0.clone(),
            start: out.start.as_slice().to_vec(),
            fixed_radius: a.params.fixed_radius(),
            params: ParamsEcho::from(&out.params),
        };
        trace::write_trace(path, &header, &out.trace)?;
    }
    if let Some(path) = &a.plot {
        trace::write_plot_data(path, &out.trace)?;
    }
    emit(&Summary::of(&out.trace).to_string())
}

/// Writes a line to stdout; a closed pipe is not an error.
fn emit(line: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(v: &serde_json::Value) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(&s)
}

/// Shortest round-trip text for `x`, in exponent form when very small or
/// large.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e9).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn cmd_diag(d: &DiagCommand) -> Result<(), CliError> {
    match d {
        DiagCommand::Rho { point, eps, samples, seed } => {
            let f = lookup(&point.function)?;
            let x = point_for(&f, &point.at)?;
            let rho = rho_estimate(&f, &x, *eps, *samples, &mut RngStream::new(*seed, 0))?;
            print_json(&json!({
                "command": "rho",
                "fn": point.function,
                "at": point.at.0,
                "eps": eps,
                "samples": samples,
                "seed": seed,
                "rho": rho,
            }))
        }
        DiagCommand::Degeneracy { point, tol } => {
            let f = lookup(&point.function)?;
            let x = point_for(&f, &point.at)?;
            let Some(kp) = f.known_point(&x) else {
                let known: Vec<String> = f
                    .known_points
                    .iter()
                    .map(|k| format!("{:?}", k.point.as_slice()))
                    .collect();
                let known = if known.is_empty() { "none".to_string() } else { known.join(", ") };
                return Err(CliError::Usage(format!(
                    "no analytic subdifferential for {} at {:?}; available points: {known}",
                    point.function, point.at.0
                )));
            };
            let r = degeneracy_report(&kp.model, *tol)?;
            let rows = |vs: &[Vector]| vs.iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>();
            print_json(&json!({
                "command": "degeneracy",
                "fn": point.function,
                "at": point.at.0,
                "tol": tol,
                "vertices": rows(kp.model.vertices()),
                "cone_generators": rows(kp.model.cone_generators()),
                "subdiff_empty": r.subdiff_empty,
                "contains_zero": r.contains_zero,
                "proj": r.proj.as_ref().map(|p| p.as_slice().to_vec()),
                "neg_proj_interior": r.neg_proj_interior,
                "classification": r.classification.as_str(),
            }))
        }
        DiagCommand::Approx { point, deltas, samples, seed } => {
            let f = lookup(&point.function)?;
            let x = point_for(&f, &point.at)?;
            let rows = subdiff_approx_experiment(&f, &x, &deltas.0, *samples, &mut RngStream::new(*seed, 0))?;
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "delta": r.delta,
                        "min_norm": r.min_norm.norm,
                        "min_norm_point": r.min_norm.point.as_slice(),
                        "count": r.hull.count,
                        "coord_min": r.hull.coord_min,
                        "coord_max": r.hull.coord_max,
                    })
                })
                .collect();
            print_json(&json!({
                "command": "approx",
                "fn": point.function,
                "at": point.at.0,
                "deltas": deltas.0,
                "samples": samples,
                "seed": seed,
                "rows": rows,
            }))
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    #[serde(rename = "fn")]
    pub function: String,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub params: ParamOverrides,
    pub seeds: Vec<u64>,
}

pub const BENCH_HEADER: [&str; 7] = ["fn", "seed", "status", "iters", "final_f", "dist_to_known_min", "outcome"];

/// One bench row; `Err` carries the message for a failed cell.
pub fn bench_cell(entry: &SuiteEntry, seed: u64, cli: &ParamOverrides) -> Result<[String; 7], String> {
    let f = testbed::lookup(&entry.function).map_err(|e| e.to_string())?;
    let x0 = point_for(&f, &Point(entry.x0.clone())).map_err(|e| e.message().to_string())?;
    let out = run_solve(&f, &x0, seed, &cli.over(&entry.params)).map_err(|e| e.message().to_string())?;
    let t = &out.trace;
    Ok([
        entry.function.clone(),
        seed.to_string(),
        t.status.as_str().to_string(),
        t.iterations().to_string(),
        fmt_real(t.final_f),
        f.dist_to_known_min(&t.final_x).map_or(String::new(), fmt_real),
        classify_outcome(t, &ClassifierConfig::default()).as_str().to_string(),
    ])
}

fn cmd_bench(b: &BenchArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&b.suite)?;
    let suite: Vec<SuiteEntry> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", b.suite.display())))?;
    let cells: Vec<(&SuiteEntry, u64)> = suite
        .iter()
        .flat_map(|e| e.seeds.iter().map(move |&s| (e, s)))
        .collect();
    let rows: Vec<Result<[String; 7], String>> = cells
        .par_iter()
        .map(|(e, s)| bench_cell(e, *s, &b.params))
        .collect();

    let mut w = csv::Writer::from_path(&b.out).map_err(|e| CliError::Runtime(e.to_string()))?;
    w.write_record(BENCH_HEADER).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut failed = 0;
    for ((e, s), row) in cells.iter().zip(rows) {
        let row = row.unwrap_or_else(|msg| {
            eprintln!("error: {} seed {s}: {msg}", e.function);
            failed += 1;
            let empty = String::new;
            [e.function.clone(), s.to_string(), "error".into(), empty(), empty(), empty(), empty()]
        });
        w.write_record(&row).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush()?;
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} of {} cells failed", cells.len())));
    }
    Ok(())
}
