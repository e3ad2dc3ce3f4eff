mod format;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use format::g12;
use spdiv::dividend::Fault;
use spdiv::problem::ProblemDoc;
use spdiv::simulate::{simulate_reflected, DividendEstimate, McEstimate};
use spdiv::verify::{self, Plan, Suite};
use spdiv::{DividendProblem, ScaleSet, SimulationConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "spdiv", version, about = "Optimal dividend barriers with a terminal value")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal barrier and value function table (CSV x,V,Vprime)
    Solve(SolveArgs),
    /// Check analytic identities against simulation
    Verify(VerifyArgs),
    /// Simulate the barrier strategy (JSON)
    Simulate(SimulateArgs),
    /// Scale functions on a grid (CSV x,W,Z,Wbar,Zbar)
    ScaleTable(TableArgs),
}

#[derive(Args)]
struct Common {
    /// Problem document {"model", "q", "S", ...}
    #[arg(long)]
    problem: PathBuf,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Grid {
    #[arg(long, default_value_t = 0.0)]
    x_min: f64,
    /// Upper end (default: twice the optimal barrier, at least 2)
    #[arg(long)]
    x_max: Option<f64>,
    /// Number of grid points
    #[arg(long, default_value_t = 101)]
    x_steps: usize,
}

#[derive(Args)]
struct Sim {
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Disable the Brownian-bridge ruin correction
    #[arg(long)]
    no_bridge: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: Grid,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: Grid,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sim: Sim,
    /// Barrier level (default: the optimal barrier)
    #[arg(long)]
    barrier: Option<f64>,
    /// Initial surplus (default: half the barrier)
    #[arg(long)]
    x0: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Exits,
    Dividends,
    Martingales,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlipLambdaSign,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    suite: SuiteArg,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sim: Sim,
    /// Barrier levels in the dominance scan
    #[arg(long, default_value_t = 50)]
    b_steps: usize,
    /// Surplus levels in the dominance scan
    #[arg(long, default_value_t = 50)]
    x_steps: usize,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<spdiv::Error> for Failure {
    fn from(e: spdiv::Error) -> Self {
        let code = if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERIC };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::ScaleTable(a) => scale_table(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_problem(path: &Path) -> Result<ProblemDoc, Failure> {
    let text = fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let doc: ProblemDoc = serde_json::from_str(&text).map_err(|e| {
        config_error(format!("{}: {e}", path.display()))
    })?;
    doc.validate()?;
    Ok(doc)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| config_error(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn grid_points(g: &Grid, default_max: f64) -> Result<Vec<f64>, Failure> {
    let hi = g.x_max.unwrap_or(default_max);
    if !(g.x_min >= 0.0 && hi > g.x_min && hi.is_finite()) {
        return Err(config_error(format!("need 0 <= x-min < x-max, got {} and {hi}", g.x_min)));
    }
    if g.x_steps < 2 {
        return Err(config_error("x-steps must be at least 2"));
    }
    let n = g.x_steps - 1;
    Ok((0..=n)
        .map(|i| if i == n { hi } else { g.x_min + (hi - g.x_min) * i as f64 / n as f64 })
        .collect())
}

fn sim_config(doc: &ProblemDoc, s: &Sim) -> Result<SimulationConfig, Failure> {
    let mut cfg = doc.simulation_config(SimulationConfig::default());
    cfg.n_paths = s.paths.unwrap_or(cfg.n_paths);
    cfg.dt = s.dt.unwrap_or(cfg.dt);
    cfg.horizon = s.horizon.unwrap_or(cfg.horizon);
    cfg.seed = s.seed.unwrap_or(cfg.seed);
    cfg.bridge_correction = !s.no_bridge;
    cfg.validate()?;
    Ok(cfg)
}

fn solve(a: SolveArgs) -> Outcome {
    let doc = read_problem(&a.common.problem)?;
    let p = doc.dividend_problem()?;
    let b = p.optimal_barrier();
    let xs = grid_points(&a.grid, 2.0 * b.max(1.0))?;
    let mut csv = String::from("x,V,Vprime\n");
    for &x in &xs {
        let v = p.value_function(x)?;
        let d = p.value_function_derivative(x)?;
        writeln!(csv, "{},{},{}", g12(x), g12(v), g12(d)).expect("write to string");
    }
    let summary = format!(
        "# b* = {}\n# Lambda(b*) = {}\n# E[X(1)]/q - S = {}\n",
        g12(b),
        g12(p.lambda_coeff(b)?),
        g12(p.target())
    );
    match &a.common.out {
        Some(path) => {
            emit(Some(path), &csv)?;
            print!("{summary}");
        }
        None => print!("{summary}{csv}"),
    }
    Ok(0)
}

fn scale_table(a: TableArgs) -> Outcome {
    let doc = read_problem(&a.common.problem)?;
    let xs = grid_points(&a.grid, 10.0)?;
    let x_max = xs[xs.len() - 1];
    let s = ScaleSet::build(&doc.model, doc.q, x_max, 1001.max(a.grid.x_steps))?;
    let mut csv = String::from("x,W,Z,Wbar,Zbar\n");
    for &x in &xs {
        let r = s.row(x)?;
        writeln!(csv, "{},{},{},{},{}", g12(r.x), g12(r.w), g12(r.z), g12(r.w_bar), g12(r.z_bar))
            .expect("write to string");
    }
    emit(a.common.out.as_deref(), &csv)?;
    Ok(0)
}

#[derive(Serialize)]
struct Functional {
    mean: f64,
    se: f64,
    n: usize,
    censored_fraction: f64,
}

impl Functional {
    fn new(e: McEstimate, censored_fraction: f64) -> Self {
        Functional {
            mean: e.mean,
            se: e.se,
            n: e.n,
            censored_fraction,
        }
    }
}

#[derive(Serialize)]
struct SimulationReport {
    barrier: f64,
    x0: f64,
    q: f64,
    #[serde(rename = "S")]
    terminal_value: f64,
    dividends: Functional,
    terminal: Functional,
    value: Functional,
    analytic_value: f64,
}

fn simulate(a: SimulateArgs) -> Outcome {
    let doc = read_problem(&a.common.problem)?;
    let cfg = sim_config(&doc, &a.sim)?;
    let p = doc.dividend_problem()?;
    let b = a.barrier.unwrap_or_else(|| p.optimal_barrier());
    let x0 = a.x0.unwrap_or(0.5 * b);
    let est: DividendEstimate = simulate_reflected(&doc.model, b, x0, doc.q, &cfg)?;
    let cf = est.censored_fraction;
    let report = SimulationReport {
        barrier: b,
        x0,
        q: doc.q,
        terminal_value: doc.terminal_value,
        dividends: Functional::new(est.dividends, cf),
        terminal: Functional::new(est.terminal, cf),
        value: Functional::new(est.value(doc.terminal_value), cf),
        analytic_value: p.barrier_value(b, x0)?,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializable report");
    text.push('\n');
    emit(a.common.out.as_deref(), &text)?;
    Ok(0)
}

fn verify_cmd(a: VerifyArgs) -> Outcome {
    let doc = read_problem(&a.common.problem)?;
    let cfg = sim_config(&doc, &a.sim)?;
    let mut p: DividendProblem = doc.dividend_problem()?;
    if let Some(FaultArg::FlipLambdaSign) = a.inject_fault {
        p = p.with_fault(Fault::FlipLambdaSign);
    }
    let suite = match a.suite {
        SuiteArg::All => Suite::All,
        SuiteArg::Exits => Suite::Exits,
        SuiteArg::Dividends => Suite::Dividends,
        SuiteArg::Martingales => Suite::Martingales,
    };
    let mut plan = Plan::for_problem(&p);
    plan.scan = (a.b_steps, a.x_steps);
    let report = verify::run(&p, &plan, suite, &cfg)?;

    let mut text = format!(
        "{:<40} {:>18} {:>18} {:>14}  {}\n",
        "identity", "analytic", "mc", "se", "result"
    );
    for row in &report.rows {
        let (mc, se) = match row.mc {
            Some(e) => (g12(e.mean), g12(e.se)),
            None => ("-".into(), "-".into()),
        };
        let verdict = if row.pass { "PASS" } else { "FAIL" };
        writeln!(text, "{:<40} {:>18} {:>18} {:>14}  {verdict}", row.name, g12(row.analytic), mc, se)
            .expect("write to string");
    }
    let passed = report.rows.iter().filter(|r| r.pass).count();
    writeln!(text, "{passed} of {} identities pass", report.rows.len()).expect("write to string");
    emit(a.common.out.as_deref(), &text)?;
    Ok(if report.all_pass() { 0 } else { EXIT_VERIFY })
}
