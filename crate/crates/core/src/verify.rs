//! Analytic identities checked against the simulator, one report row each.

use serde::Serialize;

use crate::dividend::DividendProblem;
use crate::error::Result;
use crate::fluctuation::{self, ExitCorridor, Martingale};
use crate::simulate::{
    simulate_corridor, simulate_dual_strategy, simulate_reflected, simulate_stopped_states, BandStrategy,
    DividendStrategy, McEstimate, PayAllNow, SimulationConfig,
};

/// Standard errors allowed between formula and simulation.
pub const SE_BAND: f64 = 3.0;
/// Rounding allowance for formula-only checks.
const DOMINANCE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Suite {
    #[default]
    All,
    Exits,
    Dividends,
    Martingales,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub analytic: f64,
    pub mc: Option<McEstimate>,
    pub pass: bool,
}

impl Row {
    fn against(name: impl Into<String>, analytic: f64, mc: McEstimate) -> Self {
        Self {
            name: name.into(),
            analytic,
            pass: mc.agrees_with(analytic, SE_BAND),
            mc: Some(mc),
        }
    }

    /// Simulated value must not exceed `bound` by more than the band.
    fn bounded_by(name: impl Into<String>, bound: f64, mc: McEstimate) -> Self {
        Self {
            name: name.into(),
            analytic: bound,
            pass: mc.mean <= bound + SE_BAND * mc.se,
            mc: Some(mc),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Where the identities are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// corridor `(a, b)` and start for the exit identities and martingales
    pub corridor: (f64, f64, f64),
    /// barriers and starts for the reflected process
    pub barriers: Vec<(f64, f64)>,
    pub martingale_times: Vec<f64>,
    /// grid sizes of the dominance scan
    pub scan: (usize, usize),
}

impl Plan {
    /// Barriers at `b*` (or 1 when `b* = 0`) and at half that level, each
    /// started halfway; corridor
    /// `(0, B)` with `B = max(1.5 b*, 2)` started at `0.4 B`.
    pub fn for_problem(p: &DividendProblem) -> Self {
        let b_star = p.optimal_barrier();
        let b_ref = if b_star > 0.0 { b_star } else { 1.0 };
        let top = (1.5 * b_star).max(2.0);
        Self {
            corridor: (0.0, top, 0.4 * top),
            barriers: vec![(b_ref, 0.5 * b_ref), (0.5 * b_ref, 0.25 * b_ref)],
            martingale_times: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            scan: (50, 50),
        }
    }
}

pub fn run(p: &DividendProblem, plan: &Plan, suite: Suite, cfg: &SimulationConfig) -> Result<Report> {
    let mut rows = Vec::new();
    if matches!(suite, Suite::All | Suite::Exits) {
        exits(p, plan, cfg, &mut rows)?;
    }
    if matches!(suite, Suite::All | Suite::Dividends) {
        dividends(p, plan, cfg, &mut rows)?;
    }
    if matches!(suite, Suite::All | Suite::Martingales) {
        martingales(p, plan, cfg, &mut rows)?;
    }
    Ok(Report { rows })
}

fn exits(p: &DividendProblem, plan: &Plan, cfg: &SimulationConfig, rows: &mut Vec<Row>) -> Result<()> {
    let s = p.scale();
    let (a, b, x) = plan.corridor;
    let c = ExitCorridor::new(a, b, x, p.q())?;
    let stats = simulate_corridor(p.model(), a, b, x, p.q(), cfg)?;
    rows.push(Row::against("exit down", fluctuation::exit_down(s, &c)?, stats.exit_down()));
    rows.push(Row::against("exit up", fluctuation::exit_up(s, &c)?, stats.exit_up()));
    if p.model().sigma() > 0.0 {
        rows.push(Row::against("exit up by creeping", fluctuation::creep_up(s, &c)?, stats.creep_up()));
    }
    if p.model().jumps().total_mass() > 0.0 {
        let mass = fluctuation::overshoot_mass(s, &c)?;
        rows.push(Row::against("exit up by a jump", mass.value, stats.jump_up()));
    }
    Ok(())
}

fn dividends(p: &DividendProblem, plan: &Plan, cfg: &SimulationConfig, rows: &mut Vec<Row>) -> Result<()> {
    let q = p.q();
    for &(b, x) in &plan.barriers {
        let est = simulate_reflected(p.model(), b, x, q, cfg)?;
        rows.push(Row::against(
            format!("ruin transform b={b:.4} x={x:.4}"),
            fluctuation::ruin_laplace(p.scale(), b, x)?,
            est.terminal,
        ));
        rows.push(Row::against(
            format!("barrier value b={b:.4} x={x:.4}"),
            p.barrier_value(b, x)?,
            est.value(p.terminal_value()),
        ));
    }

    let (nb, nx) = plan.scan;
    let top = 2.0 * p.optimal_barrier().max(1.0);
    let grid = |n: usize| (0..n).map(|i| top * i as f64 / (n - 1).max(1) as f64).collect::<Vec<_>>();
    let witness = p.dominance_scan(&grid(nb), &grid(nx), cfg.execution)?;
    rows.push(Row {
        name: format!("dominance {nb}x{nx} (min V - V_b)"),
        analytic: witness.min_gap,
        mc: None,
        pass: witness.min_gap >= -DOMINANCE_SLACK,
    });

    let x0 = p.optimal_barrier().max(1.0);
    let v = p.value_function(x0)?;
    let b_star = p.optimal_barrier();
    let strategies: [(&str, &dyn DividendStrategy); 2] = [
        (
            "band strategy",
            &BandStrategy {
                trigger: b_star + 1.0,
                target: b_star,
            },
        ),
        ("pay everything now", &PayAllNow),
    ];
    for (name, strategy) in strategies {
        let est = simulate_dual_strategy(p.model(), strategy, x0, q, cfg)?;
        rows.push(Row::bounded_by(
            format!("{name} x={x0:.4} <= V"),
            v,
            est.value(p.terminal_value()),
        ));
    }
    Ok(())
}

fn martingales(p: &DividendProblem, plan: &Plan, cfg: &SimulationConfig, rows: &mut Vec<Row>) -> Result<()> {
    let s = p.scale();
    let (a, b, x) = plan.corridor;
    let c = ExitCorridor::new(a, b, x, p.q())?;
    let times = &plan.martingale_times;
    let states = simulate_stopped_states(p.model(), a, b, x, times, cfg)?;
    for kind in Martingale::ALL {
        for point in fluctuation::martingale_residual_from(s, &c, kind, times, &states)? {
            rows.push(Row::against(
                format!("martingale {} t={}", kind.name(), point.t),
                0.0,
                point.residual,
            ));
        }
    }
    Ok(())
}

