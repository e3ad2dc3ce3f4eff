//! Monte Carlo oracle for the risk process: free paths in a corridor,
//! paths reflected at a dividend barrier, and paths controlled by arbitrary
//! admissible strategies.
//!
//! Path `i` draws from its own ChaCha substream keyed by `(seed, i)` and
//! per-path results are reduced in index order, so estimates are
//! bit-identical whatever the number of worker threads.

mod jumps;
mod paths;
pub mod rng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, try_map_indexed, Execution};
use crate::levy::LevyModel;
use crate::numerics::pairwise_sum;
use paths::Dynamics;

pub use paths::{BandStrategy, BarrierStrategy, CorridorExit, DividendStrategy, PathOutcome, PayAllNow};

/// Censoring above this fraction is fatal unless discounting makes the
/// truncated mass negligible.
const MAX_CENSORED_FRACTION: f64 = 0.01;
/// `q * horizon` at which `e^{-q horizon} < 2.1e-9`.
const NEGLIGIBLE_DISCOUNT_HORIZON: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub dt: f64,
    pub horizon: f64,
    #[serde(rename = "paths")]
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default = "default_bridge")]
    pub bridge_correction: bool,
    #[serde(skip)]
    pub execution: Execution,
}

fn default_bridge() -> bool {
    true
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 200.0,
            n_paths: 100_000,
            seed: 20_130_701,
            bridge_correction: true,
            execution: Execution::Parallel,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidArgument("need at least one path".into()));
        }
        Ok(())
    }

    fn check(&self, model: &LevyModel, q: f64) -> Result<()> {
        self.validate()?;
        if !(q >= 0.0) {
            return Err(Error::InvalidArgument(format!("q must be >= 0, got {q}")));
        }
        let rate = model.jumps().total_mass();
        if model.sigma() > 0.0 && rate.is_finite() && rate * self.dt > 0.1 {
            log::warn!("lambda * dt = {} > 0.1; consider a smaller dt", rate * self.dt);
        }
        if q * self.horizon < NEGLIGIBLE_DISCOUNT_HORIZON {
            log::warn!("q * horizon = {} < 20: truncation bias may be visible", q * self.horizon);
        }
        Ok(())
    }

    fn dynamics(&self, model: &LevyModel) -> Dynamics {
        Dynamics::new(model, self.dt, self.horizon, self.bridge_correction && model.sigma() > 0.0)
    }

    fn censoring(&self, censored: usize, q: f64) -> Result<f64> {
        let frac = censored as f64 / self.n_paths as f64;
        if frac > MAX_CENSORED_FRACTION && q * self.horizon < NEGLIGIBLE_DISCOUNT_HORIZON {
            return Err(Error::Censored {
                censored,
                n_paths: self.n_paths,
                horizon: self.horizon,
            });
        }
        Ok(frac)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl McEstimate {
    /// Two-pass estimate with pairwise sums (order-deterministic).
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = pairwise_sum(samples) / n as f64;
        if n == 1 {
            return Self { mean, se: 0.0, n };
        }
        let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        Self {
            mean,
            se: (var / n as f64).sqrt(),
            n,
        }
    }

    /// `|mean - value| <= k * se`, with a rounding allowance for zero-variance samples.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.se + 1e-12 * value.abs().max(1.0)
    }

    /// Difference in units of standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (self.mean - value) / self.se
    }
}

fn covariance(a: &[f64], ma: f64, b: &[f64], mb: f64) -> f64 {
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    pairwise_sum(&prods) / (a.len().max(2) - 1) as f64
}

/// Discounted dividends and discounted ruin indicator of a controlled surplus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DividendEstimate {
    /// `int_0^tau e^{-qt} dL_t`
    pub dividends: McEstimate,
    /// `e^{-q tau}`
    pub terminal: McEstimate,
    pub censored_fraction: f64,
    cov: f64,
}

impl DividendEstimate {
    fn from_outcomes(outcomes: &[PathOutcome], censored_fraction: f64) -> Self {
        let d: Vec<f64> = outcomes.iter().map(|o| o.dividends).collect();
        let t: Vec<f64> = outcomes.iter().map(|o| o.terminal).collect();
        let dividends = McEstimate::from_samples(&d);
        let terminal = McEstimate::from_samples(&t);
        let cov = covariance(&d, dividends.mean, &t, terminal.mean);
        Self {
            dividends,
            terminal,
            censored_fraction,
            cov,
        }
    }

    /// Estimate of `E[int e^{-qt} dL + S e^{-q tau}]`.
    pub fn value(&self, terminal_value: f64) -> McEstimate {
        let n = self.dividends.n as f64;
        let var_d = self.dividends.se.powi(2) * n;
        let var_t = self.terminal.se.powi(2) * n;
        let s = terminal_value;
        let var = (var_d + s * s * var_t + 2.0 * s * self.cov).max(0.0);
        McEstimate {
            mean: self.dividends.mean + s * self.terminal.mean,
            se: (var / n).sqrt(),
            n: self.dividends.n,
        }
    }
}

fn collect_dividends(outcomes: Vec<PathOutcome>, cfg: &SimulationConfig, q: f64) -> Result<DividendEstimate> {
    let censored = outcomes.iter().filter(|o| o.censored).count();
    let frac = cfg.censoring(censored, q)?;
    Ok(DividendEstimate::from_outcomes(&outcomes, frac))
}

/// Barrier strategy at `b` from `x0`: the surplus is reflected at `b` and
/// killed at 0.
pub fn simulate_reflected(model: &LevyModel, b: f64, x0: f64, q: f64, cfg: &SimulationConfig) -> Result<DividendEstimate> {
    cfg.check(model, q)?;
    if !(b >= 0.0) || !(x0 >= 0.0) {
        return Err(Error::Domain(format!("need b >= 0 and x0 >= 0, got b = {b}, x0 = {x0}")));
    }
    let dynamics = cfg.dynamics(model);
    let outcomes = map_indexed(cfg.n_paths, cfg.execution, |i| {
        paths::reflected(&dynamics, b, x0, q, &mut rng::path_rng(cfg.seed, i))
    });
    collect_dividends(outcomes, cfg, q)
}

/// Surplus controlled by a plug-in strategy.
pub fn simulate_dual_strategy(
    model: &LevyModel,
    strategy: &dyn DividendStrategy,
    x0: f64,
    q: f64,
    cfg: &SimulationConfig,
) -> Result<DividendEstimate> {
    cfg.check(model, q)?;
    if !(x0 >= 0.0) {
        return Err(Error::Domain(format!("need x0 >= 0, got {x0}")));
    }
    let dynamics = cfg.dynamics(model);
    let outcomes = try_map_indexed(cfg.n_paths, cfg.execution, |i| {
        paths::with_strategy(&dynamics, strategy, x0, q, &mut rng::path_rng(cfg.seed, i))
    })?;
    collect_dividends(outcomes, cfg, q)
}

/// Per-path exits from a corridor `(a, b)`.
#[derive(Debug, Clone)]
pub struct CorridorStats {
    pub q: f64,
    pub exits: Vec<CorridorExit>,
    pub censored_fraction: f64,
}

impl CorridorStats {
    fn discounted(&self, pred: impl Fn(&CorridorExit) -> bool) -> McEstimate {
        let xs: Vec<f64> = self
            .exits
            .iter()
            .map(|e| match e.time() {
                Some(t) if pred(e) => (-self.q * t).exp(),
                _ => 0.0,
            })
            .collect();
        McEstimate::from_samples(&xs)
    }

    /// `E[e^{-q tau}; down first]`
    pub fn exit_down(&self) -> McEstimate {
        self.discounted(|e| matches!(e, CorridorExit::Down { .. }))
    }

    /// `E[e^{-q tau}; up first]`, by jump or by creeping.
    pub fn exit_up(&self) -> McEstimate {
        self.discounted(|e| matches!(e, CorridorExit::UpByJump { .. } | CorridorExit::UpByCreep { .. }))
    }

    pub fn creep_up(&self) -> McEstimate {
        self.discounted(|e| matches!(e, CorridorExit::UpByCreep { .. }))
    }

    pub fn jump_up(&self) -> McEstimate {
        self.discounted(|e| matches!(e, CorridorExit::UpByJump { .. }))
    }

    /// `E[e^{-q tau}; X(tau-) in [y0, y1), X(tau) in [z0, z1)]`.
    pub fn overshoot_box(&self, y: (f64, f64), z: (f64, f64)) -> McEstimate {
        self.discounted(|e| match *e {
            CorridorExit::UpByJump { pre, post, .. } => pre >= y.0 && pre < y.1 && post >= z.0 && post < z.1,
            _ => false,
        })
    }

    pub fn count(&self, pred: impl Fn(&CorridorExit) -> bool) -> usize {
        self.exits.iter().filter(|e| pred(e)).count()
    }
}

fn check_corridor(a: f64, b: f64, x0: f64) -> Result<()> {
    if !(a < x0 && x0 < b) {
        return Err(Error::Domain(format!("need a < x0 < b, got a = {a}, x0 = {x0}, b = {b}")));
    }
    Ok(())
}

/// Free process started at `x0` until it leaves `(a, b)`.
pub fn simulate_corridor(model: &LevyModel, a: f64, b: f64, x0: f64, q: f64, cfg: &SimulationConfig) -> Result<CorridorStats> {
    cfg.check(model, q)?;
    check_corridor(a, b, x0)?;
    let dynamics = cfg.dynamics(model);
    let exits = map_indexed(cfg.n_paths, cfg.execution, |i| {
        paths::corridor(&dynamics, a, b, x0, &[], &mut rng::path_rng(cfg.seed, i)).0
    });
    let censored = exits.iter().filter(|e| matches!(e, CorridorExit::Censored)).count();
    let censored_fraction = cfg.censoring(censored, q)?;
    Ok(CorridorStats {
        q,
        exits,
        censored_fraction,
    })
}

/// Stopped states `(t ^ tau, X(t ^ tau))` at each of `times` for every path.
pub fn simulate_stopped_states(
    model: &LevyModel,
    a: f64,
    b: f64,
    x0: f64,
    times: &[f64],
    cfg: &SimulationConfig,
) -> Result<Vec<Vec<(f64, f64)>>> {
    cfg.validate()?;
    check_corridor(a, b, x0)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidArgument("observation times must be sorted and >= 0".into()));
    }
    let dynamics = cfg.dynamics(model);
    Ok(map_indexed(cfg.n_paths, cfg.execution, |i| {
        paths::corridor(&dynamics, a, b, x0, times, &mut rng::path_rng(cfg.seed, i)).1
    }))
}
