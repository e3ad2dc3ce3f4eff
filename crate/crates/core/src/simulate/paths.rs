//! Single-path kernels. Jump epochs are exact (exponential waiting times);
//! between jumps the continuous part moves on a grid of step `dt`, or in one
//! exact linear piece when `sigma = 0`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::jumps::JumpSampler;
use crate::error::{Error, Result};
use crate::levy::LevyModel;

/// Exponents above this make a crossing probability negligible (`e^-40`).
const NEGLIGIBLE: f64 = 40.0;

#[derive(Debug, Clone)]
pub(crate) struct Dynamics {
    /// downward drift after folding in truncated small jumps
    pub c_eff: f64,
    pub sigma: f64,
    pub jumps: JumpSampler,
    pub dt: f64,
    pub horizon: f64,
    pub bridge: bool,
}

impl Dynamics {
    pub fn new(model: &LevyModel, dt: f64, horizon: f64, bridge: bool) -> Self {
        let jumps = JumpSampler::new(model.jumps());
        Self {
            c_eff: model.drift() - jumps.drift_shift,
            sigma: model.sigma(),
            jumps,
            dt,
            horizon,
            bridge,
        }
    }

    /// Time for the linear descent to cover `dist` (infinite if not descending).
    fn descent_time(&self, dist: f64) -> f64 {
        if self.c_eff > 0.0 {
            dist / self.c_eff
        } else {
            f64::INFINITY
        }
    }

    fn gaussian_increment<R: Rng>(&self, h: f64, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        -self.c_eff * h + self.sigma * h.sqrt() * z
    }
}

/// Maximum of a Brownian bridge from 0 to `y` over a step with variance `var`.
fn bridge_max<R: Rng>(y: f64, var: f64, rng: &mut R) -> f64 {
    let v: f64 = 1.0 - rng.random::<f64>();
    0.5 * (y + (y * y - 2.0 * var * v.ln()).sqrt())
}

/// Did a bridge with positive endpoint distances `d0`, `d1` to a level touch it?
fn bridge_touches<R: Rng>(d0: f64, d1: f64, var: f64, rng: &mut R) -> bool {
    let a = 2.0 * d0 * d1 / var;
    a < NEGLIGIBLE && rng.random::<f64>() < (-a).exp()
}

/// Result of one controlled path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    /// `int_0^tau e^{-qt} dL_t`
    pub dividends: f64,
    /// `e^{-q tau}`, 0 when censored
    pub terminal: f64,
    pub ruin_time: Option<f64>,
    pub censored: bool,
}

struct Ledger {
    q: f64,
    dividends: f64,
}

impl Ledger {
    fn pay(&mut self, t: f64, amount: f64) {
        debug_assert!(amount >= 0.0);
        self.dividends += (-self.q * t).exp() * amount;
    }

    fn ruined(self, tau: f64) -> PathOutcome {
        PathOutcome {
            dividends: self.dividends,
            terminal: (-self.q * tau).exp(),
            ruin_time: Some(tau),
            censored: false,
        }
    }

    fn censored(self) -> PathOutcome {
        PathOutcome {
            dividends: self.dividends,
            terminal: 0.0,
            ruin_time: None,
            censored: true,
        }
    }
}

/// Surplus reflected at `b` (barrier strategy), killed when it reaches 0.
pub(crate) fn reflected<R: Rng>(dyn_: &Dynamics, b: f64, x0: f64, q: f64, rng: &mut R) -> PathOutcome {
    let mut ledger = Ledger { q, dividends: 0.0 };
    let mut t = 0.0;
    let mut u = x0;
    if u > b {
        ledger.pay(0.0, u - b);
        u = b;
    }
    if u <= 0.0 {
        return ledger.ruined(0.0);
    }
    let var_dt = dyn_.sigma * dyn_.sigma * dyn_.dt;
    let mut next_jump = dyn_.jumps.waiting_time(rng);
    loop {
        if dyn_.sigma == 0.0 {
            let t_hit = t + dyn_.descent_time(u);
            if t_hit <= next_jump.min(dyn_.horizon) {
                return ledger.ruined(t_hit);
            }
            if next_jump >= dyn_.horizon {
                return ledger.censored();
            }
            u -= dyn_.c_eff * (next_jump - t);
            t = next_jump;
        } else {
            let to_jump = next_jump - t;
            let to_end = dyn_.horizon - t;
            let jump_now = to_jump <= dyn_.dt && to_jump <= to_end;
            let h = if jump_now { to_jump } else { dyn_.dt.min(to_end) };
            let var = if h == dyn_.dt { var_dt } else { dyn_.sigma * dyn_.sigma * h };
            let y = dyn_.gaussian_increment(h, rng);
            let gap = b - u;
            let excess = if u + y >= b || 2.0 * gap * (gap - y) / var < NEGLIGIBLE {
                (u + bridge_max(y, var, rng) - b).max(0.0)
            } else {
                0.0
            };
            if excess > 0.0 {
                let frac = if y > 0.0 { (gap / y).clamp(0.0, 1.0) } else { 0.5 };
                ledger.pay(t + frac * h, excess);
            }
            let u_new = u + y - excess;
            if u_new <= 0.0 {
                return ledger.ruined(t + h * u / (u - u_new));
            }
            if dyn_.bridge && bridge_touches(u, u_new, var, rng) {
                return ledger.ruined(t + h * u / (u + u_new));
            }
            u = u_new;
            if !jump_now {
                t += h;
                if h == to_end {
                    return ledger.censored();
                }
                continue;
            }
            t = next_jump;
        }
        u += dyn_.jumps.size(rng);
        if u > b {
            ledger.pay(t, u - b);
            u = b;
        }
        next_jump = t + dyn_.jumps.waiting_time(rng);
    }
}

/// A dividend policy consulted at time 0, after every jump and (with a
/// Gaussian part) after every grid step. Returns the lump to pay now.
pub trait DividendStrategy: Sync {
    fn lump(&self, surplus: f64, t: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64 + Sync> DividendStrategy for F {
    fn lump(&self, surplus: f64, t: f64) -> f64 {
        self(surplus, t)
    }
}

/// Pay everything above `level`.
#[derive(Debug, Clone, Copy)]
pub struct BarrierStrategy {
    pub level: f64,
}

impl DividendStrategy for BarrierStrategy {
    fn lump(&self, surplus: f64, _t: f64) -> f64 {
        (surplus - self.level).max(0.0)
    }
}

/// Liquidate the whole surplus at time 0.
#[derive(Debug, Clone, Copy)]
pub struct PayAllNow;

impl DividendStrategy for PayAllNow {
    fn lump(&self, surplus: f64, _t: f64) -> f64 {
        surplus
    }
}

/// When above `trigger`, pay down to `target < trigger` in one lump.
#[derive(Debug, Clone, Copy)]
pub struct BandStrategy {
    pub trigger: f64,
    pub target: f64,
}

impl DividendStrategy for BandStrategy {
    fn lump(&self, surplus: f64, _t: f64) -> f64 {
        if surplus > self.trigger {
            surplus - self.target
        } else {
            0.0
        }
    }
}

fn admissible_lump(strategy: &dyn DividendStrategy, u: f64, t: f64) -> Result<f64> {
    let lump = strategy.lump(u, t);
    if !(lump >= 0.0) || lump > u * (1.0 + 1e-12) {
        return Err(Error::InadmissibleStrategy { lump, surplus: u, t });
    }
    Ok(lump.min(u))
}

/// Surplus controlled by an arbitrary admissible strategy.
pub(crate) fn with_strategy<R: Rng>(
    dyn_: &Dynamics,
    strategy: &dyn DividendStrategy,
    x0: f64,
    q: f64,
    rng: &mut R,
) -> Result<PathOutcome> {
    let mut ledger = Ledger { q, dividends: 0.0 };
    let mut t = 0.0;
    let mut u = x0;
    let lump = admissible_lump(strategy, u, t)?;
    if lump > 0.0 {
        ledger.pay(t, lump);
        u -= lump;
    }
    if u <= 0.0 {
        return Ok(ledger.ruined(0.0));
    }
    let mut next_jump = dyn_.jumps.waiting_time(rng);
    loop {
        if dyn_.sigma == 0.0 {
            let t_hit = t + dyn_.descent_time(u);
            if t_hit <= next_jump.min(dyn_.horizon) {
                return Ok(ledger.ruined(t_hit));
            }
            if next_jump >= dyn_.horizon {
                return Ok(ledger.censored());
            }
            u -= dyn_.c_eff * (next_jump - t);
            t = next_jump;
            u += dyn_.jumps.size(rng);
            next_jump = t + dyn_.jumps.waiting_time(rng);
        } else {
            let to_jump = next_jump - t;
            let to_end = dyn_.horizon - t;
            let jump_now = to_jump <= dyn_.dt && to_jump <= to_end;
            let h = if jump_now { to_jump } else { dyn_.dt.min(to_end) };
            let var = dyn_.sigma * dyn_.sigma * h;
            let u_new = u + dyn_.gaussian_increment(h, rng);
            if u_new <= 0.0 {
                return Ok(ledger.ruined(t + h * u / (u - u_new)));
            }
            if dyn_.bridge && bridge_touches(u, u_new, var, rng) {
                return Ok(ledger.ruined(t + h * u / (u + u_new)));
            }
            u = u_new;
            if jump_now {
                t = next_jump;
                u += dyn_.jumps.size(rng);
                next_jump = t + dyn_.jumps.waiting_time(rng);
            } else {
                t += h;
                if h == to_end {
                    return Ok(ledger.censored());
                }
            }
        }
        let lump = admissible_lump(strategy, u, t)?;
        if lump > 0.0 {
            ledger.pay(t, lump);
            u -= lump;
            if u <= 0.0 {
                return Ok(ledger.ruined(t));
            }
        }
    }
}

/// How a path left the corridor `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorridorExit {
    Down { t: f64 },
    UpByJump { t: f64, pre: f64, post: f64 },
    UpByCreep { t: f64 },
    Censored,
}

impl CorridorExit {
    pub fn time(&self) -> Option<f64> {
        match *self {
            CorridorExit::Down { t } | CorridorExit::UpByJump { t, .. } | CorridorExit::UpByCreep { t } => Some(t),
            CorridorExit::Censored => None,
        }
    }
}

/// Free path started in `(a, b)` until it leaves. `observe` holds sorted
/// times at which the stopped state `(t ^ tau, X(t ^ tau))` is recorded.
pub(crate) fn corridor<R: Rng>(
    dyn_: &Dynamics,
    a: f64,
    b: f64,
    x0: f64,
    observe: &[f64],
    rng: &mut R,
) -> (CorridorExit, Vec<(f64, f64)>) {
    let mut seen = Vec::with_capacity(observe.len());
    let mut t = 0.0;
    let mut u = x0;
    let mut next_jump = dyn_.jumps.waiting_time(rng);
    let finish = |exit: CorridorExit, state: f64, mut seen: Vec<(f64, f64)>| {
        let tau = exit.time().unwrap_or(f64::INFINITY);
        while seen.len() < observe.len() {
            let at = observe[seen.len()];
            seen.push((at.min(tau), state));
        }
        (exit, seen)
    };
    // observation times at 0 (or before any motion)
    while seen.len() < observe.len() && observe[seen.len()] <= 0.0 {
        seen.push((observe[seen.len()], u));
    }
    loop {
        let next_obs = observe.get(seen.len()).copied().unwrap_or(f64::INFINITY);
        if dyn_.sigma == 0.0 {
            let stop = next_jump.min(next_obs).min(dyn_.horizon);
            let t_hit = t + dyn_.descent_time(u - a);
            if t_hit <= stop {
                return finish(CorridorExit::Down { t: t_hit }, a, seen);
            }
            u -= dyn_.c_eff * (stop - t);
            t = stop;
            if stop == next_obs && stop < next_jump {
                seen.push((t, u));
                continue;
            }
            if stop >= dyn_.horizon && stop < next_jump {
                return finish(CorridorExit::Censored, u, seen);
            }
        } else {
            let to_jump = next_jump - t;
            let to_obs = next_obs - t;
            let to_end = dyn_.horizon - t;
            let h = dyn_.dt.min(to_jump).min(to_obs).min(to_end);
            let var = dyn_.sigma * dyn_.sigma * h;
            let u_new = u + dyn_.gaussian_increment(h, rng);
            if u_new <= a {
                return finish(CorridorExit::Down { t: t + h * (u - a) / (u - u_new) }, a, seen);
            }
            if u_new >= b {
                return finish(CorridorExit::UpByCreep { t: t + h * (b - u) / (u_new - u) }, b, seen);
            }
            if dyn_.bridge {
                if bridge_touches(u - a, u_new - a, var, rng) {
                    return finish(CorridorExit::Down { t: t + h * (u - a) / ((u - a) + (u_new - a)) }, a, seen);
                }
                if bridge_touches(b - u, b - u_new, var, rng) {
                    return finish(CorridorExit::UpByCreep { t: t + h * (b - u) / ((b - u) + (b - u_new)) }, b, seen);
                }
            }
            u = u_new;
            if h == to_jump {
                t = next_jump;
            } else {
                if h == to_obs {
                    t = next_obs;
                    seen.push((t, u));
                } else if h == to_end {
                    return finish(CorridorExit::Censored, u, seen);
                } else {
                    t += h;
                }
                continue;
            }
        }
        // a jump at time t
        let pre = u;
        u += dyn_.jumps.size(rng);
        next_jump = t + dyn_.jumps.waiting_time(rng);
        if u > b {
            return finish(CorridorExit::UpByJump { t, pre, post: u }, u, seen);
        }
    }
}
