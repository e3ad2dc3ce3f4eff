//! Two-sided exit identities of the free process and the ruin transform of
//! the process reflected at a barrier, written in terms of scale functions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quad::{integrate_to_infinity, integrate_with_breaks, Estimate, Tolerance};
use crate::scale::ScaleSet;
use crate::simulate::{simulate_stopped_states, McEstimate, SimulationConfig};

/// Absolute tolerance of the overshoot double integral.
const OVERSHOOT_ABS_TOL: f64 = 1e-8;

/// Start `x` inside `(a, b)` with discount rate `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitCorridor {
    a: f64,
    b: f64,
    x: f64,
    q: f64,
}

impl ExitCorridor {
    pub fn new(a: f64, b: f64, x: f64, q: f64) -> Result<Self> {
        if !(a < x && x < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("need a < x < b, got a = {a}, x = {x}, b = {b}")));
        }
        if !(q >= 0.0) {
            return Err(Error::InvalidArgument(format!("q must be >= 0, got {q}")));
        }
        Ok(Self { a, b, x, q })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Same corridor started elsewhere.
    pub fn with_start(&self, x: f64) -> Result<Self> {
        Self::new(self.a, self.b, x, self.q)
    }

    fn check(&self, s: &ScaleSet) -> Result<f64> {
        if (s.q() - self.q).abs() > 1e-14 * self.q.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "scale functions built at q = {} but the corridor uses q = {}",
                s.q(),
                self.q
            )));
        }
        let w_ba = s.w(self.b - self.a)?;
        if !(w_ba > 0.0) {
            return Err(Error::Internal(format!("W(b - a) = {w_ba} is not positive")));
        }
        Ok(w_ba)
    }
}

/// `E_x[e^{-q T_a^-}; T_a^- < T_b^+] = W(b - x) / W(b - a)`.
pub fn exit_down(s: &ScaleSet, c: &ExitCorridor) -> Result<f64> {
    let w_ba = c.check(s)?;
    Ok(s.w(c.b - c.x)? / w_ba)
}

/// `E_x[e^{-q T_b^+}; T_b^+ < T_a^-] = Z(b - x) - W(b - x) Z(b - a) / W(b - a)`.
pub fn exit_up(s: &ScaleSet, c: &ExitCorridor) -> Result<f64> {
    let w_ba = c.check(s)?;
    let z_ba = s.z(c.b - c.a)?;
    Ok(s.z(c.b - c.x)? - s.w(c.b - c.x)? * z_ba / w_ba)
}

/// Part of [`exit_up`] where `b` is reached continuously:
/// `sigma^2/2 (W'(b - x) - W(b - x) W'(b - a) / W(b - a))`.
///
/// Only defined with a Gaussian component.
pub fn creep_up(s: &ScaleSet, c: &ExitCorridor) -> Result<f64> {
    let sigma = s.model().sigma();
    if sigma == 0.0 {
        return Err(Error::Unsupported("upward creeping needs sigma > 0".into()));
    }
    let w_ba = c.check(s)?;
    let ratio = s.w(c.b - c.x)? / w_ba;
    Ok(0.5 * sigma * sigma * (s.w_prime(c.b - c.x)? - ratio * s.w_prime(c.b - c.a)?))
}

/// Killed potential density `u(x, y) = W(b - x) W(y - a) / W(b - a) - W(y - x)`.
pub fn potential_density(s: &ScaleSet, c: &ExitCorridor, y: f64) -> Result<f64> {
    if !(c.a < y && y < c.b) {
        return Err(Error::Domain(format!("y = {y} is outside ({}, {})", c.a, c.b)));
    }
    let w_ba = c.check(s)?;
    Ok(s.w(c.b - c.x)? * s.w(y - c.a)? / w_ba - s.w(y - c.x)?)
}

/// Joint density of `(X(tau-), X(tau))` on an upward exit by a jump:
/// `u(x, y) pi(z - y)`.
pub fn overshoot_density(s: &ScaleSet, c: &ExitCorridor, y: f64, z: f64) -> Result<f64> {
    if !(z >= c.b) {
        return Err(Error::Domain(format!("z = {z} must be >= b = {}", c.b)));
    }
    Ok(potential_density(s, c, y)? * s.model().jumps().density(z - y))
}

/// Total mass of [`overshoot_density`] over `(a, b) x [b, inf)`: the
/// discounted probability of leaving upward by a jump. Nested adaptive
/// quadrature, split at `y = x` where `u` has a kink.
pub fn overshoot_mass(s: &ScaleSet, c: &ExitCorridor) -> Result<Estimate> {
    c.check(s)?;
    let jumps = *s.model().jumps();
    let tol = Tolerance::abs(OVERSHOOT_ABS_TOL);
    let inner_tol = Tolerance::abs(0.1 * OVERSHOOT_ABS_TOL);
    let mut failure = None;
    let outer = integrate_with_breaks(
        |y| {
            if failure.is_some() || y <= c.a || y >= c.b {
                return 0.0;
            }
            let u = match potential_density(s, c, y) {
                Ok(u) => u,
                Err(e) => {
                    failure = Some(e);
                    return 0.0;
                }
            };
            if u == 0.0 {
                return 0.0;
            }
            match integrate_to_infinity(|z| jumps.density(z - y), c.b, inner_tol) {
                Ok(inner) => u * inner.value,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        c.a,
        c.b,
        &[c.x],
        tol,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}

/// Mass of [`overshoot_density`] over the box `[y0, y1) x [z0, z1)`, with the
/// `z` integral done through the Lévy tail.
pub fn overshoot_box(s: &ScaleSet, c: &ExitCorridor, y: (f64, f64), z: (f64, f64)) -> Result<f64> {
    if !(c.a <= y.0 && y.0 < y.1 && y.1 <= c.b && c.b <= z.0 && z.0 < z.1) {
        return Err(Error::Domain(format!("box {y:?} x {z:?} is not inside (a, b) x [b, inf)")));
    }
    c.check(s)?;
    let jumps = *s.model().jumps();
    let mut failure = None;
    let est = integrate_with_breaks(
        |yy| {
            if failure.is_some() || yy <= c.a || yy >= c.b {
                return 0.0;
            }
            match potential_density(s, c, yy) {
                Ok(u) => u * (jumps.tail(z.0 - yy) - jumps.tail(z.1 - yy)),
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        y.0,
        y.1,
        &[c.x],
        Tolerance::abs(OVERSHOOT_ABS_TOL),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

/// `E_x[e^{-q T}]` for the ruin time `T` of the process reflected at `b`:
/// `Z(b - x) / Z(b)`.
pub fn ruin_laplace(s: &ScaleSet, b: f64, x: f64) -> Result<f64> {
    if !(0.0 <= x && x <= b) {
        return Err(Error::Domain(format!("need 0 <= x <= b, got x = {x}, b = {b}")));
    }
    Ok(s.z(b - x)? / s.z(b)?)
}

/// Stopped processes `e^{-q (t ^ tau)} f(b - X(t ^ tau))` that are martingales
/// up to the first exit from the corridor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Martingale {
    /// `f = W`
    W,
    /// `f = Z`
    Z,
    /// `f = Z - W Z(b - a) / W(b - a)`
    ExitUp,
}

impl Martingale {
    pub const ALL: [Martingale; 3] = [Martingale::W, Martingale::Z, Martingale::ExitUp];

    pub fn name(self) -> &'static str {
        match self {
            Martingale::W => "W",
            Martingale::Z => "Z",
            Martingale::ExitUp => "Z-W",
        }
    }

    fn eval(self, s: &ScaleSet, c: &ExitCorridor, level: f64) -> Result<f64> {
        let y = c.b - level;
        match self {
            Martingale::W => s.w(y),
            Martingale::Z => s.z(y),
            Martingale::ExitUp => Ok(s.z(y)? - s.w(y)? * s.z(c.b - c.a)? / s.w(c.b - c.a)?),
        }
    }
}

/// Drift of a martingale estimated at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingalePoint {
    pub t: f64,
    /// empirical mean at `t` minus the value at time 0
    pub residual: McEstimate,
}

/// Simulated `E[M(t)] - M(0)` for each `t` in `times`; each should vanish.
pub fn martingale_residual(
    s: &ScaleSet,
    c: &ExitCorridor,
    kind: Martingale,
    times: &[f64],
    cfg: &SimulationConfig,
) -> Result<Vec<MartingalePoint>> {
    c.check(s)?;
    let states = simulate_stopped_states(s.model(), c.a, c.b, c.x, times, cfg)?;
    martingale_residual_from(s, c, kind, times, &states)
}

/// As [`martingale_residual`], reusing stopped states already simulated.
pub fn martingale_residual_from(
    s: &ScaleSet,
    c: &ExitCorridor,
    kind: Martingale,
    times: &[f64],
    states: &[Vec<(f64, f64)>],
) -> Result<Vec<MartingalePoint>> {
    let start = kind.eval(s, c, c.x)?;
    let mut out = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let samples = states
            .iter()
            .map(|path| {
                let (tt, level) = path[k];
                Ok((-c.q * tt).exp() * kind.eval(s, c, level)? - start)
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(MartingalePoint {
            t,
            residual: McEstimate::from_samples(&samples),
        });
    }
    Ok(out)
}
