//! Barrier strategies with a terminal value `S` received at ruin.
//!
//! With `m = E[X(1)]` the value of the barrier strategy at level `b` is
//!
//! ```text
//! V_b(x) = L(b) Z(b - x) - Zbar(b - x) + m/q     0 <= x <= b
//!        = x - b + L(b) + m/q                    x > b
//! L(b)   = (Zbar(b) - m/q + S) / Z(b)
//! ```
//!
//! and the optimal barrier solves `Zbar(b*) = m/q - S` (or is 0 when the
//! right side is not positive).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::levy::LevyModel;
use crate::numerics::quad::{integrate, integrate_to_infinity, Tolerance};
use crate::numerics::roots::newton_bisect;
use crate::scale::{Backend, ScaleSet};

/// Tolerance on `b*`.
const BARRIER_XTOL: f64 = 1e-12;
/// Grid resolution for numerically inverted scale functions.
const NUMERIC_GRID: usize = 1001;

/// Faults that can be injected to check that verification catches them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    FlipLambdaSign,
}

/// Discount rate `q`, terminal value `S` and the scale functions at `q`.
#[derive(Debug, Clone)]
pub struct DividendProblem {
    scale: ScaleSet,
    terminal_value: f64,
    mean: f64,
    b_star: f64,
    fault: Fault,
}

/// `V_b` and `V_b'` at one barrier level.
#[derive(Debug, Clone, Copy)]
pub struct BarrierValue<'a> {
    problem: &'a DividendProblem,
    b: f64,
    lambda: f64,
}

impl DividendProblem {
    /// Builds the scale functions itself. For the numeric backend the grid
    /// covers `[0, 2 max(T, 1) + 5]` with `T = m/q - S`.
    pub fn new(model: &LevyModel, q: f64, terminal_value: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidArgument(format!("q must be > 0, got {q}")));
        }
        let target = model.mean() / q - terminal_value;
        let x_max = 2.0 * target.max(1.0) + 5.0;
        let scale = ScaleSet::build(model, q, x_max, NUMERIC_GRID)?;
        Self::with_scale(scale, terminal_value)
    }

    pub fn with_scale(scale: ScaleSet, terminal_value: f64) -> Result<Self> {
        if !terminal_value.is_finite() {
            return Err(Error::InvalidArgument(format!("S must be finite, got {terminal_value}")));
        }
        let mean = scale.model().mean();
        if !(mean > 0.0) {
            return Err(Error::InvalidModel(format!("E[X(1)] = {mean} must be > 0")));
        }
        let mut p = Self {
            scale,
            terminal_value,
            mean,
            b_star: 0.0,
            fault: Fault::None,
        };
        p.b_star = p.solve_barrier()?;
        Ok(p)
    }

    #[doc(hidden)]
    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = fault;
        self
    }

    pub fn model(&self) -> &LevyModel {
        self.scale.model()
    }

    pub fn q(&self) -> f64 {
        self.scale.q()
    }

    pub fn terminal_value(&self) -> f64 {
        self.terminal_value
    }

    pub fn scale(&self) -> &ScaleSet {
        &self.scale
    }

    /// `E[X(1)] = -Psi'(0+)`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `m/q - S`; the optimal barrier is interior iff this is positive.
    pub fn target(&self) -> f64 {
        self.mean / self.q() - self.terminal_value
    }

    /// `L(b) = (Zbar(b) - m/q + S) / Z(b)`.
    pub fn lambda_coeff(&self, b: f64) -> Result<f64> {
        check_barrier(b)?;
        let s = &self.scale;
        let lambda = (s.z_bar(b)? - self.mean / self.q() + self.terminal_value) / s.z(b)?;
        Ok(match self.fault {
            Fault::None => lambda,
            Fault::FlipLambdaSign => -lambda,
        })
    }

    pub fn barrier(&self, b: f64) -> Result<BarrierValue<'_>> {
        Ok(BarrierValue {
            problem: self,
            b,
            lambda: self.lambda_coeff(b)?,
        })
    }

    pub fn barrier_value(&self, b: f64, x: f64) -> Result<f64> {
        self.barrier(b)?.value(x)
    }

    pub fn barrier_value_derivative(&self, b: f64, x: f64) -> Result<f64> {
        self.barrier(b)?.derivative(x)
    }

    fn solve_barrier(&self) -> Result<f64> {
        let target = self.target();
        if target <= 0.0 {
            return Ok(0.0);
        }
        let s = &self.scale;
        // Zbar(b) >= b, so [0, T] brackets the root
        let f = |b: f64| Ok(s.z_bar(b)? - target);
        let b = newton_bisect(f, |b| s.z(b), 0.0, target, BARRIER_XTOL, 200)?;
        let polished = b - f(b)? / s.z(b)?;
        Ok(if polished > 0.0 && polished <= target { polished } else { b })
    }

    /// `b*`: the root of `Zbar(b) = m/q - S`, or 0.
    pub fn optimal_barrier(&self) -> f64 {
        self.b_star
    }

    /// `V(x) = V_{b*}(x)`.
    pub fn value_function(&self, x: f64) -> Result<f64> {
        check_surplus(x)?;
        let b = self.b_star;
        if b == 0.0 {
            return Ok(x + self.terminal_value);
        }
        if x > b {
            return Ok(x - b + self.mean / self.q());
        }
        Ok(-self.scale.z_bar(b - x)? + self.mean / self.q())
    }

    /// `V'(x) = Z(b* - x)`, 1 above the barrier.
    pub fn value_function_derivative(&self, x: f64) -> Result<f64> {
        check_surplus(x)?;
        if x >= self.b_star {
            return Ok(1.0);
        }
        self.scale.z(self.b_star - x)
    }

    /// `(A - q) V_b(x)` for `0 < x < b`, where
    /// `A g = sigma^2/2 g'' - c g' + int (g(x + y) - g(x)) pi(y) dy`.
    pub fn generator_residual(&self, b: f64, x: f64) -> Result<f64> {
        if !(0.0 < x && x < b) {
            return Err(Error::Domain(format!("need 0 < x < b, got x = {x}, b = {b}")));
        }
        let v = self.barrier(b)?;
        let model = self.model();
        let (fx, d1) = (v.value(x)?, v.derivative(x)?);
        let sigma = model.sigma();
        let d2 = if sigma > 0.0 { v.second_derivative(x)? } else { 0.0 };
        let jumps = *model.jumps();
        let jump_part = match jumps.total_mass() {
            m if m == 0.0 => 0.0,
            _ => {
                let mut failure = None;
                let small = 1e-6 * b.max(1.0);
                let mut increment = |y: f64| {
                    if y < small {
                        // avoid cancellation next to a singular density
                        return d1 * y + 0.5 * d2 * y * y;
                    }
                    match v.value(x + y) {
                        Ok(g) => g - fx,
                        Err(e) => {
                            failure = Some(e);
                            0.0
                        }
                    }
                };
                let split = b - x;
                let tol = Tolerance::default();
                let inside = integrate(|y| increment(y) * jumps.density(y), 0.0, split, tol)?;
                let outside = integrate_to_infinity(|y| increment(y) * jumps.density(y), split, tol)?;
                if let Some(e) = failure {
                    return Err(e);
                }
                inside.value + outside.value
            }
        };
        Ok(0.5 * sigma * sigma * d2 - model.drift() * d1 + jump_part - self.q() * fx)
    }

    /// Smallest `V(x) - V_b(x)` over the grid. Negative values beyond
    /// rounding would contradict optimality of `b*`.
    pub fn dominance_scan(&self, barriers: &[f64], xs: &[f64], mode: Execution) -> Result<DominanceWitness> {
        let v_star = xs.iter().map(|&x| self.value_function(x)).collect::<Result<Vec<_>>>()?;
        let rows = try_map_indexed(barriers.len(), mode, |i| {
            let bv = self.barrier(barriers[i])?;
            let mut worst = (f64::INFINITY, f64::NAN);
            for (&x, &v) in xs.iter().zip(&v_star) {
                let gap = v - bv.value(x)?;
                if gap < worst.0 {
                    worst = (gap, x);
                }
            }
            Ok(worst)
        })?;
        let mut out = DominanceWitness {
            min_gap: f64::INFINITY,
            b: f64::NAN,
            x: f64::NAN,
        };
        for (i, (gap, x)) in rows.into_iter().enumerate() {
            if gap < out.min_gap {
                out = DominanceWitness {
                    min_gap: gap,
                    b: barriers[i],
                    x,
                };
            }
        }
        Ok(out)
    }

    /// Whether the scale functions are exact rather than interpolated.
    pub fn is_closed_form(&self) -> bool {
        self.scale.backend() == Backend::RationalClosedForm
    }
}

/// Worst case of a dominance scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceWitness {
    pub min_gap: f64,
    pub b: f64,
    pub x: f64,
}

impl BarrierValue<'_> {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        check_surplus(x)?;
        let p = self.problem;
        let m_q = p.mean / p.q();
        if x <= self.b {
            let s = &p.scale;
            return Ok(self.lambda * s.z(self.b - x)? - s.z_bar(self.b - x)? + m_q);
        }
        let affine = x - self.b + self.lambda + m_q;
        debug_assert!({
            let at_b = self.value(self.b).unwrap_or(f64::NAN) + (x - self.b);
            (affine - at_b).abs() <= 1e-9 * affine.abs().max(1.0)
        });
        Ok(affine)
    }

    /// `V_b'(x)` for `x > 0`: `-q L(b) W(b - x) + Z(b - x)`, 1 above `b`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("V_b' is evaluated on (0, inf), got x = {x}")));
        }
        if x > self.b {
            return Ok(1.0);
        }
        let s = &self.problem.scale;
        Ok(-self.problem.q() * self.lambda * s.w(self.b - x)? + s.z(self.b - x)?)
    }

    /// `V_b''(x) = q L(b) W'(b - x) - q W(b - x)` for `0 < x < b`.
    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        if !(0.0 < x && x < self.b) {
            return Err(Error::Domain(format!("V_b'' needs 0 < x < b, got x = {x}, b = {}", self.b)));
        }
        let s = &self.problem.scale;
        let q = self.problem.q();
        Ok(q * self.lambda * s.w_prime(self.b - x)? - q * s.w(self.b - x)?)
    }
}

fn check_barrier(b: f64) -> Result<()> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("barrier must be >= 0, got {b}")));
    }
    Ok(())
}

fn check_surplus(x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("surplus must be >= 0, got {x}")));
    }
    Ok(())
}
