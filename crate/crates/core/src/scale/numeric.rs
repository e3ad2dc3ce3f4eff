//! Scale functions by numerical Laplace inversion on a cached grid.

use num_complex::Complex64;

use super::InversionMethod;
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::numerics::interp::Hermite;
use crate::numerics::inversion::{gaver_stehfest, stehfest_weights, talbot};
use crate::numerics::CompensatedSum;

const SIMPSON_RTOL: f64 = 1e-9;
const SIMPSON_MAX_LEVEL: u32 = 16;
/// Extra nodes `x_1 / 2^k` below the first grid point, where `W` may have
/// an unbounded slope.
const GEOMETRIC_NODES: i32 = 24;

/// Pointwise inversion of `1/(Psi - q)` and of the transform of `W'`.
#[derive(Debug, Clone)]
pub(crate) struct Inverter {
    model: LevyModel,
    q: f64,
    phi: f64,
    w0: f64,
    method: InversionMethod,
    stehfest: Vec<f64>,
}

impl Inverter {
    pub fn method(&self) -> InversionMethod {
        self.method
    }

    pub fn new(model: LevyModel, q: f64, phi: f64, w0: f64, method: InversionMethod) -> Self {
        let stehfest = match method {
            InversionMethod::GaverStehfest { order } => stehfest_weights(order),
            InversionMethod::Talbot { .. } => Vec::new(),
        };
        Self {
            model,
            q,
            phi,
            w0,
            method,
            stehfest,
        }
    }

    fn resolvent(&self, theta: Complex64) -> Complex64 {
        1.0 / (self.model.laplace_exponent_complex(theta) - self.q)
    }

    pub fn w(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return if x == 0.0 { self.w0 } else { 0.0 };
        }
        match self.method {
            InversionMethod::Talbot { nodes } => talbot(|s| self.resolvent(s), x, nodes, self.phi),
            InversionMethod::GaverStehfest { .. } => gaver_stehfest(
                |s| self.resolvent(Complex64::new(s, 0.0)).re,
                x,
                &self.stehfest,
                self.phi,
            ),
        }
    }

    /// `W'(x) = Phi W(x) + e^{Phi x} L^{-1}[s F(s + Phi) - W(0+)](x)`.
    pub fn w_prime(&self, x: f64, w_at_x: f64) -> f64 {
        // with bounded variation Psi = c0 theta + J(theta) and w0 = 1/c0, so the
        // difference is rewritten without cancellation at large |theta|
        let transform = |theta: Complex64| {
            if self.w0 > 0.0 {
                let c0 = self.model.drift();
                let jump = self.model.jumps().laplace_part(theta);
                (self.q - c0 * self.phi - jump) * self.resolvent(theta) / c0
            } else {
                (theta - self.phi) * self.resolvent(theta)
            }
        };
        let tail = match self.method {
            InversionMethod::Talbot { nodes } => talbot(transform, x, nodes, self.phi),
            InversionMethod::GaverStehfest { .. } => {
                gaver_stehfest(|s| transform(Complex64::new(s, 0.0)).re, x, &self.stehfest, self.phi)
            }
        };
        self.phi * w_at_x + tail
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NumericGrid {
    pub inverter: Inverter,
    pub w: Hermite,
    pub w_bar: Hermite,
    /// `int_0^x W-bar`
    pub w_bar_int: Hermite,
}

/// Simpson estimates of `int W` and `int (x1 - t) W(t) dt` over one interval,
/// refined until both stabilise.
fn simpson_interval(inv: &Inverter, x0: f64, x1: f64, w0: f64, w1: f64) -> Result<(f64, f64)> {
    let h = x1 - x0;
    // samples at the current refinement, in order, endpoints included
    let mut samples = vec![w0, w1];
    let estimate = |s: &[f64]| {
        let n = s.len() - 1;
        let step = h / n as f64;
        let mut a = CompensatedSum::default();
        let mut b = CompensatedSum::default();
        for (i, &v) in s.iter().enumerate() {
            let weight = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let t = x0 + i as f64 * step;
            a.add(weight * v);
            b.add(weight * v * (x1 - t));
        }
        (a.value() * step / 3.0, b.value() * step / 3.0)
    };
    let mut prev: Option<(f64, f64)> = None;
    for level in 1..=SIMPSON_MAX_LEVEL {
        let n = 1usize << level;
        let step = h / n as f64;
        let mut next = Vec::with_capacity(n + 1);
        for (i, &v) in samples.iter().enumerate() {
            next.push(v);
            if i + 1 < samples.len() {
                next.push(inv.w(x0 + (2 * i + 1) as f64 * step));
            }
        }
        samples = next;
        let cur = estimate(&samples);
        if let Some(p) = prev {
            let da = (cur.0 - p.0).abs();
            let db = (cur.1 - p.1).abs();
            if da <= SIMPSON_RTOL * cur.0.abs().max(1e-300) && db <= SIMPSON_RTOL * cur.1.abs().max(1e-300) {
                return Ok(cur);
            }
        }
        prev = Some(cur);
    }
    Err(Error::NonConvergence {
        what: "Simpson refinement of W-bar",
        detail: format!("interval [{x0}, {x1}] after 2^{SIMPSON_MAX_LEVEL} panels"),
    })
}

impl NumericGrid {
    pub fn build(inverter: Inverter, grid: &[f64], w_prime_zero: f64) -> Result<Self> {
        let mut nodes = vec![grid[0]];
        if grid.len() > 1 && grid[0] == 0.0 {
            nodes.extend((1..=GEOMETRIC_NODES).rev().map(|k| grid[1] * 2f64.powi(-k)));
        }
        nodes.extend_from_slice(&grid[1..]);
        let grid = &nodes[..];
        let n = grid.len();
        let w: Vec<f64> = grid.iter().map(|&x| inverter.w(x)).collect();
        if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonConvergence {
                what: "Laplace inversion",
                detail: format!("W({}) = {v} with {:?}", grid[i], inverter.method),
            });
        }
        let slopes: Vec<f64> = grid
            .iter()
            .zip(&w)
            .map(|(&x, &wx)| if x == 0.0 { w_prime_zero } else { inverter.w_prime(x, wx) })
            .collect();
        let mut w_bar = vec![0.0; n];
        let mut w_bar_int = vec![0.0; n];
        let mut acc_w = CompensatedSum::default();
        let mut acc_i = CompensatedSum::default();
        for i in 0..n - 1 {
            let (iw, iw_lever) = simpson_interval(&inverter, grid[i], grid[i + 1], w[i], w[i + 1])?;
            // int_{x_i}^{x_{i+1}} W-bar = h W-bar(x_i) + int (x_{i+1} - t) W(t) dt
            acc_i.add((grid[i + 1] - grid[i]) * w_bar[i] + iw_lever);
            acc_w.add(iw);
            w_bar[i + 1] = acc_w.value();
            w_bar_int[i + 1] = acc_i.value();
        }
        Ok(Self {
            w: Hermite::monotone(grid.to_vec(), w.clone(), Some(slopes)),
            w_bar: Hermite::new(grid.to_vec(), w_bar.clone(), w),
            w_bar_int: Hermite::new(grid.to_vec(), w_bar_int, w_bar),
            inverter,
        })
    }
}
