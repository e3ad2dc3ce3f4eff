//! q-scale functions `W`, `Z`, `W-bar`, `Z-bar` of a spectrally positive
//! Lévy process.
//!
//! `W` is the function on `[0, inf)` whose Laplace transform is
//! `1 / (Psi(theta) - q)` for `theta > Phi(q)`, extended by zero to the
//! negative half-line. The companions are
//!
//! ```text
//! Z(x)     = 1 + q int_0^x W,   W-bar(x) = int_0^x W,   Z-bar(x) = int_0^x Z
//! ```
//!
//! with `Z = 1` and `Z-bar(x) = x` for `x <= 0`.
//!
//! Rational exponents (no jumps, exponential or Erlang jumps) are inverted
//! exactly by partial fractions. Everything else goes through a numerical
//! inversion on a cached grid with monotone Hermite interpolation.

mod closed;
mod numeric;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use closed::ClosedForm;
use numeric::{Inverter, NumericGrid};

pub use crate::numerics::poly::PoleTerm;

/// Numerical Laplace inversion algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InversionMethod {
    /// Fixed Talbot contour with `nodes` abscissae.
    Talbot { nodes: usize },
    /// Gaver-Stehfest with even `order`.
    GaverStehfest { order: usize },
}

impl Default for InversionMethod {
    fn default() -> Self {
        InversionMethod::Talbot { nodes: 48 }
    }
}

/// How a [`ScaleSet`] was computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    RationalClosedForm,
    NumericInversion(InversionMethod),
}

/// Requested backend.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BackendChoice {
    /// Closed form when `Psi` is rational, Talbot inversion otherwise.
    #[default]
    Auto,
    /// Force numerical inversion, even when a closed form exists.
    Numeric(InversionMethod),
}

#[derive(Debug, Clone)]
enum Repr {
    Closed(Box<ClosedForm>),
    Numeric(Box<NumericGrid>),
}

/// One row of a scale-function table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleRow {
    pub x: f64,
    pub w: f64,
    pub z: f64,
    pub w_bar: f64,
    pub z_bar: f64,
}

/// Scale functions of one model at one discount rate `q > 0`.
#[derive(Debug, Clone)]
pub struct ScaleSet {
    model: LevyModel,
    q: f64,
    phi: f64,
    x_max: f64,
    grid: Vec<f64>,
    repr: Repr,
}

impl ScaleSet {
    /// Build with the automatic backend choice.
    pub fn build(model: &LevyModel, q: f64, x_max: f64, n_grid: usize) -> Result<Self> {
        Self::build_with(model, q, x_max, n_grid, BackendChoice::Auto)
    }

    pub fn build_with(model: &LevyModel, q: f64, x_max: f64, n_grid: usize, choice: BackendChoice) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale functions need q > 0, got {q}")));
        }
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("x_max must be > 0, got {x_max}")));
        }
        if n_grid < 2 {
            return Err(Error::InvalidArgument(format!("n_grid must be >= 2, got {n_grid}")));
        }
        let phi = model.phi(q)?;
        let step = x_max / (n_grid - 1) as f64;
        let grid: Vec<f64> = (0..n_grid)
            .map(|i| if i == n_grid - 1 { x_max } else { i as f64 * step })
            .collect();
        let repr = match (choice, model.rational_resolvent(q)) {
            (BackendChoice::Auto, Some((num, den))) => Repr::Closed(Box::new(ClosedForm::build(&num, &den, q)?)),
            (BackendChoice::Auto, None) => Repr::Numeric(Box::new(Self::numeric(model, q, phi, &grid, InversionMethod::default())?)),
            (BackendChoice::Numeric(method), _) => Repr::Numeric(Box::new(Self::numeric(model, q, phi, &grid, method)?)),
        };
        Ok(Self {
            model: *model,
            q,
            phi,
            x_max,
            grid,
            repr,
        })
    }

    fn numeric(model: &LevyModel, q: f64, phi: f64, grid: &[f64], method: InversionMethod) -> Result<NumericGrid> {
        match method {
            InversionMethod::Talbot { nodes } if nodes < 2 => {
                return Err(Error::InvalidArgument(format!("Talbot needs >= 2 nodes, got {nodes}")))
            }
            InversionMethod::GaverStehfest { order } if order < 2 || order % 2 == 1 => {
                return Err(Error::InvalidArgument(format!("Stehfest order must be even and >= 2, got {order}")))
            }
            _ => {}
        }
        let inverter = Inverter::new(*model, q, phi, w_at_zero(model), method);
        NumericGrid::build(inverter, grid, w_prime_at_zero(model, q))
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `Phi(q)`, the exponential growth rate of `W`.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn backend(&self) -> Backend {
        match &self.repr {
            Repr::Closed(_) => Backend::RationalClosedForm,
            Repr::Numeric(n) => Backend::NumericInversion(n.inverter_method()),
        }
    }

    /// Poles of `1/(Psi - q)` with multiplicities and residues (closed form only).
    pub fn roots(&self) -> Option<&[PoleTerm]> {
        match &self.repr {
            Repr::Closed(c) => Some(&c.poles),
            Repr::Numeric(_) => None,
        }
    }

    fn check_grid(&self, x: f64) -> Result<()> {
        if x.is_nan() {
            return Err(Error::Domain("x is NaN".into()));
        }
        if matches!(self.repr, Repr::Numeric(_)) && x > self.x_max * (1.0 + 1e-12) {
            return Err(Error::OutOfGrid { x, x_max: self.x_max });
        }
        Ok(())
    }

    pub fn w(&self, x: f64) -> Result<f64> {
        self.check_grid(x)?;
        if x < 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.repr {
            Repr::Closed(c) => {
                if x == 0.0 {
                    w_at_zero(&self.model)
                } else {
                    c.w.eval(x)
                }
            }
            Repr::Numeric(n) => n.w.eval(x),
        })
    }

    pub fn w_bar(&self, x: f64) -> Result<f64> {
        self.check_grid(x)?;
        if x <= 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.repr {
            Repr::Closed(c) => c.w_bar.eval(x),
            Repr::Numeric(n) => n.w_bar.eval(x),
        })
    }

    pub fn z(&self, x: f64) -> Result<f64> {
        self.check_grid(x)?;
        if x <= 0.0 {
            return Ok(1.0);
        }
        Ok(match &self.repr {
            Repr::Closed(c) => c.z.eval(x),
            Repr::Numeric(n) => 1.0 + self.q * n.w_bar.eval(x),
        })
    }

    pub fn z_bar(&self, x: f64) -> Result<f64> {
        self.check_grid(x)?;
        if x <= 0.0 {
            return Ok(x);
        }
        Ok(match &self.repr {
            Repr::Closed(c) => c.z_bar.eval(x),
            Repr::Numeric(n) => x + self.q * n.w_bar_int.eval(x),
        })
    }

    /// `W'(x)` for `x > 0`.
    pub fn w_prime(&self, x: f64) -> Result<f64> {
        self.check_grid(x)?;
        if !(x > 0.0) {
            return Err(Error::Domain(format!("W' is defined on (0, inf), got x = {x}")));
        }
        Ok(match &self.repr {
            Repr::Closed(c) => c.w_prime.eval(x),
            Repr::Numeric(n) => {
                let wx = n.inverter.w(x);
                n.inverter.w_prime(x, wx)
            }
        })
    }

    /// `W(0+)`: `1/c0` under bounded variation, 0 otherwise.
    pub fn w_zero(&self) -> f64 {
        w_at_zero(&self.model)
    }

    /// `W'(0+)`: `2/sigma^2`, `(q + Pi(0,inf))/c0^2`, or infinity.
    pub fn w_prime_zero(&self) -> f64 {
        w_prime_at_zero(&self.model, self.q)
    }

    /// `1/(Psi(theta) - q)` for the same model and rate.
    pub fn resolvent(&self, theta: Complex64) -> Complex64 {
        1.0 / (self.model.laplace_exponent_complex(theta) - self.q)
    }

    /// The cached grid as table rows.
    pub fn table(&self) -> Result<Vec<ScaleRow>> {
        self.grid.iter().map(|&x| self.row(x)).collect()
    }

    pub fn row(&self, x: f64) -> Result<ScaleRow> {
        Ok(ScaleRow {
            x,
            w: self.w(x)?,
            z: self.z(x)?,
            w_bar: self.w_bar(x)?,
            z_bar: self.z_bar(x)?,
        })
    }
}

impl NumericGrid {
    fn inverter_method(&self) -> InversionMethod {
        self.inverter.method()
    }
}

fn w_at_zero(model: &LevyModel) -> f64 {
    match model.c0() {
        Some(c0) => 1.0 / c0,
        None => 0.0,
    }
}

fn w_prime_at_zero(model: &LevyModel, q: f64) -> f64 {
    if model.sigma() > 0.0 {
        2.0 / (model.sigma() * model.sigma())
    } else {
        let mass = model.jumps().total_mass();
        let c0 = model.drift();
        if mass.is_finite() {
            (q + mass) / (c0 * c0)
        } else {
            f64::INFINITY
        }
    }
}
