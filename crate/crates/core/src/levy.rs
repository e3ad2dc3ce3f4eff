//! Spectrally positive Lévy processes described by their characteristics.
//!
//! The process moves down continuously with drift `c` and Gaussian
//! coefficient `sigma`, and jumps upward according to a parametric Lévy
//! measure. Its Laplace exponent is
//!
//! ```text
//! Psi(theta) = c theta + sigma^2 theta^2 / 2 + int_0^inf (e^{-theta x} - 1) Pi(dx)
//! ```
//!
//! Every supported family has `int (1 ^ x) Pi(dx) < inf`, so the jump
//! integral needs no compensator and `c` is the drift of the
//! bounded-variation representation whenever `sigma = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::poly::Poly;
use crate::numerics::roots::brent;
use crate::numerics::special::{exp_integral_e1, gamma_p_int};

/// Parametric upward-jump measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum JumpSpec {
    /// Jumps at rate `lambda`, sizes exponential with mean `1/mu`.
    #[serde(rename = "exp_cp")]
    ExponentialCompoundPoisson { lambda: f64, mu: f64 },
    /// Jumps at rate `lambda`, sizes Erlang(`shape`, `scale`).
    #[serde(rename = "erlang_cp")]
    ErlangCompoundPoisson { lambda: f64, shape: u32, scale: f64 },
    /// Gamma subordinator `Pi(dx) = shape x^{-1} e^{-x/scale} dx`. Jumps
    /// below `truncation` are replaced by their mean when simulating.
    #[serde(rename = "gamma")]
    GammaSubordinator { shape: f64, scale: f64, truncation: f64 },
    #[serde(rename = "none")]
    NoJumps,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl JumpSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => {
                positive("lambda", lambda)?;
                positive("mu", mu)
            }
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => {
                positive("lambda", lambda)?;
                positive("scale", scale)?;
                if shape == 0 {
                    return Err(Error::InvalidModel("Erlang shape must be >= 1".into()));
                }
                Ok(())
            }
            JumpSpec::GammaSubordinator {
                shape,
                scale,
                truncation,
            } => {
                positive("shape", shape)?;
                positive("scale", scale)?;
                positive("truncation", truncation)
            }
            JumpSpec::NoJumps => Ok(()),
        }
    }

    /// `int_0^inf (e^{-theta x} - 1) Pi(dx)` for complex `theta` with `Re theta >= 0`.
    pub fn laplace_part(&self, theta: Complex64) -> Complex64 {
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => -lambda * theta / (mu + theta),
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => {
                lambda * ((1.0 + scale * theta).powi(-(shape as i32)) - 1.0)
            }
            JumpSpec::GammaSubordinator { shape, scale, .. } => -shape * (1.0 + scale * theta).ln(),
            JumpSpec::NoJumps => Complex64::new(0.0, 0.0),
        }
    }

    fn laplace_part_real(&self, theta: f64) -> f64 {
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => -lambda * theta / (mu + theta),
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => {
                lambda * ((1.0 + scale * theta).powi(-(shape as i32)) - 1.0)
            }
            JumpSpec::GammaSubordinator { shape, scale, .. } => -shape * (scale * theta).ln_1p(),
            JumpSpec::NoJumps => 0.0,
        }
    }

    fn laplace_part_prime(&self, theta: f64) -> f64 {
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => -lambda * mu / (mu + theta).powi(2),
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => {
                -lambda * shape as f64 * scale * (1.0 + scale * theta).powi(-(shape as i32) - 1)
            }
            JumpSpec::GammaSubordinator { shape, scale, .. } => -shape * scale / (1.0 + scale * theta),
            JumpSpec::NoJumps => 0.0,
        }
    }

    fn laplace_part_second(&self, theta: f64) -> f64 {
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => 2.0 * lambda * mu / (mu + theta).powi(3),
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => {
                let k = shape as f64;
                lambda * k * (k + 1.0) * scale * scale * (1.0 + scale * theta).powi(-(shape as i32) - 2)
            }
            JumpSpec::GammaSubordinator { shape, scale, .. } => shape * scale * scale / (1.0 + scale * theta).powi(2),
            JumpSpec::NoJumps => 0.0,
        }
    }

    /// `int x Pi(dx)`, the mean upward jump size per unit time.
    pub fn mean_rate(&self) -> f64 {
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => lambda / mu,
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => lambda * shape as f64 * scale,
            JumpSpec::GammaSubordinator { shape, scale, .. } => shape * scale,
            JumpSpec::NoJumps => 0.0,
        }
    }

    /// `Pi(0, inf)`; infinite for the gamma subordinator.
    pub fn total_mass(&self) -> f64 {
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, .. } | JumpSpec::ErlangCompoundPoisson { lambda, .. } => lambda,
            JumpSpec::GammaSubordinator { .. } => f64::INFINITY,
            JumpSpec::NoJumps => 0.0,
        }
    }

    /// `int_0^1 x Pi(dx)`.
    pub fn small_jump_mean(&self) -> f64 {
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => lambda * (1.0 - (-mu).exp() * (1.0 + mu)) / mu,
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => {
                lambda * shape as f64 * scale * gamma_p_int(shape + 1, 1.0 / scale)
            }
            JumpSpec::GammaSubordinator { shape, scale, .. } => shape * scale * (-(-1.0 / scale).exp_m1()),
            JumpSpec::NoJumps => 0.0,
        }
    }

    /// Lévy density `pi(y)` for `y > 0` (zero elsewhere).
    pub fn density(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => lambda * mu * (-mu * y).exp(),
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => {
                let k = shape as i32;
                let fact: f64 = (1..shape).map(f64::from).product();
                lambda * y.powi(k - 1) * (-y / scale).exp() / (scale.powi(k) * fact)
            }
            JumpSpec::GammaSubordinator { shape, scale, .. } => shape * (-y / scale).exp() / y,
            JumpSpec::NoJumps => 0.0,
        }
    }

    /// Tail mass `Pi(y, inf)` for `y > 0`.
    pub fn tail(&self, y: f64) -> f64 {
        let y = y.max(0.0);
        match *self {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => lambda * (-mu * y).exp(),
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => lambda * (1.0 - gamma_p_int(shape, y / scale)),
            JumpSpec::GammaSubordinator { shape, scale, .. } => shape * exp_integral_e1(y / scale),
            JumpSpec::NoJumps => 0.0,
        }
    }

    /// Whether `int (e^{-theta x} - 1) Pi(dx)` is a rational function of `theta`.
    pub fn is_rational(&self) -> bool {
        !matches!(self, JumpSpec::GammaSubordinator { .. })
    }
}

/// Raw serialized form of a model: `{"drift", "sigma", "jumps"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub drift: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "no_jumps")]
    pub jumps: JumpSpec,
}

fn no_jumps() -> JumpSpec {
    JumpSpec::NoJumps
}

/// A validated spectrally positive Lévy process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct LevyModel {
    drift: f64,
    sigma: f64,
    jumps: JumpSpec,
}

impl TryFrom<ModelDoc> for LevyModel {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        LevyModel::new(doc.drift, doc.sigma, doc.jumps)
    }
}

impl From<LevyModel> for ModelDoc {
    fn from(m: LevyModel) -> Self {
        ModelDoc {
            drift: m.drift,
            sigma: m.sigma,
            jumps: m.jumps,
        }
    }
}

impl LevyModel {
    /// Model that drifts to `+inf`: `E[X(1)] > 0` is enforced.
    pub fn new(drift: f64, sigma: f64, jumps: JumpSpec) -> Result<Self> {
        let m = Self::new_general(drift, sigma, jumps)?;
        let mean = m.mean();
        if mean <= 0.0 {
            return Err(Error::InvalidModel(format!(
                "E[X(1)] = {mean} must be > 0 (the process has to drift to +inf)"
            )));
        }
        Ok(m)
    }

    /// Model without the mean condition. Scale functions and exit identities
    /// with `q > 0` are still well defined; dividend problems reject it.
    pub fn new_general(drift: f64, sigma: f64, jumps: JumpSpec) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::InvalidModel(format!("drift must be finite, got {drift}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidModel(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        jumps.validate()?;
        if sigma == 0.0 {
            if matches!(jumps, JumpSpec::NoJumps) {
                return Err(Error::InvalidModel("sigma = 0 without jumps gives monotone paths".into()));
            }
            if drift <= 0.0 {
                return Err(Error::InvalidModel(format!(
                    "sigma = 0 with drift {drift} <= 0 is a subordinator (monotone paths)"
                )));
            }
        }
        Ok(Self { drift, sigma, jumps })
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn jumps(&self) -> &JumpSpec {
        &self.jumps
    }

    pub fn bounded_variation(&self) -> bool {
        // all supported families satisfy int (1 ^ x) Pi(dx) < inf
        self.sigma == 0.0
    }

    /// Drift `c0` of the bounded-variation form, `None` for unbounded variation.
    pub fn c0(&self) -> Option<f64> {
        self.bounded_variation().then_some(self.drift)
    }

    /// Drift in the truncated-compensator parameterization
    /// `c theta + ... + int (e^{-theta x} - 1 + theta x 1{x<1}) Pi(dx)`.
    pub fn compensated_drift(&self) -> f64 {
        self.drift - self.jumps.small_jump_mean()
    }

    /// `Psi(theta)` for `theta >= 0`.
    pub fn laplace_exponent(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) {
            return Err(Error::Domain(format!("Laplace exponent needs theta >= 0, got {theta}")));
        }
        Ok(self.psi(theta))
    }

    pub(crate) fn psi(&self, theta: f64) -> f64 {
        self.drift * theta + 0.5 * self.sigma * self.sigma * theta * theta + self.jumps.laplace_part_real(theta)
    }

    /// `Psi` continued to complex arguments with `Re theta >= 0`.
    pub fn laplace_exponent_complex(&self, theta: Complex64) -> Complex64 {
        self.drift * theta + 0.5 * self.sigma * self.sigma * theta * theta + self.jumps.laplace_part(theta)
    }

    pub fn laplace_exponent_prime(&self, theta: f64) -> f64 {
        self.drift + self.sigma * self.sigma * theta + self.jumps.laplace_part_prime(theta)
    }

    pub fn laplace_exponent_second(&self, theta: f64) -> f64 {
        self.sigma * self.sigma + self.jumps.laplace_part_second(theta)
    }

    /// `E[X(1)] = -Psi'(0+)`.
    pub fn mean(&self) -> f64 {
        self.jumps.mean_rate() - self.drift
    }

    /// Right inverse `Phi(q) = sup{theta >= 0 : Psi(theta) = q}`.
    pub fn phi(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::Domain(format!("Phi needs finite q >= 0, got {q}")));
        }
        let lo = if q > 0.0 {
            0.0
        } else if self.mean() <= 0.0 {
            return Ok(0.0);
        } else {
            // Psi'(0+) < 0, so Psi dips below zero just right of the origin
            let mut lo = 1.0;
            let mut tries = 0;
            while self.psi(lo) >= 0.0 {
                lo *= 0.5;
                tries += 1;
                if tries > 200 {
                    return Err(Error::RootBracket {
                        reason: "could not find theta > 0 with Psi(theta) < 0".into(),
                        lo: 0.0,
                        hi: 1.0,
                        f_lo: 0.0,
                        f_hi: self.psi(1.0),
                    });
                }
            }
            lo
        };
        let mut hi = (2.0 * lo).max(1.0);
        let mut tries = 0;
        while self.psi(hi) <= q {
            hi *= 2.0;
            tries += 1;
            if tries > 1100 || !hi.is_finite() {
                return Err(Error::RootBracket {
                    reason: "Psi(theta) never exceeded q".into(),
                    lo,
                    hi,
                    f_lo: self.psi(lo) - q,
                    f_hi: self.psi(hi) - q,
                });
            }
        }
        let mut root = brent(|t| self.psi(t) - q, lo, hi, 1e-15, 300)?;
        // Newton polish: Psi is strictly increasing past Phi(0)
        for _ in 0..2 {
            let slope = self.laplace_exponent_prime(root);
            if slope <= 0.0 {
                break;
            }
            let next = root - (self.psi(root) - q) / slope;
            if next > lo && next < hi {
                root = next;
            }
        }
        Ok(root)
    }

    /// `1 / (Psi(theta) - q) = num / den` as real polynomials, when the
    /// jump measure makes `Psi` rational.
    pub fn rational_resolvent(&self, q: f64) -> Option<(Poly, Poly)> {
        let half_s2 = 0.5 * self.sigma * self.sigma;
        match self.jumps {
            JumpSpec::NoJumps => Some((Poly::constant(1.0), Poly::new(vec![-q, self.drift, half_s2]))),
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => {
                // (c t + s t^2/2 - q)(mu + t) - lambda t
                let base = Poly::new(vec![-q, self.drift, half_s2]);
                let lin = Poly::new(vec![mu, 1.0]);
                let den = base.mul(&lin).add(&Poly::new(vec![0.0, -lambda]));
                Some((lin, den))
            }
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => {
                // with nu = 1/scale: (c t + s t^2/2 - q - lambda)(nu + t)^k + lambda nu^k
                let nu = 1.0 / scale;
                let lin_k = Poly::new(vec![nu, 1.0]).pow(shape);
                let base = Poly::new(vec![-q - lambda, self.drift, half_s2]);
                let den = base.mul(&lin_k).add(&Poly::constant(lambda * nu.powi(shape as i32)));
                Some((lin_k, den))
            }
            JumpSpec::GammaSubordinator { .. } => None,
        }
    }
}
