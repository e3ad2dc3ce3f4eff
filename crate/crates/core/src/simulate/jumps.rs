//! Compound-Poisson sampling of the upward jumps.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::levy::JumpSpec;
use crate::numerics::special::exp_integral_e1;

#[derive(Debug, Clone)]
enum Size {
    Exp { mean: f64 },
    Erlang { shape: u32, scale: f64 },
    /// truncated gamma measure `x^{-1} e^{-x/scale}` on `[eps, inf)`
    Gamma { scale: f64, eps: f64, p_small: f64 },
    Never,
}

/// Jump arrivals and sizes. Infinite-activity measures are truncated at
/// `eps`; the mean of the removed jumps is returned as `drift_shift`.
#[derive(Debug, Clone)]
pub(crate) struct JumpSampler {
    pub rate: f64,
    pub drift_shift: f64,
    size: Size,
}

impl JumpSampler {
    pub fn new(spec: &JumpSpec) -> Self {
        match *spec {
            JumpSpec::ExponentialCompoundPoisson { lambda, mu } => Self {
                rate: lambda,
                drift_shift: 0.0,
                size: Size::Exp { mean: 1.0 / mu },
            },
            JumpSpec::ErlangCompoundPoisson { lambda, shape, scale } => Self {
                rate: lambda,
                drift_shift: 0.0,
                size: Size::Erlang { shape, scale },
            },
            JumpSpec::GammaSubordinator {
                shape,
                scale,
                truncation,
            } => {
                let total = exp_integral_e1(truncation / scale);
                let p_small = if truncation < scale {
                    (total - exp_integral_e1(1.0)) / total
                } else {
                    0.0
                };
                Self {
                    rate: shape * total,
                    drift_shift: shape * scale * (-(-truncation / scale).exp_m1()),
                    size: Size::Gamma {
                        scale,
                        eps: truncation,
                        p_small,
                    },
                }
            }
            JumpSpec::NoJumps => Self {
                rate: 0.0,
                drift_shift: 0.0,
                size: Size::Never,
            },
        }
    }

    /// Waiting time to the next jump (infinite without jumps).
    pub fn waiting_time<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / self.rate
        } else {
            f64::INFINITY
        }
    }

    pub fn size<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.size {
            Size::Exp { mean } => {
                let e: f64 = Exp1.sample(rng);
                e * mean
            }
            Size::Erlang { shape, scale } => (0..shape)
                .map(|_| {
                    let e: f64 = Exp1.sample(rng);
                    e * scale
                })
                .sum::<f64>(),
            Size::Gamma { scale, eps, p_small } => {
                // pick the piece by its exact mass, then reject within it
                if rng.random::<f64>() < p_small {
                    // density ~ 1/x on [eps, scale], accept with e^{-(x - eps)/scale}
                    loop {
                        let x = eps * (scale / eps).powf(rng.random::<f64>());
                        if rng.random::<f64>() < (-(x - eps) / scale).exp() {
                            return x;
                        }
                    }
                } else {
                    let start = eps.max(scale);
                    loop {
                        let e: f64 = Exp1.sample(rng);
                        let x = start + e * scale;
                        if rng.random::<f64>() < start / x {
                            return x;
                        }
                    }
                }
            }
            Size::Never => 0.0,
        }
    }
}
