//! Models and small numerical helpers shared by the integration tests. The
//! helpers are deliberately naive so they do not share code paths with the
//! library.
#![allow(dead_code)]

use spdiv::{JumpSpec, LevyModel};

/// Cramér-Lundberg model with exponential claims: c = 1, lambda = 2, mu = 1.
pub fn standard() -> LevyModel {
    LevyModel::new(1.0, 0.0, JumpSpec::ExponentialCompoundPoisson { lambda: 2.0, mu: 1.0 }).unwrap()
}

/// Jump-diffusion: c = 1, sigma = 1, lambda = 3, mu = 2.
pub fn jump_diffusion() -> LevyModel {
    LevyModel::new(1.0, 1.0, JumpSpec::ExponentialCompoundPoisson { lambda: 3.0, mu: 2.0 }).unwrap()
}

/// Brownian motion with upward drift 0.5 and sigma = 1.
pub fn gaussian() -> LevyModel {
    LevyModel::new(-0.5, 1.0, JumpSpec::NoJumps).unwrap()
}

/// Erlang(2) claims: c = 1.5, lambda = 1, shape 2, scale 1.
pub fn erlang() -> LevyModel {
    LevyModel::new(1.5, 0.0, JumpSpec::ErlangCompoundPoisson { lambda: 1.0, shape: 2, scale: 1.0 }).unwrap()
}

/// Gamma subordinator jumps (infinite activity): c = 2, shape 1.5, scale 2.
pub fn gamma() -> LevyModel {
    LevyModel::new(2.0, 0.0, JumpSpec::GammaSubordinator { shape: 1.5, scale: 2.0, truncation: 1e-4 }).unwrap()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Plain bisection for an increasing function.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) <= 0.0 && f(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}
