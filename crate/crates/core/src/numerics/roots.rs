//! Bracketing root finders.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket. Converges to `xtol` absolute
/// plus a few ulps relative.
pub fn brent<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::RootBracket {
            reason: "no sign change".into(),
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::NonConvergence {
        what: "brent",
        detail: format!("bracket [{lo}, {hi}] after {max_iter} iterations, last b={b}"),
    })
}

/// Newton's method safeguarded by bisection for an increasing function with
/// `f(lo) <= 0 <= f(hi)`.
pub fn newton_bisect<F, D>(f: F, df: D, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::RootBracket {
            reason: "expected f(lo) <= 0 <= f(hi)".into(),
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    let mut x = 0.5 * (a + b);
    for _ in 0..max_iter {
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let slope = df(x)?;
        let newton = x - fx / slope;
        let next = if slope > 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= xtol + 4.0 * f64::EPSILON * x.abs() || b - a <= xtol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence {
        what: "newton-bisection",
        detail: format!("bracket [{a}, {b}] after {max_iter} iterations"),
    })
}
