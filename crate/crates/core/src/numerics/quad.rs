//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn abs(abs: f64) -> Self {
        Self {
            abs,
            rel: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut total_err = e;
    loop {
        if !total.is_finite() {
            return Err(Error::NonConvergence {
                what: "quadrature",
                detail: format!("non-finite integrand on [{a}, {b}]"),
            });
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(Estimate { value: total, error: total_err });
        }
        if intervals.len() >= tol.max_intervals {
            return Err(Error::NonConvergence {
                what: "quadrature",
                detail: format!(
                    "[{a}, {b}]: error estimate {total_err:e} after {} subintervals",
                    intervals.len()
                ),
            });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, v0, e0) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval can no longer be split in floating point
            return Ok(Estimate { value: total, error: total_err });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - v0;
        total_err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        // re-sum occasionally to shed accumulated rounding
        if intervals.len() % 64 == 0 {
            total = intervals.iter().map(|i| i.2).sum();
            total_err = intervals.iter().map(|i| i.3).sum();
        }
    }
}

/// Integrate `f` over `[a, inf)` through the map `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<Estimate> {
    integrate(
        |t| {
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Integrate over `[a, b]` with forced breakpoints (sorted, inside the interval).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    pts.push(b);
    let mut value = 0.0;
    let mut error = 0.0;
    for w in pts.windows(2) {
        let e = integrate(&mut f, w[0], w[1], tol)?;
        value += e.value;
        error += e.error;
    }
    Ok(Estimate { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((e.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn exponential_tail() {
        let e = integrate_to_infinity(|x| (-2.0 * x).exp(), 1.0, Tolerance::default()).unwrap();
        assert!((e.value - (-2.0f64).exp() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn kink_with_breakpoint() {
        let e = integrate_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], Tolerance::default()).unwrap();
        assert!((e.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn log_singularity_converges() {
        let e = integrate(|x: f64| x.ln(), 0.0, 1.0, Tolerance { abs: 1e-10, rel: 0.0, max_intervals: 4000 }).unwrap();
        assert!((e.value + 1.0).abs() < 1e-9);
    }
}
