//! Numerical inversion of Laplace transforms on the real line.
//!
//! Both methods accept a `shift`: with `g(t) = e^{-shift t} f(t)` the code
//! inverts `G(s) = F(s + shift)` and multiplies back. Shifting by the
//! rightmost singularity keeps the contour away from it.

use num_complex::Complex64;

use super::CompensatedSum;

/// Fixed Talbot contour (Abate & Valko) with `m` nodes.
pub fn talbot<F>(transform: F, t: f64, m: usize, shift: f64) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    debug_assert!(t > 0.0 && m >= 2);
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut acc = CompensatedSum::default();
    acc.add(0.5 * (transform(Complex64::new(r + shift, 0.0)) * (r * t).exp()).re);
    for k in 1..m {
        let theta = k as f64 * std::f64::consts::PI / m as f64;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = Complex64::new(1.0, theta + (theta * cot - 1.0) * cot);
        let term = (s * t).exp() * transform(s + shift) * sigma;
        acc.add(term.re);
    }
    acc.value() * r / m as f64 * (shift * t).exp()
}

/// Gaver-Stehfest weights for even `n`.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    assert!(n % 2 == 0 && n >= 2, "Stehfest order must be even");
    let half = n / 2;
    let fact = |k: usize| (1..=k).fold(1.0f64, |a, i| a * i as f64);
    (1..=n)
        .map(|k| {
            let mut acc = CompensatedSum::default();
            for j in (k + 1) / 2..=k.min(half) {
                let num = (j as f64).powi(half as i32) * fact(2 * j);
                let den = fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k);
                acc.add(num / den);
            }
            let sign = if (k + half) % 2 == 0 { 1.0 } else { -1.0 };
            sign * acc.value()
        })
        .collect()
}

/// Gaver-Stehfest inversion using real-axis samples only.
pub fn gaver_stehfest<F>(transform: F, t: f64, weights: &[f64], shift: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let ln2t = std::f64::consts::LN_2 / t;
    let mut acc = CompensatedSum::default();
    for (k, w) in weights.iter().enumerate() {
        acc.add(w * transform((k + 1) as f64 * ln2t + shift));
    }
    acc.value() * ln2t * (shift * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn talbot_inverts_exponential() {
        // 1/(s+1) <-> e^{-t}
        for &t in &[0.1, 1.0, 5.0] {
            let v = talbot(|s| 1.0 / (s + 1.0), t, 32, 0.0);
            assert!((v - (-t).exp()).abs() < 1e-10, "t={t}: {v}");
        }
    }

    #[test]
    fn talbot_with_shift_handles_growing_target() {
        // 1/(s-2) <-> e^{2t}
        let t = 4.0;
        let v = talbot(|s| 1.0 / (s - 2.0), t, 48, 2.0);
        // roundoff grows like eps * e^{2M/5}
        assert!((v / (2.0 * t).exp() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn stehfest_weights_sum_to_zero() {
        let w = stehfest_weights(14);
        let s: f64 = w.iter().sum();
        assert!(s.abs() < 1e-6 * w.iter().map(|x| x.abs()).fold(0.0, f64::max));
    }

    #[test]
    fn stehfest_inverts_smooth_target() {
        let w = stehfest_weights(14);
        let v = gaver_stehfest(|s| 1.0 / (s + 0.5), 2.0, &w, 0.0);
        assert!((v - (-1.0f64).exp()).abs() < 1e-5);
    }
}
