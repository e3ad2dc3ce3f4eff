//! Exponential polynomials: finite sums `b(x) + Re sum_i p_i(x) e^{r_i x}`.
//! Scale functions of models with rational Laplace exponent live in this
//! class, and it is closed under differentiation and integration.

use num_complex::Complex64;

use crate::error::Result;
use crate::numerics::poly::{partial_fractions, PoleTerm, Poly};

#[derive(Debug, Clone)]
struct ExpTerm {
    rate: Complex64,
    /// ascending powers of x
    poly: Vec<Complex64>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct ExpPoly {
    base: Vec<f64>,
    terms: Vec<ExpTerm>,
}

fn horner_c(p: &[Complex64], x: f64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn poly_derivative_c(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect()
}

impl ExpPoly {
    pub fn from_poles(poles: &[PoleTerm]) -> Self {
        Self {
            base: Vec::new(),
            terms: poles
                .iter()
                .map(|p| ExpTerm {
                    rate: p.root,
                    poly: p.coeffs.clone(),
                })
                .collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let base = self.base.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let exp_part: f64 = self
            .terms
            .iter()
            .map(|t| (horner_c(&t.poly, x) * (t.rate * x).exp()).re)
            .sum();
        base + exp_part
    }

    pub fn derivative(&self) -> Self {
        let base = self.base.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut poly: Vec<Complex64> = t.poly.iter().map(|c| c * t.rate).collect();
                for (i, d) in poly_derivative_c(&t.poly).into_iter().enumerate() {
                    poly[i] += d;
                }
                ExpTerm { rate: t.rate, poly }
            })
            .collect();
        Self { base, terms }
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Self {
        let mut base = vec![0.0];
        base.extend(self.base.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
        let mut constant = 0.0;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                // r = sum_k (-1)^k p^(k) / rate^(k+1) solves r' + rate r = p
                let mut r = vec![Complex64::new(0.0, 0.0); t.poly.len()];
                let mut deriv = t.poly.clone();
                let mut factor = 1.0 / t.rate;
                while !deriv.is_empty() {
                    for (i, c) in deriv.iter().enumerate() {
                        r[i] += c * factor;
                    }
                    deriv = poly_derivative_c(&deriv);
                    factor *= -1.0 / t.rate;
                }
                constant -= r[0].re;
                ExpTerm { rate: t.rate, poly: r }
            })
            .collect();
        base[0] += constant;
        Self { base, terms }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            base: self.base.iter().map(|c| c * k).collect(),
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm {
                    rate: t.rate,
                    poly: t.poly.iter().map(|c| c * k).collect(),
                })
                .collect(),
        }
    }

    /// Add a real polynomial (ascending coefficients).
    pub fn plus_poly(mut self, p: &[f64]) -> Self {
        if self.base.len() < p.len() {
            self.base.resize(p.len(), 0.0);
        }
        for (b, c) in self.base.iter_mut().zip(p) {
            *b += c;
        }
        self
    }
}

/// All four scale functions and `W'` for a rational Laplace exponent.
#[derive(Debug, Clone)]
pub(crate) struct ClosedForm {
    pub poles: Vec<PoleTerm>,
    pub w: ExpPoly,
    pub w_prime: ExpPoly,
    pub w_bar: ExpPoly,
    pub z: ExpPoly,
    pub z_bar: ExpPoly,
}

impl ClosedForm {
    pub fn build(num: &Poly, den: &Poly, q: f64) -> Result<Self> {
        let poles = partial_fractions(num, den, 1e-6)?;
        let w = ExpPoly::from_poles(&poles);
        let w_prime = w.derivative();
        let w_bar = w.integral();
        let z = w_bar.scaled(q).plus_poly(&[1.0]);
        let z_bar = z.integral();
        Ok(Self {
            poles,
            w,
            w_prime,
            w_bar,
            z,
            z_bar,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_of_polynomial_exponential() {
        // W = x e^{2x}; int_0^x = e^{2x}(x/2 - 1/4) + 1/4
        let w = ExpPoly {
            base: vec![],
            terms: vec![ExpTerm {
                rate: Complex64::new(2.0, 0.0),
                poly: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            }],
        };
        let iw = w.integral();
        for &x in &[0.0f64, 0.3, 1.7] {
            let want = (2.0 * x).exp() * (x / 2.0 - 0.25) + 0.25;
            assert!((iw.eval(x) - want).abs() < 1e-13);
        }
        let dw = w.derivative();
        assert!((dw.eval(1.0) - 3.0 * 2f64.exp()).abs() < 1e-12);
    }
}
