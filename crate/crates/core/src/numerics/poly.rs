//! Real polynomials, their complex roots, and partial-fraction expansion of
//! proper rational functions into exponential-polynomial inverse transforms.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        *self.0.last().unwrap_or(&0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let out = (0..n)
            .map(|i| self.0.get(i).unwrap_or(&0.0) + other.0.get(i).unwrap_or(&0.0))
            .collect();
        Poly::new(out)
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(1.0), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }
}

/// All complex roots of `p` by Aberth-Ehrlich iteration followed by Newton polishing.
pub fn roots(p: &Poly) -> Result<Vec<Complex64>> {
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p.leading();
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::Internal("polynomial with zero leading coefficient".into()));
    }
    let dp = p.derivative();
    // Cauchy bound on root moduli
    let bound = 1.0 + p.0[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let radius = 0.5 * bound;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(radius, ang)
        })
        .collect();
    let mut converged = false;
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let pk = p.eval_c(z[k]);
            if pk.norm() == 0.0 {
                continue;
            }
            let ratio = pk / dp.eval_c(z[k]);
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged && z.iter().any(|zk| !zk.is_finite()) {
        return Err(Error::NonConvergence {
            what: "polynomial roots",
            detail: format!("degree {n}"),
        });
    }
    // Newton polish for simple roots
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let d = dp.eval_c(*zk);
            if d.norm() < 1e-12 {
                break;
            }
            let step = p.eval_c(*zk) / d;
            if !step.is_finite() || step.norm() > 1e-6 * zk.norm().max(1.0) {
                break;
            }
            *zk -= step;
        }
        if zk.im.abs() < 1e-14 * zk.re.abs().max(1.0) {
            zk.im = 0.0;
        }
    }
    Ok(z)
}

/// A pole of a rational transform together with the polynomial coefficient
/// of its inverse: `sum_j coeffs[j] x^j e^{root x}`.
#[derive(Debug, Clone)]
pub struct PoleTerm {
    pub root: Complex64,
    pub multiplicity: usize,
    /// `coeffs[0]` is the residue for a simple pole.
    pub coeffs: Vec<Complex64>,
}

impl PoleTerm {
    /// Coefficient of `(theta - root)^{-1}`.
    pub fn residue(&self) -> Complex64 {
        self.coeffs[0]
    }
}

/// Group numerically coincident roots. Roots closer than `tol * max(1, |z|)`
/// are merged into one root of higher multiplicity at their centroid.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![roots[i]];
        for j in i + 1..roots.len() {
            if !used[j] && (roots[j] - roots[i]).norm() <= tol * roots[i].norm().max(1.0) {
                used[j] = true;
                members.push(roots[j]);
            }
        }
        let centre = members.iter().sum::<Complex64>() / members.len() as f64;
        out.push((centre, members.len()));
    }
    out
}

fn series_mul(a: &[Complex64], b: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); order];
    for (i, x) in a.iter().enumerate().take(order) {
        for (j, y) in b.iter().enumerate().take(order - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Taylor coefficients of `p(root + h)` up to `h^{order-1}`.
fn taylor_shift(p: &Poly, root: Complex64, order: usize) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = p.0.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let n = c.len();
    // repeated synthetic division
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let next = c[j + 1];
            c[j] += root * next;
        }
    }
    c.resize(order.max(n), Complex64::new(0.0, 0.0));
    c.truncate(order);
    c
}

/// Partial-fraction expansion of `num / den` (proper, real coefficients).
/// Each returned term inverts to `sum_j coeffs[j] x^j e^{root x}`; the
/// inverse Laplace transform of `num/den` is the real part of their sum.
pub fn partial_fractions(num: &Poly, den: &Poly, cluster_tol: f64) -> Result<Vec<PoleTerm>> {
    if num.degree() >= den.degree() {
        return Err(Error::Internal("partial fractions need a proper rational function".into()));
    }
    let poles = cluster_roots(&roots(den)?, cluster_tol);
    let lead = den.leading();
    let mut terms = Vec::with_capacity(poles.len());
    for (idx, &(root, m)) in poles.iter().enumerate() {
        let mut g = taylor_shift(num, root, m);
        for (jdx, &(other, mo)) in poles.iter().enumerate() {
            if jdx == idx {
                continue;
            }
            let d = root - other;
            // series of 1/(d + h)
            let mut inv = Vec::with_capacity(m);
            let mut t = 1.0 / d;
            for _ in 0..m {
                inv.push(t);
                t *= -1.0 / d;
            }
            for _ in 0..mo {
                g = series_mul(&g, &inv, m);
            }
        }
        let mut fact = 1.0;
        let coeffs = (0..m)
            .map(|j| {
                if j > 0 {
                    fact *= j as f64;
                }
                g[m - 1 - j] / (lead * fact)
            })
            .collect();
        terms.push(PoleTerm {
            root,
            multiplicity: m,
            coeffs,
        });
    }
    Ok(terms)
}
