//! Cubic Hermite interpolation on a sorted grid.

#[derive(Debug, Clone)]
pub struct Hermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Hermite {
    /// Hermite interpolant with prescribed node slopes.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, ds: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len() && ys.len() == ds.len());
        Self { xs, ys, ds }
    }

    /// Monotone interpolant (Fritsch-Carlson). `slopes` are clipped so the
    /// interpolant is monotone wherever the data are; missing or non-finite
    /// slopes are replaced by averaged secants.
    pub fn monotone(xs: Vec<f64>, ys: Vec<f64>, slopes: Option<Vec<f64>>) -> Self {
        let n = xs.len();
        assert!(n >= 2 && ys.len() == n);
        let secant: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let fallback = |i: usize| {
            if i == 0 {
                secant[0]
            } else if i == n - 1 {
                secant[n - 2]
            } else {
                0.5 * (secant[i - 1] + secant[i])
            }
        };
        let mut ds: Vec<f64> = match slopes {
            Some(s) => s
                .into_iter()
                .enumerate()
                .map(|(i, d)| if d.is_finite() { d } else { fallback(i) })
                .collect(),
            None => (0..n).map(fallback).collect(),
        };
        for i in 0..n - 1 {
            let delta = secant[i];
            if delta == 0.0 {
                ds[i] = 0.0;
                ds[i + 1] = 0.0;
                continue;
            }
            if ds[i] * delta < 0.0 {
                ds[i] = 0.0;
            }
            if ds[i + 1] * delta < 0.0 {
                ds[i + 1] = 0.0;
            }
            let a = ds[i] / delta;
            let b = ds[i + 1] / delta;
            let norm = a * a + b * b;
            if norm > 9.0 {
                let tau = 3.0 / norm.sqrt();
                ds[i] = tau * a * delta;
                ds[i + 1] = tau * b * delta;
            }
        }
        Self { xs, ys, ds }
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    /// Evaluate; the caller guarantees `x` lies inside the grid (clamped otherwise).
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = ((x - x0) / h).clamp(0.0, 1.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_slopes_reproduce_cubic() {
        let f = |x: f64| x * x * x - x;
        let df = |x: f64| 3.0 * x * x - 1.0;
        let xs: Vec<f64> = (0..5).map(|i| i as f64 * 0.5).collect();
        let h = Hermite::new(xs.clone(), xs.iter().map(|&x| f(x)).collect(), xs.iter().map(|&x| df(x)).collect());
        for &x in &[0.1, 0.77, 1.3, 1.99] {
            assert!((h.eval(x) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.0, 1.0, 1.0, 5.0];
        let h = Hermite::monotone(xs, ys, None);
        let mut prev = h.eval(0.0);
        for k in 1..=400 {
            let v = h.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }
}
