//! Periodic cubic spline through complex samples on a uniform grid.

use crate::elliptic::C64;
use crate::error::{domain, Result};

#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    x0: f64,
    period: f64,
    h: f64,
    values: Vec<C64>,
    /// Second derivatives at the knots.
    second: Vec<C64>,
}

impl PeriodicSpline {
    /// `values[j]` is the sample at `x0 + j * period / n`; the sample at
    /// `x0 + period` is implied by periodicity.
    pub fn new(x0: f64, period: f64, values: Vec<C64>) -> Result<Self> {
        let n = values.len();
        if n < 4 {
            return domain("periodic spline needs at least 4 samples");
        }
        if !(period > 0.0) || !period.is_finite() {
            return domain("spline period must be positive");
        }
        let h = period / n as f64;
        let rhs: Vec<C64> = (0..n)
            .map(|i| (values[(i + 1) % n] - 2.0 * values[i] + values[(i + n - 1) % n]) * (6.0 / (h * h)))
            .collect();
        let second = solve_cyclic(n, &rhs);
        Ok(Self { x0, period, h, values, second })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn eval(&self, x: f64) -> C64 {
        let n = self.values.len();
        let u = (x - self.x0).rem_euclid(self.period) / self.h;
        let i = (u.floor() as usize).min(n - 1);
        let t = u - i as f64;
        let j = (i + 1) % n;
        let (a, b) = (1.0 - t, t);
        let h2 = self.h * self.h / 6.0;
        self.values[i] * a
            + self.values[j] * b
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[j]) * h2
    }
}

/// Solves the circulant system `M[i-1] + 4 M[i] + M[i+1] = r[i]` by the
/// Sherman–Morrison reduction to a tridiagonal solve.
fn solve_cyclic(n: usize, r: &[C64]) -> Vec<C64> {
    let (alpha, beta) = (1.0, 1.0);
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;
    let x = thomas(&diag, r);
    let mut u = vec![C64::new(0.0, 0.0); n];
    u[0] = C64::new(gamma, 0.0);
    u[n - 1] = C64::new(alpha, 0.0);
    let z = thomas(&diag, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(z.iter()).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Tridiagonal solve with unit off-diagonals.
fn thomas(diag: &[f64], r: &[C64]) -> Vec<C64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    c[0] = 1.0 / diag[0];
    d[0] = r[0] / diag[0];
    for i in 1..n {
        let w = diag[i] - c[i - 1];
        c[i] = 1.0 / w;
        d[i] = (r[i] - d[i - 1]) / w;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    d
}
