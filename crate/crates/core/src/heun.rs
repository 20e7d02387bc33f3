//! Dictionary between the φ-equation of a GAL state and the canonical Heun
//! equation in `u = sn²(y)`.

use serde::{Deserialize, Serialize};

use crate::catalog::{QesState, StateFunction};
use crate::elliptic::C64;
use crate::error::{domain, Result};
use crate::gal::GalSpec;

/// Parameters of
/// `G'' + (γ/u + δ/(u-1) + ε/(u-c)) G' + (αβ u - q) / (u(u-1)(u-c)) G = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeunParameters {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub delta: C64,
    pub epsilon: C64,
    pub q: C64,
    pub c: C64,
    /// α, β are a complex-conjugate pair. The discriminant equals
    /// (a + 1/2)², so this stays false for real parameters.
    pub complex_exponents: bool,
}

impl HeunParameters {
    /// |γ + δ + ε - α - β - 1|.
    pub fn constraint_residual(&self) -> f64 {
        (self.gamma + self.delta + self.epsilon - self.alpha - self.beta - 1.0).norm()
    }
}

/// Heun parameters of the φ-equation of `spec` at energy `energy`.
/// `(b, f, g)` of `spec` are the negated prefactor exponents of the state.
pub fn gal_to_heun(spec: &GalSpec, energy: C64) -> HeunParameters {
    let m = spec.m.value();
    let [a, b, f, g] = spec.params();
    let big_q = (b + g + f) * (b + g + f - 1.0) - a * (a + 1.0);
    let r = energy + (f + g) * (f + g) + m * (g + b) * (g + b);
    let sum = 0.5 - (b + f + g);
    let disc = sum * sum - big_q;
    let root = C64::new(disc, 0.0).sqrt();
    let (mut alpha, mut beta) = ((sum - root) / 2.0, (sum + root) / 2.0);
    if beta.re < alpha.re {
        std::mem::swap(&mut alpha, &mut beta);
    }
    let re = |x: f64| C64::new(x, 0.0);
    HeunParameters {
        alpha,
        beta,
        gamma: re(0.5 - g),
        delta: re(0.5 - f),
        epsilon: re(0.5 - b),
        q: r / (4.0 * m),
        c: re(1.0 / m),
        complex_exponents: disc < 0.0,
    }
}

/// u, du/dy, d²u/dy² for u = sn²(y).
fn pullback(s: C64, c: C64, d: C64, m: f64) -> (C64, C64, C64) {
    let u = s * s;
    let du = 2.0 * s * c * d;
    let d2u = 2.0 * (c * c * d * d - s * s * d * d - m * s * s * c * c);
    (u, du, d2u)
}

/// Points where |du/dy| falls below this are skipped as removable.
const SINGULAR_SKIP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeunResidual {
    /// max |u(u-1)(u-c) H[G]| / max |G| over the used points.
    pub residual: f64,
    pub skipped: usize,
}

/// Residual of the Heun equation for `G(u) = φ(y)`, with derivatives of `G`
/// pulled back from exact y-derivatives of φ.
pub fn heun_residual(hp: &HeunParameters, state: &QesState, spec: &GalSpec, grid: &[f64]) -> Result<f64> {
    Ok(heun_residual_detail(hp, state, spec, grid)?.residual)
}

pub fn heun_residual_detail(hp: &HeunParameters, state: &QesState, spec: &GalSpec, grid: &[f64]) -> Result<HeunResidual> {
    let m = spec.m.value();
    let f = StateFunction::new(state, spec.m);
    let line = spec.line();
    let mut worst: f64 = 0.0;
    let mut peak: f64 = 0.0;
    let mut skipped = 0;
    let ab = hp.alpha * hp.beta;
    for &x in grid {
        let (s, c, d) = line.functions(x);
        let (u, du, d2u) = pullback(s, c, d, m);
        if du.norm() < SINGULAR_SKIP || (u - 1.0).norm() < SINGULAR_SKIP || (u - hp.c).norm() < SINGULAR_SKIP {
            skipped += 1;
            continue;
        }
        let [p0, p1, p2] = f.phi(s, c, d);
        let g1 = p1 / du;
        let g2 = (p2 - g1 * d2u) / (du * du);
        let cubic = u * (u - 1.0) * (u - hp.c);
        let first = hp.gamma * (u - 1.0) * (u - hp.c) + hp.delta * u * (u - hp.c) + hp.epsilon * u * (u - 1.0);
        let res = cubic * g2 + first * g1 + (ab * u - hp.q) * p0;
        worst = worst.max(res.norm());
        peak = peak.max(p0.norm());
    }
    if peak == 0.0 {
        return domain("no usable grid point for the Heun residual");
    }
    Ok(HeunResidual { residual: worst / peak, skipped })
}

/// Largest pointwise mismatch between the coefficient functions of the
/// φ-equation, divided by 4m, and those of the Heun equation under the
/// dictionary, over `grid`.
pub fn dictionary_residual(spec: &GalSpec, energy: C64, grid: &[f64]) -> f64 {
    let hp = gal_to_heun(spec, energy);
    let m = spec.m.value();
    let [a, b, f, g] = spec.params();
    let big_q = (b + g + f) * (b + g + f - 1.0) - a * (a + 1.0);
    let r = energy + (f + g) * (f + g) + m * (g + b) * (g + b);
    let line = spec.line();
    let mut worst: f64 = 0.0;
    for &x in grid {
        let (s, c, d) = line.functions(x);
        let (u, du, d2u) = pullback(s, c, d, m);
        let p = 2.0 * (m * b * s * c / d - g * c * d / s + f * d * s / c);
        let lhs1 = (d2u + p * du) / (4.0 * m);
        let rhs1 = hp.gamma * (u - 1.0) * (u - hp.c) + hp.delta * u * (u - hp.c) + hp.epsilon * u * (u - 1.0);
        let lhs0 = (big_q * m * u - r) / (4.0 * m);
        let rhs0 = hp.alpha * hp.beta * u - hp.q;
        worst = worst.max((lhs1 - rhs1).norm()).max((lhs0 - rhs0).norm());
    }
    worst
}
