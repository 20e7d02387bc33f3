//! Jacobi elliptic functions of complex argument and real parameter `m`.
//!
//! The real-argument kernel is the descending Landen (AGM) amplitude
//! recursion; complex arguments go through the addition theorem with the
//! imaginary part evaluated at the complementary parameter.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, GalError, Result};

pub type C64 = Complex64;

/// Lattice-distance radius inside which an argument counts as a pole.
pub const EPS_POLE: f64 = 1e-8;

/// Elliptic parameter `m` (the square of the modulus `k`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModulusM(f64);

impl ModulusM {
    /// Accepts the closed interval `[0, 1]`; the endpoints are only meaningful
    /// for the trigonometric and hyperbolic limits.
    pub fn new(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return domain(format!("modulus parameter m = {m} outside [0, 1]"));
        }
        Ok(Self(m))
    }

    /// Accepts only `0 < m < 1`.
    pub fn spectral(m: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return domain(format!(
                "modulus parameter m = {m} must satisfy 0 < m < 1 for spectral work"
            ));
        }
        Ok(Self(m))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }

    pub fn is_spectral(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }
}

/// sn, cn, dn at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticTriple {
    pub z: C64,
    pub m: ModulusM,
    pub sn: C64,
    pub cn: C64,
    pub dn: C64,
}

impl EllipticTriple {
    /// Residuals of sn²+cn²=1 and dn²+m sn²=1.
    pub fn identity_residuals(&self) -> (f64, f64) {
        let m = self.m.value();
        let one = C64::new(1.0, 0.0);
        (
            (self.sn * self.sn + self.cn * self.cn - one).norm(),
            (self.dn * self.dn + m * self.sn * self.sn - one).norm(),
        )
    }
}

/// Quarter-period translations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarterShift {
    K,
    #[serde(rename = "i_kp")]
    IKp,
    #[serde(rename = "k_i_kp")]
    KPlusIKp,
}

impl QuarterShift {
    pub fn offset(self, m: ModulusM) -> Result<C64> {
        let k = complete_k(m)?;
        let kp = complete_k(m.complement())?;
        Ok(match self {
            QuarterShift::K => C64::new(k, 0.0),
            QuarterShift::IKp => C64::new(0.0, kp),
            QuarterShift::KPlusIKp => C64::new(k, kp),
        })
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, K(m), for 0 ≤ m < 1.
pub fn complete_k(m: ModulusM) -> Result<f64> {
    let m = m.value();
    if m >= 1.0 {
        return domain("K(m) diverges at m = 1");
    }
    Ok(PI / (2.0 * agm(1.0, (1.0 - m).sqrt())))
}

/// K'(m) = K(1 - m), for 0 < m ≤ 1.
pub fn complete_kp(m: ModulusM) -> Result<f64> {
    if m.value() <= 0.0 {
        return domain("K'(m) diverges at m = 0");
    }
    complete_k(m.complement())
}

/// Real-argument sn, cn, dn. `u` is assumed already reduced when `m < 1`.
fn sncndn_reduced(u: f64, m: f64) -> (f64, f64, f64) {
    if m < 1e-9 {
        let t = u.sin();
        let b = u.cos();
        let ai = 0.25 * m * (u - t * b);
        return (t - ai * b, b + ai * t, 1.0 - 0.5 * m * t * t);
    }
    if m >= 0.999_999_9 {
        let ai = 0.25 * (1.0 - m);
        let b = u.cosh();
        let t = u.tanh();
        let phi = 1.0 / b;
        let twon = b * u.sinh();
        let sn = t + ai * (twon - u) / (b * b);
        let ai2 = ai * t * phi;
        return (sn, phi - ai2 * (twon - u), phi + ai2 * (twon + u));
    }
    let mut a = [0.0f64; 17];
    let mut c = [0.0f64; 17];
    a[0] = 1.0;
    c[0] = m.sqrt();
    let mut b = (1.0 - m).sqrt();
    let mut n = 0;
    while (c[n] / a[n]).abs() > f64::EPSILON && n < 16 {
        let ai = a[n];
        n += 1;
        c[n] = 0.5 * (ai - b);
        a[n] = 0.5 * (ai + b);
        b = (ai * b).sqrt();
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        let t = c[i] * phi.sin() / a[i];
        phi = 0.5 * (t.asin() + phi);
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - m * sn * sn).sqrt();
    (sn, cn, dn)
}

/// Real-argument Jacobi functions, valid for `0 ≤ m ≤ 1`.
pub fn jacobi_real(u: f64, m: f64) -> (f64, f64, f64) {
    if m == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    if m == 1.0 {
        let s = 1.0 / u.cosh();
        return (u.tanh(), s, s);
    }
    let period = 4.0 * PI / (2.0 * agm(1.0, (1.0 - m).sqrt()));
    let red = u - period * (u / period).round();
    sncndn_reduced(red, m)
}

/// Normalized distance from `z` to the nearest pole of the lattice, and that pole.
pub fn pole_distance(z: C64, m: ModulusM) -> Option<(f64, C64)> {
    if !m.is_spectral() {
        return None;
    }
    let k = complete_k(m).ok()?;
    let kp = complete_kp(m).ok()?;
    let p = (z.re / (2.0 * k)).round();
    let q = ((z.im - kp) / (2.0 * kp)).round();
    let pole = C64::new(2.0 * k * p, kp + 2.0 * kp * q);
    let d = ((z.re - pole.re) / k).hypot((z.im - pole.im) / kp);
    Some((d, pole))
}

fn check_pole(z: C64, m: ModulusM) -> Result<()> {
    if let Some((d, pole)) = pole_distance(z, m) {
        if d < EPS_POLE {
            return Err(GalError::Pole { point: pole, distance: d });
        }
    }
    Ok(())
}

/// Combines real triples at `x|m` and `y|1-m` into the triple at `x + iy`.
#[inline]
fn combine(m: f64, (s, c, d): (f64, f64, f64), (s1, c1, d1): (f64, f64, f64)) -> (C64, C64, C64) {
    let den = c1 * c1 + m * s * s * s1 * s1;
    (
        C64::new(s * d1, c * d * s1 * c1) / den,
        C64::new(c * c1, -s * d * s1 * d1) / den,
        C64::new(d * c1 * d1, -m * s * c * s1) / den,
    )
}

/// sn, cn, dn at complex `z`.
pub fn jacobi(z: C64, m: ModulusM) -> Result<EllipticTriple> {
    check_pole(z, m)?;
    let mv = m.value();
    let re = jacobi_real(z.re, mv);
    let im = jacobi_real(z.im, 1.0 - mv);
    let (sn, cn, dn) = combine(mv, re, im);
    Ok(EllipticTriple { z, m, sn, cn, dn })
}

/// Triple at `z + shift`, built from the values at `z` via the quarter-period
/// formulas instead of a fresh evaluation.
pub fn quarter_shift(z: C64, m: ModulusM, shift: QuarterShift) -> Result<EllipticTriple> {
    if !m.is_spectral() {
        return domain("quarter shifts need 0 < m < 1");
    }
    let target = z + shift.offset(m)?;
    check_pole(target, m)?;
    let t = jacobi(z, m)?;
    let k = m.value().sqrt();
    let kc = (1.0 - m.value()).sqrt();
    let i = C64::i();
    let (s, c, d) = (t.sn, t.cn, t.dn);
    let (sn, cn, dn) = match shift {
        QuarterShift::K => (c / d, -kc * s / d, kc / d),
        QuarterShift::IKp => (1.0 / (k * s), -i * d / (k * s), -i * c / s),
        QuarterShift::KPlusIKp => (d / (k * c), -i * kc / (k * c), i * kc * s / c),
    };
    Ok(EllipticTriple { z: target, m, sn, cn, dn })
}

/// Fast evaluation along a vertical line `y = beta + i t`.
///
/// The real part is fixed, so its triple is computed once.
#[derive(Debug, Clone, Copy)]
pub struct VerticalLine {
    m: f64,
    base: (f64, f64, f64),
}

impl VerticalLine {
    pub fn new(beta: f64, m: ModulusM) -> Self {
        Self { m: m.value(), base: jacobi_real(beta, m.value()) }
    }

    pub fn at(&self, t: f64) -> (C64, C64, C64) {
        combine(self.m, self.base, jacobi_real(t, 1.0 - self.m))
    }
}

/// The point `i y + K'(m) + i K(m)` at which dual-modulus functions are evaluated.
pub fn dual_point(y: C64, m: ModulusM) -> Result<C64> {
    let k = complete_k(m)?;
    let kp = complete_kp(m)?;
    Ok(C64::i() * y + C64::new(kp, k))
}
