//! The GAL potential family and its symmetry transforms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_k, complete_kp, jacobi, ModulusM, VerticalLine, C64, EPS_POLE};
use crate::error::{domain, Result};

/// One potential `[a(a+1), b(b+1), f(f+1), g(g+1)]` at parameter `m`, realized
/// on the line `y = i x + beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct GalSpec {
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub g: f64,
    pub m: ModulusM,
    pub beta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    a: f64,
    #[serde(default)]
    b: f64,
    #[serde(default)]
    f: f64,
    #[serde(default)]
    g: f64,
    m: f64,
    #[serde(default)]
    beta: Option<f64>,
}

impl TryFrom<RawSpec> for GalSpec {
    type Error = crate::error::GalError;
    fn try_from(r: RawSpec) -> Result<Self> {
        let s = GalSpec::new(r.a, r.b, r.f, r.g, r.m)?;
        match r.beta {
            Some(beta) => s.with_beta(beta),
            None => Ok(s),
        }
    }
}

impl GalSpec {
    /// Spec with the default offset `beta = K(m)/2`.
    pub fn new(a: f64, b: f64, f: f64, g: f64, m: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("f", f), ("g", g)] {
            if !v.is_finite() {
                return domain(format!("parameter {name} = {v} is not finite"));
            }
        }
        let m = ModulusM::spectral(m)?;
        let beta = complete_k(m)? / 2.0;
        Ok(Self { a, b, f, g, m, beta })
    }

    pub fn lame(a: f64, m: f64) -> Result<Self> {
        Self::new(a, 0.0, 0.0, 0.0, m)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        let k = complete_k(self.m)?;
        let r = beta / k;
        if !beta.is_finite() || (r - r.round()).abs() < EPS_POLE {
            return domain(format!(
                "beta = {beta} lies on a singular line (Re y ≡ 0 mod K)"
            ));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn params(&self) -> [f64; 4] {
        [self.a, self.b, self.f, self.g]
    }

    pub fn from_params(p: [f64; 4], m: f64) -> Result<Self> {
        Self::new(p[0], p[1], p[2], p[3], m)
    }

    /// Inverse of [`GalSpec::bracket`], taking the root `p ≥ -1/2` of
    /// `p(p+1) = X` for every coefficient.
    pub fn from_bracket(bracket: [f64; 4], m: f64) -> Result<Self> {
        let mut p = [0.0; 4];
        for (out, x) in p.iter_mut().zip(bracket) {
            let disc = 1.0 + 4.0 * x;
            if disc < -1e-12 {
                return domain(format!("coefficient {x} < -1/4 has no real parameter"));
            }
            *out = 0.5 * (disc.max(0.0).sqrt() - 1.0);
        }
        Self::from_params(p, m)
    }

    /// `[A, B, F, G]`.
    pub fn bracket(&self) -> [f64; 4] {
        self.params().map(|p| p * (p + 1.0))
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.bracket().iter().sum()
    }

    pub fn k(&self) -> f64 {
        complete_k(self.m).expect("spectral modulus")
    }

    pub fn kp(&self) -> f64 {
        complete_kp(self.m).expect("spectral modulus")
    }

    /// Real period of V in x.
    pub fn period(&self) -> f64 {
        2.0 * self.kp()
    }

    pub fn y_of(&self, x: f64) -> C64 {
        C64::new(self.beta, x)
    }

    /// V from the three function values at a point.
    pub fn potential_from(&self, s: C64, c: C64, d: C64) -> C64 {
        let m = self.m.value();
        let [aa, bb, ff, gg] = self.bracket();
        let s2 = s * s;
        let c2 = c * c;
        let d2 = d * d;
        -(aa * m * s2) - bb * m * c2 / d2 - ff * d2 / c2 - gg / s2
    }

    /// V at an arbitrary complex y.
    pub fn potential_at_y(&self, y: C64) -> Result<C64> {
        let t = jacobi(y, self.m)?;
        Ok(self.potential_from(t.sn, t.cn, t.dn))
    }

    /// Fast evaluator for V(x) along the line of this spec.
    pub fn line(&self) -> GalLine {
        GalLine { spec: *self, line: VerticalLine::new(self.beta, self.m) }
    }
}

impl fmt::Display for GalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.bracket();
        write!(f, "[{a},{b},{c},{d}] (m={}, beta={})", self.m.value(), self.beta)
    }
}

/// Cached evaluator of V along `y = i x + beta`.
#[derive(Debug, Clone, Copy)]
pub struct GalLine {
    spec: GalSpec,
    line: VerticalLine,
}

impl GalLine {
    pub fn spec(&self) -> &GalSpec {
        &self.spec
    }

    pub fn functions(&self, x: f64) -> (C64, C64, C64) {
        self.line.at(x)
    }

    pub fn value(&self, x: f64) -> C64 {
        let (s, c, d) = self.line.at(x);
        self.spec.potential_from(s, c, d)
    }
}

/// V^PT(x).
pub fn eval_potential(spec: &GalSpec, x: f64) -> Result<C64> {
    spec.potential_at_y(spec.y_of(x))
}

/// Which parameter a reflection acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    A,
    B,
    F,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformOp {
    ShiftK,
    #[serde(rename = "shift_i_kp")]
    ShiftIKp,
    #[serde(rename = "shift_k_i_kp")]
    ShiftKIKp,
    Reflect(Param),
    Dual,
}

/// E ↦ sigma·E + offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyMap {
    pub sigma: f64,
    pub offset: f64,
}

impl EnergyMap {
    pub const IDENTITY: EnergyMap = EnergyMap { sigma: 1.0, offset: 0.0 };

    pub fn apply(&self, e: C64) -> C64 {
        e * self.sigma + self.offset
    }

    /// `self` after `first`.
    pub fn after(&self, first: &EnergyMap) -> EnergyMap {
        EnergyMap { sigma: self.sigma * first.sigma, offset: self.sigma * first.offset + self.offset }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformResult {
    pub new_spec: GalSpec,
    pub energy_map: EnergyMap,
    pub argument_map: String,
}

pub fn transform_spec(spec: &GalSpec, op: TransformOp) -> Result<TransformResult> {
    let [a, b, f, g] = spec.params();
    let m = spec.m.value();
    let same_line = |p: [f64; 4]| -> Result<GalSpec> {
        GalSpec::from_params(p, m)?.with_beta(spec.beta)
    };
    let (new_spec, energy_map, argument_map) = match op {
        TransformOp::ShiftK => (same_line([b, a, g, f])?, EnergyMap::IDENTITY, "y -> y + K(m)"),
        TransformOp::ShiftKIKp => {
            (same_line([f, g, a, b])?, EnergyMap::IDENTITY, "y -> y + K(m) + iK'(m)")
        }
        TransformOp::ShiftIKp => (same_line([g, f, b, a])?, EnergyMap::IDENTITY, "y -> y + iK'(m)"),
        TransformOp::Reflect(p) => {
            let mut q = [a, b, f, g];
            let i = match p {
                Param::A => 0,
                Param::B => 1,
                Param::F => 2,
                Param::G => 3,
            };
            q[i] = -q[i] - 1.0;
            (same_line(q)?, EnergyMap::IDENTITY, "identity")
        }
        TransformOp::Dual => (
            GalSpec::new(a, g, f, b, 1.0 - m)?,
            EnergyMap { sigma: -1.0, offset: -spec.coefficient_sum() },
            "y -> i y + K'(m) + iK(m), m -> 1 - m",
        ),
    };
    Ok(TransformResult { new_spec, energy_map, argument_map: argument_map.to_string() })
}

/// Uniform grid of `n` points over one period `[0, 2K')`.
pub fn period_grid(spec: &GalSpec, n: usize) -> Vec<f64> {
    let p = spec.period();
    (0..n).map(|j| p * j as f64 / n as f64).collect()
}

/// max |V(-x) - conj V(x)| over the grid.
pub fn pt_symmetry_residual(spec: &GalSpec, grid: &[f64]) -> f64 {
    pt_symmetry_residual_offset(spec, C64::new(0.0, 0.0), grid).unwrap_or(f64::INFINITY)
}

/// As [`pt_symmetry_residual`] with the line moved to `y = i x + beta + offset`.
pub fn pt_symmetry_residual_offset(spec: &GalSpec, offset: C64, grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in grid {
        let vp = spec.potential_at_y(spec.y_of(x) + offset)?;
        let vm = spec.potential_at_y(spec.y_of(-x) + offset)?;
        worst = worst.max((vm - vp.conj()).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spec_is_free() {
        let s = GalSpec::new(0.0, 0.0, 0.0, 0.0, 0.4).unwrap();
        for x in [0.0, 0.7, 3.1] {
            assert_eq!(eval_potential(&s, x).unwrap(), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn lame_one_matches_closed_form() {
        let s = GalSpec::lame(1.0, 0.3).unwrap();
        for x in [0.0, 0.5, 1.9] {
            let t = jacobi(s.y_of(x), s.m).unwrap();
            let want = -2.0 * 0.3 * t.sn * t.sn;
            assert!((eval_potential(&s, x).unwrap() - want).norm() < 1e-14);
            assert!((s.line().value(x) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_beta_rejected() {
        let s = GalSpec::lame(1.0, 0.3).unwrap();
        assert!(s.with_beta(0.0).is_err());
        assert!(s.with_beta(s.k()).is_err());
        assert!(s.with_beta(s.k() * 0.3).is_ok());
    }

    #[test]
    fn invalid_modulus_rejected() {
        assert!(GalSpec::lame(1.0, 0.0).is_err());
        assert!(GalSpec::lame(1.0, 1.0).is_err());
        assert!(GalSpec::new(f64::NAN, 0.0, 0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn shift_k_example() {
        let s = GalSpec::new(2.0, 1.0, 0.0, 0.0, 0.5).unwrap();
        let r = transform_spec(&s, TransformOp::ShiftK).unwrap();
        assert_eq!(r.new_spec.params(), [1.0, 2.0, 0.0, 0.0]);
        assert_eq!(r.energy_map, EnergyMap::IDENTITY);
    }

    #[test]
    fn dual_example_and_involution() {
        let s = GalSpec::new(2.0, 1.0, 0.0, 0.0, 0.4).unwrap();
        let r = transform_spec(&s, TransformOp::Dual).unwrap();
        assert_eq!(r.new_spec.params(), [2.0, 0.0, 0.0, 1.0]);
        assert!((r.new_spec.m.value() - 0.6).abs() < 1e-15);
        assert_eq!(r.energy_map.offset, -8.0);
        assert_eq!(r.energy_map.sigma, -1.0);
        let back = transform_spec(&r.new_spec, TransformOp::Dual).unwrap();
        assert_eq!(back.new_spec.params(), s.params());
        assert!((back.new_spec.m.value() - 0.4).abs() < 1e-15);
        let comp = back.energy_map.after(&r.energy_map);
        assert_eq!((comp.sigma, comp.offset), (1.0, 0.0));
    }

    #[test]
    fn serde_flat_record_with_default_beta() {
        let s: GalSpec = serde_json::from_str(r#"{"a":2,"b":1,"f":0,"g":0,"m":0.5}"#).unwrap();
        assert!((s.beta - s.k() / 2.0).abs() < 1e-15);
        let text = serde_json::to_string(&s).unwrap();
        let back: GalSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<GalSpec>(r#"{"a":2,"m":1.5}"#).is_err());
        assert!(serde_json::from_str::<GalSpec>(r#"{"a":2,"m":0.5,"zz":1}"#).is_err());
    }

    #[test]
    fn pt_residual_small_on_real_line_and_large_off_it() {
        let s = GalSpec::new(3.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        let grid = period_grid(&s, 200);
        assert!(pt_symmetry_residual(&s, &grid) < 1e-12);
        let off = pt_symmetry_residual_offset(&s, C64::new(0.0, 0.1), &grid).unwrap();
        assert!(off > 1e-2, "{off}");
    }
}
