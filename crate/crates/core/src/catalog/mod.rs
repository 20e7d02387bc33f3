//! Exact eigenstates: table band edges, the collocation QES solver and
//! mid-band states, with evaluation and residual checks.

mod collocation;
mod midband;
mod tables;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::elliptic::{ModulusM, C64};
use crate::error::{GalError, Result};
use crate::expr::{cpow, Expr};
use crate::gal::GalSpec;

pub use collocation::{qes_spectrum_all, qes_spectrum_general};
pub use midband::{midband_energies, midband_spec, midband_states, MidbandCase, MidbandLevel};
pub use tables::{closed_form_edges, lame_a4_edges, table_states};

/// A subset of {sn, cn, dn} used as a multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Sector {
    pub sn: bool,
    pub cn: bool,
    pub dn: bool,
}

impl Sector {
    pub const EMPTY: Sector = Sector { sn: false, cn: false, dn: false };
    pub const S: Sector = Sector { sn: true, cn: false, dn: false };
    pub const C: Sector = Sector { sn: false, cn: true, dn: false };
    pub const D: Sector = Sector { sn: false, cn: false, dn: true };
    pub const SC: Sector = Sector { sn: true, cn: true, dn: false };
    pub const SD: Sector = Sector { sn: true, cn: false, dn: true };
    pub const CD: Sector = Sector { sn: false, cn: true, dn: true };
    pub const SCD: Sector = Sector { sn: true, cn: true, dn: true };

    pub fn expr(self) -> Expr {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        Expr::monomial(C64::new(1.0, 0.0), b(self.sn), b(self.cn), b(self.dn))
    }

    /// Parses strings such as `""`, `"sn"`, `"cn,dn"`, `"sn*cn*dn"`.
    pub fn parse(text: &str) -> Result<Sector> {
        let mut s = Sector::EMPTY;
        for part in text.split([',', '*', '·', ' ']).filter(|p| !p.is_empty()) {
            match part.trim().to_ascii_lowercase().as_str() {
                "sn" | "s" => s.sn = true,
                "cn" | "c" => s.cn = true,
                "dn" | "d" => s.dn = true,
                "1" | "none" | "empty" => {}
                other => return Err(GalError::Domain(format!("unknown sector factor `{other}`"))),
            }
        }
        Ok(s)
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [(self.sn, "sn"), (self.cn, "cn"), (self.dn, "dn")]
            .into_iter()
            .filter_map(|(on, n)| on.then_some(n))
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Base of the Bloch-like factor `B^t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlochBase {
    /// cn + i sn
    CnPlusISn,
    /// cn - i sn
    CnMinusISn,
    /// dn + i k sn
    DnPlusIkSn,
    /// dn - i k sn
    DnMinusIkSn,
    /// dn + k cn
    DnPlusKCn,
    /// dn - k cn
    DnMinusKCn,
}

impl BlochBase {
    pub fn conjugate(self) -> Self {
        use BlochBase::*;
        match self {
            CnPlusISn => CnMinusISn,
            CnMinusISn => CnPlusISn,
            DnPlusIkSn => DnMinusIkSn,
            DnMinusIkSn => DnPlusIkSn,
            DnPlusKCn => DnMinusKCn,
            DnMinusKCn => DnPlusKCn,
        }
    }

    pub fn value(self, s: C64, c: C64, d: C64, m: f64) -> C64 {
        use BlochBase::*;
        let k = m.sqrt();
        let i = C64::i();
        match self {
            CnPlusISn => c + i * s,
            CnMinusISn => c - i * s,
            DnPlusIkSn => d + i * k * s,
            DnMinusIkSn => d - i * k * s,
            DnPlusKCn => d + k * c,
            DnMinusKCn => d - k * c,
        }
    }

    /// d/dy log B as a single monomial.
    pub fn log_derivative(self, m: f64) -> Expr {
        use BlochBase::*;
        let k = m.sqrt();
        let i = C64::i();
        match self {
            CnPlusISn => Expr::dn().scale(i),
            CnMinusISn => Expr::dn().scale(-i),
            DnPlusIkSn => Expr::cn().scale(i * k),
            DnMinusIkSn => Expr::cn().scale(-i * k),
            DnPlusKCn => Expr::sn().scale(C64::new(-k, 0.0)),
            DnMinusKCn => Expr::sn().scale(C64::new(k, 0.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochFactor {
    pub base: BlochBase,
    pub t: f64,
}

/// Behaviour of a state under translation by the real period.
///
/// Exponent parities fix the sign picked up under `y -> y + 2iK'` (the real
/// x-period) and `y -> y + 2K`; there is no separate 4K variant because states
/// with non-integral `sn` exponents are classified by their x-period alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum PeriodClass {
    /// periodic in x with period 2K'
    #[serde(rename = "2iKp")]
    Period2iKp,
    /// antiperiodic over 2K', sign-definite under 2K
    #[serde(rename = "4iKp")]
    Period4iKp,
    /// antiperiodic over 2K' and under 2K
    #[serde(rename = "2K+2iKp")]
    Period2KPlus2iKp,
    /// not a band edge: quasi-momentum set by the exponent `t`
    #[serde(rename = "bloch")]
    Bloch { t: f64 },
}

impl PeriodClass {
    /// Expected sign of Δ at a band edge, if the state is one.
    pub fn discriminant_sign(&self) -> Option<f64> {
        match self {
            PeriodClass::Period2iKp => Some(2.0),
            PeriodClass::Period4iKp | PeriodClass::Period2KPlus2iKp => Some(-2.0),
            PeriodClass::Bloch { .. } => None,
        }
    }
}

impl fmt::Display for PeriodClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodClass::Period2iKp => write!(f, "2iK'"),
            PeriodClass::Period4iKp => write!(f, "4iK'"),
            PeriodClass::Period2KPlus2iKp => write!(f, "2K+2iK'"),
            PeriodClass::Bloch { t } => write!(f, "bloch({t})"),
        }
    }
}

/// One exact eigenstate
/// `ψ = sn^ρs cn^ρc dn^ρd · B^t · (extra·ΣA_k sn^2k + companion·ΣB_k sn^2k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QesState {
    pub energy: C64,
    /// (ρ_s, ρ_c, ρ_d) = (-g, -f, -b) of the representation the state was built in.
    pub prefactor_exponents: [f64; 3],
    pub extra_factor: Sector,
    pub companion: Sector,
    pub bloch: Option<BlochFactor>,
    pub poly_a: Vec<C64>,
    pub poly_b: Vec<C64>,
    pub period_class: PeriodClass,
    pub provenance: String,
}

impl QesState {
    pub(crate) fn new(
        energy: C64,
        prefactor_exponents: [f64; 3],
        extra_factor: Sector,
        poly_a: Vec<C64>,
        provenance: impl Into<String>,
    ) -> Self {
        let mut s = QesState {
            energy,
            prefactor_exponents,
            extra_factor,
            companion: Sector::EMPTY,
            bloch: None,
            poly_a,
            poly_b: Vec::new(),
            period_class: PeriodClass::Period2iKp,
            provenance: provenance.into(),
        };
        s.period_class = s.compute_period_class();
        s
    }

    pub fn is_broken_pt(&self) -> bool {
        self.energy.im.abs() > 1e-10
    }

    /// Polynomial part of φ (no Bloch factor).
    pub fn phi_expr(&self) -> Expr {
        let poly = |sector: Sector, coeffs: &[C64]| {
            let mut e = Expr::zero();
            for (k, &a) in coeffs.iter().enumerate() {
                e = e.add(&Expr::monomial(a, 2.0 * k as f64, 0.0, 0.0));
            }
            sector.expr().mul(&e)
        };
        poly(self.extra_factor, &self.poly_a).add(&poly(self.companion, &self.poly_b))
    }

    pub fn prefactor_expr(&self) -> Expr {
        let [p, q, r] = self.prefactor_exponents;
        Expr::monomial(C64::new(1.0, 0.0), p, q, r)
    }

    /// ψ without the Bloch factor.
    pub fn psi_expr(&self) -> Expr {
        self.prefactor_expr().mul(&self.phi_expr())
    }

    /// Spec whose (b, f, g) equal the negated prefactor exponents. The
    /// φ-equation and Heun dictionary refer to this representation.
    pub fn representation(&self, spec: &GalSpec) -> Result<GalSpec> {
        let [p, q, r] = self.prefactor_exponents;
        GalSpec::new(spec.a, -r, -q, -p, spec.m.value())?.with_beta(spec.beta)
    }

    fn compute_period_class(&self) -> PeriodClass {
        if let Some(b) = self.bloch {
            return PeriodClass::Bloch { t: b.t };
        }
        let Some(t) = self.psi_expr().terms().first().copied() else {
            return PeriodClass::Period2iKp;
        };
        let int = |x: f64| (x - x.round()).abs() < 1e-9;
        let qr = t.q + t.r;
        if !int(qr) {
            return PeriodClass::Bloch { t: qr };
        }
        if (qr.round() as i64).rem_euclid(2) == 0 {
            return PeriodClass::Period2iKp;
        }
        let pq = t.p + t.q;
        if int(pq) && (pq.round() as i64).rem_euclid(2) == 1 {
            PeriodClass::Period2KPlus2iKp
        } else {
            PeriodClass::Period4iKp
        }
    }
}

/// ψ, ψ_y, ψ_yy of a state, from exact derivative expressions.
#[derive(Debug, Clone)]
pub struct StateFunction {
    m: f64,
    psi: [Expr; 3],
    phi: [Expr; 3],
    bloch: Option<(BlochFactor, Expr, Expr)>,
}

impl StateFunction {
    pub fn new(state: &QesState, m: ModulusM) -> Self {
        let m = m.value();
        let chain = |e: Expr| {
            let d1 = e.derivative(m);
            let d2 = d1.derivative(m);
            [e, d1, d2]
        };
        let bloch = state.bloch.map(|b| {
            let mu = b.base.log_derivative(m);
            let dmu = mu.derivative(m);
            (b, mu, dmu)
        });
        Self { m, psi: chain(state.psi_expr()), phi: chain(state.phi_expr()), bloch }
    }

    fn apply(&self, p: &[Expr; 3], s: C64, c: C64, d: C64) -> [C64; 3] {
        let v = [p[0].eval(s, c, d), p[1].eval(s, c, d), p[2].eval(s, c, d)];
        match &self.bloch {
            None => v,
            Some((b, mu, dmu)) => {
                let t = b.t;
                let bt = cpow(b.base.value(s, c, d, self.m), t);
                let mu = mu.eval(s, c, d);
                let dmu = dmu.eval(s, c, d);
                [
                    bt * v[0],
                    bt * (v[1] + t * mu * v[0]),
                    bt * (v[2] + 2.0 * t * mu * v[1] + (t * dmu + t * t * mu * mu) * v[0]),
                ]
            }
        }
    }

    /// (ψ, dψ/dy, d²ψ/dy²).
    pub fn psi(&self, s: C64, c: C64, d: C64) -> [C64; 3] {
        self.apply(&self.psi, s, c, d)
    }

    /// (φ, dφ/dy, d²φ/dy²) with φ = ψ / prefactor.
    pub fn phi(&self, s: C64, c: C64, d: C64) -> [C64; 3] {
        self.apply(&self.phi, s, c, d)
    }
}

fn check_factor_poles(state: &QesState, s: C64, c: C64, d: C64, y: C64) -> Result<()> {
    let [p, q, r] = state.prefactor_exponents;
    for (e, v) in [(p, s), (q, c), (r, d)] {
        if e < 0.0 && v.norm() < 1e-14 {
            return Err(GalError::Pole { point: y, distance: v.norm() });
        }
    }
    Ok(())
}

/// ψ(x) on the spec's line.
pub fn eval_state(state: &QesState, spec: &GalSpec, x: f64) -> Result<C64> {
    let (s, c, d) = spec.line().functions(x);
    check_factor_poles(state, s, c, d, spec.y_of(x))?;
    Ok(StateFunction::new(state, spec.m).psi(s, c, d)[0])
}

/// max |ψ'' + (V - E)ψ| / max |ψ| over the grid, derivatives in y.
pub fn schrodinger_residual(state: &QesState, spec: &GalSpec, grid: &[f64]) -> f64 {
    let f = StateFunction::new(state, spec.m);
    let line = spec.line();
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for &x in grid {
        let (s, c, d) = line.functions(x);
        let [psi, _, psi2] = f.psi(s, c, d);
        let v = spec.potential_from(s, c, d);
        num = num.max((psi2 + (v - state.energy) * psi).norm());
        den = den.max(psi.norm());
    }
    if den == 0.0 || !num.is_finite() {
        return f64::INFINITY;
    }
    num / den
}

/// The eleven table radicals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSet {
    /// δ1..δ11 in order.
    pub values: [C64; 11],
    /// Radicands; a negative entry marks a complex δ.
    pub radicands: [f64; 11],
}

impl DeltaSet {
    /// `i`-th radical, 1-based.
    pub fn get(&self, i: usize) -> C64 {
        self.values[i - 1]
    }

    pub fn is_complex(&self, i: usize) -> bool {
        self.radicands[i - 1] < 0.0
    }
}

pub fn delta_values(a: f64, b: f64, g: f64, m: ModulusM) -> DeltaSet {
    let m = m.value();
    let sq = |x: f64| x * x;
    let radicands = [
        sq(1.0 + m) * sq(a - 1.0) - (2.0 * a - 1.0) * (2.0 * a - 3.0) * m,
        sq(a - 1.0 + m * (a - 2.0)) - (2.0 * a - 1.0) * (2.0 * a - 5.0) * m,
        sq(a - 2.0 + m * (a - 1.0)) - (2.0 * a - 1.0) * (2.0 * a - 5.0) * m,
        sq(1.0 + m) * sq(a - 2.0) - (2.0 * a - 1.0) * (2.0 * a - 7.0) * m,
        sq(a - 1.0 + m) - (2.0 * a - 1.0) * m,
        sq(a - 1.0 + 2.0 * m) - 3.0 * (2.0 * a - 1.0) * m,
        sq(a - 2.0 + 2.0 * m) - (2.0 * a - 1.0) * m,
        sq(a - 2.0 + 3.0 * m) - 3.0 * (2.0 * a - 1.0) * m,
        sq((1.0 + m) * (a - 1.0) + b) - (2.0 * a - 1.0) * (2.0 * a + 2.0 * b - 3.0) * m,
        sq(a + b - 1.0 + m * (a - 2.0)) - (2.0 * a - 1.0) * (2.0 * a + 2.0 * b - 5.0) * m,
        sq(a + b - 1.0 + m * (1.0 - b - g)) - (2.0 * a - 1.0) * (1.0 - 2.0 * g) * m,
    ];
    DeltaSet { values: radicands.map(|r| C64::new(r, 0.0).sqrt()), radicands }
}

/// Sort by real part, then imaginary part.
pub(crate) fn sort_states(states: &mut [QesState]) {
    states.sort_by(|a, b| {
        a.energy
            .re
            .total_cmp(&b.energy.re)
            .then(a.energy.im.total_cmp(&b.energy.im))
    });
}

/// Drops states that repeat an earlier one (same energy, proportional ψ).
pub(crate) fn dedupe_states(states: Vec<QesState>, spec: &GalSpec) -> Vec<QesState> {
    let probe: Vec<f64> = [0.137, 0.421, 0.733].iter().map(|r| r * spec.period()).collect();
    let line = spec.line();
    let samples = |st: &QesState| -> Vec<C64> {
        let f = StateFunction::new(st, spec.m);
        probe
            .iter()
            .map(|&x| {
                let (s, c, d) = line.functions(x);
                f.psi(s, c, d)[0]
            })
            .collect()
    };
    let mut kept: Vec<(QesState, Vec<C64>)> = Vec::new();
    for st in states {
        let v = samples(&st);
        let dup = kept.iter().any(|(k, w)| {
            if (k.energy - st.energy).norm() > 1e-8 * (1.0 + st.energy.norm()) {
                return false;
            }
            let scale = v.iter().chain(w.iter()).map(|z| z.norm()).fold(0.0, f64::max);
            (0..v.len()).all(|i| {
                (0..v.len()).all(|j| (v[i] * w[j] - v[j] * w[i]).norm() <= 1e-8 * scale * scale)
            })
        });
        if !dup {
            kept.push((st, v));
        }
    }
    kept.into_iter().map(|(s, _)| s).collect()
}

/// The 16 parameter representations reachable by p ↦ -p-1.
pub(crate) fn reflections(p: [f64; 4]) -> Vec<[f64; 4]> {
    let mut out = Vec::with_capacity(16);
    for mask in 0..16u32 {
        let mut q = p;
        for (i, v) in q.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *v = -*v - 1.0;
            }
        }
        out.push(q);
    }
    out
}

/// `Some(n)` when `x` is within 1e-9 of a non-negative integer.
pub(crate) fn as_index(x: f64) -> Option<usize> {
    let r = x.round();
    ((x - r).abs() < 1e-9 && r >= -0.5).then_some(r as usize)
}
