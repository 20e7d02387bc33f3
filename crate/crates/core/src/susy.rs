//! Superpotentials and SUSY partners built from exact states, partner
//! identification inside the GAL family, and isospectrality reports.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{qes_spectrum_all, QesState, StateFunction};
use crate::elliptic::{ModulusM, VerticalLine, C64, EPS_POLE};
use crate::error::{GalError, Result};
use crate::gal::{period_grid, GalSpec};
use crate::spectral::{band_edges_numeric, band_edges_of, default_scan_points, PeriodicSpline};

/// Samples per period used when a partner is handed to the integrator.
pub const PARTNER_GRID: usize = 4096;
/// |ψ| below this fraction of max |ψ| on a grid counts as a pole of W.
pub const POLE_RATIO: f64 = 1e-6;
/// Largest relative fit residual accepted by [`identify_gal`].
pub const IDENTIFY_TOL: f64 = 1e-8;
/// Edge sets agreeing to this are reported as equal.
pub const EDGE_AGREEMENT: f64 = 1e-6;

const OFFSET_NOTE: &str = "V+ = W^2 + W' with W = -psi_x/psi; no constant removed";

/// (ψ, W, dW/dx) at one point.
fn w_parts(f: &StateFunction, s: C64, c: C64, d: C64) -> (C64, C64, C64) {
    let [p0, p1, p2] = f.psi(s, c, d);
    let r = p1 / p0;
    (p0, -C64::i() * r, p2 / p0 - r * r)
}

/// W(x) = -ψ'(x)/ψ(x) on the line of `spec`.
pub fn superpotential(state: &QesState, spec: &GalSpec, x: f64) -> Result<C64> {
    let f = StateFunction::new(state, spec.m);
    let (s, c, d) = spec.line().functions(x);
    let (psi, w, _) = w_parts(&f, s, c, d);
    if !w.is_finite() || psi.norm() < EPS_POLE {
        return Err(GalError::Pole { point: spec.y_of(x), distance: psi.norm() });
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartnerProfile {
    pub grid: Vec<f64>,
    /// V+ samples.
    pub values: Vec<C64>,
    pub superpotential: Vec<C64>,
    pub superpotential_slope: Vec<C64>,
    /// The originating potential V on the same grid.
    pub original: Vec<C64>,
    pub factorization_energy: C64,
    pub constant_offset_convention: String,
}

impl PartnerProfile {
    /// max |V - E - (W² - W')|.
    pub fn factorization_residual(&self) -> f64 {
        let e = self.factorization_energy;
        self.original
            .iter()
            .zip(&self.superpotential)
            .zip(&self.superpotential_slope)
            .map(|((v, w), dw)| (v - e - (w * w - dw)).norm())
            .fold(0.0, f64::max)
    }

    /// max |V+ - (V - E) - 2W'|.
    pub fn partner_identity_residual(&self) -> f64 {
        let e = self.factorization_energy;
        self.values
            .iter()
            .zip(&self.original)
            .zip(&self.superpotential_slope)
            .map(|((vp, v), dw)| (vp - (v - e) - 2.0 * dw).norm())
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> C64 {
        self.values.iter().sum::<C64>() / self.values.len() as f64
    }

    /// Largest deviation from `other` once the mean difference is removed.
    pub fn deviation_up_to_constant(&self, other: &[C64]) -> f64 {
        let diff: Vec<C64> = self.values.iter().zip(other).map(|(a, b)| a - b).collect();
        let mean = diff.iter().sum::<C64>() / diff.len() as f64;
        diff.iter().map(|d| (d - mean).norm()).fold(0.0, f64::max)
    }
}

/// V+ = W² + W' sampled on `grid`.
pub fn partner_profile(state: &QesState, spec: &GalSpec, grid: &[f64]) -> Result<PartnerProfile> {
    let f = StateFunction::new(state, spec.m);
    let line = spec.line();
    let rows: Vec<(C64, C64, C64, C64)> = grid
        .par_iter()
        .map(|&x| {
            let (s, c, d) = line.functions(x);
            let (psi, w, dw) = w_parts(&f, s, c, d);
            (psi, w, dw, spec.potential_from(s, c, d))
        })
        .collect();
    let peak = rows.iter().map(|r| r.0.norm()).filter(|v| v.is_finite()).fold(0.0, f64::max);
    for (&x, r) in grid.iter().zip(&rows) {
        if !(r.0.norm() > POLE_RATIO * peak) || !r.1.is_finite() || !r.2.is_finite() {
            return Err(GalError::Pole { point: spec.y_of(x), distance: r.0.norm() / peak.max(f64::MIN_POSITIVE) });
        }
    }
    Ok(PartnerProfile {
        grid: grid.to_vec(),
        values: rows.iter().map(|r| r.1 * r.1 + r.2).collect(),
        superpotential: rows.iter().map(|r| r.1).collect(),
        superpotential_slope: rows.iter().map(|r| r.2).collect(),
        original: rows.iter().map(|r| r.3).collect(),
        factorization_energy: state.energy,
        constant_offset_convention: OFFSET_NOTE.to_string(),
    })
}

/// Least-squares fit of `profile` by `-A m sn² - B m cn²/dn² - F dn²/cn² - G/sn² + C`
/// with real `A, B, F, G` and complex `C`. Returns the spec and the relative
/// residual when the fit is exact to [`IDENTIFY_TOL`].
pub fn identify_gal(profile: &PartnerProfile, m: ModulusM, beta: f64) -> Option<(GalSpec, f64)> {
    let (spec, residual, _) = fit_gal(profile, m, beta)?;
    (residual < IDENTIFY_TOL).then_some((spec?, residual))
}

/// The raw fit: spec (when the coefficients admit real parameters),
/// relative residual and `[A, B, F, G]`.
pub fn fit_gal(profile: &PartnerProfile, m: ModulusM, beta: f64) -> Option<(Option<GalSpec>, f64, [f64; 4])> {
    let n = profile.grid.len();
    if n < 8 || !m.is_spectral() {
        return None;
    }
    let mv = m.value();
    let line = VerticalLine::new(beta, m);
    let mut a = DMatrix::<f64>::zeros(2 * n, 6);
    let mut rhs = DVector::<f64>::zeros(2 * n);
    let mut basis_rows = Vec::with_capacity(n);
    for (i, &x) in profile.grid.iter().enumerate() {
        let (s, c, d) = line.at(x);
        let basis = [-mv * s * s, -mv * c * c / (d * d), -(d * d) / (c * c), -1.0 / (s * s)];
        for (k, b) in basis.iter().enumerate() {
            a[(2 * i, k)] = b.re;
            a[(2 * i + 1, k)] = b.im;
        }
        a[(2 * i, 4)] = 1.0;
        a[(2 * i + 1, 5)] = 1.0;
        rhs[2 * i] = profile.values[i].re;
        rhs[2 * i + 1] = profile.values[i].im;
        basis_rows.push(basis);
    }
    if !a.iter().all(|v| v.is_finite()) {
        return None;
    }
    let sol = a.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let coeffs = [sol[0], sol[1], sol[2], sol[3]];
    let constant = C64::new(sol[4], sol[5]);
    let mean = profile.mean();
    let scale = profile.values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max).max(1e-300);
    let worst = basis_rows
        .iter()
        .zip(&profile.values)
        .map(|(b, v)| {
            let fit: C64 = b.iter().zip(coeffs).map(|(bk, ck)| bk * ck).sum::<C64>() + constant;
            (fit - v).norm()
        })
        .fold(0.0, f64::max);
    let spec = GalSpec::from_bracket(coeffs, mv).and_then(|s| s.with_beta(beta)).ok();
    Some((spec, worst / scale, coeffs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsospectralityReport {
    pub spec: GalSpec,
    pub state: String,
    pub factorization_energy: C64,
    pub edges_original: Vec<f64>,
    /// Edges of V+ as computed, before adding back the factorization energy.
    pub edges_partner: Vec<f64>,
    /// max |E_j(V) - (E_j(V+) + E)|, infinite when the counts differ.
    pub max_discrepancy: f64,
    pub counts_match: bool,
}

impl IsospectralityReport {
    pub fn agrees(&self) -> bool {
        self.max_discrepancy < EDGE_AGREEMENT
    }
}

/// Compares edges of `spec` in `[e_min, e_max]` with those of the partner
/// built from `state`, using the default scan density.
pub fn isospectrality_report(spec: &GalSpec, state: &QesState, e_min: f64, e_max: f64) -> Result<IsospectralityReport> {
    isospectrality_report_with(spec, state, e_min, e_max, default_scan_points(e_min, e_max), PARTNER_GRID)
}

pub fn isospectrality_report_with(
    spec: &GalSpec,
    state: &QesState,
    e_min: f64,
    e_max: f64,
    scan_points: usize,
    grid_points: usize,
) -> Result<IsospectralityReport> {
    if state.is_broken_pt() {
        return Err(GalError::Unsupported(format!(
            "state {} has complex energy {}; partner spectrum is not real",
            state.provenance, state.energy
        )));
    }
    let grid = period_grid(spec, grid_points.max(PARTNER_GRID));
    let profile = partner_profile(state, spec, &grid)?;
    let spline = PeriodicSpline::new(0.0, spec.period(), profile.values.clone())?;
    let e = state.energy.re;
    let edges_original = band_edges_numeric(spec, e_min, e_max, scan_points)?;
    let edges_partner = band_edges_of(&spline, e_min - e, e_max - e, scan_points)?;
    let shifted: Vec<f64> = edges_partner.iter().map(|x| x + e).collect();
    let (max_discrepancy, counts_match) = compare(&edges_original, &shifted);
    Ok(IsospectralityReport {
        spec: *spec,
        state: state.provenance.clone(),
        factorization_energy: state.energy,
        edges_original,
        edges_partner,
        max_discrepancy,
        counts_match,
    })
}

fn compare(a: &[f64], b: &[f64]) -> (f64, bool) {
    if a.len() != b.len() {
        return (f64::INFINITY, false);
    }
    (a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max), true)
}

/// Two potentials claimed to share band edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjecturePair {
    pub label: String,
    pub left: GalSpec,
    pub right: GalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub label: String,
    pub m: f64,
    pub left: [f64; 4],
    pub right: [f64; 4],
    pub e_range: (f64, f64),
    pub edges_left: Vec<f64>,
    pub edges_right: Vec<f64>,
    pub max_discrepancy: f64,
    pub agree: bool,
}

fn bracket_spec(b: [f64; 4], m: f64) -> Result<GalSpec> {
    GalSpec::from_bracket(b, m)
}

/// The conjectured pairings: Lamé `[2a(2a+1),0,0,0]` with
/// `[a(a+1),a(a+1),a(a+1),(a-1)a]` and `[(2a-1)2a,0,0,0]` with
/// `[a(a+1),(a-1)a,(a-1)a,(a-1)a]` for a = 1, 2, and the two associated
/// Lamé families for (a, p) = (2, 0), (3, 1).
pub fn conjecture_pairs(m: f64) -> Result<Vec<ConjecturePair>> {
    let pr = |x: f64| x * (x + 1.0);
    let mut out = Vec::new();
    let mut push = |label: String, l: [f64; 4], r: [f64; 4]| -> Result<()> {
        out.push(ConjecturePair { label, left: bracket_spec(l, m)?, right: bracket_spec(r, m)? });
        Ok(())
    };
    for a in [1.0, 2.0] {
        push(
            format!("lame-even a={a}"),
            [pr(2.0 * a), 0.0, 0.0, 0.0],
            [pr(a), pr(a), pr(a), pr(a - 1.0)],
        )?;
        push(
            format!("lame-odd a={a}"),
            [pr(2.0 * a - 1.0), 0.0, 0.0, 0.0],
            [pr(a), pr(a - 1.0), pr(a - 1.0), pr(a - 1.0)],
        )?;
    }
    for (a, p) in [(2.0, 0.0), (3.0, 1.0)] {
        push(
            format!("al-first a={a} p={p}"),
            [pr(a), pr(a - 2.0 * p - 1.0), 0.0, 0.0],
            [pr(a - p), pr(a - p - 1.0), pr(p), pr(p)],
        )?;
        push(
            format!("al-second a={a} p={p}"),
            [pr(a), pr(a - 2.0 * p), 0.0, 0.0],
            [pr(a - p), pr(a - p), pr(p), pr(p - 1.0)],
        )?;
    }
    Ok(out)
}

/// An energy window one unit wider on each side than every real QES energy
/// of the given specs.
pub fn edge_window(specs: &[GalSpec]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in specs {
        for st in qes_spectrum_all(s)? {
            if !st.is_broken_pt() {
                lo = lo.min(st.energy.re);
                hi = hi.max(st.energy.re);
            }
        }
    }
    if !lo.is_finite() {
        return Err(GalError::Unsupported("no real QES energies to anchor the energy window".into()));
    }
    Ok((lo - 1.0, hi + 1.0))
}

pub fn compare_pair(pair: &ConjecturePair, scan_points: usize) -> Result<ConjectureReport> {
    let (lo, hi) = edge_window(&[pair.left, pair.right])?;
    let edges_left = band_edges_numeric(&pair.left, lo, hi, scan_points)?;
    let edges_right = band_edges_numeric(&pair.right, lo, hi, scan_points)?;
    let (max_discrepancy, _) = compare(&edges_left, &edges_right);
    Ok(ConjectureReport {
        label: pair.label.clone(),
        m: pair.left.m.value(),
        left: pair.left.bracket(),
        right: pair.right.bracket(),
        e_range: (lo, hi),
        edges_left,
        edges_right,
        max_discrepancy,
        agree: max_discrepancy < EDGE_AGREEMENT,
    })
}

/// Every conjectured pairing at every `m`.
pub fn conjecture_suite(ms: &[f64], scan_points: usize) -> Result<Vec<ConjectureReport>> {
    let mut out = Vec::new();
    for &m in ms {
        for pair in conjecture_pairs(m)? {
            out.push(compare_pair(&pair, scan_points)?);
        }
    }
    Ok(out)
}
