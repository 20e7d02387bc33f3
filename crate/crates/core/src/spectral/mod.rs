//! Floquet discriminant of `-ψ'' + V(x) ψ = E ψ` over one real period,
//! numeric band edges and band/gap classification.

mod dop853;
mod spline;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dop853::{integrate, Tolerance};
pub use spline::PeriodicSpline;

use crate::elliptic::{complete_k, jacobi_real, ModulusM, C64};
use crate::error::{domain, Result};
use crate::gal::{GalLine, GalSpec};

/// Bisection stops once the bracket is this narrow.
pub const EDGE_TOL: f64 = 1e-10;
/// Edges closer than this are merged.
pub const MERGE_TOL: f64 = 1e-8;
/// |Δ ∓ 2| below this at an extremum of Δ marks a closed gap.
pub const TANGENCY_TOL: f64 = 1e-6;
/// |Δ| may exceed 2 by this much at a closed gap through integration error.
pub const GAP_NOISE: f64 = 1e-8;
/// |Im Δ| above this anywhere on the scan flags broken PT symmetry.
pub const BROKEN_TOL: f64 = 1e-6;

/// A periodic, possibly complex, potential on the real line.
pub trait Potential: Sync {
    fn value(&self, x: f64) -> C64;
    fn period(&self) -> f64;
}

impl Potential for GalLine {
    fn value(&self, x: f64) -> C64 {
        GalLine::value(self, x)
    }

    fn period(&self) -> f64 {
        self.spec().period()
    }
}

impl Potential for PeriodicSpline {
    fn value(&self, x: f64) -> C64 {
        self.eval(x)
    }

    fn period(&self) -> f64 {
        PeriodicSpline::period(self)
    }
}

/// The real associated Lamé potential `A m sn²(x) + B m cn²(x)/dn²(x)`,
/// period 2K(m).
#[derive(Debug, Clone, Copy)]
pub struct RealAssociatedLame {
    pub big_a: f64,
    pub big_b: f64,
    m: f64,
    period: f64,
}

impl RealAssociatedLame {
    /// From the parameters a, b (A = a(a+1), B = b(b+1)).
    pub fn new(a: f64, b: f64, m: ModulusM) -> Result<Self> {
        if !m.is_spectral() {
            return domain(format!("modulus {} must lie in (0, 1)", m.value()));
        }
        Ok(Self { big_a: a * (a + 1.0), big_b: b * (b + 1.0), m: m.value(), period: 2.0 * complete_k(m)? })
    }
}

impl Potential for RealAssociatedLame {
    fn value(&self, x: f64) -> C64 {
        let (s, c, d) = jacobi_real(x, self.m);
        C64::new(self.m * (self.big_a * s * s + self.big_b * c * c / (d * d)), 0.0)
    }

    fn period(&self) -> f64 {
        self.period
    }
}

/// A potential given by a closure.
pub struct FnPotential<F> {
    f: F,
    period: f64,
}

impl<F: Fn(f64) -> C64 + Sync> FnPotential<F> {
    pub fn new(f: F, period: f64) -> Self {
        Self { f, period }
    }
}

impl<F: Fn(f64) -> C64 + Sync> Potential for FnPotential<F> {
    fn value(&self, x: f64) -> C64 {
        (self.f)(x)
    }

    fn period(&self) -> f64 {
        self.period
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantSample {
    #[serde(rename = "E")]
    pub energy: f64,
    pub delta: C64,
}

fn to_c(y: &[f64], k: usize) -> C64 {
    C64::new(y[2 * k], y[2 * k + 1])
}

/// Δ(E) for a potential, integrating from `x0` over one period.
pub fn monodromy_trace(pot: &dyn Potential, energy: f64, x0: f64) -> Result<C64> {
    if !energy.is_finite() {
        return domain("energy must be finite");
    }
    let rhs = |x: f64, y: &[f64; 8]| {
        let w = pot.value(x) - energy;
        let mut out = [0.0; 8];
        for k in 0..2 {
            let psi = to_c(y, 2 * k);
            let dpsi = to_c(y, 2 * k + 1);
            let dd = w * psi;
            out[4 * k] = dpsi.re;
            out[4 * k + 1] = dpsi.im;
            out[4 * k + 2] = dd.re;
            out[4 * k + 3] = dd.im;
        }
        out
    };
    let y0 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let y = integrate(rhs, x0, x0 + pot.period(), y0, Tolerance::DEFAULT)?;
    Ok(to_c(&y, 0) + to_c(&y, 3))
}

/// Δ(E) and dΔ/dE from the variational equations.
pub fn monodromy_trace_with_slope(pot: &dyn Potential, energy: f64, x0: f64) -> Result<(C64, C64)> {
    let rhs = |x: f64, y: &[f64; 16]| {
        let w = pot.value(x) - energy;
        let mut out = [0.0; 16];
        for k in 0..2 {
            let psi = to_c(y, 2 * k);
            let dpsi = to_c(y, 2 * k + 1);
            let e_psi = to_c(y, 4 + 2 * k);
            let e_dpsi = to_c(y, 5 + 2 * k);
            let vals = [dpsi, w * psi, e_dpsi, w * e_psi - psi];
            let slots = [2 * k, 2 * k + 1, 4 + 2 * k, 5 + 2 * k];
            for (v, s) in vals.iter().zip(slots) {
                out[2 * s] = v.re;
                out[2 * s + 1] = v.im;
            }
        }
        out
    };
    let mut y0 = [0.0; 16];
    y0[0] = 1.0;
    y0[6] = 1.0;
    let y = integrate(rhs, x0, x0 + pot.period(), y0, Tolerance::DEFAULT)?;
    Ok((to_c(&y, 0) + to_c(&y, 3), to_c(&y, 4) + to_c(&y, 7)))
}

/// Δ(E) for the PT potential of `spec`, integrated over [0, 2K′].
pub fn discriminant(spec: &GalSpec, energy: f64) -> Result<DiscriminantSample> {
    discriminant_from(spec, energy, 0.0)
}

/// As [`discriminant`] with the integration starting at `x0`.
pub fn discriminant_from(spec: &GalSpec, energy: f64, x0: f64) -> Result<DiscriminantSample> {
    let line = spec.line();
    Ok(DiscriminantSample { energy, delta: monodromy_trace(&line, energy, x0)? })
}

/// Δ on `n` uniformly spaced energies including both ends, in parallel.
pub fn discriminant_curve(pot: &dyn Potential, e_min: f64, e_max: f64, n: usize) -> Result<Vec<DiscriminantSample>> {
    if n < 2 {
        return domain("a discriminant curve needs at least 2 points");
    }
    let step = (e_max - e_min) / (n - 1) as f64;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let e = if i == n - 1 { e_max } else { e_min + step * i as f64 };
            Ok(DiscriminantSample { energy: e, delta: monodromy_trace(pot, e, 0.0)? })
        })
        .collect()
}

/// 2000 points per unit of energy, clamped to [100, 20000].
pub fn default_scan_points(e_min: f64, e_max: f64) -> usize {
    ((2000.0 * (e_max - e_min)).ceil() as usize).clamp(100, 20000)
}

fn check_range(e_min: f64, e_max: f64, scan_points: usize) -> Result<()> {
    if !(e_min.is_finite() && e_max.is_finite()) || e_min >= e_max {
        return domain(format!("energy range [{e_min}, {e_max}] is empty"));
    }
    if scan_points < 100 {
        return domain(format!("scan_points = {scan_points} is below the minimum of 100"));
    }
    Ok(())
}

struct Scan {
    samples: Vec<DiscriminantSample>,
    edges: Vec<f64>,
    touching: Vec<f64>,
    max_imag: f64,
}

fn bisect(f: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64> {
    while hi - lo > EDGE_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Position of the extremum of Re Δ on [lo, hi], by bisection on the slope.
fn extremum(pot: &dyn Potential, lo: f64, hi: f64) -> Result<f64> {
    let slope = |e: f64| monodromy_trace_with_slope(pot, e, 0.0).map(|(_, s)| s.re);
    let s_lo = slope(lo)?;
    let s_hi = slope(hi)?;
    if (s_lo < 0.0) == (s_hi < 0.0) {
        // no clean sign change: golden-section search on |Re Δ|
        let f = |e: f64| monodromy_trace(pot, e, 0.0).map(|d| -d.re.abs());
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c)?, f(d)?);
        while b - a > EDGE_TOL {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d)?;
            }
        }
        return Ok(0.5 * (a + b));
    }
    bisect(&slope, lo, hi, s_lo)
}

fn merge(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for e in v {
        if group.last().is_some_and(|&l| e - l >= MERGE_TOL) {
            out.push(group.iter().sum::<f64>() / group.len() as f64);
            group.clear();
        }
        group.push(e);
    }
    if !group.is_empty() {
        out.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    out
}

fn scan(pot: &dyn Potential, e_min: f64, e_max: f64, scan_points: usize) -> Result<Scan> {
    check_range(e_min, e_max, scan_points)?;
    let samples = discriminant_curve(pot, e_min, e_max, scan_points)?;
    let max_imag = samples.iter().map(|s| s.delta.im.abs()).fold(0.0, f64::max);
    let re = |e: f64| monodromy_trace(pot, e, 0.0).map(|d| d.re);
    let mut edges = Vec::new();
    let mut touching = Vec::new();
    let d: Vec<f64> = samples.iter().map(|s| s.delta.re).collect();
    let en: Vec<f64> = samples.iter().map(|s| s.energy).collect();
    for target in [2.0, -2.0] {
        let h = |e: f64| re(e).map(|v| v - target);
        for i in 0..d.len() - 1 {
            let (a, b) = (d[i] - target, d[i + 1] - target);
            if a == 0.0 {
                edges.push(en[i]);
            } else if a * b < 0.0 {
                edges.push(bisect(&h, en[i], en[i + 1], a)?);
            }
        }
        if d[d.len() - 1] == target {
            edges.push(en[d.len() - 1]);
        }
    }
    for i in 1..d.len() - 1 {
        let turning = (d[i] - d[i - 1]) * (d[i + 1] - d[i]) < 0.0;
        if !turning || d[i].abs() < 1.0 {
            continue;
        }
        let e_star = extremum(pot, en[i - 1], en[i + 1])?;
        let d_star = re(e_star)?;
        let target = 2.0f64.copysign(d_star);
        // An extremum beyond ±2 by more than the integration noise is a
        // genuine gap, however narrow; otherwise a near miss is a closed gap.
        let excess = d_star.abs() - 2.0;
        if excess <= GAP_NOISE && -excess < TANGENCY_TOL {
            touching.push(e_star);
            edges.push(e_star);
            continue;
        }
        // a narrow gap or band hidden between two samples
        let h = |e: f64| re(e).map(|v| v - target);
        let (a, s, b) = (d[i - 1] - target, d_star - target, d[i + 1] - target);
        if a * s < 0.0 {
            edges.push(bisect(&h, en[i - 1], e_star, a)?);
        }
        if s * b < 0.0 {
            edges.push(bisect(&h, e_star, en[i + 1], s)?);
        }
    }
    Ok(Scan { samples, edges: merge(edges), touching: merge(touching), max_imag })
}

/// Band edges of the PT potential of `spec` in `[e_min, e_max]`.
pub fn band_edges_numeric(spec: &GalSpec, e_min: f64, e_max: f64, scan_points: usize) -> Result<Vec<f64>> {
    band_edges_of(&spec.line(), e_min, e_max, scan_points)
}

/// Band edges of an arbitrary periodic potential.
pub fn band_edges_of(pot: &dyn Potential, e_min: f64, e_max: f64, scan_points: usize) -> Result<Vec<f64>> {
    Ok(scan(pot, e_min, e_max, scan_points)?.edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub e_min: f64,
    pub e_max: f64,
    pub edges: Vec<f64>,
    /// Closed intervals with |Δ| ≤ 2.
    pub bands: Vec<(f64, f64)>,
    /// Open intervals with |Δ| > 2.
    pub gaps: Vec<(f64, f64)>,
    /// Gaps lying strictly inside the scanned range.
    pub gap_count: usize,
    /// Energies where a gap closes (Δ touches ±2 without crossing).
    pub touching: Vec<f64>,
    pub broken_pt: bool,
    pub max_imag_delta: f64,
    #[serde(skip)]
    pub curve: Vec<DiscriminantSample>,
}

impl BandStructure {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("band structure serializes")
    }
}

/// Band structure of the PT potential of `spec` with the default scan density.
pub fn classify_bands(spec: &GalSpec, e_min: f64, e_max: f64) -> Result<BandStructure> {
    classify_potential(&spec.line(), e_min, e_max, default_scan_points(e_min, e_max))
}

pub fn classify_potential(pot: &dyn Potential, e_min: f64, e_max: f64, scan_points: usize) -> Result<BandStructure> {
    let sc = scan(pot, e_min, e_max, scan_points)?;
    let mut cuts = vec![e_min];
    cuts.extend(sc.edges.iter().copied().filter(|&e| e > e_min && e < e_max));
    cuts.push(e_max);
    let mut segments: Vec<(f64, f64, bool)> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < MERGE_TOL {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        // the scanned sample nearest the midpoint, if one lies inside
        let inside = sc
            .samples
            .iter()
            .filter(|s| s.energy > lo + 0.01 * (hi - lo) && s.energy < hi - 0.01 * (hi - lo))
            .min_by(|a, b| (a.energy - mid).abs().total_cmp(&(b.energy - mid).abs()));
        let re = match inside {
            Some(s) => s.delta.re,
            None => monodromy_trace(pot, mid, 0.0)?.re,
        };
        let allowed = re.abs() <= 2.0;
        match segments.last_mut() {
            Some(last) if last.2 == allowed => last.1 = hi,
            _ => segments.push((lo, hi, allowed)),
        }
    }
    let bands = segments.iter().filter(|s| s.2).map(|s| (s.0, s.1)).collect();
    let gaps: Vec<(f64, f64)> = segments.iter().filter(|s| !s.2).map(|s| (s.0, s.1)).collect();
    let gap_count = gaps.iter().filter(|g| g.0 > e_min && g.1 < e_max).count();
    let broken_pt = sc.max_imag > BROKEN_TOL;
    Ok(BandStructure {
        e_min,
        e_max,
        edges: sc.edges,
        bands,
        gaps,
        gap_count,
        touching: sc.touching,
        broken_pt,
        max_imag_delta: sc.max_imag,
        curve: sc.samples,
    })
}

/// Fixed 15-significant-digit rendering used in every CSV export.
pub fn fmt15(x: f64) -> String {
    format!("{x:.14e}")
}

/// Writes `E,ReDelta,ImDelta` rows with a header.
pub fn write_curve_csv<W: Write>(mut out: W, samples: &[DiscriminantSample]) -> std::io::Result<()> {
    writeln!(out, "E,ReDelta,ImDelta")?;
    for s in samples {
        writeln!(out, "{},{},{}", fmt15(s.energy), fmt15(s.delta.re), fmt15(s.delta.im))?;
    }
    Ok(())
}

/// Samples a potential on `n` points of one period starting at `x0` and
/// returns the interpolating periodic spline.
pub fn sample_periodic(f: impl Fn(f64) -> Result<C64> + Sync, x0: f64, period: f64, n: usize) -> Result<PeriodicSpline> {
    let values: Result<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|j| f(x0 + period * j as f64 / n as f64))
        .collect();
    PeriodicSpline::new(x0, period, values?)
}
