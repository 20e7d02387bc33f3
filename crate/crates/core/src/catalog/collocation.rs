//! Finite-dimensional QES problems solved by collocation on the PT line.

use nalgebra::DMatrix;

use crate::catalog::{as_index, dedupe_states, reflections, sort_states, BlochFactor, QesState, Sector};
use crate::elliptic::C64;
use crate::error::{GalError, Result};
use crate::expr::Expr;
use crate::gal::GalSpec;

/// Largest tolerated condition number of the collocation matrix.
const MAX_COND: f64 = 1e12;
/// Relative residual below which a candidate eigenpair is accepted.
const ACCEPT: f64 = 1e-8;
/// Largest closure index tried by [`qes_spectrum_all`].
const MAX_CLOSURE: usize = 12;

/// φ = B^t · Σ_blocks sector · Σ_k c_k sn^2k in the representation `rep`.
pub(crate) struct Ansatz {
    pub rep: [f64; 4],
    pub bloch: Option<BlochFactor>,
    pub blocks: Vec<(Sector, usize)>,
}

pub(crate) struct Eigenpair {
    /// Eigenvalue R of the φ-equation.
    pub r: C64,
    pub coeffs: Vec<C64>,
}

impl Ansatz {
    fn basis(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        for &(sector, n) in &self.blocks {
            for k in 0..n {
                out.push(sector.expr().mul(&Expr::monomial(C64::new(1.0, 0.0), 2.0 * k as f64, 0.0, 0.0)));
            }
        }
        out
    }

    /// E from the eigenvalue R.
    pub fn energy(&self, r: C64, m: f64) -> C64 {
        let [_, b, f, g] = self.rep;
        r - (f + g) * (f + g) - m * (g + b) * (g + b)
    }

    /// L Z for each basis function Z, where Lφ = Rφ is the φ-equation
    /// written for Z = φ / B^t.
    fn operator_images(&self, m: f64) -> Vec<Expr> {
        let [a, b, f, g] = self.rep;
        let one = C64::new(1.0, 0.0);
        let q = (b + g + f) * (b + g + f - 1.0) - a * (a + 1.0);
        let p = Expr::monomial(one * (2.0 * m * b), 1.0, 1.0, -1.0)
            .add(&Expr::monomial(one * (-2.0 * g), -1.0, 1.0, 1.0))
            .add(&Expr::monomial(one * (2.0 * f), 1.0, -1.0, 1.0));
        let mut first = p.clone();
        let mut zeroth = Expr::monomial(one * (q * m), 2.0, 0.0, 0.0);
        if let Some(bf) = self.bloch {
            let t = bf.t;
            let mu = bf.base.log_derivative(m);
            let dmu = mu.derivative(m);
            first = first.add(&mu.scale(one * (2.0 * t)));
            zeroth = zeroth
                .add(&dmu.scale(one * t))
                .add(&mu.mul(&mu).scale(one * (t * t)))
                .add(&mu.mul(&p).scale(one * t));
        }
        self.basis()
            .into_iter()
            .map(|z| {
                let d1 = z.derivative(m);
                let d2 = d1.derivative(m);
                d2.add(&first.mul(&d1)).add(&zeroth.mul(&z))
            })
            .collect()
    }

    /// All verified eigenpairs.
    pub fn solve(&self, spec: &GalSpec) -> Result<Vec<Eigenpair>> {
        let m = spec.m.value();
        let basis = self.basis();
        let n = basis.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let images = self.operator_images(m);
        let kp = spec.kp();
        let line = spec.line();
        let colloc: Vec<f64> = (0..n).map(|j| kp * (j + 1) as f64 / (n + 1) as f64).collect();
        let extra = n + 4;
        let check: Vec<f64> = (0..extra)
            .map(|j| kp * (1.0 + (j as f64 + 0.37) / extra as f64))
            .chain((0..extra).map(|j| -kp * (j as f64 + 0.61) / extra as f64))
            .collect();
        let fill = |xs: &[f64]| {
            let mut phi = DMatrix::<C64>::zeros(xs.len(), n);
            let mut lphi = DMatrix::<C64>::zeros(xs.len(), n);
            for (i, &x) in xs.iter().enumerate() {
                let (s, c, d) = line.functions(x);
                for k in 0..n {
                    phi[(i, k)] = basis[k].eval(s, c, d);
                    lphi[(i, k)] = images[k].eval(s, c, d);
                }
            }
            (phi, lphi)
        };
        let (phi, lphi) = fill(&colloc);
        let sv = phi.clone().singular_values();
        let cond = sv.max() / sv.min();
        if !cond.is_finite() || cond > MAX_COND {
            return Err(GalError::IllConditioned(cond));
        }
        let inv = phi.clone().try_inverse().ok_or(GalError::IllConditioned(f64::INFINITY))?;
        let mat = &inv * &lphi;
        let eig = mat
            .clone()
            .schur()
            .eigenvalues()
            .ok_or_else(|| GalError::Verification("eigenvalue iteration did not converge".into()))?;

        // Verification uses every point, collocation and check alike.
        let all: Vec<f64> = colloc.iter().chain(check.iter()).copied().collect();
        let (phi_all, lphi_all) = fill(&all);

        let mut eigs: Vec<C64> = eig.iter().copied().collect();
        eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut out: Vec<Eigenpair> = Vec::new();
        let mut i = 0;
        while i < eigs.len() {
            // cluster nearly equal eigenvalues
            let mut j = i + 1;
            while j < eigs.len() && (eigs[j] - eigs[i]).norm() < 1e-7 * (1.0 + eigs[i].norm()) {
                j += 1;
            }
            let mult = j - i;
            let r0: C64 = eigs[i..j].iter().sum::<C64>() / mult as f64;
            for v in null_vectors(&phi_all, &lphi_all, r0, mult) {
                // refine R by a Rayleigh-type quotient
                let pv = &phi_all * &v;
                let lv = &lphi_all * &v;
                let r = pv.dotc(&lv) / pv.dotc(&pv);
                let v = if mult == 1 { null_vectors(&phi_all, &lphi_all, r, 1).pop().unwrap_or(v) } else { v };
                let pv = &phi_all * &v;
                let lv = &lphi_all * &v;
                let res = (&lv - &pv * r).norm() / (lv.norm() + (1.0 + r.norm()) * pv.norm()).max(1e-300);
                if res < ACCEPT && !out.iter().any(|e| same_vector(&e.coeffs, v.as_slice()) && (e.r - r).norm() < 1e-7) {
                    out.push(Eigenpair { r, coeffs: normalize(v.as_slice()) });
                }
            }
            i = j;
        }
        Ok(out)
    }
}

fn null_vectors(phi: &DMatrix<C64>, lphi: &DMatrix<C64>, r: C64, count: usize) -> Vec<nalgebra::DVector<C64>> {
    let a = lphi - phi * r;
    let svd = a.svd(false, true);
    let Some(vt) = svd.v_t else { return Vec::new() };
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    idx.into_iter()
        .take(count)
        .map(|k| vt.row(k).adjoint().into_owned())
        .collect()
}

fn same_vector(a: &[C64], b: &[C64]) -> bool {
    let nb = normalize(b);
    a.iter().zip(nb.iter()).all(|(x, y)| (x - y).norm() < 1e-6)
}

/// Scales so that the largest coefficient is 1.
fn normalize(v: &[C64]) -> Vec<C64> {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    v.iter().map(|x| x / pivot).collect()
}

/// Eigenstates of the span `{sector · sn^2k : k < basis_size}` in the
/// representation given literally by `spec`.
pub fn qes_spectrum_general(spec: &GalSpec, sector: Sector, basis_size: usize) -> Result<Vec<QesState>> {
    let ansatz = Ansatz { rep: spec.params(), bloch: None, blocks: vec![(sector, basis_size)] };
    let [_, b, f, g] = spec.params();
    let m = spec.m.value();
    let mut states: Vec<QesState> = ansatz
        .solve(spec)?
        .into_iter()
        .map(|e| QesState::new(ansatz.energy(e.r, m), [-g, -f, -b], sector, e.coeffs, "collocation"))
        .collect();
    sort_states(&mut states);
    Ok(states)
}

/// Every polynomial-in-sn² QES state of `spec` over the sixteen reflection
/// representations whose parameter sum is an even integer.
pub fn qes_spectrum_all(spec: &GalSpec) -> Result<Vec<QesState>> {
    let mut states = Vec::new();
    for rep in reflections(spec.params()) {
        let Some(twice) = as_index(rep.iter().sum()) else { continue };
        if twice % 2 != 0 || twice / 2 > MAX_CLOSURE {
            continue;
        }
        let rs = GalSpec::from_params(rep, spec.m.value())?.with_beta(spec.beta)?;
        states.extend(qes_spectrum_general(&rs, Sector::EMPTY, twice / 2 + 1)?);
    }
    let mut states = dedupe_states(states, spec);
    sort_states(&mut states);
    Ok(states)
}
