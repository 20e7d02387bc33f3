//! Doubly degenerate mid-band states carrying a Bloch-like factor.

use serde::{Deserialize, Serialize};

use crate::catalog::collocation::Ansatz;
use crate::catalog::{as_index, BlochBase, BlochFactor, PeriodClass, QesState, Sector};
use crate::elliptic::{ModulusM, C64};
use crate::error::{domain, GalError, Result};
use crate::gal::GalSpec;

/// Which parameter sits at a half-integer level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MidbandCase {
    BHalf,
    FHalf,
    GHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MidbandLevel {
    Half,
    ThreeHalves,
}

impl MidbandLevel {
    pub fn value(self) -> f64 {
        match self {
            MidbandLevel::Half => 0.5,
            MidbandLevel::ThreeHalves => 1.5,
        }
    }
}

impl MidbandCase {
    fn base(self) -> BlochBase {
        match self {
            MidbandCase::BHalf => BlochBase::CnPlusISn,
            MidbandCase::FHalf => BlochBase::DnPlusIkSn,
            MidbandCase::GHalf => BlochBase::DnPlusKCn,
        }
    }

    fn name(self) -> &'static str {
        match self {
            MidbandCase::BHalf => "b_half",
            MidbandCase::FHalf => "f_half",
            MidbandCase::GHalf => "g_half",
        }
    }

    /// (b, f, g) for the designated level and the split of the other two.
    fn params(self, level: f64, split: (f64, f64)) -> (f64, f64, f64) {
        let (p, q) = split;
        match self {
            MidbandCase::BHalf => (level, p, q),
            MidbandCase::FHalf => (p, level, q),
            MidbandCase::GHalf => (p, q, level),
        }
    }

    /// Two-sector span for `S = b + f + g - 1/2`.
    fn blocks(self, s: usize) -> Vec<(Sector, usize)> {
        let (pair, x1, x2) = match self {
            MidbandCase::BHalf => (Sector::SC, Sector::C, Sector::S),
            MidbandCase::FHalf => (Sector::SD, Sector::D, Sector::S),
            MidbandCase::GHalf => (Sector::CD, Sector::C, Sector::D),
        };
        if s.is_multiple_of(2) {
            let half = s / 2;
            vec![(Sector::EMPTY, half + 1), (pair, half)]
        } else {
            let half = (s - 1) / 2;
            vec![(x1, half + 1), (x2, half + 1)]
        }
    }
}

/// Closed-form mid-band energies (both branches at level 3/2).
pub fn midband_energies(
    case: MidbandCase,
    t: f64,
    n: usize,
    split: (f64, f64),
    level: MidbandLevel,
    m: ModulusM,
) -> Vec<C64> {
    let m = m.value();
    let (b, f, g) = case.params(level.value(), split);
    let nn = n as f64;
    let sq = |x: f64| x * x;
    let pm = |center: f64, rad: f64| {
        let r = C64::new(rad, 0.0).sqrt();
        vec![center - r, center + r]
    };
    match (case, level) {
        (MidbandCase::BHalf, MidbandLevel::Half) => vec![C64::new(-(t * t + m * sq(g + b)), 0.0)],
        (MidbandCase::FHalf, MidbandLevel::Half) => vec![C64::new(-(m * t * t + sq(g + f)), 0.0)],
        (MidbandCase::GHalf, MidbandLevel::Half) => vec![C64::new(-(sq(f + g) + m * sq(g + b)), 0.0)],
        (MidbandCase::BHalf, MidbandLevel::ThreeHalves) => pm(
            m * (2.0 * g + 1.0) - (1.0 + t * t + m * sq(g + b)),
            sq(2.0 * g + 1.0) * m * m + 4.0 * m * (nn + 1.0) * (f - g) + 4.0 * (1.0 - m) * t * t,
        ),
        (MidbandCase::FHalf, MidbandLevel::ThreeHalves) => pm(
            (2.0 * g + 1.0) - ((1.0 + t * t) * m + sq(g + f)),
            sq(2.0 * g + 1.0) + 4.0 * m * (nn + 1.0) * (b - g) - 4.0 * m * (1.0 - m) * t * t,
        ),
        (MidbandCase::GHalf, MidbandLevel::ThreeHalves) => pm(
            1.0 + 2.0 * f + (2.0 * b + 1.0) * m - (sq(f + g) + m * sq(g + b)),
            (1.0 - m) * (sq(2.0 * f + 1.0) - sq(2.0 * b + 1.0) * m) + 4.0 * m * t * t,
        ),
    }
}

/// The GAL spec hosting the mid-band states: a = t - 1/2 plus the level and split.
pub fn midband_spec(case: MidbandCase, t: f64, split: (f64, f64), level: MidbandLevel, m: ModulusM) -> Result<GalSpec> {
    let (b, f, g) = case.params(level.value(), split);
    GalSpec::new(t - 0.5, b, f, g, m.value())
}

/// Mid-band states and their degenerate partners, ordered as
/// `[state, partner, state, partner, ...]` by energy.
///
/// The partner carries the conjugate base with the same exponent, which is
/// the same as the original base raised to `-t`.
pub fn midband_states(
    case: MidbandCase,
    t: f64,
    n: usize,
    split: (f64, f64),
    level: MidbandLevel,
    m: ModulusM,
) -> Result<Vec<QesState>> {
    let (p, q) = split;
    if as_index(p).is_none() || as_index(q).is_none() {
        return domain(format!("split ({p}, {q}) must be non-negative integers"));
    }
    if as_index(p + q) != Some(n) {
        return domain(format!("split ({p}, {q}) does not sum to N = {n}"));
    }
    if !t.is_finite() || t == 0.0 {
        return domain("Bloch exponent t must be finite and non-zero");
    }
    let spec = midband_spec(case, t, split, level, m)?;
    let (b, f, g) = case.params(level.value(), split);
    let s_index = as_index(b + f + g - 0.5).expect("half-integer level plus integers");
    let blocks = case.blocks(s_index);
    let solve = |base: BlochBase| -> Result<Vec<(C64, Vec<C64>)>> {
        let ansatz = Ansatz { rep: spec.params(), bloch: Some(BlochFactor { base, t }), blocks: blocks.clone() };
        Ok(ansatz
            .solve(&spec)?
            .into_iter()
            .map(|e| (ansatz.energy(e.r, m.value()), e.coeffs))
            .collect())
    };
    let primary = solve(case.base())?;
    let partner = solve(case.base().conjugate())?;
    let n_first = blocks[0].1;
    let build = |base: BlochBase, e: C64, coeffs: &[C64], tag: String| QesState {
        energy: e,
        prefactor_exponents: [-g, -f, -b],
        extra_factor: blocks[0].0,
        companion: blocks[1].0,
        bloch: Some(BlochFactor { base, t }),
        poly_a: coeffs[..n_first].to_vec(),
        poly_b: coeffs[n_first..].to_vec(),
        period_class: PeriodClass::Bloch { t },
        provenance: tag,
    };
    let mut out = Vec::new();
    let energies = midband_energies(case, t, n, split, level, m);
    for (i, &e) in energies.iter().enumerate() {
        let close = |x: &&(C64, Vec<C64>)| (x.0 - e).norm() < 1e-7 * (1.0 + e.norm());
        let (Some(a), Some(c)) = (primary.iter().find(close), partner.iter().find(close)) else {
            return Err(GalError::Verification(format!(
                "closed-form mid-band energy {e} not reproduced by the two-sector ansatz"
            )));
        };
        let branch = if energies.len() == 1 { "" } else if i == 0 { ":-" } else { ":+" };
        let tag = format!("midband:{}:level={}:N={n}{branch}", case.name(), level.value());
        out.push(build(case.base(), e, &a.1, tag.clone()));
        out.push(build(case.base().conjugate(), e, &c.1, format!("{tag}:partner")));
    }
    // keep pairs together while ordering by energy
    let mut pairs: Vec<Vec<QesState>> = out.chunks(2).map(|c| c.to_vec()).collect();
    pairs.sort_by(|x, y| x[0].energy.re.total_cmp(&y[0].energy.re));
    Ok(pairs.into_iter().flatten().collect())
}
