//! The acceptance suite: twelve numbered checks, each producing one row.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{
    closed_form_edges, lame_a4_edges, midband_energies, midband_spec, midband_states, qes_spectrum_all,
    qes_spectrum_general, schrodinger_residual, table_states, MidbandCase, MidbandLevel, QesState, Sector,
};
use crate::elliptic::{complete_k, complete_kp, dual_point, jacobi, pole_distance, ModulusM, C64};
use crate::error::{GalError, Result};
use crate::gal::{period_grid, transform_spec, GalSpec, TransformOp};
use crate::heun::{gal_to_heun, heun_residual};
use crate::spectral::{
    band_edges_numeric, classify_potential, discriminant, monodromy_trace, BandStructure, RealAssociatedLame, MERGE_TOL,
};
use crate::susy::{
    compare_pair, conjecture_pairs, edge_window, identify_gal, isospectrality_report_with, partner_profile,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Modulus used by the checks that are stated at a single `m`.
    pub m: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { m: 0.5, seed: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "elliptic identities"),
    (2, "lame a=1 band edges"),
    (3, "lame a=2 edge energies"),
    (4, "table residual sweep"),
    (5, "collocation vs closed form"),
    (6, "modulus duality"),
    (7, "discriminant identities"),
    (8, "susy partners"),
    (9, "finite-gap counts"),
    (10, "conjectured pairings"),
    (11, "mid-band states"),
    (12, "heun dictionary"),
];

pub fn criterion_name(id: u8) -> Option<&'static str> {
    CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, n)| *n)
}

type Outcome = Result<(bool, String)>;

/// Runs one criterion. Errors inside the check become a failed row.
pub fn run_criterion(id: u8, opts: &VerifyOptions) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => c1_elliptic(opts),
        2 => c2_lame1(opts),
        3 => c3_lame2(opts),
        4 => c4_residuals(),
        5 => c5_collocation(),
        6 => c6_duality(opts),
        7 => c7_discriminant(),
        8 => c8_susy(opts),
        9 => c9_gaps(opts),
        10 => c10_conjecture(),
        11 => c11_midband(opts),
        12 => c12_heun(opts),
        _ => Err(GalError::Unsupported(format!("no criterion {id}"))),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    let limit = match id {
        1 => Some(5.0),
        2 => Some(10.0),
        3 => Some(20.0),
        _ => None,
    };
    let (mut passed, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit {
        if elapsed_s > limit {
            passed = false;
            detail = format!("{detail}; exceeded {limit} s");
        }
    }
    CriterionResult { id, name: criterion_name(id).unwrap_or("unknown").to_string(), passed, detail, elapsed_s }
}

/// Runs the given criteria in order. Each check parallelizes internally, so
/// the rows run one after another and their timings stay comparable.
pub fn run_suite(ids: &[u8], opts: &VerifyOptions) -> Vec<CriterionResult> {
    ids.iter().map(|&id| run_criterion(id, opts)).collect()
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionResult> {
    let ids: Vec<u8> = CRITERIA.iter().map(|(i, _)| *i).collect();
    run_suite(&ids, opts)
}

pub fn format_row(r: &CriterionResult) -> String {
    format!(
        "[{:>2}] {} {:<28} {:>8.2}s  {}",
        r.id,
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.elapsed_s,
        r.detail
    )
}

fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

fn c1_elliptic(opts: &VerifyOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst_id: f64 = 0.0;
    let mut worst_dual: f64 = 0.0;
    let mut checked = 0usize;
    for i in 1..=9 {
        let m = ModulusM::new(i as f64 / 10.0)?;
        let mc = m.complement();
        let (k, kp) = (complete_k(m)?, complete_kp(m)?);
        let (rk, rkc) = (m.value().sqrt(), mc.value().sqrt());
        let mut n = 0;
        while n < 1000 {
            let y = C64::new(rng.gen_range(-4.0 * k..4.0 * k), rng.gen_range(-3.0 * kp..3.0 * kp));
            let w = dual_point(y, m)?;
            let near = |z: C64, mm: ModulusM| pole_distance(z, mm).is_none_or(|(d, _)| d < 0.05);
            if near(y, m) || near(w, mc) {
                continue;
            }
            n += 1;
            let t = jacobi(y, m)?;
            let d = jacobi(w, mc)?;
            let scale = 1.0 + t.sn.norm_sqr();
            let (r1, r2) = t.identity_residuals();
            worst_id = worst_id.max(r1.max(r2) / scale);
            let dual = [
                (rk * t.sn + d.dn).norm(),
                (t.dn - rkc * d.sn).norm(),
                (rk * t.cn - C64::i() * rkc * d.cn).norm(),
            ];
            worst_dual = worst_dual.max(dual.iter().fold(0.0f64, |a, &b| a.max(b)) / scale);
        }
        checked += n;
    }
    let passed = worst_id < 1e-12 && worst_dual < 1e-12;
    Ok((
        passed,
        format!("{checked} points; identities {}, duality {} (scaled by 1+|sn|^2)", sci(worst_id), sci(worst_dual)),
    ))
}

fn unique_real_energies(states: &[QesState]) -> Vec<f64> {
    let mut e: Vec<f64> = states.iter().filter(|s| !s.is_broken_pt()).map(|s| s.energy.re).collect();
    e.sort_by(f64::total_cmp);
    e.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    e
}

fn c2_lame1(opts: &VerifyOptions) -> Outcome {
    let spec = GalSpec::lame(1.0, opts.m)?;
    let expected = unique_real_energies(&closed_form_edges(&spec)?);
    let edges = band_edges_numeric(&spec, -3.0, 1.0, 2000)?;
    if edges.len() != expected.len() {
        return Ok((false, format!("edges {edges:?} vs closed forms {expected:?}")));
    }
    let dev = edges.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((dev < 1e-8, format!("edges {:?}; max deviation {}", edges.iter().map(|e| format!("{e:.10}")).collect::<Vec<_>>(), sci(dev))))
}

fn c3_lame2(opts: &VerifyOptions) -> Outcome {
    let m = opts.m;
    let spec = GalSpec::lame(2.0, m)?;
    let r = (1.0 - m + m * m).sqrt();
    let energies = [-2.0 * (1.0 + m) - 2.0 * r, -2.0 * (1.0 + m) + 2.0 * r, -4.0 - m, -1.0 - 4.0 * m, -1.0 - m];
    let mut worst: f64 = 0.0;
    for e in energies {
        worst = worst.max((discriminant(&spec, e)?.delta.norm() - 2.0).abs());
    }
    Ok((worst < 1e-6, format!("max ||Delta|-2| = {} over 5 energies", sci(worst))))
}

/// Every literal representation, with integer `a` in 1..=5, that one of the
/// four table families covers.
pub fn table_sweep_specs(m: f64) -> Result<Vec<GalSpec>> {
    let mut reps: Vec<[f64; 4]> = Vec::new();
    for a in 1..=5 {
        let a = a as f64;
        for n in 0..=4 {
            let n = n as f64;
            reps.push([a, 0.0, 0.0, n - a]);
            reps.push([a, 0.0, n - a, 0.0]);
        }
        for n in 0..=3 {
            for b in -2..=3 {
                let b = b as f64;
                reps.push([a, b, 0.0, n as f64 - a - b]);
            }
        }
        for n in 0..=1 {
            for b in -2..=2 {
                for f in -2..=2 {
                    let (b, f) = (b as f64, f as f64);
                    reps.push([a, b, f, 2.0 * n as f64 - a - b - f]);
                }
            }
        }
    }
    reps.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    reps.dedup();
    reps.into_iter().map(|p| GalSpec::from_params(p, m)).collect()
}

fn c4_residuals() -> Outcome {
    let mut count = 0;
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for m in [0.3, 0.7] {
        for spec in table_sweep_specs(m)? {
            let grid = period_grid(&spec, 64);
            for st in table_states(&spec) {
                count += 1;
                let r = schrodinger_residual(&st, &spec, &grid);
                if !(r <= worst) {
                    worst = r;
                    worst_at = format!("{} at {:?} m={m}", st.provenance, spec.params());
                }
            }
        }
    }
    Ok((count > 0 && worst < 1e-8, format!("{count} states; max residual {} ({worst_at})", sci(worst))))
}


/// Largest distance under a greedy nearest-neighbour pairing of two
/// multisets; infinite when the sizes differ.
fn multiset_deviation(a: Vec<C64>, mut b: Vec<C64>) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("sizes match");
        worst = worst.max(d);
        b.swap_remove(k);
    }
    worst
}

fn c5_collocation() -> Outcome {
    let mut groups = 0;
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for m in [0.3, 0.7] {
        for spec in table_sweep_specs(m)? {
            let states = table_states(&spec);
            let mut keys: Vec<(Sector, usize)> = states.iter().map(|s| (s.extra_factor, s.poly_a.len())).collect();
            keys.sort_by_key(|(s, n)| (s.sn, s.cn, s.dn, *n));
            keys.dedup();
            for (sector, size) in keys {
                let mut table: Vec<C64> = Vec::new();
                for s in states.iter().filter(|s| s.extra_factor == sector && s.poly_a.len() == size) {
                    if !table.iter().any(|t| (t - s.energy).norm() < 1e-9) {
                        table.push(s.energy);
                    }
                }
                let coll: Vec<C64> = qes_spectrum_general(&spec, sector, size)?.iter().map(|s| s.energy).collect();
                let dev = multiset_deviation(table, coll);
                groups += 1;
                if !(dev <= worst) {
                    worst = dev;
                    worst_at = format!("{:?} sector {sector} size {size} m={m}", spec.params());
                }
            }
        }
    }
    Ok((groups > 0 && worst < 1e-9, format!("{groups} spans; max deviation {} ({worst_at})", sci(worst))))
}

#[derive(Clone, Copy)]
enum DualFamily {
    General,
    BFZero,
    FZero,
}

fn c6_duality(opts: &VerifyOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(6));
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    let mut draws = 0;
    for family in [DualFamily::General, DualFamily::BFZero, DualFamily::FZero] {
        for _ in 0..20 {
            let m = rng.gen_range(0.1..0.9);
            let n = rng.gen_range(0..=3) as f64;
            let a = rng.gen_range(0.2..3.0);
            let (b, f) = match family {
                DualFamily::General => (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)),
                DualFamily::BFZero => (0.0, 0.0),
                DualFamily::FZero => (rng.gen_range(-1.5..1.5), 0.0),
            };
            let g = 2.0 * n - a - b - f;
            let spec = GalSpec::new(a, b, f, g, m)?;
            let t = transform_spec(&spec, TransformOp::Dual)?;
            let mapped: Vec<C64> = qes_spectrum_all(&spec)?.iter().map(|s| t.energy_map.apply(s.energy)).collect();
            let dual: Vec<C64> = qes_spectrum_all(&t.new_spec)?.iter().map(|s| s.energy).collect();
            let dev = if mapped.is_empty() { f64::INFINITY } else { multiset_deviation(mapped, dual) };
            draws += 1;
            if !(dev <= worst) {
                worst = dev;
                worst_at = format!("{:?} m={m:.4}", spec.params());
            }
        }
    }
    Ok((worst < 1e-9, format!("{draws} draws over 3 families; max deviation {} ({worst_at})", sci(worst))))
}

fn c7_discriminant() -> Outcome {
    let m = 0.4;
    let mc = ModulusM::new(1.0 - m)?;
    let grid: Vec<f64> = (0..50).map(|j| -7.0 + 8.0 * j as f64 / 49.0).collect();
    let mut worst: f64 = 0.0;
    for (spec, host, shift) in [
        (GalSpec::lame(2.0, m)?, RealAssociatedLame::new(2.0, 0.0, mc)?, 6.0),
        (GalSpec::new(2.0, 0.0, 0.0, 1.0, m)?, RealAssociatedLame::new(2.0, 1.0, mc)?, 8.0),
    ] {
        for &e in &grid {
            let pt = discriminant(&spec, e)?.delta;
            let real = monodromy_trace(&host, e + shift, 0.0)?;
            worst = worst.max((pt - real).norm() / real.norm().max(1.0));
        }
    }
    Ok((worst < 1e-6, format!("100 energies; max |dDelta|/max(1,|Delta|) = {}", sci(worst))))
}

fn c8_susy(opts: &VerifyOptions) -> Outcome {
    let m = opts.m;
    let host = GalSpec::lame(3.0, m)?;
    let target = -4.0 - 4.0 * m;
    let states = closed_form_edges(&host)?;
    let Some(scd) = states.iter().find(|s| (s.energy - target).norm() < 1e-9) else {
        return Ok((false, "no sn*cn*dn state of [12,0,0,0]".into()));
    };
    let grid = period_grid(&host, 512);
    let profile = partner_profile(scd, &host, &grid)?;
    let expected = GalSpec::new(2.0, 1.0, 1.0, 1.0, m)?.with_beta(host.beta)?;
    let line = expected.line();
    let values: Vec<C64> = grid.iter().map(|&x| line.value(x)).collect();
    let dev = profile.deviation_up_to_constant(&values);
    let identified = identify_gal(&profile, host.m, host.beta).map(|(s, _)| s.bracket());
    let id_ok = identified.is_some_and(|b| b.iter().zip([6.0, 2.0, 2.0, 2.0]).all(|(x, y)| (x - y).abs() < 1e-6));

    let lame2 = GalSpec::lame(2.0, m)?;
    let edges = closed_form_edges(&lame2)?;
    let (lo, hi) = {
        let e = unique_real_energies(&edges);
        (e[0] - 1.0, e[e.len() - 1] + 1.0)
    };
    let mut worst: f64 = 0.0;
    let mut all_agree = edges.len() == 5;
    for st in &edges {
        let r = isospectrality_report_with(&lame2, st, lo, hi, 600, 4096)?;
        all_agree &= r.agrees();
        worst = worst.max(r.max_discrepancy);
    }
    Ok((
        dev < 1e-9 && id_ok && all_agree,
        format!(
            "deviation {}; identified {:?}; {} partners of [6,0,0,0], max edge discrepancy {}",
            sci(dev),
            identified,
            edges.len(),
            sci(worst)
        ),
    ))
}

/// Edges that bound an open gap, leaving out closed-gap touching points.
fn open_edges(bs: &BandStructure) -> usize {
    bs.edges.iter().filter(|e| !bs.touching.iter().any(|t| (*e - t).abs() < MERGE_TOL)).count()
}

fn c9_gaps(opts: &VerifyOptions) -> Outcome {
    let m = opts.m;
    let mut parts = Vec::new();
    let mut counts = Vec::new();
    for bracket in [[6.0, 2.0, 0.0, 0.0], [12.0, 0.0, 0.0, 2.0]] {
        let spec = GalSpec::from_bracket(bracket, m)?;
        let (lo, hi) = edge_window(&[spec])?;
        let bs = classify_potential(&spec.line(), lo, hi, 1500)?;
        let edges = open_edges(&bs);
        parts.push(format!("{bracket:?} on [{lo:.3}, {hi:.3}]: {} gaps, {edges} edges", bs.gap_count));
        counts.push((bs.gap_count, edges));
    }
    let passed = counts[0] == (2, 5) && counts[1].0 == 3;
    Ok((passed, parts.join("; ")))
}

fn c10_conjecture() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut agree = true;
    let mut rows = 0;
    let mut printed_gap: f64 = f64::INFINITY;
    let mut corrected: f64 = 0.0;
    for m in [0.3, 0.7] {
        for pair in conjecture_pairs(m)? {
            if !pair.label.starts_with("lame-even") {
                continue;
            }
            let r = compare_pair(&pair, 800)?;
            rows += 1;
            agree &= r.agree;
            worst = worst.max(r.max_discrepancy);
        }
        let lame4 = GalSpec::lame(4.0, m)?;
        for st in lame_a4_edges(ModulusM::new(m)?)? {
            let d = discriminant(&lame4, st.energy.re)?.delta.norm();
            corrected = corrected.max((d - 2.0).abs());
        }
        let rad = 2.0 * (9.0 * m * m - 9.0 * m + 4.0).sqrt();
        for e in [5.0 * (1.0 + 2.0 * m) - rad, 5.0 * (1.0 + 2.0 * m) + rad] {
            let d = discriminant(&lame4, e)?.delta.norm();
            printed_gap = printed_gap.min((d - 2.0).abs());
        }
    }
    Ok((
        rows == 4 && agree && corrected < 1e-6,
        format!(
            "{rows} pairs, max discrepancy {}; [20,0,0,0] closed forms max ||Delta|-2| {}, positive-sign variant min {}",
            sci(worst),
            sci(corrected),
            sci(printed_gap)
        ),
    ))
}

fn c11_midband(opts: &VerifyOptions) -> Outcome {
    let m = ModulusM::spectral(opts.m)?;
    let t = 1.3;
    let (case, level) = (MidbandCase::BHalf, MidbandLevel::Half);
    let mut residual: f64 = 0.0;
    let mut split_gap: f64 = 0.0;
    let mut parity: f64 = 0.0;
    let mut delta_excess = f64::NEG_INFINITY;
    let mut count = 0;
    for (n, split) in [(0, (0.0, 0.0)), (1, (1.0, 0.0)), (1, (0.0, 1.0))] {
        let spec = midband_spec(case, t, split, level, m)?;
        let grid = period_grid(&spec, 128);
        let states = midband_states(case, t, n, split, level, m)?;
        for pair in states.chunks(2) {
            let [s, p] = pair else {
                return Ok((false, "unpaired mid-band state".into()));
            };
            count += 2;
            residual = residual.max(schrodinger_residual(s, &spec, &grid)).max(schrodinger_residual(p, &spec, &grid));
            split_gap = split_gap.max((s.energy - p.energy).norm());
            let d = discriminant(&spec, s.energy.re)?.delta.norm();
            delta_excess = delta_excess.max(d - 2.0);
        }
        let plus = midband_energies(case, t, n, split, level, m);
        let minus = midband_energies(case, -t, n, split, level, m);
        parity = parity.max(multiset_deviation(plus, minus));
    }
    let passed = count > 0 && residual < 1e-8 && split_gap < 1e-12 && parity < 1e-12 && delta_excess <= 1e-6;
    Ok((
        passed,
        format!(
            "{count} states; residual {}, partner energy gap {}, t-parity {}, max |Delta|-2 = {}",
            sci(residual),
            sci(split_gap),
            sci(parity),
            sci(delta_excess)
        ),
    ))
}

fn c12_heun(opts: &VerifyOptions) -> Outcome {
    let mut pool: Vec<(GalSpec, QesState)> = Vec::new();
    for m in [0.3, 0.7] {
        for spec in table_sweep_specs(m)? {
            pool.extend(table_states(&spec).into_iter().map(|s| (spec, s)));
        }
    }
    let m = ModulusM::spectral(opts.m)?;
    let lame4 = GalSpec::lame(4.0, m.value())?;
    pool.extend(lame_a4_edges(m)?.into_iter().map(|s| (lame4, s)));
    for (n, split) in [(0, (0.0, 0.0)), (1, (1.0, 0.0)), (1, (0.0, 1.0))] {
        let spec = midband_spec(MidbandCase::BHalf, 1.3, split, MidbandLevel::Half, m)?;
        let states = midband_states(MidbandCase::BHalf, 1.3, n, split, MidbandLevel::Half, m)?;
        pool.extend(states.into_iter().map(|s| (spec, s)));
    }
    let mut constraint: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut worst_at = String::new();
    for (spec, st) in &pool {
        let rep = st.representation(spec)?;
        let hp = gal_to_heun(&rep, st.energy);
        constraint = constraint.max(hp.constraint_residual());
        let grid: Vec<f64> = period_grid(&rep, 64).into_iter().map(|x| x + 0.0137).collect();
        let r = heun_residual(&hp, st, &rep, &grid)?;
        if !(r <= residual) {
            residual = r;
            worst_at = format!("{} of {:?}", st.provenance, rep.params());
        }
    }
    Ok((
        constraint < 1e-14 && residual < 1e-8,
        format!("{} states; constraint {}, residual {} ({worst_at})", pool.len(), sci(constraint), sci(residual)),
    ))
}
