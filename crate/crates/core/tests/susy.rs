use galband::catalog::{closed_form_edges, eval_state, qes_spectrum_all, QesState, Sector};
use galband::elliptic::{jacobi, quarter_shift, QuarterShift};
use galband::gal::period_grid;
use galband::spectral::band_edges_numeric;
use galband::susy::{
    compare_pair, conjecture_pairs, edge_window, fit_gal, identify_gal, isospectrality_report_with, partner_profile,
    superpotential,
};
use galband::{GalSpec, C64};

fn state_at(states: &[QesState], e: f64) -> &QesState {
    states.iter().find(|s| (s.energy - C64::new(e, 0.0)).norm() < 1e-9).unwrap_or_else(|| panic!("no state at {e}"))
}

/// Five-point stencil for -ψ'/ψ.
fn fd_superpotential(st: &QesState, spec: &GalSpec, x: f64) -> C64 {
    let h = 1e-3;
    let p = |k: f64| eval_state(st, spec, x + k * h).unwrap();
    let d = (p(-2.0) - 8.0 * p(-1.0) + 8.0 * p(1.0) - p(2.0)) / (12.0 * h);
    -d / p(0.0)
}

#[test]
fn lame_one_partners_are_translates() {
    let m = 0.5;
    let spec = GalSpec::lame(1.0, m).unwrap();
    let states = closed_form_edges(&spec).unwrap();
    let st = state_at(&states, -m);
    for x in [0.0, 0.4, 1.9] {
        let t = jacobi(spec.y_of(x), spec.m).unwrap();
        let want = C64::i() * m * t.sn * t.cn / t.dn;
        assert!((superpotential(st, &spec, x).unwrap() - want).norm() < 1e-13);
    }
    // sn, cn and dn partners are Lamé translated by iK', K + iK' and K
    let grid = period_grid(&spec, 300);
    for (e, q) in [(-1.0 - m, QuarterShift::IKp), (-1.0, QuarterShift::KPlusIKp), (-m, QuarterShift::K)] {
        let profile = partner_profile(state_at(&states, e), &spec, &grid).unwrap();
        let shifted: Vec<C64> = grid
            .iter()
            .map(|&x| {
                let t = quarter_shift(spec.y_of(x), spec.m, q).unwrap();
                -2.0 * m * t.sn * t.sn
            })
            .collect();
        assert!(profile.deviation_up_to_constant(&shifted) < 1e-11, "E={e}");
    }
}

#[test]
fn free_particle_has_zero_superpotential() {
    let spec = GalSpec::new(0.0, 0.0, 0.0, 0.0, 0.4).unwrap();
    let states = qes_spectrum_all(&spec).unwrap();
    let st = state_at(&states, 0.0);
    for x in [0.0, 0.7, 2.2] {
        assert!(superpotential(st, &spec, x).unwrap().norm() < 1e-14);
    }
}

#[test]
fn superpotential_matches_finite_difference() {
    for spec in [
        GalSpec::lame(2.0, 0.5).unwrap(),
        GalSpec::new(2.0, 1.0, 1.0, 1.0, 0.6).unwrap(),
        GalSpec::new(3.0, 0.0, 0.0, 1.0, 0.3).unwrap(),
    ] {
        for st in closed_form_edges(&spec).unwrap() {
            for x in [0.15, 0.8, 1.6] {
                let w = superpotential(&st, &spec, x).unwrap();
                let fd = fd_superpotential(&st, &spec, x);
                assert!((w - fd).norm() < 1e-7 * w.norm().max(1.0), "{} x={x}: {w} vs {fd}", st.provenance);
            }
        }
    }
}

#[test]
fn factorization_and_partner_identities() {
    for spec in [
        GalSpec::lame(3.0, 0.5).unwrap(),
        GalSpec::new(2.0, 1.0, 0.0, 0.0, 0.5).unwrap(),
        GalSpec::new(2.0, 1.0, 1.0, 1.0, 0.7).unwrap(),
    ] {
        let grid = period_grid(&spec, 400);
        for st in closed_form_edges(&spec).unwrap() {
            let p = partner_profile(&st, &spec, &grid).unwrap();
            assert!(p.factorization_residual() < 1e-9, "{}: {}", st.provenance, p.factorization_residual());
            assert!(p.partner_identity_residual() < 1e-9);
        }
    }
}

#[test]
fn catalog_states_have_no_real_axis_zeros() {
    for spec in [
        GalSpec::lame(1.0, 0.5).unwrap(),
        GalSpec::lame(2.0, 0.2).unwrap(),
        GalSpec::lame(3.0, 0.8).unwrap(),
        GalSpec::new(2.0, 1.0, 0.0, 0.0, 0.5).unwrap(),
        GalSpec::new(3.0, 0.0, 0.0, 1.0, 0.5).unwrap(),
        GalSpec::new(2.0, 1.0, 1.0, 1.0, 0.5).unwrap(),
    ] {
        let grid = period_grid(&spec, 4096);
        for st in closed_form_edges(&spec).unwrap() {
            assert!(partner_profile(&st, &spec, &grid).is_ok(), "{:?} {}", spec.params(), st.provenance);
        }
    }
}

#[test]
fn lame_three_partner_is_six_two_two_two() {
    let m = 0.5;
    let spec = GalSpec::lame(3.0, m).unwrap();
    let states = closed_form_edges(&spec).unwrap();
    let st = state_at(&states, -4.0 - 4.0 * m);
    let grid = period_grid(&spec, 512);
    let profile = partner_profile(st, &spec, &grid).unwrap();
    // -m[6 sn²(y) + 2 sn²(y+K) + 2 sn²(y+iK') + 2 sn²(y+K+iK')]
    let direct: Vec<C64> = grid
        .iter()
        .map(|&x| {
            let y = spec.y_of(x);
            let s0 = jacobi(y, spec.m).unwrap().sn;
            let sq = |q| {
                let s = quarter_shift(y, spec.m, q).unwrap().sn;
                s * s
            };
            -m * (6.0 * s0 * s0 + 2.0 * sq(QuarterShift::K) + 2.0 * sq(QuarterShift::IKp) + 2.0 * sq(QuarterShift::KPlusIKp))
        })
        .collect();
    assert!(profile.deviation_up_to_constant(&direct) < 1e-9);
    let (found, residual) = identify_gal(&profile, spec.m, spec.beta).unwrap();
    assert!(residual < 1e-10);
    for (x, y) in found.bracket().iter().zip([6.0, 2.0, 2.0, 2.0]) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn lame_two_sn_cn_partner() {
    let m = 0.5;
    let spec = GalSpec::lame(2.0, m).unwrap();
    let states = closed_form_edges(&spec).unwrap();
    let st = state_at(&states, -4.0 - m);
    let grid = period_grid(&spec, 400);
    let profile = partner_profile(st, &spec, &grid).unwrap();
    let direct: Vec<C64> = grid
        .iter()
        .map(|&x| {
            let y = spec.y_of(x);
            let s0 = jacobi(y, spec.m).unwrap().sn;
            let sq = |q| {
                let s = quarter_shift(y, spec.m, q).unwrap().sn;
                s * s
            };
            -2.0 * m * (s0 * s0 + sq(QuarterShift::KPlusIKp) + sq(QuarterShift::IKp)) - st.energy
        })
        .collect();
    assert!(profile.deviation_up_to_constant(&direct) < 1e-10);
    let (found, residual) = identify_gal(&profile, spec.m, spec.beta).unwrap();
    assert!(residual < 1e-10);
    for (x, y) in found.bracket().iter().zip([2.0, 0.0, 2.0, 2.0]) {
        assert!((x - y).abs() < 1e-8, "{:?}", found.bracket());
    }
}

#[test]
fn lame_two_even_partner_has_a_rational_term() {
    let m = 0.5;
    let spec = GalSpec::lame(2.0, m).unwrap();
    let grid = period_grid(&spec, 400);
    let even: Vec<QesState> = closed_form_edges(&spec)
        .unwrap()
        .into_iter()
        .filter(|s| s.extra_factor == Sector::EMPTY && s.poly_a.len() == 2)
        .collect();
    assert_eq!(even.len(), 2);
    for st in &even {
        let e = st.energy;
        // the state is 1 + (E/2) sn²
        assert!((st.poly_a[1] / st.poly_a[0] - e / 2.0).norm() < 1e-12);
        let profile = partner_profile(st, &spec, &grid).unwrap();
        for (&x, vp) in grid.iter().zip(&profile.values) {
            let t = jacobi(spec.y_of(x), spec.m).unwrap();
            let s2 = t.sn * t.sn;
            let den = 1.0 + e / 2.0 * s2;
            let want = 6.0 * m * s2 + e - 2.0 * e * e * s2 * t.cn * t.cn * t.dn * t.dn / (den * den);
            assert!((vp - want).norm() < 1e-10 * (1.0 + want.norm()), "x={x}: {vp} vs {want}");
        }
        assert!(identify_gal(&profile, spec.m, spec.beta).is_none());
        let (_, residual, _) = fit_gal(&profile, spec.m, spec.beta).unwrap();
        assert!(residual > 1e-4);
    }
}

#[test]
fn lame_three_partner_is_isospectral() {
    let spec = GalSpec::lame(3.0, 0.5).unwrap();
    let states = closed_form_edges(&spec).unwrap();
    let st = state_at(&states, -6.0);
    let (lo, hi) = edge_window(&[spec]).unwrap();
    let r = isospectrality_report_with(&spec, st, lo, hi, 800, 4096).unwrap();
    assert_eq!(r.edges_original.len(), 7, "{:?}", r.edges_original);
    assert!(r.counts_match);
    assert!(r.agrees(), "{}", r.max_discrepancy);
}

#[test]
fn complex_energy_states_have_no_report() {
    let st = galband::catalog::midband_states(
        galband::catalog::MidbandCase::GHalf,
        0.7,
        1,
        (1.0, 0.0),
        galband::catalog::MidbandLevel::ThreeHalves,
        galband::ModulusM::spectral(0.5).unwrap(),
    )
    .unwrap()
    .into_iter()
    .find(|s| s.is_broken_pt())
    .unwrap();
    let spec = GalSpec::lame(2.0, 0.5).unwrap();
    assert!(isospectrality_report_with(&spec, &st, -5.0, 0.0, 200, 4096).is_err());
}

#[test]
fn six_lame_and_two_two_two_zero_share_edges() {
    let pair = conjecture_pairs(0.5).unwrap().into_iter().find(|p| p.label == "lame-even a=1").unwrap();
    assert_eq!(pair.left.bracket(), [6.0, 0.0, 0.0, 0.0]);
    assert_eq!(pair.right.bracket(), [2.0, 2.0, 2.0, 0.0]);
    let r = compare_pair(&pair, 800).unwrap();
    assert_eq!(r.edges_left.len(), 5);
    assert!(r.agree, "{}", r.max_discrepancy);
    let direct = band_edges_numeric(&pair.right, r.e_range.0, r.e_range.1, 800).unwrap();
    assert_eq!(direct, r.edges_right);
}
