use galband::catalog::{
    closed_form_edges, delta_values, eval_state, lame_a4_edges, midband_energies, midband_spec, midband_states,
    qes_spectrum_all, qes_spectrum_general, schrodinger_residual, table_states, MidbandCase, MidbandLevel, QesState,
    Sector,
};
use galband::elliptic::jacobi;
use galband::gal::{period_grid, transform_spec, TransformOp};
use galband::spectral::band_edges_numeric;
use galband::susy::edge_window;
use galband::{GalSpec, ModulusM, C64};
use proptest::prelude::*;

fn mm(v: f64) -> ModulusM {
    ModulusM::spectral(v).unwrap()
}

fn energies(states: &[QesState]) -> Vec<C64> {
    states.iter().map(|s| s.energy).collect()
}

fn real_sorted(states: &[QesState]) -> Vec<f64> {
    let mut e: Vec<f64> = states.iter().map(|s| s.energy.re).collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Greedy nearest pairing; infinite when sizes differ.
fn multiset_gap(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut rest = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = rest
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(d);
        rest.swap_remove(k);
    }
    worst
}

#[test]
fn lame_one_has_three_edges() {
    let spec = GalSpec::lame(1.0, 0.5).unwrap();
    let states = closed_form_edges(&spec).unwrap();
    let e = real_sorted(&states);
    assert_eq!(e.len(), 3);
    for (got, want) in e.iter().zip([-1.5, -1.0, -0.5]) {
        assert!((got - want).abs() < 1e-14);
    }
    let grid = period_grid(&spec, 256);
    for st in &states {
        assert!(schrodinger_residual(st, &spec, &grid) < 1e-12);
    }
}

#[test]
fn a2_g1_ground_state_is_sn_squared() {
    let spec = GalSpec::new(2.0, 0.0, 0.0, 1.0, 0.5).unwrap();
    let states = closed_form_edges(&spec).unwrap();
    let st = states.iter().find(|s| (s.energy - C64::new(-6.0, 0.0)).norm() < 1e-12).expect("E = -6");
    let ratio = |x: f64| {
        let t = jacobi(spec.y_of(x), spec.m).unwrap();
        eval_state(st, &spec, x).unwrap() / (t.sn * t.sn)
    };
    let r0 = ratio(0.0);
    for x in [0.3, 0.9, 1.7] {
        assert!((ratio(x) - r0).norm() < 1e-12);
    }
    // the literal representation (2,0,0,-2) carries it as a table row
    let rep = GalSpec::new(2.0, 0.0, 0.0, -2.0, 0.5).unwrap();
    let rows = table_states(&rep);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| (r.energy.re + 6.0).abs() < 1e-14));
}

#[test]
fn lame_two_edges_match_closed_forms() {
    let spec = GalSpec::lame(2.0, 0.5).unwrap();
    let e = real_sorted(&closed_form_edges(&spec).unwrap());
    let d = 0.75f64.sqrt();
    let want = [-3.0 - 2.0 * d, -4.5, -3.0, -1.5, -3.0 + 2.0 * d];
    let mut want = want.to_vec();
    want.sort_by(f64::total_cmp);
    assert_eq!(e.len(), 5);
    for (g, w) in e.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
}

#[test]
fn table4_ground_state_of_2_2_6_2() {
    let spec = GalSpec::new(1.0, 1.0, -3.0, 1.0, 0.5).unwrap();
    assert_eq!(spec.bracket(), [2.0, 2.0, 6.0, 2.0]);
    let rows = table_states(&spec);
    assert!(rows.iter().any(|s| (s.energy - C64::new(-6.0, 0.0)).norm() < 1e-14));
}

#[test]
fn lame_four_pairs_at_half() {
    let e = real_sorted(&lame_a4_edges(mm(0.5)).unwrap());
    assert_eq!(e.len(), 9);
    let r = 5.5f64.sqrt();
    for want in [-12.5 - 2.0 * r, -12.5 + 2.0 * r, -7.5 - 2.0 * r, -7.5 + 2.0 * r] {
        assert!(e.iter().any(|x| (x - want).abs() < 1e-10), "{want} missing from {e:?}");
    }
}

#[test]
fn lame_four_edges_match_discriminant() {
    let spec = GalSpec::lame(4.0, 0.5).unwrap();
    let closed = real_sorted(&lame_a4_edges(spec.m).unwrap());
    let (lo, hi) = edge_window(&[spec]).unwrap();
    let numeric = band_edges_numeric(&spec, lo, hi, 1000).unwrap();
    assert_eq!(numeric.len(), 9, "{numeric:?}");
    for (a, b) in closed.iter().zip(&numeric) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn midband_examples() {
    let m = mm(0.5);
    let t = 1.7;
    let st = midband_states(MidbandCase::BHalf, t, 0, (0.0, 0.0), MidbandLevel::Half, m).unwrap();
    assert_eq!(st.len(), 2);
    assert!((st[0].energy.re + (4.0 * t * t + 0.5) / 4.0).abs() < 1e-12);
    assert_eq!(st[0].poly_a.len(), 1);
    assert!(st[0].poly_b.is_empty());

    let st = midband_states(MidbandCase::BHalf, 2.0, 1, (1.0, 0.0), MidbandLevel::Half, m).unwrap();
    assert!((st[0].energy.re + 4.125).abs() < 1e-12);
    let ratio = st[0].poly_b[0] / st[0].poly_a[0];
    assert!((ratio - C64::new(0.0, -0.5)).norm() < 1e-10, "B/A = {ratio}");

    for mv in [0.2, 0.5, 0.8] {
        let e = midband_energies(MidbandCase::GHalf, 0.9, 0, (0.0, 0.0), MidbandLevel::Half, mm(mv));
        assert!((e[0].re + (1.0 + mv) / 4.0).abs() < 1e-14);
    }
}

#[test]
fn midband_pair_residuals_and_degeneracy() {
    let m = mm(0.5);
    let spec = midband_spec(MidbandCase::BHalf, 1.3, (0.0, 0.0), MidbandLevel::Half, m).unwrap();
    let grid = period_grid(&spec, 256);
    let st = midband_states(MidbandCase::BHalf, 1.3, 0, (0.0, 0.0), MidbandLevel::Half, m).unwrap();
    assert_eq!(st[0].energy, st[1].energy);
    for s in &st {
        assert!(schrodinger_residual(s, &spec, &grid) < 1e-8);
    }
}

#[test]
fn collocation_examples() {
    let m = 0.4;
    let a = 3.0;
    let spec = GalSpec::new(a, 0.0, 0.0, 2.0 - a, m).unwrap();
    let d1 = delta_values(a, 0.0, 2.0 - a, mm(m)).get(1);
    let center = -(1.0 + m) * (a * a - 2.0 * a + 2.0);
    let want = [center - 2.0 * d1, center + 2.0 * d1];
    let got = energies(&qes_spectrum_general(&spec, Sector::EMPTY, 2).unwrap());
    assert!(multiset_gap(&got, &want) < 1e-10);

    let (a, b, g) = (1.5, 1.0, 0.5);
    let f = 2.0 - a - b - g;
    let spec = GalSpec::new(a, b, f, g, m).unwrap();
    let d11 = delta_values(a, b, g, mm(m)).get(11);
    let center = -(a + b - 1.0f64).powi(2) - m * (b + g - 1.0f64).powi(2) - (1.0 + m);
    let want = [center - 2.0 * d11, center + 2.0 * d11];
    let got = energies(&qes_spectrum_general(&spec, Sector::EMPTY, 2).unwrap());
    assert!(multiset_gap(&got, &want) < 1e-10, "{got:?} vs {want:?}");

    let free = GalSpec::new(0.0, 0.0, 0.0, 0.0, m).unwrap();
    let st = qes_spectrum_general(&free, Sector::EMPTY, 1).unwrap();
    assert_eq!(st.len(), 1);
    assert!(st[0].energy.norm() < 1e-14);
}

#[test]
fn lame_one_dn_state_value() {
    let spec = GalSpec::lame(1.0, 0.3).unwrap();
    let states = closed_form_edges(&spec).unwrap();
    let dn_state = states.iter().find(|s| (s.energy.re + 0.3).abs() < 1e-12).unwrap();
    let psi = eval_state(dn_state, &spec, 0.0).unwrap();
    let dn = jacobi(C64::new(spec.k() / 2.0, 0.0), spec.m).unwrap().dn;
    assert!((psi - dn).norm() < 1e-14, "{psi} vs {dn}");
}

#[test]
fn perturbed_energy_is_detected() {
    let spec = GalSpec::lame(2.0, 0.5).unwrap();
    let grid = period_grid(&spec, 256);
    for mut st in closed_form_edges(&spec).unwrap() {
        assert!(schrodinger_residual(&st, &spec, &grid) < 1e-8);
        st.energy += 0.01;
        assert!(schrodinger_residual(&st, &spec, &grid) > 1e-3);
    }
}

#[test]
fn mirror_relation_for_integer_lame() {
    // E_j(m) = -a(a+1) - E_{2a-j}(1-m)
    for a in 1..=3 {
        let a = a as f64;
        for m in [0.25, 0.5, 0.7] {
            let e = real_sorted(&closed_form_edges(&GalSpec::lame(a, m).unwrap()).unwrap());
            let d = real_sorted(&closed_form_edges(&GalSpec::lame(a, 1.0 - m).unwrap()).unwrap());
            assert_eq!(e.len(), 2 * a as usize + 1);
            for j in 0..e.len() {
                let k = e.len() - 1 - j;
                assert!((e[j] + a * (a + 1.0) + d[k]).abs() < 1e-11, "a={a} m={m} j={j}");
            }
        }
    }
}

#[test]
fn mirror_relation_for_half_integer_lame_midband() {
    // Lamé at half-integer a, moved by iK' to (0,0,0,a), holds mid-band states
    // with t = 1/2; the pairing uses the dual modulus, as for band edges.
    for (a, level) in [(0.5, MidbandLevel::Half), (1.5, MidbandLevel::ThreeHalves)] {
        for m in [0.3, 0.6] {
            let mut e = midband_energies(MidbandCase::GHalf, 0.5, 0, (0.0, 0.0), level, mm(m));
            let mut d = midband_energies(MidbandCase::GHalf, 0.5, 0, (0.0, 0.0), level, mm(1.0 - m));
            e.sort_by(|x, y| x.re.total_cmp(&y.re));
            d.sort_by(|x, y| x.re.total_cmp(&y.re));
            assert_eq!(e.len() as f64, a + 0.5);
            for j in 0..e.len() {
                let k = e.len() - 1 - j;
                assert!((e[j] + a * (a + 1.0) + d[k]).norm() < 1e-12, "a={a} m={m}");
            }
            let spec = midband_spec(MidbandCase::GHalf, 0.5, (0.0, 0.0), level, mm(m)).unwrap();
            let lame = GalSpec::lame(a, m).unwrap();
            let shifted = transform_spec(&lame, TransformOp::ShiftIKp).unwrap().new_spec;
            assert_eq!(spec.params(), shifted.params());
        }
    }
}

#[test]
fn a_g_interchange_in_the_b_f_zero_family() {
    for (a, g) in [(2.0, 1.0), (3.0, 1.0), (3.0, 2.0)] {
        let m = 0.35;
        let left = qes_spectrum_all(&GalSpec::new(a, 0.0, 0.0, g, m).unwrap()).unwrap();
        let right = qes_spectrum_all(&GalSpec::new(g, 0.0, 0.0, a, m).unwrap()).unwrap();
        assert!(multiset_gap(&energies(&left), &energies(&right)) < 1e-9, "a={a} g={g}");
        let periodic = |s: &[QesState]| {
            s.iter()
                .filter(|x| x.period_class == galband::catalog::PeriodClass::Period2iKp)
                .map(|x| x.energy)
                .collect::<Vec<_>>()
        };
        assert!(multiset_gap(&periodic(&left), &periodic(&right)) < 1e-9, "a={a} g={g}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn table2_delta_branches_under_a_to_f(a in -3.0..4.0f64, m in 0.05..0.95f64) {
        let d = |a: f64| delta_values(a, 0.0, 0.0, mm(m));
        prop_assert!((d(a).get(5) - d(2.0 - a).get(5)).norm() < 1e-12);
        prop_assert!((d(a).get(6) - d(3.0 - a).get(7)).norm() < 1e-12);
        prop_assert!((d(a).get(7) - d(3.0 - a).get(6)).norm() < 1e-12);
        prop_assert!((d(a).get(8) - d(4.0 - a).get(8)).norm() < 1e-12);
    }

    #[test]
    fn duality_in_b_f_zero_and_f_zero_families(
        a in 0.2..3.0f64, b in -1.5..1.5f64, n in 0usize..4, m in 0.1..0.9f64, zero_b in any::<bool>(),
    ) {
        let b = if zero_b { 0.0 } else { b };
        let g = 2.0 * n as f64 - a - b;
        let spec = GalSpec::new(a, b, 0.0, g, m).unwrap();
        let t = transform_spec(&spec, TransformOp::Dual).unwrap();
        let mapped: Vec<C64> = qes_spectrum_all(&spec).unwrap().iter().map(|s| t.energy_map.apply(s.energy)).collect();
        let dual = energies(&qes_spectrum_all(&t.new_spec).unwrap());
        prop_assert!(!mapped.is_empty());
        prop_assert!(multiset_gap(&mapped, &dual) < 1e-9);
    }

    #[test]
    fn collocation_reproduces_table_rows(a in 1i32..6, n in 0i32..5, b in -2i32..3, m in 0.1..0.9f64) {
        let (a, n, b) = (a as f64, n as f64, b as f64);
        for spec in [
            GalSpec::new(a, 0.0, 0.0, n - a, m).unwrap(),
            GalSpec::new(a, 0.0, n - a, 0.0, m).unwrap(),
            GalSpec::new(a, b, 0.0, n.min(3.0) - a - b, m).unwrap(),
        ] {
            let rows = table_states(&spec);
            let mut keys: Vec<(Sector, usize)> = rows.iter().map(|s| (s.extra_factor, s.poly_a.len())).collect();
            keys.dedup();
            for (sector, size) in keys {
                let mut want: Vec<C64> = Vec::new();
                for s in rows.iter().filter(|s| s.extra_factor == sector && s.poly_a.len() == size) {
                    if !want.iter().any(|w| (w - s.energy).norm() < 1e-9) {
                        want.push(s.energy);
                    }
                }
                let got = energies(&qes_spectrum_general(&spec, sector, size).unwrap());
                prop_assert!(multiset_gap(&got, &want) < 1e-9, "{:?} {sector} {size}", spec.params());
            }
        }
    }

    #[test]
    fn midband_energies_are_even_in_t(
        t in 0.1..3.0f64, m in 0.05..0.95f64, p in 0usize..3, q in 0usize..3, case in 0usize..3, three in any::<bool>(),
    ) {
        let case = [MidbandCase::BHalf, MidbandCase::FHalf, MidbandCase::GHalf][case];
        let level = if three { MidbandLevel::ThreeHalves } else { MidbandLevel::Half };
        let split = (p as f64, q as f64);
        let plus = midband_energies(case, t, p + q, split, level, mm(m));
        let minus = midband_energies(case, -t, p + q, split, level, mm(m));
        prop_assert!(multiset_gap(&plus, &minus) < 1e-12);
    }
}
