#![allow(clippy::excessive_precision)]

use galband::elliptic::{
    complete_k, complete_kp, dual_point, jacobi, pole_distance, quarter_shift, ModulusM, QuarterShift, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn m(v: f64) -> ModulusM {
    ModulusM::new(v).unwrap()
}

/// Trapezoid rule over a full period of the integrand; spectrally accurate.
fn k_by_quadrature(mv: f64) -> f64 {
    let n = 256;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let s: f64 = (0..n)
        .map(|j| {
            let th = j as f64 * h;
            1.0 / (1.0 - mv * th.sin().powi(2)).sqrt()
        })
        .sum();
    s * h / 4.0
}

fn agm_oracle(mv: f64) -> f64 {
    let (mut a, mut b) = (1.0f64, (1.0 - mv).sqrt());
    for _ in 0..40 {
        let t = (a + b) / 2.0;
        b = (a * b).sqrt();
        a = t;
    }
    std::f64::consts::PI / (2.0 * a)
}

#[test]
fn complete_k_reference_values() {
    for (mv, want) in [(0.1, 1.6124413487202193982), (0.5, 1.8540746773013719184), (0.9, 2.5780921133481731882)] {
        let k = complete_k(m(mv)).unwrap();
        assert!((k - want).abs() < 1e-14, "m={mv}: {k} vs {want}");
        assert!((k - k_by_quadrature(mv)).abs() < 1e-13);
        assert!((k - agm_oracle(mv)).abs() < 1e-14);
    }
    assert!((complete_kp(m(0.3)).unwrap() - complete_k(m(0.7)).unwrap()).abs() < 1e-15);
}

#[test]
fn jacobi_reference_values() {
    let cases: [((f64, f64), f64, [(f64, f64); 3]); 4] = [
        ((0.7, 0.3), 0.6, [(0.65290000299933408012, 0.20692870741117845743), (0.80302369247190534735, -0.16824379524036707066), (0.88225098184858475724, -0.091881169736749868657)]),
        ((1.9, -0.8), 0.3, [(1.2073846611297652197, 0.096825856499868655128), (-0.16926002502199009377, 0.69068909757933022427), (0.75342296067303420796, -0.046549969953501596527)]),
        ((-2.4, 1.1), 0.85, [(-1.0635449668428588765, -0.00078093939852866835635), (-0.0022936013817134345199, 0.36212228216133263857), (0.1963535933599472797, -0.003595450073649093127)]),
        ((5.3, 2.2), 0.5, [(-1.3923859257721090601, 0.061533866955161199871), (0.088242564132206431046, 0.97094742372098824509), (-0.24916683821306892742, -0.17193076518760837171)]),
    ];
    for ((x, y), mv, want) in cases {
        let t = jacobi(C64::new(x, y), m(mv)).unwrap();
        for (got, (re, im)) in [t.sn, t.cn, t.dn].into_iter().zip(want) {
            assert!((got - C64::new(re, im)).norm() < 1e-13, "z={x}+{y}i m={mv}: {got} vs {re}+{im}i");
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, mm: ModulusM) -> C64 {
    let k = complete_k(mm).unwrap();
    let kp = complete_kp(mm).unwrap();
    loop {
        let z = C64::new(rng.gen_range(-4.0 * k..4.0 * k), rng.gen_range(-3.0 * kp..3.0 * kp));
        if pole_distance(z, mm).unwrap().0 > 0.05 {
            return z;
        }
    }
}

#[test]
fn algebraic_identities_thousand_points_per_modulus() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = std::time::Instant::now();
    for i in 1..=9 {
        let mm = m(i as f64 / 10.0);
        for _ in 0..1000 {
            let z = random_point(&mut rng, mm);
            let t = jacobi(z, mm).unwrap();
            let scale = 1.0 + t.sn.norm_sqr();
            let (r1, r2) = t.identity_residuals();
            assert!(r1 < 1e-12 * scale && r2 < 1e-12 * scale, "z={z} m={}: {r1:e} {r2:e}", mm.value());
        }
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn conjugate_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mm = m(0.45);
    for _ in 0..200 {
        let z = random_point(&mut rng, mm);
        let a = jacobi(z, mm).unwrap();
        let b = jacobi(z.conj(), mm).unwrap();
        assert!((a.sn.conj() - b.sn).norm() < 1e-13);
        assert!((a.cn.conj() - b.cn).norm() < 1e-13);
        assert!((a.dn.conj() - b.dn).norm() < 1e-13);
    }
}

#[test]
fn derivatives_by_central_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-5;
    for mv in [0.2, 0.5, 0.8] {
        let mm = m(mv);
        for _ in 0..100 {
            let z = random_point(&mut rng, mm);
            if pole_distance(z, mm).unwrap().0 < 0.3 {
                continue;
            }
            let t = jacobi(z, mm).unwrap();
            let p = jacobi(z + h, mm).unwrap();
            let q = jacobi(z - h, mm).unwrap();
            let tol = 1e-8 * (1.0 + t.sn.norm().powi(3));
            assert!(((p.sn - q.sn) / (2.0 * h) - t.cn * t.dn).norm() < tol);
            assert!(((p.cn - q.cn) / (2.0 * h) + t.sn * t.dn).norm() < tol);
            assert!(((p.dn - q.dn) / (2.0 * h) + mv * t.sn * t.cn).norm() < tol);
        }
    }
}

#[test]
fn modulus_duality_example() {
    let mm = m(0.6);
    let y = C64::new(0.7, 0.3);
    let w = dual_point(y, mm).unwrap();
    let lhs = 0.6f64.sqrt() * jacobi(y, mm).unwrap().sn;
    let rhs = -jacobi(w, mm.complement()).unwrap().dn;
    assert!((lhs - rhs).norm() < 1e-12);
}

#[test]
fn modulus_duality_all_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for mv in [0.15, 0.4, 0.6, 0.85] {
        let mm = m(mv);
        for _ in 0..200 {
            let y = random_point(&mut rng, mm);
            let w = dual_point(y, mm).unwrap();
            let Ok(d) = jacobi(w, mm.complement()) else { continue };
            let t = jacobi(y, mm).unwrap();
            let tol = 1e-11 * (1.0 + t.sn.norm());
            let (k, kc) = (mv.sqrt(), (1.0 - mv).sqrt());
            assert!((k * t.sn + d.dn).norm() < tol);
            assert!((t.dn - kc * d.sn).norm() < tol);
            assert!((k * t.cn - C64::i() * kc * d.cn).norm() < tol);
        }
    }
}

#[test]
fn periods() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for mv in [0.25, 0.75] {
        let mm = m(mv);
        let k = complete_k(mm).unwrap();
        let kp = complete_kp(mm).unwrap();
        for _ in 0..100 {
            let z = random_point(&mut rng, mm);
            let t = jacobi(z, mm).unwrap();
            let tol = 1e-11 * (1.0 + t.sn.norm_sqr());
            let at = |w: C64| jacobi(z + w, mm).unwrap();
            let s1 = at(C64::new(4.0 * k, 0.0));
            let s2 = at(C64::new(0.0, 2.0 * kp));
            assert!((s1.sn - t.sn).norm() < tol && (s2.sn - t.sn).norm() < tol);
            let c1 = at(C64::new(4.0 * k, 0.0));
            let c2 = at(C64::new(2.0 * k, 2.0 * kp));
            assert!((c1.cn - t.cn).norm() < tol && (c2.cn - t.cn).norm() < tol);
            let d1 = at(C64::new(2.0 * k, 0.0));
            let d2 = at(C64::new(0.0, 4.0 * kp));
            assert!((d1.dn - t.dn).norm() < tol && (d2.dn - t.dn).norm() < tol);
        }
    }
}

#[test]
fn quarter_shifts_against_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for mv in [0.3, 0.7] {
        let mm = m(mv);
        for _ in 0..200 {
            let z = random_point(&mut rng, mm);
            for shift in [QuarterShift::K, QuarterShift::IKp, QuarterShift::KPlusIKp] {
                let target = z + shift.offset(mm).unwrap();
                if pole_distance(target, mm).unwrap().0 < 0.05 {
                    continue;
                }
                let q = quarter_shift(z, mm, shift).unwrap();
                let d = jacobi(target, mm).unwrap();
                let t = jacobi(z, mm).unwrap();
                let tol = 1e-11 * (1.0 + q.sn.norm_sqr() + d.sn.norm_sqr());
                assert!((q.sn - d.sn).norm() < tol, "{shift:?} z={z}");
                assert!((q.cn - d.cn).norm() < tol, "{shift:?} z={z}");
                assert!((q.dn - d.dn).norm() < tol, "{shift:?} z={z}");
                let sq = q.sn * q.sn;
                let want = match shift {
                    QuarterShift::K => t.cn * t.cn / (t.dn * t.dn),
                    QuarterShift::IKp => 1.0 / (mv * t.sn * t.sn),
                    QuarterShift::KPlusIKp => t.dn * t.dn / (mv * t.cn * t.cn),
                };
                assert!((sq - want).norm() < 1e-12 * (1.0 + want.norm()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn identities_hold(x in -12.0f64..12.0, y in -8.0f64..8.0, mv in 0.05f64..0.95) {
        let mm = m(mv);
        let z = C64::new(x, y);
        prop_assume!(pole_distance(z, mm).unwrap().0 > 0.05);
        let t = jacobi(z, mm).unwrap();
        let scale = 1.0 + t.sn.norm_sqr();
        let (r1, r2) = t.identity_residuals();
        prop_assert!(r1 < 1e-12 * scale);
        prop_assert!(r2 < 1e-12 * scale);
    }

    #[test]
    fn real_axis_values_are_real_and_bounded(x in -50.0f64..50.0, mv in 0.0f64..1.0) {
        let t = jacobi(C64::new(x, 0.0), m(mv)).unwrap();
        prop_assert!(t.sn.im == 0.0 && t.cn.im == 0.0 && t.dn.im == 0.0);
        prop_assert!(t.sn.re.abs() <= 1.0 + 1e-15 && t.cn.re.abs() <= 1.0 + 1e-15);
        prop_assert!(t.dn.re >= (1.0 - mv).sqrt() - 1e-15);
    }
}
