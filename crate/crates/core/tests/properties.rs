//! Property tests over the public API.

use disloc::darboux::DeformationSpec;
use disloc::oracle::{GridConfig, Tridiagonal};
use disloc::specfun::{hermite, kummer_1f1, kummer_1f1_series, recip_gamma, SeriesControl};
use disloc::spectrum::{self, negative_spectrum_hermite_case, normalized_determinant, Eigenvalue, Provenance};
use disloc::states::{eigenstate, general_state, hermite_state};
use disloc::{PotentialSpec, Side};
use proptest::prelude::*;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn recip_gamma_recurrence(z in -20.0f64..20.0) {
        // keep away from the poles of Gamma, where both sides vanish
        prop_assume!(z > 0.0 || (z - z.round()).abs() > 1e-3);
        let lhs = recip_gamma(z + 1.0);
        let rhs = recip_gamma(z) / z;
        prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(rhs.abs()), "z={z}: {lhs} vs {rhs}");
    }

    #[test]
    fn hermite_parity(n in 0usize..=20, x in -6.0f64..6.0) {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(hermite(n, -x), sign * hermite(n, x));
    }

    #[test]
    fn hermite_from_kummer(m in 0u32..=8, odd in any::<bool>(), x in -6.0f64..6.0) {
        let n = 2 * m + u32::from(odd);
        prop_assume!(n <= 16);
        let ctl = SeriesControl::default();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let pre = sign * factorial(n) / factorial(m);
        let bridge = if odd {
            pre * 2.0 * x * kummer_1f1(-(m as f64), 1.5, x * x, &ctl).unwrap()
        } else {
            pre * kummer_1f1(-(m as f64), 0.5, x * x, &ctl).unwrap()
        };
        let direct = hermite(n as usize, x);
        // the sum has cancellation near the zeros; compare on the scale of its terms
        let scale = (0..=n as usize).map(|k| hermite(k, x.abs() + 1.0).abs()).fold(direct.abs(), f64::max);
        prop_assert!((bridge - direct).abs() <= 1e-10 * scale, "n={n} x={x}: {bridge} vs {direct}");
    }

    #[test]
    fn series_error_estimate_is_honest(a in -6.0f64..6.0, b in 0.3f64..3.0, z in 0.0f64..40.0) {
        let tight = SeriesControl::new(1e-15, 2000).unwrap();
        let loose = SeriesControl::new(1e-8, 2000).unwrap();
        let fine = kummer_1f1_series(a, b, z, &tight).unwrap();
        let rough = kummer_1f1_series(a, b, z, &loose).unwrap();
        prop_assert!((fine.value - rough.value).abs() <= rough.abs_error + fine.abs_error);
    }

    #[test]
    fn jump_is_exact_and_potential_confines(a in 0.01f64..24.0, x in 0.0f64..30.0) {
        let spec = PotentialSpec::new(a).unwrap();
        let right = spec.potential_value_sided(0.0, Side::Right);
        let left = spec.potential_value_sided(0.0, Side::Left);
        // (x^2 - 1) - (x^2 - 1 - a) rounds twice, so "exact" means a few ulps
        prop_assert!((right - left - a).abs() <= 4.0 * f64::EPSILON * (1.0 + a));
        prop_assert!(spec.potential_value_sided(8.0, Side::Right) > 60.0);
        prop_assert!(spec.potential_value_sided(-x, Side::Left) >= x * x - 1.0 - a);
    }

    #[test]
    fn normalized_determinant_is_bounded(a in 0.05f64..30.0, e in -30.0f64..30.0) {
        let spec = PotentialSpec::new(a).unwrap();
        let d = normalized_determinant(&spec, e);
        prop_assert!(d.abs() <= 1.0 + 1e-12, "a={a} E={e}: {d}");
    }

    #[test]
    fn json_round_trips(a in 0.01f64..50.0, n in 0usize..100, e in -50.0f64..50.0, ell in 1u32..10, m in 0usize..6) {
        let spec = PotentialSpec::new(a).unwrap();
        let back: PotentialSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        prop_assert_eq!(back, spec);
        let level = Eigenvalue { n, energy: e, provenance: Provenance::MatchingRoot, residual: 1e-12 };
        let back: Eigenvalue = serde_json::from_str(&serde_json::to_string(&level).unwrap()).unwrap();
        prop_assert_eq!(back, level);
        for d in [DeformationSpec::crum(ell, m), DeformationSpec::krein_adler(ell, vec![m + 1, m + 2])] {
            let back: DeformationSpec = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn step_lowers_each_level_by_at_most_the_jump(a in 0.01f64..6.0) {
        let spec = PotentialSpec::new(a).unwrap();
        let levels = spectrum::lowest_levels(&spec, 6).unwrap();
        for l in levels {
            let top = 2.0 * l.n as f64;
            prop_assert!(l.energy <= top + 1e-9 && l.energy >= top - a - 1e-9, "a={a} n={}: {}", l.n, l.energy);
        }
    }

    #[test]
    fn sturm_count_matches_bisected_eigenvalues(k in 0usize..12, points in (250usize..800).prop_map(|p| 2 * p)) {
        let cfg = GridConfig::new(7.0, points, 12).unwrap();
        let t = Tridiagonal::assemble(&PotentialSpec::new(2.0).unwrap(), &cfg).unwrap();
        let e = t.eigenvalue(k).unwrap();
        prop_assert!(t.count_below(e - 1e-7) <= k);
        prop_assert!(t.count_below(e + 1e-7) > k);
        prop_assert!((0..points).all(|i| cfg.abscissa(i) != 0.0));
    }

    #[test]
    fn states_solve_the_equation(a in 0.2f64..10.0, n in 0usize..6, x in 0.05f64..5.0, left in any::<bool>()) {
        let spec = PotentialSpec::new(a).unwrap();
        let state = eigenstate(&spec, n).unwrap();
        let (x, side) = if left { (-x, Side::Left) } else { (x, Side::Right) };
        let d = state.derivatives(x, Some(side), 2).unwrap();
        let v = spec.potential_value_sided(x, side);
        let residual = -d[2] + (v - state.energy) * d[0];
        let scale = d[2].abs().max((v - state.energy).abs() * d[0].abs()).max(1e-300);
        prop_assert!(residual.abs() <= 1e-8 * scale.max(1e-6 * state.origin_scale().unwrap()), "{residual} vs {scale}");
    }
}

#[test]
fn root_counts() {
    for ell in 1..=12 {
        let roots = negative_spectrum_hermite_case(ell, 1e-12).unwrap();
        assert_eq!(roots.len(), ell as usize);
        assert!(roots.iter().all(|r| r.energy < 0.0 && r.energy > -1.0 - 4.0 * ell as f64));
    }
}

#[test]
fn polynomial_roots_zero_the_determinant() {
    for ell in 1..=8 {
        let spec = PotentialSpec::hermite(ell).unwrap();
        for r in negative_spectrum_hermite_case(ell, 1e-14).unwrap() {
            assert!(normalized_determinant(&spec, r.energy).abs() <= 1e-9, "l={ell} E={}", r.energy);
        }
    }
}

#[test]
fn matching_scan_finds_ladder_and_polynomial_levels() {
    for ell in 1..=4u32 {
        let spec = PotentialSpec::hermite(ell).unwrap();
        let scanned = spectrum::find_spectrum_general(&spec, -2.0 - spec.a(), 9.0, spectrum::DEFAULT_SCAN_STEP, 1e-12).unwrap();
        let exact = spectrum::full_spectrum_hermite_case(ell, ell as usize + 4).unwrap();
        assert_eq!(scanned.levels.len(), exact.len(), "l={ell}");
        for (s, x) in scanned.levels.iter().zip(&exact) {
            assert!((s.energy - x.energy).abs() <= 1e-9, "l={ell}: {} vs {}", s.energy, x.energy);
        }
    }
}

#[test]
fn hypergeometric_and_hermite_forms_agree() {
    for ell in 1..=3u32 {
        let spec = PotentialSpec::hermite(ell).unwrap();
        for n in ell as usize..ell as usize + 4 {
            let exact = hermite_state(ell, n).unwrap();
            let general = general_state(&spec, exact.energy).unwrap();
            let mut ratio = None;
            for i in 0..20 {
                let x = -4.75 + 0.5 * i as f64;
                let (g, h) = (general.evaluate(x, None).unwrap(), exact.evaluate(x, None).unwrap());
                if h.abs() < 1e-6 {
                    continue;
                }
                let r = g / h;
                let r0 = *ratio.get_or_insert(r);
                assert!((r - r0).abs() <= 1e-8 * r0.abs(), "l={ell} n={n} x={x}: {r} vs {r0}");
            }
        }
    }
}
