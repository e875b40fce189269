//! Deformed spectra checked against the finite-difference oracle, which
//! knows nothing about Wronskians.

use disloc::darboux::{crum_potential, strict_iso_potential, DeformedSystem};
use disloc::oracle::{grid_spectrum, GridConfig, Potential};

const TOL: f64 = 2e-3;

fn oracle(p: &impl Potential, levels: usize) -> Vec<f64> {
    grid_spectrum(p, &GridConfig::new(8.0, 4000, levels).unwrap()).unwrap().energies()
}

fn assert_close(got: &[f64], want: &[f64], what: &str) {
    assert_eq!(got.len(), want.len(), "{what}");
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= TOL, "{what}: {got:?} vs {want:?}");
    }
}

#[test]
fn crum_deletions_keep_the_rest_of_the_spectrum() {
    for ell in 1..=3u32 {
        for m in 1..=4usize {
            let sys = DeformedSystem::crum(ell, m).unwrap();
            let want: Vec<f64> = sys.retained_levels.iter().take(5).map(|&(_, e)| e).collect();
            assert_close(&oracle(&sys, 5), &want, &format!("l={ell} M={m}"));
        }
    }
}

#[test]
fn removing_all_negative_levels_gives_the_oscillator_spectrum() {
    for ell in 1..=3u32 {
        let sys = DeformedSystem::crum(ell, ell as usize).unwrap();
        assert_close(&oracle(&sys, 4), &[0.0, 2.0, 4.0, 6.0], &format!("l={ell}"));
        // the free function is the same potential
        for x in [-3.5, -0.25, 0.75, 4.0] {
            assert_eq!(strict_iso_potential(ell, x, None).unwrap(), sys.potential(x, None).unwrap());
        }
    }
}

#[test]
fn krein_adler_pairs() {
    // ladder of a = 4: -3, 0, 2, 4, 6, 8, 10, ...
    let cases: [(Vec<usize>, [f64; 4]); 2] = [(vec![1, 2], [-3.0, 4.0, 6.0, 8.0]), (vec![3, 4], [-3.0, 0.0, 2.0, 8.0])];
    for (deleted, want) in cases {
        let sys = DeformedSystem::krein_adler(1, deleted.clone()).unwrap();
        assert_close(&oracle(&sys, 4), &want, &format!("D={deleted:?}"));
    }
}

#[test]
fn crum_potential_grows_like_the_oscillator() {
    for ell in 1..=3u32 {
        for m in 1..=3usize {
            let far = crum_potential(ell, m, 20.0, None).unwrap();
            assert!((far / 400.0 - 1.0).abs() < 0.05, "l={ell} M={m}: {far}");
        }
    }
}
