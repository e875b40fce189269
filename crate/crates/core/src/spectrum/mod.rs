//! Eigenvalues of the stepped oscillator.
//!
//! For general `a` the levels are the zeros of the matching determinant
//!
//! ```text
//! D(E) = r(-(E+a)/4) r(-(E-2)/4) + r(-(E+a-2)/4) r(-E/4),   r = 1/Gamma,
//! ```
//!
//! which is entire in `E` and so has no trouble at `a = 4l`, where the
//! gamma-ratio form of the eigencondition breaks down. For `a = 4l` the
//! negative levels are also the roots of an integer polynomial of degree `l`
//! and the rest sit on the ladder `E = 2(n - l)`.

pub mod algebraic;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PotentialSpec;
use crate::specfun::recip_gamma;

pub use algebraic::{build_algebraic_equation, check_root_symmetry, closed_forms_ell6, AlgebraicEquation, CertifiedRoot, SturmSequence};

pub const DEFAULT_SCAN_STEP: f64 = 0.05;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Bracket width used when a level feeds an eigenfunction.
pub const STATE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    MatchingRoot,
    PolynomialRoot,
    HermiteLadder,
    GridOracle,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::MatchingRoot => "matching-root",
            Provenance::PolynomialRoot => "polynomial-root",
            Provenance::HermiteLadder => "hermite-ladder",
            Provenance::GridOracle => "grid-oracle",
        })
    }
}

/// One energy level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub n: usize,
    #[serde(rename = "E")]
    pub energy: f64,
    pub provenance: Provenance,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScanWarning {
    /// Two roots fell inside one scan cell and were only found by a finer pass.
    StepTooCoarse { e_lo: f64, e_hi: f64 },
    /// A local minimum of `|D|` touched zero without a sign change.
    Tangential { energy: f64 },
}

/// Levels found in a window, with any scan warnings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub levels: Vec<Eigenvalue>,
    pub warnings: Vec<ScanWarning>,
}

impl Spectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

/// `D(E)` and the product of its two row norms, computed with a caller-given
/// reciprocal gamma function.
pub fn matching_determinant_with(recip: impl Fn(f64) -> f64, a: f64, e: f64) -> (f64, f64) {
    let r_left_even = recip(-(e + a) / 4.0);
    let r_left_odd = recip(-(e + a - 2.0) / 4.0);
    let r_right_even = recip(-e / 4.0);
    let r_right_odd = recip(-(e - 2.0) / 4.0);
    let d = r_left_even * r_right_odd + r_left_odd * r_right_even;
    let scale = r_left_even.hypot(r_left_odd) * r_right_even.hypot(r_right_odd);
    (d, scale)
}

/// The entire matching determinant `D(E)`.
pub fn matching_determinant(spec: &PotentialSpec, e: f64) -> f64 {
    matching_determinant_with(recip_gamma, spec.a(), e).0
}

/// Row-norm bound on `|D(E)|`; never zero because neither row of the
/// boundary matrix can vanish.
pub fn determinant_scale(spec: &PotentialSpec, e: f64) -> f64 {
    matching_determinant_with(recip_gamma, spec.a(), e).1
}

/// `D(E)` divided by [`determinant_scale`]: the sine of the angle between
/// the two boundary rows, in `[-1, 1]`.
pub fn normalized_determinant(spec: &PotentialSpec, e: f64) -> f64 {
    let (d, scale) = matching_determinant_with(recip_gamma, spec.a(), e);
    d / scale
}

/// A zero of a scanned function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScannedRoot {
    pub energy: f64,
    pub residual: f64,
    pub tangential: bool,
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c).abs(), f(d).abs());
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c).abs();
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d).abs();
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x).abs())
}

/// Sign-change scan of `f` over `[e_min, e_max]` with bisection refinement.
///
/// Cells whose samples show a local minimum of `|f|` without a sign change
/// are re-scanned 64 times finer; genuine touches (`min |f| <= tol`) are
/// returned flagged `tangential`. Roots closer than `10 tol` are merged.
pub fn scan_roots(
    f: impl Fn(f64) -> f64 + Sync,
    e_min: f64,
    e_max: f64,
    scan_step: f64,
    tol: f64,
) -> Result<(Vec<ScannedRoot>, Vec<ScanWarning>)> {
    if !(e_min < e_max) || !(scan_step > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scan needs e_min < e_max, step > 0, tol > 0 (got {e_min}, {e_max}, {scan_step}, {tol})"
        )));
    }
    let cells = ((e_max - e_min) / scan_step).ceil().max(1.0) as usize;
    let width = (e_max - e_min) / cells as f64;
    let grid: Vec<f64> = (0..=cells).map(|i| if i == cells { e_max } else { e_min + i as f64 * width }).collect();
    let values: Vec<f64> = grid.par_iter().map(|&e| f(e)).collect();

    let mut roots = Vec::new();
    let mut warnings = Vec::new();
    let push = |roots: &mut Vec<ScannedRoot>, e: f64, tangential: bool| {
        roots.push(ScannedRoot { energy: e, residual: f(e).abs(), tangential });
    };

    for i in 0..=cells {
        if values[i] == 0.0 {
            push(&mut roots, grid[i], false);
        }
        if i < cells && values[i] != 0.0 && values[i + 1] != 0.0 && (values[i] < 0.0) != (values[i + 1] < 0.0) {
            let e = bisect(&f, grid[i], grid[i + 1], values[i], tol);
            push(&mut roots, e, false);
        }
    }

    for i in 1..cells {
        let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
        let same_sign = l != 0.0 && m != 0.0 && r != 0.0 && (l < 0.0) == (m < 0.0) && (m < 0.0) == (r < 0.0);
        if !same_sign || !(m.abs() < l.abs() && m.abs() < r.abs()) {
            continue;
        }
        let (lo, hi) = (grid[i - 1], grid[i + 1]);
        let sub = 128;
        let h = (hi - lo) / sub as f64;
        let mut found = false;
        let mut prev = (lo, l);
        for j in 1..=sub {
            let e = if j == sub { hi } else { lo + j as f64 * h };
            let v = f(e);
            if v == 0.0 || (v < 0.0) != (prev.1 < 0.0) {
                let root = if v == 0.0 { e } else { bisect(&f, prev.0, e, prev.1, tol) };
                push(&mut roots, root, false);
                found = true;
            }
            if v != 0.0 {
                prev = (e, v);
            }
        }
        if found {
            warnings.push(ScanWarning::StepTooCoarse { e_lo: lo, e_hi: hi });
        } else {
            let (e, fmin) = golden_min(&f, lo, hi);
            if fmin <= tol {
                push(&mut roots, e, true);
                warnings.push(ScanWarning::Tangential { energy: e });
            }
        }
    }

    roots.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    roots.dedup_by(|b, a| (b.energy - a.energy).abs() < 10.0 * tol);
    Ok((roots, warnings))
}

/// Levels of `V(x; a)` in `[e_min, e_max]` from the matching determinant.
pub fn find_spectrum_general(spec: &PotentialSpec, e_min: f64, e_max: f64, scan_step: f64, tol: f64) -> Result<Spectrum> {
    find_spectrum_with(recip_gamma, spec.a(), e_min, e_max, scan_step, tol)
}

/// [`find_spectrum_general`] with a caller-supplied reciprocal gamma; the
/// verification suite uses it to show that a broken special function is
/// caught.
pub fn find_spectrum_with(
    recip: impl Fn(f64) -> f64 + Sync + Copy,
    a: f64,
    e_min: f64,
    e_max: f64,
    scan_step: f64,
    tol: f64,
) -> Result<Spectrum> {
    let f = |e: f64| {
        let (d, scale) = matching_determinant_with(recip, a, e);
        d / scale
    };
    let (roots, warnings) = scan_roots(f, e_min, e_max, scan_step, tol)?;
    if roots.is_empty() {
        return Err(Error::EmptyWindow { e_min, e_max });
    }
    let levels = roots
        .iter()
        .enumerate()
        .map(|(n, r)| Eigenvalue { n, energy: r.energy, provenance: Provenance::MatchingRoot, residual: r.residual })
        .collect();
    Ok(Spectrum { levels, warnings })
}

/// Default window for the lowest `n_max + 1` levels: one unit below the
/// potential minimum up to `2 n_max + 2` (levels never exceed `2n`).
pub fn default_window(spec: &PotentialSpec, n_max: usize) -> (f64, f64) {
    (-2.0 - spec.a(), 2.0 * n_max as f64 + 2.0)
}

/// The `l` negative levels of `a = 4l`, from the exact polynomial.
pub fn negative_spectrum_hermite_case(ell: u32, tol: f64) -> Result<Vec<Eigenvalue>> {
    let eq = build_algebraic_equation(ell)?;
    let roots = eq.certified_roots(tol)?;
    roots
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let energy = r.value();
            if !(energy < 0.0 && energy > -1.0 - 4.0 * ell as f64) {
                return Err(Error::RootCountMismatch { expected: ell as usize, found: n });
            }
            Ok(Eigenvalue { n, energy, provenance: Provenance::PolynomialRoot, residual: eq.relative_value(energy) })
        })
        .collect()
}

/// Levels `0..=n_max` of `a = 4l`: the polynomial roots, then `2(n - l)`.
pub fn full_spectrum_hermite_case(ell: u32, n_max: usize) -> Result<Vec<Eigenvalue>> {
    if n_max < ell as usize {
        return Err(Error::InvalidParameter(format!("n_max = {n_max} must be >= ell = {ell}")));
    }
    let mut levels = negative_spectrum_hermite_case(ell, STATE_TOL)?;
    levels.extend((ell as usize..=n_max).map(|n| Eigenvalue {
        n,
        energy: 2.0 * (n as f64 - ell as f64),
        provenance: Provenance::HermiteLadder,
        residual: 0.0,
    }));
    Ok(levels)
}

/// The lowest `count` levels of any spec, refined for eigenfunction use.
pub fn lowest_levels(spec: &PotentialSpec, count: usize) -> Result<Vec<Eigenvalue>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if let Some(ell) = spec.hermite_case() {
        let mut levels = full_spectrum_hermite_case(ell, (count - 1).max(ell as usize))?;
        levels.truncate(count);
        return Ok(levels);
    }
    let (lo, hi) = default_window(spec, count - 1);
    let mut spectrum = find_spectrum_general(spec, lo, hi, DEFAULT_SCAN_STEP, STATE_TOL)?;
    if spectrum.levels.len() < count {
        return Err(Error::RootCountMismatch { expected: count, found: spectrum.levels.len() });
    }
    spectrum.levels.truncate(count);
    Ok(spectrum.levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAB1: [f64; 7] = [-1.30908, 1.09714, 2.93715, 5.04459, 6.96479, 9.02870, 10.9756];
    const TAB2: [f64; 6] = [-22.4357, -18.6885, -14.8995, -11.1005, -7.31152, -3.56427];

    fn spec(a: f64) -> PotentialSpec {
        PotentialSpec::new(a).unwrap()
    }

    #[test]
    fn determinant_examples() {
        assert!(normalized_determinant(&spec(2.0), -1.30908).abs() <= 1e-5);
        assert!(matching_determinant(&spec(4.0), -3.0).abs() <= 1e-12);
        assert_eq!(matching_determinant(&spec(4.0), 0.0), 0.0);
        for ell in 1..=8u32 {
            let s = PotentialSpec::hermite(ell).unwrap();
            for m in 0..12 {
                assert_eq!(matching_determinant(&s, 2.0 * m as f64), 0.0, "ell={ell} m={m}");
            }
        }
    }

    #[test]
    fn table_one() {
        let sp = find_spectrum_general(&spec(2.0), -5.0, 12.0, DEFAULT_SCAN_STEP, DEFAULT_TOL).unwrap();
        assert_eq!(sp.levels.len(), 7);
        for (l, want) in sp.levels.iter().zip(TAB1) {
            assert!((l.energy - want).abs() <= 1e-4, "{} vs {want}", l.energy);
        }
        assert!(sp.warnings.is_empty());
    }

    #[test]
    fn tiny_jump_is_the_oscillator() {
        let sp = find_spectrum_general(&spec(1e-9), -1.0, 9.0, DEFAULT_SCAN_STEP, DEFAULT_TOL).unwrap();
        let e = sp.energies();
        assert_eq!(e.len(), 5);
        for (n, v) in e.iter().enumerate() {
            assert!((v - 2.0 * n as f64).abs() <= 1e-6);
        }
    }

    #[test]
    fn general_solver_on_hermite_case() {
        let sp = find_spectrum_general(&spec(4.0), -4.0, 5.0, DEFAULT_SCAN_STEP, DEFAULT_TOL).unwrap();
        let e = sp.energies();
        assert_eq!(e.len(), 4);
        for (v, want) in e.iter().zip([-3.0, 0.0, 2.0, 4.0]) {
            assert!((v - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn empty_window() {
        assert!(matches!(find_spectrum_general(&spec(2.0), 1.2, 2.8, DEFAULT_SCAN_STEP, DEFAULT_TOL), Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn coarse_step_pair_is_recovered() {
        // two roots at 0.30 and 0.34 inside one cell of width 1
        let f = |e: f64| (e - 0.30) * (e - 0.34) + 0.0;
        let (roots, warnings) = scan_roots(f, -0.2, 1.8, 1.0, 1e-12).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].energy - 0.30).abs() < 1e-10);
        assert!((roots[1].energy - 0.34).abs() < 1e-10);
        assert!(matches!(warnings[0], ScanWarning::StepTooCoarse { .. }));
    }

    #[test]
    fn tangential_root_is_flagged() {
        let f = |e: f64| (e - 0.7) * (e - 0.7);
        let (roots, warnings) = scan_roots(f, 0.0, 2.0, 0.3, 1e-10).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].tangential);
        assert!((roots[0].energy - 0.7).abs() < 1e-4);
        assert!(matches!(warnings[0], ScanWarning::Tangential { .. }));
    }

    #[test]
    fn table_two_and_ladder() {
        let neg = negative_spectrum_hermite_case(6, 1e-12).unwrap();
        for (l, want) in neg.iter().zip(TAB2) {
            assert!((l.energy - want).abs() <= 1e-4);
        }
        assert_eq!(negative_spectrum_hermite_case(1, 1e-12).unwrap()[0].energy, -3.0);

        let full = full_spectrum_hermite_case(1, 4).unwrap();
        assert_eq!(full.iter().map(|l| l.energy).collect::<Vec<_>>(), vec![-3.0, 0.0, 2.0, 4.0, 6.0]);
        assert_eq!(full[1].provenance, Provenance::HermiteLadder);

        let s3 = 3f64.sqrt();
        let two = full_spectrum_hermite_case(2, 2).unwrap();
        assert!((two[0].energy - (-5.0 - s3)).abs() < 1e-12);
        assert!((two[1].energy - (-5.0 + s3)).abs() < 1e-12);
        assert_eq!(two[2].energy, 0.0);

        let six = full_spectrum_hermite_case(6, 8).unwrap();
        assert_eq!(six.len(), 9);
        assert_eq!(&six[6..].iter().map(|l| l.energy).collect::<Vec<_>>(), &[0.0, 2.0, 4.0]);
        assert!(full_spectrum_hermite_case(3, 2).is_err());
    }

    #[test]
    fn roots_are_bound_and_counted() {
        for ell in 1..=12u32 {
            let neg = negative_spectrum_hermite_case(ell, 1e-12).unwrap();
            assert_eq!(neg.len(), ell as usize);
            assert!(neg.iter().all(|l| l.energy < 0.0 && l.energy > -1.0 - 4.0 * ell as f64));
            assert!(neg.windows(2).all(|w| w[0].energy < w[1].energy));
        }
    }

    #[test]
    fn methods_agree_on_hermite_case() {
        for ell in 1..=8u32 {
            let s = PotentialSpec::hermite(ell).unwrap();
            for l in negative_spectrum_hermite_case(ell, 1e-13).unwrap() {
                assert!(normalized_determinant(&s, l.energy).abs() <= 1e-9, "ell={ell} E={}", l.energy);
            }
            let n_max = ell as usize + 3;
            let (lo, hi) = default_window(&s, n_max);
            let general = find_spectrum_general(&s, lo, hi, DEFAULT_SCAN_STEP, DEFAULT_TOL).unwrap();
            let exact = full_spectrum_hermite_case(ell, n_max).unwrap();
            for (g, x) in general.levels.iter().zip(&exact) {
                assert!((g.energy - x.energy).abs() <= 1e-7, "ell={ell}: {} vs {}", g.energy, x.energy);
            }
        }
    }

    #[test]
    fn gaps_and_interlacing() {
        let sp = find_spectrum_general(&spec(2.0), -5.0, 12.0, DEFAULT_SCAN_STEP, DEFAULT_TOL).unwrap();
        for w in sp.levels.windows(2) {
            let gap = w[1].energy - w[0].energy;
            assert!((1.8..=2.5).contains(&gap), "gap {gap}");
        }
        let a = 0.1;
        let (lo, hi) = default_window(&spec(a), 8);
        let small = find_spectrum_general(&spec(a), lo, hi, DEFAULT_SCAN_STEP, DEFAULT_TOL).unwrap();
        for l in small.levels.iter().take(9) {
            let ho = 2.0 * l.n as f64;
            assert!(l.energy >= ho - a && l.energy <= ho, "n={} E={}", l.n, l.energy);
        }
    }
}
