//! Finite-difference cross-check for any potential that can be evaluated
//! pointwise: three-point `-d^2/dx^2` on a staggered grid with Dirichlet
//! ends, lowest eigenvalues by Sturm-count bisection.
//!
//! The grid `x_i = -L + (i + 1/2) h`, `h = 2L/N` with even `N` puts the
//! origin on a cell boundary, so the jump is never sampled.

use rayon::prelude::*;
use serde::Serialize;

use crate::darboux::DeformedSystem;
use crate::error::{Error, Result};
use crate::model::{PotentialSpec, Side};
use crate::spectrum::{Eigenvalue, Provenance};

/// Anything with a value on either side of the origin.
pub trait Potential: Sync {
    fn value(&self, x: f64, side: Side) -> Result<f64>;
}

impl Potential for PotentialSpec {
    fn value(&self, x: f64, side: Side) -> Result<f64> {
        Ok(self.potential_value_sided(x, side))
    }
}

impl Potential for DeformedSystem {
    fn value(&self, x: f64, side: Side) -> Result<f64> {
        self.potential(x, Some(side))
    }
}

/// A plain function of `x`, the same on both sides.
pub struct FnPotential<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Potential for FnPotential<F> {
    fn value(&self, x: f64, _side: Side) -> Result<f64> {
        Ok((self.0)(x))
    }
}

pub const MIN_HALF_WIDTH: f64 = 6.0;
pub const MIN_POINTS: usize = 500;
pub const MAX_LEVELS: usize = 20;
/// Boundary amplitude (relative to the peak) above which a level is
/// flagged as feeling the Dirichlet walls.
pub const TRUNCATION_LIMIT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
    pub levels: usize,
}

impl GridConfig {
    pub fn new(half_width: f64, points: usize, levels: usize) -> Result<Self> {
        if !(half_width >= MIN_HALF_WIDTH) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!("grid half-width must be >= {MIN_HALF_WIDTH}, got {half_width}")));
        }
        if points < MIN_POINTS || !points.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("grid needs an even point count >= {MIN_POINTS}, got {points}")));
        }
        if levels == 0 || levels > MAX_LEVELS {
            return Err(Error::InvalidParameter(format!("levels must be in 1..={MAX_LEVELS}, got {levels}")));
        }
        Ok(Self { half_width, points, levels })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.step()
    }

    /// The same interval at roughly half the resolution, still even.
    fn coarse(&self) -> Self {
        let half = self.points / 2;
        Self { points: half + half % 2, ..*self }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_width: 8.0, points: 4000, levels: 8 }
    }
}

/// Symmetric tridiagonal `T = diag(d) + offdiag(e)` with constant `e`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: f64,
}

impl Tridiagonal {
    pub fn assemble(potential: &impl Potential, cfg: &GridConfig) -> Result<Self> {
        let h = cfg.step();
        let diag = (0..cfg.points)
            .into_par_iter()
            .map(|i| {
                let x = cfg.abscissa(i);
                let side = if x < 0.0 { Side::Left } else { Side::Right };
                let v = potential.value(x, side)?;
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!("potential is not finite at x = {x}")));
                }
                Ok(2.0 / (h * h) + v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { diag, off: -1.0 / (h * h) })
    }

    /// Number of eigenvalues strictly below `lambda` (negative LDL^T pivots).
    pub fn count_below(&self, lambda: f64) -> usize {
        let e2 = self.off * self.off;
        let mut count = 0;
        let mut d = 1.0;
        for (i, &a) in self.diag.iter().enumerate() {
            d = if i == 0 { a - lambda } else { a - lambda - e2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + lambda.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, &a| m.min(a - r));
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, &a| m.max(a + r));
        (lo, hi)
    }

    /// Eigenvalue `k` (from 0) by bisection on the Sturm count.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        let (mut lo, mut hi) = self.gershgorin();
        if k >= self.diag.len() {
            return Err(Error::ConvergenceFailure(k));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        if !value.is_finite() || (hi - lo) > 1e-9 * (1.0 + value.abs()) {
            return Err(Error::ConvergenceFailure(k));
        }
        Ok(value)
    }

    /// Eigenvector at a converged eigenvalue by two steps of inverse
    /// iteration, normalized to unit discrete 2-norm (`sum v_i^2 h = 1`
    /// is the caller's business).
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.diag.len();
        let shift = lambda + 1e-12 * (1.0 + lambda.abs());
        let mut v = vec![1.0; n];
        for _ in 0..3 {
            v = self.solve_shifted(shift, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    /// `(T - shift) y = b` by elimination without pivoting; a vanishing
    /// pivot is nudged, which only rescales the inverse-iteration iterate.
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let e = self.off;
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pivot = self.diag[0] - shift;
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - shift - e * c[i - 1];
            }
            if pivot.abs() < f64::MIN_POSITIVE.sqrt() {
                pivot = f64::MIN_POSITIVE.sqrt();
            }
            c[i] = e / pivot;
            y[i] = (b[i] - if i > 0 { e * y[i - 1] } else { 0.0 }) / pivot;
        }
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleWarning {
    /// `|psi|` at a Dirichlet wall exceeds [`TRUNCATION_LIMIT`] of its peak.
    Truncation { level: usize, boundary_ratio: f64 },
}

/// Grid eigenvalues. `residual` of each level holds the Richardson error
/// estimate `|E_N - E_{N/2}| / 3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpectrum {
    pub config: GridConfig,
    pub levels: Vec<Eigenvalue>,
    /// The same levels from the half-resolution run.
    pub coarse: Vec<f64>,
    pub warnings: Vec<OracleWarning>,
}

impl GridSpectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn error_estimates(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.residual).collect()
    }
}

fn lowest(t: &Tridiagonal, levels: usize) -> Result<Vec<f64>> {
    (0..levels).into_par_iter().map(|k| t.eigenvalue(k)).collect()
}

/// Lowest `cfg.levels` eigenvalues with error estimates and truncation
/// warnings.
pub fn grid_spectrum(potential: &impl Potential, cfg: &GridConfig) -> Result<GridSpectrum> {
    let fine = Tridiagonal::assemble(potential, cfg)?;
    let energies = lowest(&fine, cfg.levels)?;
    let coarse_cfg = cfg.coarse();
    let coarse = lowest(&Tridiagonal::assemble(potential, &coarse_cfg)?, cfg.levels)?;

    let warnings = energies
        .par_iter()
        .enumerate()
        .filter_map(|(k, &e)| {
            let v = fine.eigenvector(e);
            let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let edge = v[0].abs().max(v[v.len() - 1].abs());
            let ratio = edge / peak;
            (ratio > TRUNCATION_LIMIT).then_some(OracleWarning::Truncation { level: k, boundary_ratio: ratio })
        })
        .collect();

    let levels = energies
        .iter()
        .zip(&coarse)
        .enumerate()
        .map(|(n, (&e, &c))| Eigenvalue { n, energy: e, provenance: Provenance::GridOracle, residual: (e - c).abs() / 3.0 })
        .collect();
    Ok(GridSpectrum { config: *cfg, levels, coarse, warnings })
}

/// Normalized grid eigenvector of level `k` as `(x_i, psi_i)` with
/// `sum psi_i^2 h = 1`.
pub fn grid_eigenvector(potential: &impl Potential, cfg: &GridConfig, k: usize) -> Result<Vec<(f64, f64)>> {
    let t = Tridiagonal::assemble(potential, cfg)?;
    let e = t.eigenvalue(k)?;
    let v = t.eigenvector(e);
    let scale = 1.0 / cfg.step().sqrt();
    Ok(v.iter().enumerate().map(|(i, &p)| (cfg.abscissa(i), p * scale)).collect())
}

/// Eigenvalues over a sequence of resolutions with the observed order
/// `log2(|E_{N1} - E_{N2}| / |E_{N2} - E_{N3}|)` for each doubling triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub half_width: f64,
    pub points: Vec<usize>,
    /// `energies[i][k]`: level `k` at resolution `points[i]`.
    pub energies: Vec<Vec<f64>>,
    /// `orders[j][k]` from resolutions `j, j+1, j+2`.
    pub orders: Vec<Vec<f64>>,
}

pub fn convergence_study(potential: &impl Potential, half_width: f64, points: &[usize], levels: usize) -> Result<ConvergenceStudy> {
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("resolutions must increase".into()));
    }
    let energies = points
        .iter()
        .map(|&n| {
            let cfg = GridConfig::new(half_width, n, levels)?;
            lowest(&Tridiagonal::assemble(potential, &cfg)?, levels)
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = energies
        .windows(3)
        .zip(points.windows(3))
        .map(|(e, n)| {
            let refine = (n[1] as f64 / n[0] as f64).ln();
            (0..levels).map(|k| ((e[0][k] - e[1][k]).abs() / (e[1][k] - e[2][k]).abs()).ln() / refine).collect()
        })
        .collect();
    Ok(ConvergenceStudy { half_width, points: points.to_vec(), energies, orders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::lowest_levels;

    fn oscillator() -> FnPotential<impl Fn(f64) -> f64 + Sync> {
        FnPotential(|x: f64| x * x - 1.0)
    }

    #[test]
    fn config_limits() {
        assert!(GridConfig::new(5.0, 1000, 4).is_err());
        assert!(GridConfig::new(8.0, 400, 4).is_err());
        assert!(GridConfig::new(8.0, 1001, 4).is_err());
        assert!(GridConfig::new(8.0, 1000, 21).is_err());
        let cfg = GridConfig::new(8.0, 1000, 4).unwrap();
        assert!((0..cfg.points).all(|i| cfg.abscissa(i) != 0.0));
        assert!((cfg.abscissa(499) + cfg.abscissa(500)).abs() < 1e-12);
    }

    #[test]
    fn oscillator_levels() {
        let s = grid_spectrum(&oscillator(), &GridConfig::new(8.0, 4000, 4).unwrap()).unwrap();
        for (k, e) in s.energies().iter().enumerate() {
            assert!((e - 2.0 * k as f64).abs() < 1e-3, "{k}: {e}");
            assert!((e - 2.0 * k as f64).abs() <= 5.0 * s.levels[k].residual);
        }
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn jump2_reference_values() {
        const TABLE: [f64; 7] = [-1.30908, 1.09714, 2.93715, 5.04459, 6.96479, 9.02870, 10.9756];
        let s = grid_spectrum(&PotentialSpec::new(2.0).unwrap(), &GridConfig::new(8.0, 4000, 7).unwrap()).unwrap();
        for (e, want) in s.energies().iter().zip(TABLE) {
            assert!((e - want).abs() < 2e-3, "{e} vs {want}");
        }
    }

    #[test]
    fn ell6_reference_values() {
        const TABLE: [f64; 6] = [-22.4357, -18.6885, -14.8995, -11.1005, -7.31152, -3.56427];
        let s = grid_spectrum(&PotentialSpec::hermite(6).unwrap(), &GridConfig::new(9.0, 6000, 6).unwrap()).unwrap();
        for (e, want) in s.energies().iter().zip(TABLE) {
            assert!((e - want).abs() < 5e-3, "{e} vs {want}");
        }
    }

    #[test]
    fn truncation_is_flagged() {
        let s = grid_spectrum(&oscillator(), &GridConfig::new(6.0, 1000, 20).unwrap()).unwrap();
        assert!(s.warnings.iter().any(|w| matches!(w, OracleWarning::Truncation { level: 19, .. })));
    }

    #[test]
    fn eigenvector_is_normalized_ground_state() {
        let cfg = GridConfig::new(8.0, 2000, 1).unwrap();
        let v = grid_eigenvector(&oscillator(), &cfg, 0).unwrap();
        let norm: f64 = v.iter().map(|(_, p)| p * p).sum::<f64>() * cfg.step();
        assert!((norm - 1.0).abs() < 1e-10);
        // pi^{-1/4} e^{-x^2/2} up to sign
        let (x, p) = v[1000];
        let want = PI_QUARTER_INV * (-0.5 * x * x).exp();
        assert!((p.abs() - want).abs() < 1e-3);
    }

    const PI_QUARTER_INV: f64 = 0.751_125_544_464_942_5;

    #[test]
    fn oscillator_converges_at_second_order() {
        let study = convergence_study(&oscillator(), 8.0, &[1000, 2000, 4000], 4).unwrap();
        for p in &study.orders[0] {
            assert!((1.7..=2.3).contains(p), "{p}");
        }
    }

    #[test]
    fn agrees_with_matching_method() {
        for a in [0.5, 2.0, 4.0, 24.0] {
            let spec = PotentialSpec::new(a).unwrap();
            let exact = lowest_levels(&spec, 6).unwrap();
            let grid = grid_spectrum(&spec, &GridConfig::new(9.0, 4000, 6).unwrap()).unwrap();
            for (g, m) in grid.levels.iter().zip(&exact) {
                let err = (g.energy - m.energy).abs();
                assert!(err <= 5.0 * g.residual, "a={a} n={}: {err} vs {}", g.n, g.residual);
            }
            // error shrinks as the grid doubles
            let coarse_err: Vec<f64> = grid.coarse.iter().zip(&exact).map(|(c, m)| (c - m.energy).abs()).collect();
            for (k, g) in grid.levels.iter().enumerate() {
                assert!((g.energy - exact[k].energy).abs() < coarse_err[k], "a={a} n={k}");
            }
        }
    }
}
