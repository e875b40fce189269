//! Wronskians and the isospectral deformations built on them: Crum chains
//! that delete the lowest `M` levels and Krein–Adler deletions of adjacent
//! pairs.
//!
//! All states share the factor `e^{-x^2/2}`, so Wronskians are taken of
//! the reduced functions `phi` and the Gaussian is restored analytically:
//! `W[psi] = e^{-M x^2/2} W[phi]` and
//! `V_deformed = V + 2M - 2 (ln W[phi])''`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PotentialSpec, Side};
use crate::spectrum;
use crate::states::{self, sample_grid, PiecewiseState};

/// Largest Wronskian order; derivatives up to `M + 1` must stay within the
/// state evaluator's cap.
pub const MAX_SEEDS: usize = 12;
/// `|W| / Hadamard bound` at or below this is treated as a zero.
pub const ZERO_RATIO: f64 = 1e-14;
/// Regularity scan: `x` range and sample count.
pub const SCAN_HALF_WIDTH: f64 = 8.0;
pub const SCAN_SAMPLES: usize = 4001;
/// Number of retained levels recorded on construction.
const RETAINED_RECORDED: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeformationKind {
    /// Delete the lowest `M` levels.
    Crum(usize),
    /// Delete a union of adjacent pairs.
    #[serde(rename = "delete")]
    KreinAdler(Vec<usize>),
}

/// `{"ell": l, "crum": M}` or `{"ell": l, "delete": [d1, d1 + 1, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationSpec {
    pub ell: u32,
    #[serde(flatten)]
    pub kind: DeformationKind,
}

impl DeformationSpec {
    pub fn crum(ell: u32, m: usize) -> Self {
        Self { ell, kind: DeformationKind::Crum(m) }
    }

    pub fn krein_adler(ell: u32, deleted: Vec<usize>) -> Self {
        Self { ell, kind: DeformationKind::KreinAdler(deleted) }
    }

    /// Sorted deleted level indices.
    pub fn deleted(&self) -> Vec<usize> {
        match &self.kind {
            DeformationKind::Crum(m) => (0..*m).collect(),
            DeformationKind::KreinAdler(d) => {
                let mut d = d.clone();
                d.sort_unstable();
                d
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell == 0 {
            return Err(Error::InvalidParameter("ell must be >= 1".into()));
        }
        match &self.kind {
            DeformationKind::Crum(0) => Err(Error::InvalidParameter("Crum deletion needs M >= 1".into())),
            DeformationKind::Crum(m) if *m > MAX_SEEDS => Err(Error::InvalidParameter(format!("M = {m} exceeds {MAX_SEEDS}"))),
            DeformationKind::Crum(_) => Ok(()),
            DeformationKind::KreinAdler(d) => validate_deletion_set(d),
        }
    }
}

/// Accepts `d` iff, once sorted, it is `{d1, d1+1, d2, d2+1, ...}` with
/// `d1 + 1 < d2` and so on: a union of disjoint adjacent pairs.
pub fn validate_deletion_set(d: &[usize]) -> Result<()> {
    let mut sorted = d.to_vec();
    sorted.sort_unstable();
    if sorted.is_empty() {
        return Err(Error::InvalidParameter("empty deletion set".into()));
    }
    if sorted.len() > MAX_SEEDS {
        return Err(Error::InvalidParameter(format!("{} deletions exceed {MAX_SEEDS}", sorted.len())));
    }
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidDeletionSet { index: w[1] });
        }
    }
    for pair in sorted.chunks(2) {
        if pair.len() == 1 {
            return Err(Error::InvalidDeletionSet { index: pair[0] });
        }
        if pair[1] != pair[0] + 1 {
            return Err(Error::InvalidDeletionSet { index: pair[1] });
        }
    }
    Ok(())
}

/// Reduced derivatives `phi_k^(j)`, `j = 0..rows`, one column per state.
fn reduced_matrix(states: &[PiecewiseState], x: f64, side: Side, rows: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(rows, states.len());
    for (k, s) in states.iter().enumerate() {
        let d = s.reduced_derivatives(x, Some(side), rows.saturating_sub(1))?;
        for (j, v) in d.into_iter().enumerate().take(rows) {
            m[(j, k)] = v;
        }
    }
    Ok(m)
}

fn det_of_rows(full: &DMatrix<f64>, rows: &[usize]) -> f64 {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| full[(rows[i], j)]).determinant()
}

/// Hadamard bound of the leading `n x n` block, expressed for the matrix
/// after row `j` is scaled by `max(1,|x|)^j` and each column to unit norm.
/// Without the equilibration every column looks like `x^degree` at large
/// `|x|` and the bound would flag a perfectly regular Wronskian.
fn hadamard_bound(full: &DMatrix<f64>, n: usize, x: f64) -> f64 {
    let t = x.abs().max(1.0);
    let mut scaled = full.view((0, 0), (n, n)).into_owned();
    let mut log_factor = 0.0;
    for j in 0..n {
        let r = t.powi(j as i32);
        scaled.row_mut(j).scale_mut(r);
        log_factor -= r.ln();
    }
    for k in 0..n {
        let c = scaled.column(k).norm();
        if c == 0.0 {
            return 0.0;
        }
        scaled.column_mut(k).scale_mut(1.0 / c);
        log_factor += c.ln();
    }
    let rows: f64 = (0..n).map(|j| scaled.row(j).norm()).product();
    rows * log_factor.exp()
}

/// Reduced Wronskian `W[phi]` with its first two derivatives and the
/// Hadamard bound of the defining matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedWronskian {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub bound: f64,
}

impl ReducedWronskian {
    pub fn ratio(&self) -> f64 {
        if self.bound == 0.0 {
            0.0
        } else {
            self.value.abs() / self.bound
        }
    }

    /// `(ln W)''`.
    pub fn log_second_derivative(&self) -> f64 {
        (self.d2 * self.value - self.d1 * self.d1) / (self.value * self.value)
    }
}

/// `W[phi_1..phi_M]`, `W'` and `W''` from the row-replacement identities
/// `W' = det(rows 0..M-2, M)` and
/// `W'' = det(rows 0..M-2, M+1) + det(rows 0..M-3, M-1, M)`.
pub fn reduced_wronskian(states: &[PiecewiseState], x: f64, side: Side) -> Result<ReducedWronskian> {
    let m = states.len();
    if m == 0 {
        return Ok(ReducedWronskian { value: 1.0, d1: 0.0, d2: 0.0, bound: 1.0 });
    }
    if m > MAX_SEEDS {
        return Err(Error::InvalidParameter(format!("{m} states exceed {MAX_SEEDS}")));
    }
    let full = reduced_matrix(states, x, side, m + 2)?;
    let base: Vec<usize> = (0..m).collect();
    let value = det_of_rows(&full, &base);
    let mut rows = base.clone();
    rows[m - 1] = m;
    let d1 = det_of_rows(&full, &rows);
    rows[m - 1] = m + 1;
    let mut d2 = det_of_rows(&full, &rows);
    if m >= 2 {
        let mut rows = base;
        rows[m - 2] = m - 1;
        rows[m - 1] = m;
        d2 += det_of_rows(&full, &rows);
    }
    Ok(ReducedWronskian { value, d1, d2, bound: hadamard_bound(&full, m, x) })
}

fn resolve_all(states: &[PiecewiseState], x: f64, side: Option<Side>) -> Result<Side> {
    if let Some(first) = states.first() {
        if states.iter().any(|s| s.spec != first.spec) {
            return Err(Error::InvalidParameter("states must share one potential".into()));
        }
    }
    Side::resolve(x, side)
}

/// The Wronskian `det(psi_k^(j))`, `j = 0..M-1`.
pub fn wronskian(states: &[PiecewiseState], x: f64, side: Option<Side>) -> Result<f64> {
    let side = resolve_all(states, x, side)?;
    let w = reduced_wronskian(states, x, side)?;
    Ok((-0.5 * states.len() as f64 * x * x).exp() * w.value)
}

/// `(W, W', W'')` of the full states.
pub fn wronskian_derivatives(states: &[PiecewiseState], x: f64, side: Option<Side>) -> Result<(f64, f64, f64)> {
    let side = resolve_all(states, x, side)?;
    let w = reduced_wronskian(states, x, side)?;
    let m = states.len() as f64;
    let g = (-0.5 * m * x * x).exp();
    Ok((g * w.value, g * (w.d1 - m * x * w.value), g * (w.d2 - 2.0 * m * x * w.d1 + (m * m * x * x - m) * w.value)))
}

/// Result of the regularity scan of a seed Wronskian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Smallest `|W| / Hadamard bound` seen.
    pub min_ratio: f64,
    /// Where it occurred.
    pub x_at_min: f64,
    /// Sign changes of `W` within either side.
    pub sign_changes: usize,
}

impl RegularityReport {
    pub fn is_regular(&self) -> bool {
        self.sign_changes == 0 && self.min_ratio > ZERO_RATIO
    }
}

/// Zero scan of `W[phi]` over `[-L, L]`, with the origin sampled from both
/// sides. The Gaussian factor is left out so the tails do not read as zeros.
pub fn regularity_scan(seeds: &[PiecewiseState], half_width: f64, samples: usize) -> Result<RegularityReport> {
    let grid = sample_grid(-half_width, half_width, samples)?;
    let values: Vec<(f64, Side, ReducedWronskian)> =
        grid.par_iter().map(|&(x, side)| reduced_wronskian(seeds, x, side).map(|w| (x, side, w))).collect::<Result<_>>()?;
    let mut report = RegularityReport { min_ratio: f64::INFINITY, x_at_min: 0.0, sign_changes: 0 };
    let mut prev: Option<(Side, f64)> = None;
    for (x, side, w) in values {
        let r = w.ratio();
        if r < report.min_ratio {
            report.min_ratio = r;
            report.x_at_min = x;
        }
        if let Some((ps, pv)) = prev {
            if ps == side && pv * w.value < 0.0 {
                report.sign_changes += 1;
            }
        }
        prev = Some((side, w.value));
    }
    Ok(report)
}

/// A potential with some of its levels deleted by a Wronskian of the
/// corresponding eigenstates.
#[derive(Debug, Clone)]
pub struct DeformedSystem {
    pub base: PotentialSpec,
    pub deformation: Option<DeformationSpec>,
    pub deleted: Vec<usize>,
    pub seeds: Vec<PiecewiseState>,
    /// The lowest few `(n, E_n)` that survive the deletion.
    pub retained_levels: Vec<(usize, f64)>,
    pub regularity: RegularityReport,
}

impl DeformedSystem {
    /// Deletes `deleted` (any sorted index set) from `base`. Fails with
    /// `WronskianZero` if the seed Wronskian has a zero on `[-8, 8]`.
    pub fn new(base: PotentialSpec, deleted: Vec<usize>) -> Result<Self> {
        let mut deleted = deleted;
        deleted.sort_unstable();
        deleted.dedup();
        if deleted.len() > MAX_SEEDS {
            return Err(Error::InvalidParameter(format!("{} deletions exceed {MAX_SEEDS}", deleted.len())));
        }
        let top = deleted.last().map_or(0, |d| d + 1);
        let levels = spectrum::lowest_levels(&base, top + RETAINED_RECORDED)?;
        let retained_levels: Vec<(usize, f64)> =
            levels.iter().filter(|l| !deleted.contains(&l.n)).take(RETAINED_RECORDED).map(|l| (l.n, l.energy)).collect();
        let seeds = deleted.iter().map(|&n| states::eigenstate(&base, n)).collect::<Result<Vec<_>>>()?;
        let regularity = regularity_scan(&seeds, SCAN_HALF_WIDTH, SCAN_SAMPLES)?;
        if !regularity.is_regular() {
            return Err(Error::WronskianZero { x: regularity.x_at_min, ratio: regularity.min_ratio });
        }
        Ok(Self { base, deformation: None, deleted, seeds, retained_levels, regularity })
    }

    pub fn from_spec(spec: &DeformationSpec) -> Result<Self> {
        spec.validate()?;
        let mut sys = Self::new(PotentialSpec::hermite(spec.ell)?, spec.deleted())?;
        sys.deformation = Some(spec.clone());
        Ok(sys)
    }

    pub fn crum(ell: u32, m: usize) -> Result<Self> {
        Self::from_spec(&DeformationSpec::crum(ell, m))
    }

    pub fn krein_adler(ell: u32, deleted: Vec<usize>) -> Result<Self> {
        Self::from_spec(&DeformationSpec::krein_adler(ell, deleted))
    }

    fn checked_wronskian(&self, x: f64, side: Side) -> Result<ReducedWronskian> {
        let w = reduced_wronskian(&self.seeds, x, side)?;
        if w.ratio() <= ZERO_RATIO {
            return Err(Error::WronskianZero { x, ratio: w.ratio() });
        }
        Ok(w)
    }

    /// `V(x) - 2 (ln W)''(x)`; at `x = 0` the side must be given.
    pub fn potential(&self, x: f64, side: Option<Side>) -> Result<f64> {
        let side = Side::resolve(x, side)?;
        let w = self.checked_wronskian(x, side)?;
        let m = self.seeds.len() as f64;
        Ok(self.base.potential_value_sided(x, side) + 2.0 * m - 2.0 * w.log_second_derivative())
    }

    /// Energy of the retained level `n`.
    pub fn energy(&self, n: usize) -> Result<f64> {
        if self.deleted.contains(&n) {
            return Err(Error::InvalidParameter(format!("level {n} is deleted")));
        }
        if let Some(&(_, e)) = self.retained_levels.iter().find(|(k, _)| *k == n) {
            return Ok(e);
        }
        Ok(spectrum::lowest_levels(&self.base, n + 1)?[n].energy)
    }

    /// The deformed eigenfunction `W[seeds, psi_n] / W[seeds]` of a
    /// retained level `n`.
    pub fn state_for(&self, level: &PiecewiseState, x: f64, side: Option<Side>) -> Result<f64> {
        let side = Side::resolve(x, side)?;
        let w = self.checked_wronskian(x, side)?;
        let mut all = self.seeds.clone();
        all.push(level.clone());
        let top = reduced_wronskian(&all, x, side)?;
        Ok((-0.5 * x * x).exp() * top.value / w.value)
    }

    pub fn state(&self, n: usize, x: f64, side: Option<Side>) -> Result<f64> {
        if self.deleted.contains(&n) {
            return Err(Error::InvalidParameter(format!("level {n} is deleted")));
        }
        let level = states::eigenstate(&self.base, n)?;
        self.state_for(&level, x, side)
    }

    /// Retained level indices in increasing order, starting from the lowest.
    pub fn retained_indices(&self, count: usize) -> Vec<usize> {
        (0..).filter(|n| !self.deleted.contains(n)).take(count).collect()
    }
}

/// `V^[M]` of `a = 4l` after deleting its `M` lowest levels.
pub fn crum_potential(ell: u32, m: usize, x: f64, side: Option<Side>) -> Result<f64> {
    DeformedSystem::crum(ell, m)?.potential(x, side)
}

/// `psi^[M]_n`, the image of level `n + M`. `M = 0` is the undeformed state.
pub fn crum_state(ell: u32, m: usize, n: usize, x: f64, side: Option<Side>) -> Result<f64> {
    if m == 0 {
        return states::eigenstate(&PotentialSpec::hermite(ell)?, n)?.evaluate(x, side);
    }
    DeformedSystem::crum(ell, m)?.state(n + m, x, side)
}

/// The deformation with all `l` negative levels removed, whose spectrum is
/// exactly `{0, 2, 4, ...}`.
pub fn strict_iso_potential(ell: u32, x: f64, side: Option<Side>) -> Result<f64> {
    crum_potential(ell, ell as usize, x, side)
}

pub fn krein_adler_potential(ell: u32, deleted: &[usize], x: f64, side: Option<Side>) -> Result<f64> {
    DeformedSystem::krein_adler(ell, deleted.to_vec())?.potential(x, side)
}

pub fn krein_adler_state(ell: u32, deleted: &[usize], n: usize, x: f64, side: Option<Side>) -> Result<f64> {
    DeformedSystem::krein_adler(ell, deleted.to_vec())?.state(n, x, side)
}

/// RMS misfit of `V^[M+1](x)` against `c0 + V^[M](x - s)` on `x in [1, 5]`,
/// minimised over the shift `s` and the constant `c0`. Shape-invariant
/// families give zero.
pub fn shape_invariance_probe(base: PotentialSpec, m: usize) -> Result<f64> {
    let lower = DeformedSystem::new(base, (0..m).collect())?;
    let upper = DeformedSystem::new(base, (0..=m).collect())?;
    const POINTS: usize = 201;
    let xs: Vec<f64> = (0..POINTS).map(|i| 1.0 + 4.0 * i as f64 / (POINTS - 1) as f64).collect();
    let target: Vec<f64> = xs.iter().map(|&x| upper.potential(x, Some(Side::Right))).collect::<Result<_>>()?;
    let misfit = |s: f64| -> Result<f64> {
        let diff: Vec<f64> = xs
            .iter()
            .zip(&target)
            .map(|(&x, &t)| {
                // shifted points that cross the origin keep the right branch formula
                lower.potential(x - s, Some(Side::Right)).map(|v| t - v)
            })
            .collect::<Result<_>>()?;
        let c0 = diff.iter().sum::<f64>() / diff.len() as f64;
        Ok((diff.iter().map(|d| (d - c0).powi(2)).sum::<f64>() / diff.len() as f64).sqrt())
    };
    // coarse scan over the shift, then golden-section polish
    let mut best = (0.0, misfit(0.0)?);
    for i in -40..=40 {
        let s = i as f64 * 0.05;
        let r = misfit(s)?;
        if r < best.1 {
            best = (s, r);
        }
    }
    let (mut lo, mut hi) = (best.0 - 0.05, best.0 + 0.05);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let (c, d) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        if misfit(c)? < misfit(d)? {
            hi = d;
        } else {
            lo = c;
        }
    }
    Ok(misfit(0.5 * (lo + hi))?.min(best.1))
}
