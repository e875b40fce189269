//! Piecewise eigenfunctions.
//!
//! Every state is `psi(x) = e^{-x^2/2} phi(x)` with a side-dependent
//! reduced function `phi`: either an exact Hermite polynomial times a
//! rational scale, or the decaying confluent hypergeometric branch
//!
//! ```text
//! phi(x) = c_even M(A, 1/2, x^2) + c_odd x M(A + 1/2, 3/2, x^2),
//! ```
//!
//! `A = -(E + shift)/4`. Derivatives of any order come from the
//! Schrodinger equation itself, so they are exact in form.

mod branch;

use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BoundaryReport, PotentialSpec, Side};
use crate::specfun::{self, kummer_1f1, kummer_1f1_x_derivative, recip_gamma, SeriesControl};
use crate::spectrum::{self, normalized_determinant};

pub use branch::DecayingBranch;

/// Highest derivative order served by [`PiecewiseState::derivatives`].
pub const MAX_DERIVATIVE_ORDER: usize = 16;
/// Normalized-determinant tolerance accepted by [`general_state`].
pub const EIGEN_TOL: f64 = 1e-8;
/// Inside this `|x|` the hypergeometric side is summed from its series.
const SERIES_RADIUS: f64 = 1.0;

/// Decaying hypergeometric side: `phi = scale * U(A, 1/2, x^2)` written in
/// the `(c_even, c_odd)` basis.
#[derive(Debug, Clone)]
pub struct HypergeometricForm {
    pub c_even: f64,
    pub c_odd: f64,
    /// Kummer parameter `A` of the even part.
    pub param: f64,
    scale: f64,
    branch: Arc<DecayingBranch>,
}

impl HypergeometricForm {
    fn new(param: f64, scale: f64, side: Side) -> Result<Self> {
        let sign = match side {
            Side::Right => -1.0,
            Side::Left => 1.0,
        };
        Ok(Self {
            c_even: scale * PI.sqrt() * recip_gamma(param + 0.5),
            c_odd: sign * 2.0 * scale * PI.sqrt() * recip_gamma(param),
            param,
            scale,
            branch: Arc::new(DecayingBranch::new(param)?),
        })
    }

    fn rescaled(mut self, k: f64) -> Self {
        self.c_even *= k;
        self.c_odd *= k;
        self.scale *= k;
        self
    }

    fn reduced(&self, x: f64) -> (f64, f64) {
        if x.abs() <= SERIES_RADIUS {
            if let Ok(v) = self.series(x) {
                return v;
            }
        }
        let (g, dg) = self.branch.reduced(x.abs());
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        (self.scale * g, self.scale * sign * dg)
    }

    fn series(&self, x: f64) -> Result<(f64, f64)> {
        let ctl = SeriesControl::default();
        let z = x * x;
        let a = self.param;
        let even = kummer_1f1(a, 0.5, z, &ctl)?;
        let odd = kummer_1f1(a + 0.5, 1.5, z, &ctl)?;
        let d_even = kummer_1f1_x_derivative(a, 0.5, x, &ctl)?;
        let d_odd = odd + x * kummer_1f1_x_derivative(a + 0.5, 1.5, x, &ctl)?;
        Ok((self.c_even * even + self.c_odd * x * odd, self.c_even * d_even + self.c_odd * d_odd))
    }
}

/// `scale * H_degree(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteForm {
    pub degree: usize,
    pub scale: BigRational,
    scale_f64: f64,
}

impl HermiteForm {
    fn new(degree: usize, scale: BigRational) -> Self {
        let scale_f64 = scale.to_f64().unwrap_or(f64::NAN);
        Self { degree, scale, scale_f64 }
    }

    fn reduced(&self, x: f64) -> (f64, f64) {
        let (h, h_prev) = specfun::hermite_pair(self.degree, x);
        (self.scale_f64 * h, self.scale_f64 * 2.0 * self.degree as f64 * h_prev)
    }
}

#[derive(Debug, Clone)]
pub enum SideForm {
    Hypergeometric(HypergeometricForm),
    Hermite(HermiteForm),
}

impl SideForm {
    fn reduced(&self, x: f64) -> (f64, f64) {
        match self {
            SideForm::Hypergeometric(h) => h.reduced(x),
            SideForm::Hermite(h) => h.reduced(x),
        }
    }
}

/// An eigenfunction given by one closed form on each side of the origin.
#[derive(Debug, Clone)]
pub struct PiecewiseState {
    pub spec: PotentialSpec,
    pub energy: f64,
    pub level: Option<usize>,
    pub left: SideForm,
    pub right: SideForm,
    pub norm: Option<f64>,
}

impl PiecewiseState {
    fn form(&self, side: Side) -> &SideForm {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// `E + shift` on the given side; the local problem is `psi'' = (x^2 - 1 - E_eff) psi`.
    fn effective_energy(&self, side: Side) -> f64 {
        self.energy + self.spec.shift(side)
    }

    /// `(phi, phi')` with `psi = e^{-x^2/2} phi`.
    pub fn reduced(&self, x: f64, side: Option<Side>) -> Result<(f64, f64)> {
        let side = Side::resolve(x, side)?;
        Ok(self.form(side).reduced(x))
    }

    /// Reduced derivatives `phi^(0..=order)` from `phi'' = 2x phi' - E_eff phi`.
    pub fn reduced_derivatives(&self, x: f64, side: Option<Side>, order: usize) -> Result<Vec<f64>> {
        let side = Side::resolve(x, side)?;
        let (p0, p1) = self.form(side).reduced(x);
        let e = self.effective_energy(side);
        let mut d = Vec::with_capacity(order + 1);
        d.push(p0);
        if order >= 1 {
            d.push(p1);
        }
        for j in 0..order.saturating_sub(1) {
            let next = 2.0 * x * d[j + 1] + (2.0 * j as f64 - e) * d[j];
            d.push(next);
        }
        Ok(d)
    }

    pub fn evaluate(&self, x: f64, side: Option<Side>) -> Result<f64> {
        let (phi, _) = self.reduced(x, side)?;
        Ok((-0.5 * x * x).exp() * phi)
    }

    /// `psi^(0..=order)(x)`; at `x = 0` orders `>= 2` depend on the side.
    pub fn derivatives(&self, x: f64, side: Option<Side>, order: usize) -> Result<Vec<f64>> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::InvalidParameter(format!("derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}")));
        }
        let side = Side::resolve(x, side)?;
        let (phi, dphi) = self.form(side).reduced(x);
        let g = (-0.5 * x * x).exp();
        let c = x * x - 1.0 - self.effective_energy(side);
        let mut d = Vec::with_capacity(order + 1);
        d.push(g * phi);
        if order >= 1 {
            d.push(g * (dphi - x * phi));
        }
        for j in 0..order.saturating_sub(1) {
            // psi^(j+2) = (x^2 - c0) psi^(j) + 2 j x psi^(j-1) + j (j-1) psi^(j-2)
            let jf = j as f64;
            let mut next = c * d[j];
            if j >= 1 {
                next += 2.0 * jf * x * d[j - 1];
            }
            if j >= 2 {
                next += jf * (jf - 1.0) * d[j - 2];
            }
            d.push(next);
        }
        Ok(d)
    }

    pub fn evaluate_derivative(&self, x: f64, order: usize, side: Option<Side>) -> Result<f64> {
        Ok(self.derivatives(x, side, order)?[order])
    }

    pub fn boundary_report(&self) -> Result<BoundaryReport> {
        let left = self.derivatives(0.0, Some(Side::Left), 1)?;
        let right = self.derivatives(0.0, Some(Side::Right), 1)?;
        let peak = sample_peak(self, 8.0, 4001)?;
        let tail = self.evaluate(7.0, None)?.abs().max(self.evaluate(-7.0, None)?.abs());
        Ok(BoundaryReport {
            value_jump: (right[0] - left[0]).abs(),
            slope_jump: (right[1] - left[1]).abs(),
            tail_decay_ok: tail < 1e-6 * peak,
        })
    }

    /// Origin scale used by continuity checks: `max(|psi(0)|, |psi'(0)|)`.
    pub fn origin_scale(&self) -> Result<f64> {
        let r = self.derivatives(0.0, Some(Side::Right), 1)?;
        let l = self.derivatives(0.0, Some(Side::Left), 1)?;
        Ok(r[0].abs().max(r[1].abs()).max(l[0].abs()).max(l[1].abs()))
    }
}

fn sample_peak(state: &PiecewiseState, half_width: f64, samples: usize) -> Result<f64> {
    let mut peak = 0.0_f64;
    for i in 0..samples {
        let x = -half_width + 2.0 * half_width * i as f64 / (samples - 1) as f64;
        peak = peak.max(state.evaluate(x, Some(side_or_right(x)))?.abs());
    }
    Ok(peak)
}

fn side_or_right(x: f64) -> Side {
    Side::of(x).unwrap_or(Side::Right)
}

/// Eigenstate of a general `a` at eigenvalue `E`.
///
/// The right side carries the boundary null vector
/// `alpha = Gamma(3/2)/Gamma(-(E-2)/4)`, `beta = -Gamma(1/2)/Gamma(-E/4)`;
/// the left side is its own decaying branch scaled to match `(alpha, beta)`
/// at the origin. The result is scaled so the larger of `|psi(0)|`,
/// `|psi'(0)|` is `+1`.
pub fn general_state(spec: &PotentialSpec, energy: f64) -> Result<PiecewiseState> {
    let residual = normalized_determinant(spec, energy);
    if !(residual.abs() <= EIGEN_TOL) {
        return Err(Error::NotAnEigenvalue { energy, residual: residual.abs(), tol: EIGEN_TOL });
    }
    let right_param = -energy / 4.0;
    let left_param = -(energy + spec.a()) / 4.0;

    let alpha = 0.5 * PI.sqrt() * recip_gamma(right_param + 0.5);
    let beta = -PI.sqrt() * recip_gamma(right_param);
    let lead = if alpha.abs() >= beta.abs() { alpha } else { beta };
    if lead.abs() < f64::MIN_POSITIVE {
        return Err(Error::DegenerateNullVector(energy));
    }

    let v_even = PI.sqrt() * recip_gamma(left_param + 0.5);
    let v_odd = 2.0 * PI.sqrt() * recip_gamma(left_param);
    let left_scale = (alpha * v_even + beta * v_odd) / (v_even * v_even + v_odd * v_odd);

    let k = 1.0 / lead;
    let right = HypergeometricForm::new(right_param, 0.5, Side::Right)?.rescaled(k);
    let left = HypergeometricForm::new(left_param, left_scale, Side::Left)?.rescaled(k);
    Ok(PiecewiseState {
        spec: *spec,
        energy,
        level: None,
        left: SideForm::Hypergeometric(left),
        right: SideForm::Hypergeometric(right),
        norm: None,
    })
}

/// Exact rational normalization constant of a Hermite-ladder state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationConstant {
    pub ell: u32,
    pub n: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub value: BigRational,
}

fn serialize_rational<S: serde::Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Left-side scale of the ladder state `n >= l`, fixed by continuity with
/// the unit-scale right side.
pub fn normalization_constant(ell: u32, n: usize) -> Result<NormalizationConstant> {
    let l = ell as usize;
    if n < l {
        return Err(Error::IndexBelowLadder { ell, n });
    }
    let (num_half, den_half) = if (n - l).is_multiple_of(2) { ((n + l) / 2, (n - l) / 2) } else { ((n + l - 1) / 2, (n - l - 1) / 2) };
    let num = factorial(n - l) * factorial(num_half);
    let den = factorial(n + l) * factorial(den_half);
    let mut value = BigRational::new(num, den);
    if ell % 2 == 1 {
        value = -value;
    }
    Ok(NormalizationConstant { ell, n, value })
}

/// Ladder state `n >= l` of `a = 4l`:
/// `N_n e^{-x^2/2} H_{n+l}` on the left, `e^{-x^2/2} H_{n-l}` on the right.
pub fn hermite_state(ell: u32, n: usize) -> Result<PiecewiseState> {
    let spec = PotentialSpec::hermite(ell)?;
    let l = ell as usize;
    if n < l {
        return Err(Error::IndexBelowLadder { ell, n });
    }
    if n + l > specfun::HERMITE_MAX_DEGREE {
        return Err(Error::InvalidParameter(format!("Hermite degree {} exceeds {}", n + l, specfun::HERMITE_MAX_DEGREE)));
    }
    let scale = normalization_constant(ell, n)?.value;
    Ok(PiecewiseState {
        spec,
        energy: 2.0 * (n as f64 - ell as f64),
        level: Some(n),
        left: SideForm::Hermite(HermiteForm::new(n + l, scale)),
        right: SideForm::Hermite(HermiteForm::new(n - l, BigRational::one())),
        norm: None,
    })
}

/// Eigenstates `0..count` of any spec, ladder states in Hermite form.
pub fn eigenstates(spec: &PotentialSpec, count: usize) -> Result<Vec<PiecewiseState>> {
    let levels = spectrum::lowest_levels(spec, count)?;
    levels
        .iter()
        .map(|l| {
            let mut state = match spec.hermite_case() {
                Some(ell) if l.n >= ell as usize => hermite_state(ell, l.n)?,
                _ => general_state(spec, l.energy)?,
            };
            state.level = Some(l.n);
            Ok(state)
        })
        .collect()
}

/// Eigenstate with level index `n`.
pub fn eigenstate(spec: &PotentialSpec, n: usize) -> Result<PiecewiseState> {
    if let Some(ell) = spec.hermite_case() {
        if n >= ell as usize {
            return hermite_state(ell, n);
        }
    }
    let mut all = eigenstates(spec, n + 1)?;
    Ok(all.pop().expect("n + 1 states"))
}

/// Strict sign changes of `psi` on a uniform grid over `[-L, L]`; samples
/// with `|psi| < 1e-13 max|psi|` are treated as touches and skipped.
pub fn count_nodes(state: &PiecewiseState, half_width: f64, samples: usize) -> Result<usize> {
    if half_width < 6.0 || samples < 2000 {
        return Err(Error::InvalidParameter(format!("node scan needs L >= 6 and >= 2000 samples (got {half_width}, {samples})")));
    }
    let values: Vec<f64> = (0..samples)
        .map(|i| {
            let x = -half_width + 2.0 * half_width * i as f64 / (samples - 1) as f64;
            state.evaluate(x, Some(side_or_right(x)))
        })
        .collect::<Result<_>>()?;
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-13 * peak;
    let mut nodes = 0;
    let mut prev: Option<bool> = None;
    for v in values.into_iter().filter(|v| v.abs() >= floor) {
        let pos = v > 0.0;
        if prev.is_some_and(|p| p != pos) {
            nodes += 1;
        }
        prev = Some(pos);
    }
    Ok(nodes)
}

const MAX_SIMPSON_DEPTH: usize = 30;

fn adaptive_simpson(f: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn step(
        f: &impl Fn(f64) -> Result<f64>,
        (a, fa): (f64, f64),
        (m, fm): (f64, f64),
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        if depth > MAX_SIMPSON_DEPTH {
            return Err(Error::QuadratureFailure(MAX_SIMPSON_DEPTH));
        }
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm)?, f(rm)?);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth >= 4 && delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(step(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth + 1)?
            + step(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth + 1)?)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, (a, fa), (m, fm), (b, fb), whole, tol, 0)
}

/// `||psi||_2` with its error bound: the quadrature tolerance plus a
/// Gaussian tail estimate `psi(+-L)^2 / (2L)` beyond the interval.
pub fn norm_l2_with_error(state: &PiecewiseState, half_width: f64, quad_tol: f64) -> Result<(f64, f64)> {
    if half_width < 7.0 || !(quad_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("norm needs L >= 7 and quad_tol > 0 (got {half_width}, {quad_tol})")));
    }
    let left = adaptive_simpson(&|x| Ok(state.evaluate(x, Some(Side::Left))?.powi(2)), -half_width, 0.0, 0.5 * quad_tol)?;
    let right = adaptive_simpson(&|x| Ok(state.evaluate(x, Some(Side::Right))?.powi(2)), 0.0, half_width, 0.5 * quad_tol)?;
    let tail = (state.evaluate(-half_width, None)?.powi(2) + state.evaluate(half_width, None)?.powi(2)) / (2.0 * half_width);
    let sq = left + right;
    let norm = sq.sqrt();
    Ok((norm, (quad_tol + tail) / (2.0 * norm)))
}

pub fn norm_l2(state: &PiecewiseState, half_width: f64, quad_tol: f64) -> Result<f64> {
    norm_l2_with_error(state, half_width, quad_tol).map(|(n, _)| n)
}

/// One sampled point; `x` is `-0.0` / `+0.0` for the origin sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub side: Side,
    pub psi: f64,
    pub dpsi: f64,
}

/// Uniform grid on `[xmin, xmax]` with `x = 0` removed and replaced by the
/// one-sided rows `0-` and `0+` when the range straddles the origin.
pub fn sample_grid(xmin: f64, xmax: f64, samples: usize) -> Result<Vec<(f64, Side)>> {
    if !(xmin < xmax) || samples < 2 {
        return Err(Error::InvalidParameter(format!("bad sampling range [{xmin}, {xmax}] x {samples}")));
    }
    let mut out = Vec::with_capacity(samples + 2);
    let h = (xmax - xmin) / (samples - 1) as f64;
    let mut origin_done = !(xmin <= 0.0 && xmax >= 0.0);
    for i in 0..samples {
        let x = if i == samples - 1 { xmax } else { xmin + i as f64 * h };
        if !origin_done && x >= 0.0 {
            out.push((-0.0, Side::Left));
            out.push((0.0, Side::Right));
            origin_done = true;
        }
        if x != 0.0 {
            out.push((x, side_or_right(x)));
        }
    }
    Ok(out)
}

pub fn sample_state(state: &PiecewiseState, xmin: f64, xmax: f64, samples: usize) -> Result<Vec<Sample>> {
    sample_grid(xmin, xmax, samples)?
        .into_iter()
        .map(|(x, side)| {
            let d = state.derivatives(x, Some(side), 1)?;
            Ok(Sample { x, side, psi: d[0], dpsi: d[1] })
        })
        .collect()
}

impl PiecewiseState {
    /// Continuity residuals at the origin relative to [`Self::origin_scale`].
    pub fn continuity_residuals(&self) -> Result<(f64, f64)> {
        let report = self.boundary_report_fast()?;
        let scale = self.origin_scale()?;
        Ok((report.0 / scale, report.1 / scale))
    }

    fn boundary_report_fast(&self) -> Result<(f64, f64)> {
        let left = self.derivatives(0.0, Some(Side::Left), 1)?;
        let right = self.derivatives(0.0, Some(Side::Right), 1)?;
        Ok(((right[0] - left[0]).abs(), (right[1] - left[1]).abs()))
    }

    /// Exact Neumann/Dirichlet classification of a Hermite ladder state:
    /// `Some(true)` when `psi'(0) = 0 != psi(0)`, `Some(false)` when
    /// `psi(0) = 0 != psi'(0)`.
    pub fn neumann_exact(&self) -> Option<bool> {
        let (SideForm::Hermite(l), SideForm::Hermite(r)) = (&self.left, &self.right) else {
            return None;
        };
        let at0 = |h: &HermiteForm| {
            let v = hermite_at_zero(h.degree);
            let d = if h.degree == 0 { BigInt::zero() } else { BigInt::from(2 * h.degree) * hermite_at_zero(h.degree - 1) };
            (&h.scale * BigRational::from_integer(v), &h.scale * BigRational::from_integer(d))
        };
        let (lv, ld) = at0(l);
        let (rv, rd) = at0(r);
        if lv != rv || ld != rd {
            return None;
        }
        match (rv.is_zero(), rd.is_zero()) {
            (false, true) => Some(true),
            (true, false) => Some(false),
            _ => None,
        }
    }
}

/// `H_n(0)` exactly: `(-1)^m (2m)!/m!` for `n = 2m`, zero for odd `n`.
pub fn hermite_at_zero(n: usize) -> BigInt {
    if n % 2 == 1 {
        return BigInt::zero();
    }
    let m = n / 2;
    let v = factorial(n) / factorial(m);
    if m % 2 == 1 {
        -v
    } else {
        v
    }
}
