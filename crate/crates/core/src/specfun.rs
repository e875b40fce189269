//! Special functions used by the closed-form solutions: the reciprocal gamma
//! function, Kummer's confluent hypergeometric function `M(a, b, z)`, the
//! large-argument expansion of Tricomi's `U(a, b, z)`, and physicists'
//! Hermite polynomials.
//!
//! Everything here is real-argument double precision. `M` is summed as a
//! plain power series, which is well conditioned for the `z = x^2 <= 64`
//! arguments the solvers produce near the origin.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest Hermite degree accepted by [`hermite`]; beyond it values overflow
/// at moderate `|x|`.
pub const HERMITE_MAX_DEGREE: usize = 64;

/// Arguments above this are rejected by the non-terminating 1F1 series.
const KUMMER_MAX_Z: f64 = 400.0;

/// Truncation control for hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(Error::InvalidParameter(format!("rel_tol must be > 0, got {rel_tol}")));
        }
        if max_terms < 10 {
            return Err(Error::InvalidParameter(format!("max_terms must be >= 10, got {max_terms}")));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { rel_tol: 1e-14, max_terms: 400 }
    }
}

/// A series sum with a bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub abs_error: f64,
    pub terms: usize,
}

/// `sin(pi z)`, exactly zero at integers.
pub fn sin_pi(z: f64) -> f64 {
    if !z.is_finite() {
        return f64::NAN;
    }
    // reduce to r in [-1, 1]; exact for binary floating point
    let r = z - 2.0 * (z / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos series for `z >= 0.5`: returns `(w, sum)` with
/// `Gamma(z) = sqrt(2 pi) w^(z - 1/2) e^(-w) sum`.
fn lanczos_parts(z: f64) -> (f64, f64) {
    let x = z - 1.0;
    let mut sum = LANCZOS_P[0];
    for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
        sum += p / (x + i as f64);
    }
    (x + LANCZOS_G + 0.5, sum)
}

/// `ln Gamma(z)` for `z >= 0.5`.
pub fn ln_gamma_pos(z: f64) -> f64 {
    let (w, sum) = lanczos_parts(z);
    0.5 * (2.0 * PI).ln() + (z - 0.5) * w.ln() - w + sum.ln()
}

/// Reciprocal gamma function `1/Gamma(z)`.
///
/// Entire in `z`; exactly `0.0` at `0, -1, -2, ...` because the left half
/// line goes through the reflection formula with an exact `sin(pi z)`.
pub fn recip_gamma(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if (1.0..=19.0).contains(&z) && z.fract() == 0.0 {
        // (z-1)! is exact in f64 up to 18!
        let fact: f64 = (1..z as u32).map(f64::from).product();
        return 1.0 / fact;
    }
    if z >= 0.5 {
        if z > 171.0 {
            return (-ln_gamma_pos(z)).exp();
        }
        let (w, sum) = lanczos_parts(z);
        if z > 20.0 {
            (w - (z - 0.5) * w.ln() - sum.ln()).exp() / (2.0 * PI).sqrt()
        } else {
            w.powf(0.5 - z) * w.exp() / ((2.0 * PI).sqrt() * sum)
        }
    } else {
        let s = sin_pi(z);
        if s == 0.0 {
            return 0.0;
        }
        let w = 1.0 - z;
        if w > 171.0 {
            s.signum() * (s.abs().ln() + ln_gamma_pos(w)).exp() / PI
        } else {
            s / (PI * recip_gamma(w))
        }
    }
}

fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v.fract() == 0.0
}

/// Kummer's `M(a, b, z)` as a compensated power series with an error bound.
pub fn kummer_1f1_series(a: f64, b: f64, z: f64, ctl: &SeriesControl) -> Result<SeriesValue> {
    if is_nonpositive_integer(b) {
        return Err(Error::InvalidB(b));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("1F1 argument must be finite and >= 0, got {z}")));
    }
    let terminates = is_nonpositive_integer(a);
    if !terminates && z > KUMMER_MAX_Z {
        return Err(Error::NonConvergence { a, b, z, terms: 0 });
    }

    let mut sum = 1.0_f64;
    let mut comp = 0.0_f64;
    let mut term = 1.0_f64;
    let mut abs_sum = 1.0_f64;
    let mut small_run = 0;
    for k in 1..=ctl.max_terms {
        let kf = k as f64;
        term *= (a + kf - 1.0) / (b + kf - 1.0) * z / kf;
        // Kahan
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        abs_sum += term.abs();

        if term.abs() <= ctl.rel_tol * sum.abs() {
            small_run += 1;
            if small_run == 3 {
                let abs_error = 4.0 * f64::EPSILON * abs_sum + term.abs();
                return Ok(SeriesValue { value: sum, abs_error, terms: k });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence { a, b, z, terms: ctl.max_terms })
}

/// Kummer's confluent hypergeometric function `M(a, b, z) = 1F1(a; b; z)`.
pub fn kummer_1f1(a: f64, b: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    kummer_1f1_series(a, b, z, ctl).map(|s| s.value)
}

/// `d/dx M(a, b, x^2) = 2x (a/b) M(a+1, b+1, x^2)`.
pub fn kummer_1f1_x_derivative(a: f64, b: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return Err(Error::InvalidB(b));
    }
    if x == 0.0 || a == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * x * (a / b) * kummer_1f1(a + 1.0, b + 1.0, x * x, ctl)?)
}

/// Large-`z` expansion of Tricomi's function,
/// `U(a, b, z) ~ z^(-a) sum_k (a)_k (a-b+1)_k / k! (-1/z)^k`.
///
/// Exact (terminating) when `a` or `a-b+1` is a nonpositive integer.
/// Otherwise the asymptotic sum is cut at the first term below `rel_tol`,
/// and `NonConvergence` is returned if the terms start growing first.
pub fn tricomi_u_asymptotic(a: f64, b: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("U expansion needs z > 0, got {z}")));
    }
    let c = a - b + 1.0;
    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    let mut prev_abs = f64::INFINITY;
    let mut small_run = 0;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        term *= -(a + kf) * (c + kf) / ((kf + 1.0) * z);
        sum += term;
        if term == 0.0 || term.abs() <= ctl.rel_tol * sum.abs() {
            small_run += 1;
            if small_run == 2 || term == 0.0 {
                return Ok(sum * z.powf(-a));
            }
        } else {
            small_run = 0;
            // past the smallest term of a divergent expansion
            if term.abs() > prev_abs && k > 2 && (a + kf).abs() > 1.0 && (c + kf).abs() > 1.0 {
                return Err(Error::NonConvergence { a, b, z, terms: k + 1 });
            }
        }
        prev_abs = term.abs();
    }
    Err(Error::NonConvergence { a, b, z, terms: ctl.max_terms })
}

/// Physicists' Hermite polynomial `H_n(x)` by upward recurrence.
///
/// Panics if `n > HERMITE_MAX_DEGREE`.
pub fn hermite(n: usize, x: f64) -> f64 {
    hermite_pair(n, x).0
}

/// `(H_n(x), H_{n-1}(x))`, with `H_{-1} = 0`.
pub fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    assert!(n <= HERMITE_MAX_DEGREE, "Hermite degree {n} exceeds {HERMITE_MAX_DEGREE}");
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `H_n'(x) = 2n H_{n-1}(x)`.
pub fn hermite_derivative(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    2.0 * n as f64 * hermite(n - 1, x)
}
