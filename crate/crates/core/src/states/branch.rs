//! The decaying solution on one half line, in reduced form.
//!
//! On either side of the origin a solution of `-psi'' + (x^2 - c) psi = 0`
//! that vanishes at infinity is `psi = e^{-x^2/2} phi(|x|)` with
//! `phi(t) = U(A, 1/2, t^2)` and `c = 1 - 4A`. Near the origin `phi` is the
//! 1F1 pair of the closed form; further out that pair cancels two
//! exponentially large terms, so here `phi` is integrated inward from the
//! asymptotic expansion at large `t` and stored on a uniform node grid.
//! Inward integration follows the dominant solution, which keeps it stable.

use crate::error::{Error, Result};
use crate::specfun::{tricomi_u_asymptotic, SeriesControl};

const STEP: f64 = 1.0 / 16.0;
const MAX_TAYLOR_TERMS: usize = 90;

#[derive(Debug, Clone)]
pub struct DecayingBranch {
    param: f64,
    /// `(phi, dphi/dt)` at `t = j * STEP`.
    nodes: Vec<(f64, f64)>,
    ctl: SeriesControl,
}

impl DecayingBranch {
    pub fn new(param: f64) -> Result<Self> {
        let ctl = SeriesControl { rel_tol: 1e-17, max_terms: 400 };
        let mut z_far = (12.0 * param.abs() + 100.0).max(196.0);
        let (t_far, start) = loop {
            let t = (z_far.sqrt() / STEP).ceil() * STEP;
            match asymptotic(param, t, &ctl) {
                Ok(v) => break (t, v),
                Err(_) if z_far < 4000.0 => z_far *= 2.0,
                Err(e) => return Err(e),
            }
        };
        let n = (t_far / STEP).round() as usize;
        let mut nodes = vec![(0.0, 0.0); n + 1];
        nodes[n] = start;
        for j in (0..n).rev() {
            let t0 = (j + 1) as f64 * STEP;
            nodes[j] = taylor(param, t0, nodes[j + 1], -STEP);
        }
        Ok(Self { param, nodes, ctl })
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn t_far(&self) -> f64 {
        (self.nodes.len() - 1) as f64 * STEP
    }

    /// `(phi(t), phi'(t))` for `t >= 0`.
    pub fn reduced(&self, t: f64) -> (f64, f64) {
        let t = t.abs();
        let last = self.nodes.len() - 1;
        if t > self.t_far() {
            return asymptotic(self.param, t, &self.ctl).unwrap_or((f64::NAN, f64::NAN));
        }
        let j = ((t / STEP).round() as usize).min(last);
        let t0 = j as f64 * STEP;
        taylor(self.param, t0, self.nodes[j], t - t0)
    }
}

/// `phi = U(A, 1/2, t^2)` and `phi' = -2 t A U(A+1, 3/2, t^2)`.
fn asymptotic(param: f64, t: f64, ctl: &SeriesControl) -> Result<(f64, f64)> {
    let z = t * t;
    let u = tricomi_u_asymptotic(param, 0.5, z, ctl)?;
    let du = if param == 0.0 { 0.0 } else { -2.0 * t * param * tricomi_u_asymptotic(param + 1.0, 1.5, z, ctl)? };
    if !u.is_finite() || !du.is_finite() {
        return Err(Error::NonConvergence { a: param, b: 0.5, z, terms: 0 });
    }
    Ok((u, du))
}

/// Taylor step of `phi'' = 2 t phi' + 4 A phi` from `t0` by `s`.
fn taylor(param: f64, t0: f64, (q0, q1): (f64, f64), s: f64) -> (f64, f64) {
    if s == 0.0 {
        return (q0, q1);
    }
    let mut q_prev = q0;
    let mut q_cur = q1;
    let mut value = q0 + q1 * s;
    let mut slope = q1;
    let mut s_pow = s; // s^(k+1) for the value, s^k for the slope
    let mut quiet = 0;
    for k in 0..MAX_TAYLOR_TERMS {
        let kf = k as f64;
        let q_next = (2.0 * t0 * (kf + 1.0) * q_cur + (2.0 * kf + 4.0 * param) * q_prev) / ((kf + 2.0) * (kf + 1.0));
        let slope_term = (kf + 2.0) * q_next * s_pow;
        s_pow *= s;
        let value_term = q_next * s_pow;
        value += value_term;
        slope += slope_term;
        if value_term.abs() <= 1e-18 * value.abs() && slope_term.abs() <= 1e-18 * slope.abs() {
            quiet += 1;
            if quiet == 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        q_prev = q_cur;
        q_cur = q_next;
    }
    (value, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{kummer_1f1, recip_gamma};
    use std::f64::consts::PI;

    #[test]
    fn polynomial_branch_is_exact() {
        // U(-1, 1/2, t^2) = t^2 - 1/2
        let b = DecayingBranch::new(-1.0).unwrap();
        for t in [0.0, 0.3, 1.0, 2.7, 6.1, 11.0] {
            let (phi, dphi) = b.reduced(t);
            assert!((phi - (t * t - 0.5)).abs() <= 1e-12 * (t * t + 1.0), "t={t}");
            assert!((dphi - 2.0 * t).abs() <= 1e-12 * (t + 1.0));
        }
    }

    #[test]
    fn origin_value_matches_connection_formula() {
        for a in [-5.25, -2.3, -0.25, 0.75, 3.1, 5.6, 7.7] {
            let b = DecayingBranch::new(a).unwrap();
            let (phi, dphi) = b.reduced(0.0);
            let want = PI.sqrt() * recip_gamma(a + 0.5);
            let want_slope = -2.0 * PI.sqrt() * recip_gamma(a);
            let scale = want.abs().max(want_slope.abs());
            assert!((phi - want).abs() <= 1e-12 * scale, "A={a}: {phi} vs {want}");
            assert!((dphi - want_slope).abs() <= 1e-12 * scale, "A={a}: {dphi} vs {want_slope}");
        }
    }

    #[test]
    fn agrees_with_series_near_origin() {
        let ctl = SeriesControl::default();
        for a in [-3.7, -0.4, 1.3] {
            let b = DecayingBranch::new(a).unwrap();
            for t in [0.5_f64, 1.0, 1.5] {
                let z = t * t;
                let series = PI.sqrt()
                    * (recip_gamma(a + 0.5) * kummer_1f1(a, 0.5, z, &ctl).unwrap()
                        - 2.0 * recip_gamma(a) * t * kummer_1f1(a + 0.5, 1.5, z, &ctl).unwrap());
                let (phi, _) = b.reduced(t);
                assert!((phi - series).abs() <= 1e-11 * series.abs().max(1e-3), "A={a} t={t}");
            }
        }
    }
}
