//! The potential family `V(x; a) = x^2 - 1 - a` for `x < 0`, `x^2 - 1` for
//! `x > 0`, with `a > 0` and the oscillator frequency fixed to one.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which branch of a piecewise quantity to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// The side a nonzero `x` lies on; `None` at the origin.
    pub fn of(x: f64) -> Option<Side> {
        if x < 0.0 {
            Some(Side::Left)
        } else if x > 0.0 {
            Some(Side::Right)
        } else {
            None
        }
    }

    /// Resolves an optional explicit side against the sign of `x`.
    pub fn resolve(x: f64, side: Option<Side>) -> Result<Side> {
        match side {
            Some(s) => Ok(s),
            None => Side::of(x).ok_or(Error::AtOriginAmbiguous),
        }
    }
}

/// Jump parameter of the potential.
///
/// `hermite_case` is `Some(l)` exactly when `a = 4l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    a: f64,
    hermite_case: Option<u32>,
}

impl PotentialSpec {
    /// General jump `a > 0`. An `a` that is exactly an integral multiple of
    /// four is recognised as the Hermite case.
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("jump a must be finite and > 0, got {a}")));
        }
        let hermite_case = if a.fract() == 0.0 && a % 4.0 == 0.0 && a / 4.0 <= u32::MAX as f64 { Some((a / 4.0) as u32) } else { None };
        Ok(Self { a, hermite_case })
    }

    /// `a = 4 ell`.
    pub fn hermite(ell: u32) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("ell must be >= 1".into()));
        }
        Ok(Self { a: 4.0 * ell as f64, hermite_case: Some(ell) })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn hermite_case(&self) -> Option<u32> {
        self.hermite_case
    }

    /// Energy shift of the left branch relative to the right one.
    pub fn shift(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.a,
            Side::Right => 0.0,
        }
    }

    /// `V(x)` for `x != 0`.
    pub fn potential_value(&self, x: f64) -> Result<f64> {
        let side = Side::of(x).ok_or(Error::AtDiscontinuity)?;
        Ok(self.potential_value_sided(x, side))
    }

    /// `V` on the requested branch, valid at any `x` including 0.
    pub fn potential_value_sided(&self, x: f64, side: Side) -> f64 {
        x * x - 1.0 - self.shift(side)
    }
}

/// Free-function form of [`PotentialSpec::potential_value`].
pub fn potential_value(spec: &PotentialSpec, x: f64) -> Result<f64> {
    spec.potential_value(x)
}

/// Free-function form of [`PotentialSpec::potential_value_sided`].
pub fn potential_value_sided(spec: &PotentialSpec, x: f64, side: Side) -> f64 {
    spec.potential_value_sided(x, side)
}

/// Continuity and decay summary of a wavefunction at the junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub value_jump: f64,
    pub slope_jump: f64,
    pub tail_decay_ok: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ell: Option<u32>,
}

impl Serialize for PotentialSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self.hermite_case {
            Some(ell) => SpecRepr { a: None, ell: Some(ell) },
            None => SpecRepr { a: Some(self.a), ell: None },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PotentialSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SpecRepr::deserialize(deserializer)?;
        match (repr.a, repr.ell) {
            (Some(a), None) => PotentialSpec::new(a).map_err(D::Error::custom),
            (None, Some(ell)) => PotentialSpec::hermite(ell).map_err(D::Error::custom),
            _ => Err(D::Error::custom("expected exactly one of \"a\" or \"ell\"")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: f64) -> PotentialSpec {
        PotentialSpec::new(a).unwrap()
    }

    #[test]
    fn values_on_each_branch() {
        assert_eq!(spec(4.0).potential_value(1.0).unwrap(), 0.0);
        assert_eq!(spec(4.0).potential_value(-1.0).unwrap(), -4.0);
        let jump = spec(2.0).potential_value(0.0001).unwrap() - spec(2.0).potential_value(-0.0001).unwrap();
        assert!((jump - 2.0).abs() < 1e-12);
        assert_eq!(spec(2.0).potential_value(0.0), Err(Error::AtDiscontinuity));
    }

    #[test]
    fn sided_values_at_origin() {
        assert_eq!(spec(2.0).potential_value_sided(0.0, Side::Left), -3.0);
        assert_eq!(spec(2.0).potential_value_sided(0.0, Side::Right), -1.0);
        assert_eq!(spec(24.0).potential_value_sided(0.0, Side::Left), -25.0);
        for a in [0.1, 2.0, 3.7, 24.0] {
            let s = spec(a);
            let jump = s.potential_value_sided(0.0, Side::Right) - s.potential_value_sided(0.0, Side::Left);
            assert!((jump - a).abs() <= 1e-15 * (1.0 + a));
        }
    }

    #[test]
    fn confining() {
        for a in [1e-9, 0.5, 2.0, 4.0, 13.3, 24.0] {
            let s = spec(a);
            assert!(s.potential_value(8.0).unwrap() > 60.0);
            assert!(s.potential_value(-8.0).unwrap() > 60.0 - a);
            assert!(s.potential_value(-20.0).unwrap() > 370.0);
        }
    }

    #[test]
    fn rejects_nonpositive_jump() {
        assert!(PotentialSpec::new(0.0).is_err());
        assert!(PotentialSpec::new(-4.0).is_err());
        assert!(PotentialSpec::new(f64::NAN).is_err());
        assert!(PotentialSpec::hermite(0).is_err());
    }

    #[test]
    fn hermite_detection_is_exact() {
        assert_eq!(spec(24.0).hermite_case(), Some(6));
        assert_eq!(spec(4.0).hermite_case(), Some(1));
        assert_eq!(spec(4.000000000000001).hermite_case(), None);
        assert_eq!(spec(2.0).hermite_case(), None);
        assert_eq!(spec(6.0).hermite_case(), None);
    }

    #[test]
    fn json_shape() {
        assert_eq!(serde_json::to_string(&spec(2.5)).unwrap(), r#"{"a":2.5}"#);
        assert_eq!(serde_json::to_string(&PotentialSpec::hermite(3).unwrap()).unwrap(), r#"{"ell":3}"#);
        let s: PotentialSpec = serde_json::from_str(r#"{"ell":6}"#).unwrap();
        assert_eq!(s.a(), 24.0);
        let s: PotentialSpec = serde_json::from_str(r#"{"a":8}"#).unwrap();
        assert_eq!(s.hermite_case(), Some(2));
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"a":8,"ell":2}"#).is_err());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{}"#).is_err());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"a":-1}"#).is_err());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"b":1}"#).is_err());
    }
}
