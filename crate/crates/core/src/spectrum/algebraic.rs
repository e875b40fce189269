//! Exact integer polynomial for the `a = 4l` negative levels and its real
//! root isolation by Sturm sequences.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_ELL: u32 = 32;

/// `P(E) = prod_{k=1..l} (E + 4k) + prod_{k=1..l} (E + 4k - 2)`.
///
/// Coefficients are ascending in powers of `E`; the leading one is 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlgebraicEquation {
    pub ell: u32,
    #[serde(serialize_with = "serialize_bigints")]
    pub coefficients: Vec<BigInt>,
}

fn serialize_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&c.to_string())?;
    }
    seq.end()
}

type Poly = Vec<BigInt>;

fn poly_mul_linear(p: &Poly, c: i64) -> Poly {
    // p(E) * (E + c)
    let mut out = vec![BigInt::zero(); p.len() + 1];
    for (i, coef) in p.iter().enumerate() {
        out[i] += coef * c;
        out[i + 1] += coef;
    }
    out
}

fn trim<T: Zero>(p: &mut Vec<T>) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub fn build_algebraic_equation(ell: u32) -> Result<AlgebraicEquation> {
    if !(1..=MAX_ELL).contains(&ell) {
        return Err(Error::InvalidParameter(format!("ell must be in 1..={MAX_ELL}, got {ell}")));
    }
    let mut even: Poly = vec![BigInt::one()];
    let mut odd: Poly = vec![BigInt::one()];
    for k in 1..=ell as i64 {
        even = poly_mul_linear(&even, 4 * k);
        odd = poly_mul_linear(&odd, 4 * k - 2);
    }
    let coefficients = even.iter().zip(&odd).map(|(x, y)| x + y).collect();
    Ok(AlgebraicEquation { ell, coefficients })
}

fn eval_exact(p: &[BigInt], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

impl AlgebraicEquation {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        eval_exact(&self.coefficients, x)
    }

    pub fn eval(&self, e: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * e + c.to_f64().unwrap_or(f64::NAN))
    }

    /// `|P(E)| / sum |c_i| |E|^i`, the value relative to its evaluation bound.
    pub fn relative_value(&self, e: f64) -> f64 {
        let bound = self.coefficients.iter().rev().fold(0.0, |acc, c| acc * e.abs() + c.to_f64().unwrap_or(f64::NAN).abs());
        self.eval(e).abs() / bound
    }
}

fn derivative(p: &[BigInt]) -> Poly {
    if p.len() <= 1 {
        return vec![BigInt::zero()];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

/// Remainder of `a / b` over the rationals, rescaled by a positive factor to
/// a primitive integer polynomial.
fn primitive_remainder(a: &[BigInt], b: &[BigInt]) -> Poly {
    let mut r: Vec<BigRational> = a.iter().cloned().map(BigRational::from_integer).collect();
    let lead = BigRational::from_integer(b.last().unwrap().clone());
    let db = b.len() - 1;
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let q = r.last().unwrap() / &lead;
        if !q.is_zero() {
            for (i, c) in b.iter().enumerate() {
                r[shift + i] -= &q * BigRational::from_integer(c.clone());
            }
        }
        r.pop();
    }
    if r.is_empty() {
        return vec![BigInt::zero()];
    }
    trim(&mut r);
    let lcm = r.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Poly = r.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        return vec![BigInt::zero()];
    }
    ints.into_iter().map(|c| c / &g).collect()
}

/// Sturm sequence `p0 = P, p1 = P', p_{k+1} = -rem(p_{k-1}, p_k)` up to
/// positive factors.
#[derive(Debug, Clone)]
pub struct SturmSequence {
    polys: Vec<Poly>,
}

impl SturmSequence {
    pub fn new(p: &[BigInt]) -> Self {
        let mut polys = vec![p.to_vec(), derivative(p)];
        loop {
            let n = polys.len();
            let last = &polys[n - 1];
            if last.len() == 1 {
                break;
            }
            let r = primitive_remainder(&polys[n - 2], last);
            if r.iter().all(Zero::is_zero) {
                break;
            }
            polys.push(r.into_iter().map(|c| -c).collect());
        }
        Self { polys }
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Sign variations at `x`, zeros skipped.
    pub fn variations(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut prev: Option<bool> = None;
        for p in &self.polys {
            let v = eval_exact(p, x);
            if v.is_zero() {
                continue;
            }
            let pos = v.is_positive();
            if prev.is_some_and(|q| q != pos) {
                count += 1;
            }
            prev = Some(pos);
        }
        count
    }

    /// Number of distinct real roots in `(lo, hi]`.
    pub fn count(&self, lo: &BigRational, hi: &BigRational) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }
}

/// A real root certified by exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedRoot {
    pub lo: BigRational,
    pub hi: BigRational,
    /// The polynomial vanishes exactly at `hi`.
    pub exact: bool,
}

impl CertifiedRoot {
    pub fn value(&self) -> f64 {
        if self.exact {
            return self.hi.to_f64().unwrap_or(f64::NAN);
        }
        let mid = (&self.lo + &self.hi) / BigRational::from_integer(2.into());
        mid.to_f64().unwrap_or(f64::NAN)
    }

    pub fn width(&self) -> f64 {
        (&self.hi - &self.lo).to_f64().unwrap_or(f64::INFINITY)
    }
}

fn rational_tol(tol: f64) -> BigRational {
    // largest power of two not above tol
    let k = (-tol.log2()).ceil().clamp(0.0, 200.0) as u32;
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// Isolates and refines all roots of `p` in `(lo, hi]` to width `<= tol`.
pub fn isolate_real_roots(p: &[BigInt], lo: BigRational, hi: BigRational, tol: f64) -> Vec<CertifiedRoot> {
    let sturm = SturmSequence::new(p);
    let two = BigRational::from_integer(2.into());
    let tol = rational_tol(tol);
    let mut isolated = Vec::new();
    let mut stack = vec![(lo, hi)];
    while let Some((lo, hi)) = stack.pop() {
        let n = sturm.count(&lo, &hi);
        if n == 0 {
            continue;
        }
        if eval_exact(p, &hi).is_zero() && n == 1 {
            isolated.push(CertifiedRoot { lo: hi.clone(), hi, exact: true });
            continue;
        }
        if n == 1 {
            isolated.push(refine(&sturm, p, lo, hi, &tol));
            continue;
        }
        let mid = (&lo + &hi) / &two;
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    isolated.sort_by(|a, b| a.hi.cmp(&b.hi));
    isolated
}

fn refine(sturm: &SturmSequence, p: &[BigInt], mut lo: BigRational, mut hi: BigRational, tol: &BigRational) -> CertifiedRoot {
    let two = BigRational::from_integer(2.into());
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / &two;
        if eval_exact(p, &mid).is_zero() {
            return CertifiedRoot { lo: mid.clone(), hi: mid, exact: true };
        }
        if sturm.count(&lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // dyadic bisection never lands on roots like -3; try small denominators
    let mid = (&lo + &hi) / &two;
    for q in 1..=4i64 {
        let q = BigRational::from_integer(q.into());
        let cand = (&mid * &q).round() / &q;
        if cand > lo && cand <= hi && eval_exact(p, &cand).is_zero() {
            return CertifiedRoot { lo: cand.clone(), hi: cand, exact: true };
        }
    }
    CertifiedRoot { lo, hi, exact: false }
}

impl AlgebraicEquation {
    /// All real roots, which lie in `(-1 - 4l, 0)`.
    pub fn certified_roots(&self, tol: f64) -> Result<Vec<CertifiedRoot>> {
        let ell = self.ell as i64;
        let lo = BigRational::from_integer(BigInt::from(-1 - 4 * ell));
        let hi = BigRational::zero();
        let roots = isolate_real_roots(&self.coefficients, lo, hi, tol);
        if roots.len() != self.ell as usize {
            return Err(Error::RootCountMismatch { expected: self.ell as usize, found: roots.len() });
        }
        Ok(roots)
    }
}

/// `max_j |(r_j + r_{l-1-j}) - 2(-1 - 2l)|` for sorted roots.
pub fn check_root_symmetry(roots: &[f64], ell: u32) -> f64 {
    let centre = -1.0 - 2.0 * ell as f64;
    let n = roots.len();
    (0..n).map(|j| ((roots[j] + roots[n - 1 - j]) - 2.0 * centre).abs()).fold(0.0, f64::max)
}

/// Radical closed forms of the six `l = 6` roots, ascending.
///
/// Intermediates are complex; each result's imaginary residue must stay
/// below `1e-10`.
pub fn closed_forms_ell6() -> Result<[f64; 6]> {
    let i = Complex64::i();
    let s3 = 3f64.sqrt();
    let radicand = Complex64::new(28315.0, 216.0 * 43798f64.sqrt());
    let c = radicand.powf(1.0 / 3.0);
    let third = 1.0 / 3.0;
    let outer = (Complex64::new(2.0, 0.0) * c + 2834.0 / c + 125.0) * third;
    let middle = ((-1.0 - i * s3) * c + 1417.0 * (-1.0 + i * s3) / c + 125.0) * third;
    let inner = ((-1.0 + i * s3) * c - 1417.0 * (1.0 + i * s3) / c + 125.0) * third;
    let base = Complex64::new(-13.0, 0.0);
    let values =
        [base - outer.sqrt(), base - middle.sqrt(), base - inner.sqrt(), base + inner.sqrt(), base + middle.sqrt(), base + outer.sqrt()];
    let mut out = [0.0; 6];
    for (index, v) in values.iter().enumerate() {
        if v.im.abs() > 1e-10 {
            return Err(Error::NonRealResult { index, imag: v.im });
        }
        out[index] = v.re;
    }
    Ok(out)
}
