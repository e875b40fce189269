use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series did not converge after {terms} terms (a={a}, b={b}, z={z})")]
    NonConvergence { a: f64, b: f64, z: f64, terms: usize },

    #[error("1F1 denominator parameter b={0} is a nonpositive integer")]
    InvalidB(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("potential is discontinuous at x = 0; a side must be given")]
    AtDiscontinuity,

    #[error("no eigenvalue found in [{e_min}, {e_max}]")]
    EmptyWindow { e_min: f64, e_max: f64 },

    #[error("expected {expected} real roots, isolated {found}")]
    RootCountMismatch { expected: usize, found: usize },

    #[error("closed form {index} has imaginary part {imag:e}")]
    NonRealResult { index: usize, imag: f64 },

    #[error("E = {energy} is not an eigenvalue (normalized determinant {residual:e} > {tol:e})")]
    NotAnEigenvalue { energy: f64, residual: f64, tol: f64 },

    #[error("boundary null vector vanished at E = {0}")]
    DegenerateNullVector(f64),

    #[error("level {n} lies below the Hermite ladder (ell = {ell})")]
    IndexBelowLadder { ell: u32, n: usize },

    #[error("x = 0 needs an explicit side")]
    AtOriginAmbiguous,

    #[error("adaptive quadrature exceeded depth {0}")]
    QuadratureFailure(usize),

    #[error("invalid deletion set: offending index {index}")]
    InvalidDeletionSet { index: usize },

    #[error("Wronskian vanishes at x = {x} (|W|/bound = {ratio:e})")]
    WronskianZero { x: f64, ratio: f64 },

    #[error("eigenvalue bisection failed for level {0}")]
    ConvergenceFailure(usize),
}
