//! Bound states of a harmonic oscillator with a step discontinuity at the
//! origin, and their Darboux–Crum and Krein–Adler deformations.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod darboux;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod specfun;
pub mod spectrum;
pub mod states;

pub use darboux::{DeformationKind, DeformationSpec, DeformedSystem};
pub use error::{Error, Result};
pub use model::{BoundaryReport, PotentialSpec, Side};
pub use oracle::{GridConfig, GridSpectrum, Potential};
pub use spectrum::{Eigenvalue, Provenance, Spectrum};
pub use states::{NormalizationConstant, PiecewiseState};
