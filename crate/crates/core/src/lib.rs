//! Riesz bases of complex exponentials on unions of grid cells.
//!
//! Everything reduces to rank and singular-value questions about masked
//! Fourier matrices: [`masked`] builds and classifies them, [`perm`] chooses
//! frequency assignments, [`conjecture`] scans mask families, [`tri`] handles
//! three-interval configurations and [`sampling`] reconstructs bandlimited
//! signals from bandpass samples.

pub mod checkpoint;
pub mod conjecture;
pub mod cyclotomic;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod mask;
pub mod masked;
pub mod perm;
pub mod phase;
pub mod sampling;
pub mod tri;

pub use error::{Error, Result};
pub use grid::{CosetSystem, GridSupport, Rational, RationalInterval};
pub use linalg::ComplexMatrix;
pub use mask::BinaryMask;
pub use masked::{Classification, MaskedMatrix, Verdict};
pub use perm::PermutationAssignment;
