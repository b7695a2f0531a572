//! Predicted and numerically verified spectra of shift, multiplier and
//! Toeplitz operators on weighted sequence spaces over ℤ, ℤ⁺ and ℤᵏ.
//!
//! The crate is organised bottom-up:
//!
//! * [`weights`] and [`spaces`] describe the sequence spaces,
//! * [`operators`] and [`symbols`] the operators acting on them,
//! * [`spectra`] the predicted spectral regions,
//! * [`verify`] the numerical witnesses that confirm or refute a prediction,
//! * [`multidim`] the lattice ℤᵏ generalisation.

pub mod error;
pub mod ext;
pub mod linalg;
pub mod multidim;
pub mod operators;
pub mod seq;
pub mod spaces;
pub mod spectra;
pub mod symbols;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use num_complex::Complex64;
pub use operators::{OperatorKind, OperatorSpec};
pub use seq::FiniteSeq;
pub use spaces::{NormFamily, SpaceSpec};
pub use spectra::{Membership, SpectralRegion};
pub use symbols::LaurentSymbol;
pub use verify::{Certificate, Verdict};
pub use weights::{Direction, Domain, WeightFamily, WeightKind};
