//! Recovery of sparse signals from sparsely corrupted measurements `z = A x + B e`.
//!
//! The crate is generic over the scalar field ([`scalar::Scalar`]); the aliases
//! below fix the common choices.

pub mod dictionaries;
pub mod error;
pub mod experiments;
pub mod guarantees;
pub mod recovery;
pub mod scalar;
pub mod signals;
pub mod solvers;
pub mod uncertainty;

pub use error::{Error, ErrorKind, Result};

pub use num_complex::{Complex32, Complex64};

pub type C64 = Complex64;
/// Complex double-precision dictionary.
pub type Dictionary64 = dictionaries::Dictionary<Complex64>;
/// Real double-precision dictionary.
pub type RealDictionary64 = dictionaries::Dictionary<f64>;
pub type Dictionary32 = dictionaries::Dictionary<Complex32>;
pub type SparseVector64 = signals::SparseVector<Complex64>;
pub type RealSparseVector64 = signals::SparseVector<f64>;
pub type CoherenceProfile64 = dictionaries::CoherenceProfile<f64>;
pub type ThresholdVerdict64 = guarantees::ThresholdVerdict<f64>;
