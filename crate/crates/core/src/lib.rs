//! Dense simulation of quantum measurements: projective measurements, observables,
//! POVMs, Kraus channels, measurement circuits and the three-qubit repetition code.
//!
//! Basis index convention: qubit 0 is the most-significant bit.

pub mod channels;
pub mod circuit;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod qec;
pub mod random;
pub mod states;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use num_complex::Complex64;
pub use states::{DensityState, Ensemble, PureState};
