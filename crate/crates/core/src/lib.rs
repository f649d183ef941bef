//! Josephson-junction array spectra with matrix-product states.

pub mod circuit;
pub mod excitations;
pub mod kerr;
pub mod error;
pub mod linalg;
pub mod ham_mpo;
pub mod localbasis;
pub mod normalmodes;
pub mod oracle;
pub mod pipeline;
pub mod solver;
pub mod tn;

pub use error::{Error, Result};
pub use circuit::{CircuitParams, Impedance};
pub use excitations::OccupationString;
pub use kerr::{KerrMethod, KerrResult};
pub use localbasis::BasisConfig;
pub use normalmodes::NormalModeData;
pub use solver::{SolverConfig, SpectralRecord};
pub use num_complex::Complex64 as C64;
pub use faer;
