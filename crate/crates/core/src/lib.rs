//! Classical simulation of block-encoding-free quantum singular value
//! transformation.
//!
//! Circuits are interleaved sequences of gate programs and Hamiltonian
//! evolutions `e^{±iH}`. Each evolution is replaced by a symmetric
//! Trotter–Suzuki product formula, expectation values are evaluated at several
//! step sizes, and Richardson extrapolation removes the even error series.
//!
//! Conventions used throughout:
//! - qubit 0 is the most significant bit of a basis index;
//! - Pauli words read left to right from qubit 0;
//! - circuits and gate programs are stored in application order.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ddouble;
pub mod error;
pub mod estimation;
pub mod funcapprox;
pub mod gates;
pub mod gqsp;
pub mod groundstate;
pub mod hamiltonian;
pub mod interleaved;
pub mod io;
pub mod linalg;
pub mod pauli;
pub mod product_formula;
pub mod qls;
pub mod richardson;
pub mod rng;
pub mod state;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use estimation::{EstimationMode, EstimationPlan};
pub use funcapprox::ApproximationReport;
pub use gates::{Gate, GateProgram, U2Rotation};
pub use gqsp::{GqspAngles, LaurentPolynomial};
pub use hamiltonian::{HamiltonianSum, HermitianTerm};
pub use interleaved::{InterleavedCircuit, Measurement, TrotterRun};
pub use linalg::CMat;
pub use pauli::{Pauli, PauliString};
pub use product_formula::StagedProductFormula;
pub use richardson::{ExtrapolationScheme, Variant};
pub use state::{Observable, SpectralDecomposition, StateVector};
