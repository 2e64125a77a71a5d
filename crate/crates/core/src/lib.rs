//! Phonon blockade in a driven, thermally damped Kerr oscillator.
//!
//! The crate covers the Fock-space primitives, the effective Kerr model and
//! its microscopic origin, master-equation and quantum-trajectory dynamics,
//! s-parameterized phase-space distributions and the EMF emission spectrum.

pub mod error;
pub mod fock;
mod hermitian;
pub mod linalg;
pub mod lindblad;
pub mod mcwf;
pub mod model;
pub mod ode;
pub mod qpd;
pub mod spectrum;

pub use error::{Error, Result};
pub use fock::{
    annihilation_op, creation_op, displacement_op, expectation, number_op, parity_op, DensityMatrix, Expectation, Ket,
    Operator, QuantumState, C64,
};
pub use lindblad::{
    build_liouvillian, converged_steady_state, evolve, steady_state, BlockadeObservables, Evolution, Liouvillian, Purpose,
};
pub use model::{
    build_full_model, build_kerr_hamiltonian, map_physical_params, DriveTerm, Frame, HamiltonianSpec, PhysicalParams,
    ReducedParams, RegimeFlags, Sign,
};
