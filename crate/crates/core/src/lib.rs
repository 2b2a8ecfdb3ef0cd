//! Finite matrix and grid representations of a two-body relativistic system
//! reduced to a one-particle equation with a rising mass spectrum
//! `M² = a² + b² s(s+1)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`angular_basis`] enumerates the truncated internal basis and its
//!   total-angular-momentum block structure.
//! * [`operator_core`] holds dense Hermitian operators, commutators, residuals
//!   and spectral functions of operators.
//! * [`mass_spectrum`] builds the rotation generators, the mass-squared
//!   operator and the boson/fermion towers.
//! * [`relativistic_hamiltonian`] covers the four-component equation, the
//!   unitary that symmetrises it and the spin projection.
//! * [`internal_algebra`] represents the internal Poincaré algebra matrix-free
//!   on a momentum grid.
//!
//! Data-parallel loops go through [`exec::Exec`], which falls back to a
//! sequential path when the `parallel` feature is disabled.

pub mod angular_basis;
pub mod error;
pub mod exec;
pub mod internal_algebra;
pub mod mass_spectrum;
pub mod operator_core;
pub mod relativistic_hamiltonian;

pub use angular_basis::{BasisIndexMap, BasisSpec, BasisState, BasisTag, HalfInt, JBlockTable};
pub use error::{Error, Result};
pub use exec::Exec;
pub use mass_spectrum::{GeneratorSet, MassTower, ModelParams, TowerEntry};
pub use operator_core::{HermitianOperator, Operator, ResidualReport};
pub use relativistic_hamiltonian::{GammaSet, HamiltonianPair, SpinMode};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
