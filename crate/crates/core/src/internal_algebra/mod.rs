//! The internal Poincaré algebra as matrix-free operators on a momentum grid.
//!
//! Generators: `K₀ = √(m² + k²)`, `K_a = k_a`, rotations
//! `L_ab = m_ab + S_ab` and boosts
//! `L_{0a} = −½(ξ_a K₀ + K₀ ξ_a) − S_ab k_b/(K₀ + m)` with `ξ_a = i∂/∂k_a`
//! realised by spectral differentiation. Residuals are certified on explicit
//! band-limited states rather than in operator norm.

pub mod closure;
pub mod grid;
pub mod laplacian;
pub mod operators;
pub mod sixdim;

pub use closure::{
    boost_noninvariance, closure_residuals, convergence_study, default_test_states, family_summary, k13_closure_report, Convention,
    ConvergenceStudy, Family, NonInvariance, RelationResult,
};
pub use grid::{certify, GridState, MomentumGrid, MultiplierMode, CERT_MASS, CERT_RADIUS_FRACTION};
pub use laplacian::{laplacian_split_check, HarmonicCase, LaplacianSplit};
pub use operators::{
    boost_generator, commutator_apply, k0_operator, momentum_operator, position_operator, rotation_generator,
    GridOperator, InternalGenerators,
};
pub use sixdim::{sixdim_reduction, SixDimReport};
