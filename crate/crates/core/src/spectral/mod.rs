//! Eigensolvers, functional calculus and singular-value diagnostics.

mod calculus;
mod data;
mod davidson;
mod singular;
mod solve;
mod tridiagonal;

pub use calculus::{
    composition_identity_check, functional_calculus, spectral_projector, Interval, SpectralProjector,
    TIE_TOLERANCE,
};
pub use data::{counting_function, Completeness, Count, SpectralData};
pub use singular::{hs_norm, singular_values, sv_tail, Multiplier};
pub use solve::{
    dense_eigendecomposition, dense_eigendecomposition_with_budget, lowest_eigenpairs, lowest_eigenpairs_with,
    tridiagonal_values_up_to, EigenOptions, Method, DEFAULT_DENSE_BUDGET,
};
