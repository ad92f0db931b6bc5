//! The heat semigroup `e^{−tH}`, its kernel norms and super Poincaré constants.

mod heat;
mod kernel;
mod poincare;

pub use heat::{heat_apply, HeatComputation, HeatMethod, HeatSemigroup};
pub use kernel::{heat_kernel_norms, heat_kernel_norms_from, KernelNorms};
pub use poincare::{semigroup_form_inequality_check, super_poincare_beta, super_poincare_beta_from, SuperPoincare};
