//! Computable compactness criteria and the essential-spectrum probe.

mod av;
mod benci;
mod capacity;
mod cubes;
pub(crate) mod form_bound;
mod molchanov;
mod probe;
mod strichartz;
mod sublevel;
mod threshold;
mod weyl;

pub use av::{av_lambda, av_lambda_with, AvOptions, AvResult};
pub use benci::{benci_fortunato_scan, BallIntegral, BenciProfile};
pub use capacity::{capacity, capacity_with, CapacityResult};
pub use cubes::{cube_profile, set_cube_profile, CubeNorm, CubeProfile};
pub use form_bound::{form_bound_estimate, FormBoundEstimate, NegativePart};
pub use molchanov::{molchanov_scan, MolchanovProfile, WindowMass};
pub use probe::{
    eigenvalues_up_to, ess_spectrum_probe, probe_verdict, BoxSpectrum, ess_spectrum_probe_with, Classification, ProbeOptions, ProbeVerdict,
    TruncationFamily,
};
pub use strichartz::{strichartz_ratio, strichartz_ratio_from, ResolventPower};
pub use sublevel::sublevel_set;
pub use threshold::thm_main1_threshold;
pub use weyl::{weyl_residual, weyl_residual_with_witness};
