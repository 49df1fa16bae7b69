//! Baseline estimators and analytic performance bounds.

pub mod baseline;
pub mod bounds;
pub mod fisher;
pub mod quadrature;

pub use baseline::{dft_peak_baseline, ls_estimate_explicit, DEFAULT_N_DFT};
pub use bounds::{
    mp_density, ordered_eigenvalue_mean, ordered_eigenvalue_means, upper_bound_multi_path,
    upper_bound_single_path, MarchenkoPastur,
};
pub use fisher::{
    channel_from_params, crlb_nmse_bound, crlb_variances, fisher_jacobian, fisher_matrix, CrlbBound, CrlbSample,
    FisherModel, RealMatrix,
};
pub use quadrature::adaptive_simpson;
