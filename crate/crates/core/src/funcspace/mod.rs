//! Functions on R^n under the standard Gaussian: handles, inner products,
//! convex combinations and multivariate Hermite indexing.

mod combination;
mod expectation;
mod handle;
mod montecarlo;
mod multi_index;

pub use combination::{fw_step, ConvexCombination};
pub use expectation::{
    effective_basis, gaussian_expectation, gaussian_quadrature, inner_product, integrate_plane, norm, norm_squared, orthonormal_basis,
    plane_kinks, polar_spec_for_growth, Method,
};
pub use handle::{dot, FunctionHandle, Hints, Kink, PointFn, Structure};
pub use montecarlo::{
    mc_gaussian, mc_scalar, mc_vector, standard_normal_vec, Estimate, McConfig, DEFAULT_SAMPLES,
    DEFAULT_SEED,
};
pub use multi_index::{enumerate_multi_indices, total_degree, HermitePolynomial, MultiIndex, MultiIndexSet};
