//! Counting machinery: orbital-adapted mode bases, spectra of the sector
//! projectors, weighted counting functionals, powers of the relative
//! counting operator, and reduced one-particle density matrices.

mod adapted;
mod density;
mod spectrum;
mod weight;

pub use adapted::{adapted_basis, rotate_to_adapted, rotate_from_adapted, AdaptedBasis};
pub use density::{
    density_distance, mu_decomposition, one_body_correlations, q1_norm_squared, reduced_density,
    DensityNorm, MuDecomposition, ReducedDensity,
};
pub use spectrum::{
    alpha, counting_spectrum, counting_spectrum_with_basis, nhat_apply, nhat_expectation,
    nhat_power, CountingSpectrum,
};
pub use weight::{WeightFamily, WeightSpec};
