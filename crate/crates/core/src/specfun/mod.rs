//! Special functions: real spherical harmonics, modified spherical Bessel
//! functions and Lebedev grids.

mod bessel;
mod harmonics;
mod lebedev;
mod lebedev_tables;

pub use bessel::{
    bessel_i, bessel_i_all, bessel_k, bessel_k_all, ik_product, ik_product_all, log_deriv_i,
    log_deriv_i_all, log_deriv_k, log_deriv_k_all,
};
pub(crate) use bessel::i_radial_profile;
pub use harmonics::{basis_size, degrees, real_sph_harm, real_sph_harm_all, HarmonicIndex};
pub(crate) use harmonics::fill_unchecked as fill_harmonics;
pub use lebedev::{lebedev_grid, LebedevGrid, SUPPORTED_ORDERS};
