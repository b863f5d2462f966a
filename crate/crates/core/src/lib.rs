//! Interior-exterior domain decomposition for the linearized Poisson-Boltzmann
//! solvation model.
//!
//! The solute cavity is a union of atomic balls. Each outer iteration solves a
//! Laplace problem and a homogeneous screened Poisson problem inside the cavity
//! with a common Dirichlet datum on the solvent-accessible part of the spheres,
//! then relaxes that datum with a stepping parameter `alpha` through the
//! Yukawa single-layer operator.
//!
//! Modules:
//!
//! * [`specfun`]: real spherical harmonics, modified spherical Bessel functions
//!   and Lebedev grids.
//! * [`analytic`]: exact per-mode spectra on a single ball, spectral bounds and
//!   step-size predictions.
//! * [`cavity`]: PQR input, exposure classification and the surface grid.
//! * [`interior`]: coupled per-ball Laplace and screened Poisson solvers.
//! * [`coupling`]: the relaxed outer iteration, energies and alpha sweeps.
//! * [`krylov`]: restarted GMRES used by the interior solvers.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cavity;
pub mod coupling;
mod error;
pub mod interior;
pub mod krylov;
pub mod par;
pub mod specfun;

pub use analytic::{ModeSpectrum, ModeTrace, PhysicalParams};
pub use cavity::{Atom, SurfaceGrid};
pub use coupling::{InitialGuess, IterationReport, RichardsonSolver, SolverConfig, SweepTable};
pub use error::{Error, Result};
pub use interior::{BallExpansion, BoundaryDatum, ExpansionKind};

/// Coulomb constant in kJ mol⁻¹ Å e⁻², converts e²/Å energies to kJ/mol.
pub const COULOMB_KJ_MOL: f64 = 1_389.354_576_443_82;
