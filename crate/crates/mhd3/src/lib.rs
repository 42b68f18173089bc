//! Periodic-box numerical laboratory for the 3D nonhomogeneous incompressible
//! heat-conducting MHD system.
//!
//! The crate couples a pseudo-spectral IMEX solver for
//!
//! ```text
//! rho_t + u.grad(rho) = 0
//! rho u_t + rho u.grad(u) - mu Lap(u) + grad(P) = (H.grad)H
//! c_v (rho theta_t + rho u.grad(theta)) - kappa Lap(theta) = 2 mu |D(u)|^2 + nu |curl H|^2
//! H_t + (u.grad)H - (H.grad)u = nu Lap(H)
//! div u = div H = 0
//! ```
//!
//! on a periodic box with a diagnostics engine that audits the discrete energy
//! identities, accumulates the weak-Serrin and magnetic `L^q` blowup
//! functionals, and evaluates the small-data bootstrap certificate.

pub mod checkpoint;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod init;
pub mod lorentz;
pub mod run;
pub mod solver;
pub mod spectral;
pub mod stokes;

pub use error::{Error, Result};
pub use field::{ScalarField, Sampled, VectorField};
pub use grid::Grid;
