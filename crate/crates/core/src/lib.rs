//! Local asymptotic expansions for the unsteady Stokes system.
//!
//! The crate builds local solutions of
//! `d_t u - Delta u + grad p = f, div u = 0` that vanish to a prescribed
//! parabolic order at the origin, extracts the degree-`d` asymptotic
//! polynomial `P_{d,t}` of a sampled solution, and measures decay exponents
//! on dyadic space-time shells.
//!
//! Modules:
//! - [`kernels`]: heat kernel, Stokes tensor, derivatives, Taylor truncations.
//! - [`riesz`]: FFT-based Riesz transforms, Leray projection, pressure.
//! - [`quadrature`]: parabolic cylinders, shells, Gauss rules, sup sampling.
//! - [`construct`]: forcings, volume potential, polynomial correction.
//! - [`expansion`]: polynomial extraction, remainders, residual structure.
//! - [`verify`]: decay fits and the scenario harness.

pub mod kernels;
pub mod grid;
pub mod point;
pub mod poly;
pub mod construct;
pub mod quadrature;
pub mod riesz;
pub mod expansion;
pub mod verify;

pub use kernels::{KernelError, MultiIndexSpec};
pub use point::SpaceTimePoint;
