//! Numerical laboratory for uniformly rotating vortex patches (V-states) of
//! the two-dimensional incompressible Euler equations.
//!
//! A patch `D` is described by a spectral parametrization of its boundary
//! ([`Contour`]). Everything else is built on boundary integrals over that
//! parametrization:
//!
//! * [`potential`]: stream function `psi`, velocity `v`, Cauchy transform
//!   `C(chi_D)`, relative stream function `phi = mu + Omega|x|^2/2 - psi`.
//! * [`vstate`]: the rotating-patch boundary residual, bifurcation detection
//!   from the disc, Newton solves and branch continuation.
//! * [`sigma`]: sampled membership tests for the `Sigma_alpha` class of
//!   slightly convex domains.
//! * [`probes`]: numerical probes of the rigidity statements (sign of `phi`,
//!   normal-ray monotonicity, moving planes, the `Omega = 1/2` identity).
//! * [`dynamics`]: Lagrangian contour dynamics with RK4.
//!
//! Orientation convention: contours are counterclockwise, the outward normal
//! is `nu = -i tau`, and the Cauchy transform is
//! `C(z) = (1/2 pi i) \oint (conj(xi) - conj(z)) / (xi - z) dxi = -4 d_z psi`,
//! so that `v = 2i conj(d_z psi) = -(i/2) conj(C)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod par;
pub mod potential;
pub mod probes;
pub mod quadrature;
pub mod sigma;
pub mod vstate;

pub use error::{Error, Result};
pub use geometry::{Contour, PolarShape, ReflectionFrame};
pub use num_complex::Complex64;
pub use potential::PatchField;

/// A point of the plane, identified with a complex number `x + iy`.
pub type Point = Complex64;
