//! Incompressible Navier-Stokes on curved 2D domains with the kinematic
//! condition `u.nu = 0` and prescribed boundary vorticity `omega = a`.
//!
//! The solution is built as `u = v + w`: `w` solves an unsteady Stokes
//! problem carrying the boundary data ([`stokes`]), and `v` is the fixed
//! point of a linearized map with homogeneous absolute boundary conditions
//! ([`linparab`], [`fixedpoint`]). [`euler_inviscid`] provides the inviscid
//! reference and the vanishing-viscosity sweep.

pub mod elliptic;
pub mod error;
pub mod euler_inviscid;
pub mod fieldcalc;
pub mod fixedpoint;
pub mod geometry;
pub mod implicit;
pub mod io;
pub mod linalg;
pub mod linparab;
pub mod par;
pub mod scenarios;
pub mod stokes;

pub use error::{Error, Result};
