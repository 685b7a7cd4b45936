//! Point vortices on the sphere and in the plane: models, a pairwise
//! splitting integrator, polygonal relative equilibria, their stability,
//! and drift of perturbed equilibria.
#![no_std]
// `!(a < b)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bracket;
pub mod chart;
pub mod domain;
pub mod drift;
pub mod error;
pub mod integrator;
pub mod releq;
pub mod math;
pub mod se2;
pub mod stability;
pub mod system;

pub use domain::{Domain, Plane, Sphere};
pub use error::{Error, Result};
pub use math::{Complex64, Mat3, Vec3};
pub use se2::{PlanarMomentum, Se2Algebra, Se2Element};
pub use system::{PlanarState, PlanarSystem, SphereState, SphereSystem, VortexSystem};
