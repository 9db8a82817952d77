//! Stationary scattering of the reduced 1D massless Dirac system on spherically
//! symmetric asymptotically hyperbolic manifolds, with complex angular momentum
//! analysis, large-momentum asymptotics and uniqueness experiments.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod blackhole;
pub mod cam;
pub mod jost;
pub mod error;
pub mod inverse;
pub mod numerics;
pub mod profile;
pub mod scattering;

pub use error::{Error, Result};
