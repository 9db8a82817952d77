//! Numerical building blocks shared by the scattering modules.

pub mod fit;
pub mod interp;
pub mod mat2;
pub mod ode;
pub mod quad;

pub use mat2::Mat2;
