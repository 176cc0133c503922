//! Translation-invariant valuations on convex bodies in low dimensions.

pub mod body3;
pub mod error;
pub mod even3d;
pub mod functorial;
pub mod hull3;
pub mod io;
pub mod linmap;
pub mod planar;
pub mod polytope;
pub mod quadrature;
pub mod trig;
pub mod val1;
pub mod val2;

pub use error::{Error, Result};
