//! Reduction of the surface problem to the backwards heat equation:
//! convex boundary data, its Legendre transform, heat solutions and the
//! pointwise reconstruction of `M` through the characteristic map.

mod boundary;
mod heat;
mod reconstruct;

pub use boundary::*;
pub use heat::*;
pub use reconstruct::*;
