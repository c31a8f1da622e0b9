//! Quadrature checks of the Gaussian functional inequalities derived from
//! the catalog surfaces, plus the matrix condition behind the
//! Houdré–Kagan sandwich.

mod erti;
mod inequalities;
mod measure;
mod report;

pub use erti::*;
pub use inequalities::*;
pub use measure::*;
pub use report::*;
