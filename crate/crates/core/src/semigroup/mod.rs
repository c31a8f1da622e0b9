//! The Ornstein–Uhlenbeck semigroup through Mehler's formula, ridge test
//! functions with analytic derivatives, and the interpolation and
//! monotonicity checks built on them.

mod ou;
mod test_function;

pub use ou::*;
pub use test_function::*;
