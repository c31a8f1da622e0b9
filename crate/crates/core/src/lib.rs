// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eds;
pub mod error;
pub mod grid;
pub mod io;
pub mod roots;
pub mod semigroup;
pub mod special;
pub mod suite;
pub mod surface;
pub mod verifier;

pub use error::{Error, Result};
