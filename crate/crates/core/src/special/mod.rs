//! Scalar special functions shared by every other module: the standard normal
//! distribution and its quantile, the Gaussian isoperimetric profile,
//! Gauss–Hermite rules normalized against the standard Gaussian, and the
//! caloric (heat) polynomials.

mod heat_poly;
mod normal;
mod quadrature;

pub use heat_poly::{heat_polynomial, heat_polynomial_coefficients};
pub use normal::{
    isoperimetric_profile, profile_derivative, profile_second_derivative, std_normal_cdf,
    std_normal_pdf, std_normal_quantile,
};
pub use quadrature::{
    gauss_hermite_rule, gaussian_moment, hermite_rule_1d, QuadratureRule, Rule1d,
};
