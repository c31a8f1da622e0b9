use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, evaluated through `erfc` so that the
/// lower tail keeps full relative accuracy.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

// Acklam's rational approximation, relative error below 1.2e-9.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

fn rational_guess_lower(u: f64) -> f64 {
    debug_assert!(u > 0.0 && u <= 0.5);
    if u < P_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Inverse of [`std_normal_cdf`] on the open unit interval.
///
/// The rational guess is polished by two Newton steps on the distribution
/// function. Arguments above one half are mapped to the lower tail, where
/// `1 - u` is exact, so both tails carry relative accuracy.
pub fn std_normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!(
            "normal quantile needs 0 < u < 1, got {u}"
        )));
    }
    if u == 0.5 {
        return Ok(0.0);
    }
    let (v, sign) = if u > 0.5 { (1.0 - u, -1.0) } else { (u, 1.0) };
    let mut x = rational_guess_lower(v);
    for _ in 0..2 {
        let density = std_normal_pdf(x);
        if density <= 0.0 {
            break;
        }
        x -= (std_normal_cdf(x) - v) / density;
    }
    Ok(sign * x)
}

/// Gaussian isoperimetric profile `I(x) = phi(Phi^{-1}(x))`, with `I(0) = I(1) = 0`.
pub fn isoperimetric_profile(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "isoperimetric profile needs 0 <= x <= 1, got {x}"
        )));
    }
    let v = x.min(1.0 - x);
    if v <= 0.0 {
        return Ok(0.0);
    }
    Ok(std_normal_pdf(std_normal_quantile(v)?))
}

/// `I'(x) = -Phi^{-1}(x)` on the open unit interval.
pub fn profile_derivative(x: f64) -> Result<f64> {
    Ok(-std_normal_quantile(x)?)
}

/// `I''(x) = -1 / I(x)` on the open unit interval.
pub fn profile_second_derivative(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!(
            "profile curvature needs 0 < x < 1, got {x}"
        )));
    }
    Ok(-1.0 / isoperimetric_profile(x)?)
}
