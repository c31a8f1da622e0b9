//! Pointwise inequalities between closed-form surfaces.

use std::f64::consts::SQRT_2;

use crate::error::Result;
use crate::special::isoperimetric_profile;

/// `1 - (1 - r) sqrt(1 + r/2)` without cancellation for small `r`.
fn deficit_ratio(r: f64) -> f64 {
    let root = (1.0 + 0.5 * r).sqrt();
    let denom = 1.0 + (1.0 - r) * root;
    if r < 1.0 {
        // (1 - r)^2 (1 + r/2) = 1 - 3r/2 + r^3/2
        (1.5 * r - 0.5 * r * r * r) / denom
    } else {
        1.0 - (1.0 - r) * root
    }
}

/// `x^(3/2) - M(x, y)` for the three-halves surface, the integrand on the
/// right of the improved Beckner inequality.
pub fn three_halves_rhs(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        return y.powf(1.5) / SQRT_2;
    }
    let u = y / x;
    // r = sqrt(1 + u^2) - 1
    let r = u * u / ((1.0 + u * u).sqrt() + 1.0);
    x.powf(1.5) * deficit_ratio(r)
}

/// `(3/8) x^(-1/2) y^2 - (x^(3/2) - M(x, y))` for the three-halves surface.
///
/// Nonnegative for `x > 0, y >= 0` and zero only at `y = 0`.
pub fn imp1_gap(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    let u = y / x;
    let r = u * u / ((1.0 + u * u).sqrt() + 1.0);
    let scaled = if r < 1e-3 {
        // Taylor expansion in r, remainder O(r^7).
        r * r
            * (3.0 / 32.0
                + r * (5.0 / 128.0
                    + r * (-21.0 / 2048.0 + r * (27.0 / 8192.0 - r * 77.0 / 65536.0))))
    } else {
        0.375 * u * u - deficit_ratio(r)
    };
    x.powf(1.5) * scaled
}

/// Right side minus left side of the two-point inequality for the profile.
pub fn two_point_slack(a: f64, b: f64) -> Result<f64> {
    let half = 0.5 * (a - b);
    let ia = isoperimetric_profile(a)?;
    let ib = isoperimetric_profile(b)?;
    let im = isoperimetric_profile(0.5 * (a + b))?;
    Ok(0.5 * ia.hypot(half) + 0.5 * ib.hypot(half) - im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::make_catalog_surface;

    #[test]
    fn rhs_matches_surface() {
        let s = make_catalog_surface("three_halves", None).unwrap();
        for &(x, y) in &[
            (1.0f64, 1.0f64),
            (0.3, 2.0),
            (4.0, 0.1),
            (2.0, 9.0),
            (0.0, 1.5),
        ] {
            let direct = x.powf(1.5) - s.value(x, y).unwrap();
            assert!((three_halves_rhs(x, y) - direct).abs() < 1e-13 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn gap_values() {
        // high-precision reference values
        assert!((imp1_gap(10.0, 0.05) - 4.632_208_889_866_032e-10).abs() < 1e-22);
        assert!((imp1_gap(1.0, 1.0) - 0.018_594_252_905_582_625).abs() < 1e-15);
        assert!((imp1_gap(0.05, 10.0) - 145.501_153_101_648_65).abs() < 1e-10);
        assert_eq!(imp1_gap(3.0, 0.0), 0.0);
    }

    #[test]
    fn both_branches_match_reference() {
        // u = 0.0447 falls in the series branch, u = 0.0448 in the direct one
        let cases = [
            (0.0447, 9.351_654_013_584_472e-8),
            (0.0448, 9.435_594_353_565_473e-8),
            (0.3, 1.850_494_138_884_369e-4),
            (0.001, 2.343_749_316_406_552e-14),
        ];
        for (y, reference) in cases {
            let g = imp1_gap(1.0, y);
            assert!((g - reference).abs() <= 1e-11 * reference, "y = {y}: {g}");
        }
    }

    #[test]
    fn two_point_equal_arguments() {
        for &a in &[0.0, 0.3, 1.0] {
            assert!(two_point_slack(a, a).unwrap().abs() < 1e-16);
        }
        assert!(two_point_slack(0.0, 1.0).unwrap() > 0.0);
    }
}
