use crate::error::{Error, Result};

use super::SurfaceJet;

/// Largest `|q|` the bracket search may reach.
const Q_LIMIT: f64 = 10.0;

/// `S(q, x) = sqrt(e^(q^2) - x^2)`, written to keep accuracy near `|x| = 1, q = 0`.
fn root_term(q: f64, x: f64) -> f64 {
    (q * q).exp_m1().max(0.0) + (1.0 - x) * (1.0 + x)
}

/// The nonpositive `q` with `-q sqrt(e^(q^2) - x^2) = y`.
///
/// Uses Newton on `s = -q` inside a bisection bracket. The residual is
/// driven below `1e-12 * max(1, y)`.
pub fn arccos_q(x: f64, y: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::domain(format!(
            "arccos surface needs |x| <= 1, got {x}"
        )));
    }
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::domain(format!(
            "arccos surface needs finite y >= 0, got {y}"
        )));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let h = |s: f64| s * root_term(s, x).sqrt();
    let tol = 1e-12 * y.max(1.0);

    let mut lo = 0.0;
    let mut hi = 1.0f64;
    while h(hi) < y {
        if hi >= Q_LIMIT {
            return Err(Error::Overflow(format!(
                "no q >= -{Q_LIMIT} solves the arccos characteristic equation for y = {y}"
            )));
        }
        lo = hi;
        hi = (2.0 * hi).min(Q_LIMIT);
    }

    let base = (1.0 - x) * (1.0 + x);
    let mut s = if base > 0.0 {
        y / base.sqrt()
    } else {
        y.sqrt()
    };
    if !(s > lo && s < hi) {
        s = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let r2 = root_term(s, x);
        let r = r2.sqrt();
        let f = s * r - y;
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let slope = r + s * s * (s * s).exp() / r;
        let mut next = s - f / slope;
        if !(next > lo && next < hi) || !slope.is_finite() {
            next = 0.5 * (lo + hi);
        }
        // Stop once Newton no longer moves the iterate.
        if (next - s).abs() <= 2.0 * f64::EPSILON * s || hi - lo <= 4.0 * f64::EPSILON * hi {
            s = next;
            break;
        }
        s = next;
    }
    let residual = (h(s) - y).abs();
    if residual <= tol {
        Ok(-s)
    } else {
        Err(Error::NoConvergence {
            iterations: 200,
            residual,
        })
    }
}

/// Jet of the arccos surface through the implicit function `q(x, y)`.
///
/// `M_x = p`, `M_y = q`; second derivatives come from differentiating the
/// characteristic equation.
pub(super) fn arccos_jet(x: f64, y: f64) -> Result<SurfaceJet> {
    let q = arccos_q(x, y)?;
    let s2 = root_term(q, x);
    let s = s2.sqrt();
    if s == 0.0 {
        return Err(Error::Singular(format!("arccos surface at ({x}, {y})")));
    }
    let e = (q * q).exp();
    let d = s2 + q * q * e;
    let arg = (-x * (-0.5 * q * q).exp()).clamp(-1.0, 1.0);
    let p = arg.acos();
    let qx = q * x / d;
    let qy = -s / d;
    let px = (1.0 - x * q * qx) / s;
    Ok(SurfaceJet {
        m: x * p + (1.0 - q * q) * s,
        mx: p,
        my: q,
        mxx: px,
        mxy: qx,
        myy: qy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisection_oracle(x: f64, y: f64) -> f64 {
        let g = |s: f64| s * ((s * s).exp() - x * x).sqrt() - y;
        let (mut a, mut b) = (0.0, 10.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m) > 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        -0.5 * (a + b)
    }

    #[test]
    fn closed_values() {
        assert_eq!(arccos_q(0.3, 0.0).unwrap(), 0.0);
        assert_eq!(arccos_q(-1.0, 0.0).unwrap(), 0.0);
        let q = arccos_q(0.0, 1f64.exp().sqrt()).unwrap();
        assert!((q + 1.0).abs() < 1e-14);
    }

    #[test]
    fn residual_and_oracle() {
        for &(x, y) in &[
            (0.5, 2.0),
            (-0.9, 0.01),
            (1.0, 1e-6),
            (-1.0, 3.0),
            (0.0, 50.0),
        ] {
            let q = arccos_q(x, y).unwrap();
            assert!(q < 0.0);
            let res = -q * ((q * q).exp() - x * x).sqrt() - y;
            assert!(res.abs() <= 1e-12 * y.max(1.0), "({x},{y}) residual {res}");
            assert!((q - bisection_oracle(x, y)).abs() < 1e-11, "({x},{y})");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(arccos_q(1.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(arccos_q(0.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(arccos_q(0.0, 1e50), Err(Error::Overflow(_))));
    }

    #[test]
    fn monotone_in_y() {
        let mut prev = 0.0;
        for k in 1..200 {
            let q = arccos_q(0.4, k as f64 * 0.05).unwrap();
            assert!(q < prev);
            prev = q;
        }
    }
}
