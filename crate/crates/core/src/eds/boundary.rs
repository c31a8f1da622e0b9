use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::roots::{reference_point, solve_increasing};
use crate::special::{isoperimetric_profile, std_normal_quantile};
use crate::surface::Interval;

/// A convex `C^2` function on an interval.
pub trait ConvexFunction {
    fn value(&self, x: f64) -> Result<f64>;
    fn derivative(&self, x: f64) -> Result<f64>;
    fn second_derivative(&self, x: f64) -> Result<f64>;
    fn domain(&self) -> Interval;
    /// Image of the derivative over the domain.
    fn gradient_image(&self) -> Interval;
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryKind {
    /// `x ln x` on `x > 0`.
    Gross,
    /// `x^2`.
    Nash,
    /// `-I(x)` on `[0, 1]`.
    Bobkov,
    /// `x^(3/2)` on `x >= 0`.
    ThreeHalves,
    /// `x arccos(-x) + sqrt(1 - x^2)` on `[-1, 1]`.
    Arccos,
    /// `x^r` on `x >= 0`, `r > 1`.
    Power(f64),
    Custom {
        name: String,
        value: ScalarFn,
        derivative: ScalarFn,
        second: ScalarFn,
        domain: Interval,
        image: Interval,
    },
}

/// Boundary data `Phi(x) = M(x, 0)`.
#[derive(Clone)]
pub struct BoundaryData {
    kind: BoundaryKind,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryData")
            .field("name", &self.name())
            .finish()
    }
}

const HALF_LINE: Interval = Interval {
    lo: 0.0,
    hi: f64::INFINITY,
    lo_closed: true,
    hi_closed: false,
};

impl BoundaryData {
    pub fn new(kind: BoundaryKind) -> Result<Self> {
        if let BoundaryKind::Power(r) = kind {
            if !(r > 1.0 && r.is_finite()) {
                return Err(Error::domain(format!(
                    "power boundary needs r > 1, got {r}"
                )));
            }
        }
        Ok(BoundaryData { kind })
    }

    /// Catalog boundary by name; `r` is the exponent for `power`.
    pub fn by_name(name: &str, r: Option<f64>) -> Result<Self> {
        let kind = match name {
            "gross" => BoundaryKind::Gross,
            "nash" => BoundaryKind::Nash,
            "bobkov" => BoundaryKind::Bobkov,
            "three_halves" => BoundaryKind::ThreeHalves,
            "arccos" => BoundaryKind::Arccos,
            "power" => BoundaryKind::Power(
                r.ok_or_else(|| Error::domain("power boundary needs an exponent"))?,
            ),
            other => {
                return Err(Error::UnknownName {
                    kind: "boundary",
                    name: other.to_string(),
                })
            }
        };
        BoundaryData::new(kind)
    }

    /// User-supplied convex function with its first two derivatives.
    pub fn custom(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: Interval,
        image: Interval,
    ) -> Self {
        BoundaryData {
            kind: BoundaryKind::Custom {
                name: name.into(),
                value: Arc::new(value),
                derivative: Arc::new(derivative),
                second: Arc::new(second),
                domain,
                image,
            },
        }
    }

    pub fn kind(&self) -> &BoundaryKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            BoundaryKind::Gross => "gross".into(),
            BoundaryKind::Nash => "nash".into(),
            BoundaryKind::Bobkov => "bobkov".into(),
            BoundaryKind::ThreeHalves => "three_halves".into(),
            BoundaryKind::Arccos => "arccos".into(),
            BoundaryKind::Power(r) => format!("power(r={r})"),
            BoundaryKind::Custom { name, .. } => name.clone(),
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.domain().contains(x) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "x = {x} outside the {} boundary domain {}",
                self.name(),
                self.domain()
            )))
        }
    }
}

impl ConvexFunction for BoundaryData {
    fn value(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(match &self.kind {
            BoundaryKind::Gross => x * x.ln(),
            BoundaryKind::Nash => x * x,
            BoundaryKind::Bobkov => -isoperimetric_profile(x)?,
            BoundaryKind::ThreeHalves => x.powf(1.5),
            BoundaryKind::Arccos => x * (-x).acos() + ((1.0 - x) * (1.0 + x)).sqrt(),
            BoundaryKind::Power(r) => x.powf(*r),
            BoundaryKind::Custom { value, .. } => value(x),
        })
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(match &self.kind {
            BoundaryKind::Gross => x.ln() + 1.0,
            BoundaryKind::Nash => 2.0 * x,
            BoundaryKind::Bobkov => std_normal_quantile(x)?,
            BoundaryKind::ThreeHalves => 1.5 * x.sqrt(),
            BoundaryKind::Arccos => (-x).acos(),
            BoundaryKind::Power(r) => r * x.powf(r - 1.0),
            BoundaryKind::Custom { derivative, .. } => derivative(x),
        })
    }

    fn second_derivative(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(match &self.kind {
            BoundaryKind::Gross => 1.0 / x,
            BoundaryKind::Nash => 2.0,
            BoundaryKind::Bobkov => 1.0 / isoperimetric_profile(x)?,
            BoundaryKind::ThreeHalves => 0.75 / x.sqrt(),
            BoundaryKind::Arccos => 1.0 / ((1.0 - x) * (1.0 + x)).sqrt(),
            BoundaryKind::Power(r) => r * (r - 1.0) * x.powf(r - 2.0),
            BoundaryKind::Custom { second, .. } => second(x),
        })
    }

    fn domain(&self) -> Interval {
        match &self.kind {
            BoundaryKind::Gross => Interval {
                lo_closed: false,
                ..HALF_LINE
            },
            BoundaryKind::Nash => Interval::REAL,
            BoundaryKind::Bobkov => Interval {
                lo: 0.0,
                hi: 1.0,
                lo_closed: false,
                hi_closed: false,
            },
            BoundaryKind::ThreeHalves | BoundaryKind::Power(_) => HALF_LINE,
            BoundaryKind::Arccos => Interval {
                lo: -1.0,
                hi: 1.0,
                lo_closed: true,
                hi_closed: true,
            },
            BoundaryKind::Custom { domain, .. } => *domain,
        }
    }

    fn gradient_image(&self) -> Interval {
        match &self.kind {
            BoundaryKind::Gross | BoundaryKind::Nash | BoundaryKind::Bobkov => Interval::REAL,
            BoundaryKind::ThreeHalves | BoundaryKind::Power(_) => HALF_LINE,
            BoundaryKind::Arccos => Interval {
                lo: 0.0,
                hi: std::f64::consts::PI,
                lo_closed: true,
                hi_closed: true,
            },
            BoundaryKind::Custom { image, .. } => *image,
        }
    }
}

/// Interior sample points used for convexity checks.
fn probe_points(domain: &Interval) -> Vec<f64> {
    let n = 201;
    match (domain.lo.is_finite(), domain.hi.is_finite()) {
        (true, true) => (1..=n)
            .map(|i| domain.lo + (domain.hi - domain.lo) * i as f64 / (n + 1) as f64)
            .collect(),
        (true, false) => (0..n)
            .map(|i| domain.lo + 10f64.powf(-3.0 + 6.0 * i as f64 / (n - 1) as f64))
            .collect(),
        (false, true) => (0..n)
            .map(|i| domain.hi - 10f64.powf(3.0 - 6.0 * i as f64 / (n - 1) as f64))
            .collect(),
        (false, false) => (0..n)
            .map(|i| -8.0 + 16.0 * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Check `Phi'' >= 0` on a probe grid.
///
/// A negative second derivative is a domain error; a second derivative that
/// vanishes at two consecutive probes means `Phi'` is flat on an interval and
/// cannot be inverted.
pub fn check_convexity<F: ConvexFunction + ?Sized>(phi: &F) -> Result<()> {
    let mut flat_run = 0;
    for x in probe_points(&phi.domain()) {
        let d2 = phi.second_derivative(x)?;
        if d2.is_nan() {
            return Err(Error::domain(format!(
                "second derivative is NaN at x = {x}"
            )));
        }
        if d2 < -1e-12 {
            return Err(Error::domain(format!(
                "boundary data is not convex: second derivative {d2} at x = {x}"
            )));
        }
        if d2 <= 0.0 {
            flat_run += 1;
            if flat_run >= 2 {
                return Err(Error::NonInvertible(format!(
                    "second derivative vanishes on an interval around x = {x}"
                )));
            }
        } else {
            flat_run = 0;
        }
    }
    Ok(())
}

/// The Legendre transform `u0(p) = x p - Phi(x)` with `Phi'(x) = p`.
///
/// It is itself convex, with `u0' = x` and `u0'' = 1 / Phi''(x)`, so it can
/// be transformed again.
#[derive(Debug, Clone)]
pub struct LegendreBoundary<F> {
    phi: F,
}

pub fn legendre_boundary<F: ConvexFunction>(phi: F) -> Result<LegendreBoundary<F>> {
    check_convexity(&phi)?;
    Ok(LegendreBoundary { phi })
}

impl<F: ConvexFunction> LegendreBoundary<F> {
    pub fn inner(&self) -> &F {
        &self.phi
    }

    /// The `x` with `Phi'(x) = p`.
    pub fn gradient_inverse(&self, p: f64) -> Result<f64> {
        let image = self.phi.gradient_image();
        if !image.contains(p) {
            return Err(Error::domain(format!(
                "p = {p} outside the gradient image {image}"
            )));
        }
        let domain = self.phi.domain();
        let phi = &self.phi;
        solve_increasing(
            |x| Ok((phi.derivative(x)?, phi.second_derivative(x)?)),
            p,
            &domain,
            reference_point(&domain),
        )
    }
}

impl<F: ConvexFunction> ConvexFunction for LegendreBoundary<F> {
    fn value(&self, p: f64) -> Result<f64> {
        let x = self.gradient_inverse(p)?;
        Ok(x * p - self.phi.value(x)?)
    }

    fn derivative(&self, p: f64) -> Result<f64> {
        self.gradient_inverse(p)
    }

    fn second_derivative(&self, p: f64) -> Result<f64> {
        let x = self.gradient_inverse(p)?;
        Ok(1.0 / self.phi.second_derivative(x)?)
    }

    fn domain(&self) -> Interval {
        self.phi.gradient_image()
    }

    fn gradient_image(&self) -> Interval {
        self.phi.domain()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{std_normal_cdf, std_normal_pdf};

    fn catalog() -> Vec<BoundaryData> {
        let mut v: Vec<BoundaryData> = ["gross", "nash", "bobkov", "three_halves", "arccos"]
            .iter()
            .map(|n| BoundaryData::by_name(n, None).unwrap())
            .collect();
        v.push(BoundaryData::by_name("power", Some(2.5)).unwrap());
        v
    }

    #[test]
    fn legendre_examples() {
        let gross = legendre_boundary(BoundaryData::by_name("gross", None).unwrap()).unwrap();
        let nash = legendre_boundary(BoundaryData::by_name("nash", None).unwrap()).unwrap();
        let th = legendre_boundary(BoundaryData::by_name("three_halves", None).unwrap()).unwrap();
        let bob = legendre_boundary(BoundaryData::by_name("bobkov", None).unwrap()).unwrap();
        let arc = legendre_boundary(BoundaryData::by_name("arccos", None).unwrap()).unwrap();
        for &p in &[-3.0, -0.4, 0.0, 1.0, 2.7] {
            let e = (p - 1.0f64).exp();
            assert!((gross.value(p).unwrap() - e).abs() < 1e-14 * e.max(1.0));
            assert!((nash.value(p).unwrap() - p * p / 4.0).abs() < 1e-14);
            let b = p * std_normal_cdf(p) + std_normal_pdf(p);
            assert!((bob.value(p).unwrap() - b).abs() < 1e-13, "bobkov at {p}");
        }
        for &p in &[0.0, 0.5, 1.0, 4.0] {
            let expect = 4.0 / 27.0 * p * p * p;
            assert!((th.value(p).unwrap() - expect).abs() < 1e-13 * expect.max(1.0));
        }
        for &p in &[0.0, 0.3, 1.5, 3.0, std::f64::consts::PI] {
            assert!((arc.value(p).unwrap() + p.sin()).abs() < 1e-14);
        }
        assert!(th.value(-1.0).is_err());
    }

    #[test]
    fn boundary_condition_and_gradient() {
        for b in catalog() {
            let u0 = legendre_boundary(b.clone()).unwrap();
            for x in probe_points(&b.domain()).into_iter().step_by(20) {
                let p = b.derivative(x).unwrap();
                let lhs = u0.value(p).unwrap();
                let rhs = x * p - b.value(x).unwrap();
                assert!(
                    (lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0),
                    "{}",
                    b.name()
                );
                let back = u0.derivative(p).unwrap();
                assert!(
                    (back - x).abs() < 1e-10 * x.abs().max(1.0),
                    "{} at {x}",
                    b.name()
                );
            }
        }
    }

    #[test]
    fn involution() {
        for b in catalog() {
            let twice = legendre_boundary(legendre_boundary(b.clone()).unwrap()).unwrap();
            for x in probe_points(&b.domain()).into_iter().step_by(25) {
                let v = twice.value(x).unwrap();
                let expect = b.value(x).unwrap();
                assert!(
                    (v - expect).abs() < 1e-10 * expect.abs().max(1.0),
                    "{} at {x}: {v} vs {expect}",
                    b.name()
                );
            }
        }
    }

    #[test]
    fn flat_gradient_is_rejected() {
        // Huber-type function: linear on [-1, 1].
        let huber = BoundaryData::custom(
            "huber",
            |x: f64| {
                if x.abs() <= 1.0 {
                    x
                } else {
                    x + (x.abs() - 1.0).powi(2)
                }
            },
            |x: f64| {
                if x.abs() <= 1.0 {
                    1.0
                } else {
                    1.0 + 2.0 * (x.abs() - 1.0) * x.signum()
                }
            },
            |x: f64| if x.abs() <= 1.0 { 0.0 } else { 2.0 },
            Interval::REAL,
            Interval::REAL,
        );
        assert!(matches!(
            legendre_boundary(huber),
            Err(Error::NonInvertible(_))
        ));
        let concave = BoundaryData::custom(
            "concave",
            |x: f64| -x * x,
            |x: f64| -2.0 * x,
            |_| -2.0,
            Interval::REAL,
            Interval::REAL,
        );
        assert!(matches!(legendre_boundary(concave), Err(Error::Domain(_))));
    }
}
