//! Candidate surfaces `M(x, y)` with closed-form derivatives.

mod arccos;
mod matrix;
mod pointwise;

pub use arccos::arccos_q;
pub use matrix::{
    constraint_matrix, default_sweep_grid, degeneracy_residual, is_nsd, jet_relative_degeneracy,
    nsd_grid_sweep, relative_degeneracy, ConstraintMatrix, SweepReport, SweepRow, Violation,
};
pub use pointwise::{imp1_gap, three_halves_rhs, two_point_slack};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{isoperimetric_profile, profile_derivative};

/// Smallest shifted abscissa accepted by surfaces singular at `x = 0`.
pub const SINGULAR_CLIP: f64 = 1e-6;

/// `M` and its first and second partial derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceJet {
    pub m: f64,
    pub mx: f64,
    pub my: f64,
    pub mxx: f64,
    pub mxy: f64,
    pub myy: f64,
}

/// Interval of admissible `x` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const REAL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_closed: false,
        hi_closed: false,
    };

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    /// Whether every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let lo_ok =
            self.lo > other.lo || (self.lo == other.lo && (other.lo_closed || !self.lo_closed));
        let hi_ok =
            self.hi < other.hi || (self.hi == other.hi && (other.hi_closed || !self.hi_closed));
        lo_ok && hi_ok
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        let end = |v: f64| {
            if v == f64::INFINITY {
                "inf".to_string()
            } else if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                v.to_string()
            }
        };
        write!(f, "{l}{}, {}{r}", end(self.lo), end(self.hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum SurfaceKind {
    Gross,
    Nash,
    Beckner { p: f64 },
    Bobkov,
    ThreeHalves,
    Arccos,
    BTheorem,
}

/// Static description of one catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub domain: &'static str,
    pub inequality: &'static str,
    pub elliptic: bool,
}

pub const CATALOG: [CatalogEntry; 7] = [
    CatalogEntry {
        name: "gross",
        formula: "x ln x - y^2/(2x)",
        domain: "x >= 0 (singular at 0 unless shifted)",
        inequality: "log-Sobolev",
        elliptic: true,
    },
    CatalogEntry {
        name: "nash",
        formula: "x^2 - y^2",
        domain: "x real",
        inequality: "Poincare",
        elliptic: true,
    },
    CatalogEntry {
        name: "beckner",
        formula: "x^(2/p) - (2-p)/p^2 x^(2/p-2) y^2, 1 <= p <= 2",
        domain: "x >= 0 (singular at 0 unless shifted)",
        inequality: "Beckner",
        elliptic: true,
    },
    CatalogEntry {
        name: "bobkov",
        formula: "-sqrt(I(x)^2 + y^2)",
        domain: "0 <= x <= 1",
        inequality: "Bobkov isoperimetric",
        elliptic: true,
    },
    CatalogEntry {
        name: "three_halves",
        formula: "(2x - sqrt(x^2+y^2)) sqrt(x + sqrt(x^2+y^2)) / sqrt(2)",
        domain: "x >= 0",
        inequality: "improved Beckner at p = 3/2",
        elliptic: true,
    },
    CatalogEntry {
        name: "arccos",
        formula: "x arccos(-x e^(-q^2/2)) + (1-q^2) sqrt(e^(q^2) - x^2), -q sqrt(e^(q^2)-x^2) = y",
        domain: "-1 <= x <= 1",
        inequality: "arccos inequality",
        elliptic: true,
    },
    CatalogEntry {
        name: "b_theorem",
        formula: "x^2 - y^2/2",
        domain: "x real",
        inequality: "even-case B-theorem (non-elliptic: violates the constraint)",
        elliptic: false,
    },
];

/// A catalog surface, optionally evaluated at `x + epsilon_shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MSurface {
    pub kind: SurfaceKind,
    pub epsilon_shift: f64,
}

/// Build a catalog surface by name. `p` is only read by `beckner`.
pub fn make_catalog_surface(name: &str, p: Option<f64>) -> Result<MSurface> {
    let kind = match name {
        "gross" => SurfaceKind::Gross,
        "nash" => SurfaceKind::Nash,
        "beckner" => {
            let p = p.ok_or_else(|| Error::domain("beckner surface needs an exponent p"))?;
            if !(1.0..=2.0).contains(&p) {
                return Err(Error::domain(format!(
                    "beckner exponent must lie in [1, 2], got {p}"
                )));
            }
            SurfaceKind::Beckner { p }
        }
        "bobkov" => SurfaceKind::Bobkov,
        "three_halves" => SurfaceKind::ThreeHalves,
        "arccos" => SurfaceKind::Arccos,
        "b_theorem" => SurfaceKind::BTheorem,
        other => {
            return Err(Error::UnknownName {
                kind: "surface",
                name: other.to_string(),
            })
        }
    };
    Ok(MSurface::new(kind))
}

impl MSurface {
    pub fn new(kind: SurfaceKind) -> Self {
        MSurface {
            kind,
            epsilon_shift: 0.0,
        }
    }

    pub fn with_epsilon_shift(mut self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::domain(format!(
                "epsilon shift must be >= 0, got {eps}"
            )));
        }
        self.epsilon_shift = eps;
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SurfaceKind::Gross => "gross",
            SurfaceKind::Nash => "nash",
            SurfaceKind::Beckner { .. } => "beckner",
            SurfaceKind::Bobkov => "bobkov",
            SurfaceKind::ThreeHalves => "three_halves",
            SurfaceKind::Arccos => "arccos",
            SurfaceKind::BTheorem => "b_theorem",
        }
    }

    /// Name with parameters, e.g. `beckner(p=1.5)`.
    pub fn label(&self) -> String {
        match self.kind {
            SurfaceKind::Beckner { p } => format!("beckner(p={p})"),
            _ => self.name().to_string(),
        }
    }

    /// Admissible `x` values, in the unshifted variable.
    pub fn domain(&self) -> Interval {
        let eps = self.epsilon_shift;
        match self.kind {
            SurfaceKind::Gross | SurfaceKind::Beckner { .. } | SurfaceKind::ThreeHalves => {
                Interval {
                    lo: -eps,
                    hi: f64::INFINITY,
                    lo_closed: true,
                    hi_closed: false,
                }
            }
            SurfaceKind::Nash | SurfaceKind::BTheorem => Interval::REAL,
            SurfaceKind::Bobkov => Interval {
                lo: -eps,
                hi: 1.0 - eps,
                lo_closed: true,
                hi_closed: true,
            },
            SurfaceKind::Arccos => Interval {
                lo: -1.0 - eps,
                hi: 1.0 - eps,
                lo_closed: true,
                hi_closed: true,
            },
        }
    }

    /// Whether the surface is expected to satisfy the constraint inequality.
    pub fn is_elliptic(&self) -> bool {
        self.kind != SurfaceKind::BTheorem
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        match self.kind {
            // Values are finite at the edges even where derivatives are not.
            SurfaceKind::Bobkov => {
                let x = self.shifted(x, y)?;
                Ok(-(isoperimetric_profile(x)?.powi(2) + y * y).sqrt())
            }
            SurfaceKind::Gross => {
                let x = self.shifted(x, y)?;
                match (x > 0.0, y == 0.0) {
                    (true, _) => Ok(x * x.ln() - 0.5 * y * y / x),
                    (false, true) => Ok(0.0),
                    (false, false) => Err(Error::Singular(format!(
                        "{} is unbounded at (0, {y})",
                        self.label()
                    ))),
                }
            }
            SurfaceKind::Beckner { p } => {
                let x = self.shifted(x, y)?;
                let a = 2.0 / p;
                let c = (2.0 - p) / (p * p);
                if x > 0.0 || a >= 2.0 {
                    Ok(x.powf(a) - c * x.powf(a - 2.0) * y * y)
                } else if y == 0.0 || c == 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::Singular(format!(
                        "{} is unbounded at (0, {y})",
                        self.label()
                    )))
                }
            }
            SurfaceKind::ThreeHalves if x + self.epsilon_shift == 0.0 => {
                self.shifted(x, y)?;
                Ok(-y * y.sqrt() * std::f64::consts::FRAC_1_SQRT_2)
            }
            SurfaceKind::Arccos if y == 0.0 => {
                let x = self.shifted(x, y)?;
                Ok(x * (-x).acos() + ((1.0 - x) * (1.0 + x)).sqrt())
            }
            _ => Ok(self.jet(x, y)?.m),
        }
    }

    /// Boundary data `M(x, 0)`.
    pub fn boundary(&self, x: f64) -> Result<f64> {
        self.value(x, 0.0)
    }

    fn shifted(&self, x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::domain(format!("non-finite point ({x}, {y})")));
        }
        if y < 0.0 {
            return Err(Error::domain(format!(
                "surfaces live on y >= 0, got y = {y}"
            )));
        }
        if !self.domain().contains(x) {
            return Err(Error::domain(format!(
                "x = {x} outside the {} domain {}",
                self.label(),
                self.domain()
            )));
        }
        Ok(x + self.epsilon_shift)
    }

    /// Closed-form jet at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64) -> Result<SurfaceJet> {
        let xs = self.shifted(x, y)?;
        let singular = || {
            Error::Singular(format!(
                "{} derivatives blow up at ({x}, {y}); use a positive epsilon shift",
                self.label()
            ))
        };
        match self.kind {
            SurfaceKind::Gross => {
                if xs < SINGULAR_CLIP {
                    return Err(singular());
                }
                let r = y / xs;
                Ok(SurfaceJet {
                    m: xs * xs.ln() - 0.5 * y * r,
                    mx: xs.ln() + 1.0 + 0.5 * r * r,
                    my: -r,
                    mxx: (1.0 - r * r) / xs,
                    mxy: r / xs,
                    myy: -1.0 / xs,
                })
            }
            SurfaceKind::Nash => Ok(SurfaceJet {
                m: xs * xs - y * y,
                mx: 2.0 * xs,
                my: -2.0 * y,
                mxx: 2.0,
                mxy: 0.0,
                myy: -2.0,
            }),
            SurfaceKind::BTheorem => Ok(SurfaceJet {
                m: xs * xs - 0.5 * y * y,
                mx: 2.0 * xs,
                my: -y,
                mxx: 2.0,
                mxy: 0.0,
                myy: -1.0,
            }),
            SurfaceKind::Beckner { p } => {
                if xs < SINGULAR_CLIP {
                    return Err(singular());
                }
                let a = 2.0 / p;
                let c = (2.0 - p) / (p * p);
                let xa2 = xs.powf(a - 2.0);
                let xa = xa2 * xs * xs;
                let y2 = y * y;
                Ok(SurfaceJet {
                    m: xa - c * xa2 * y2,
                    mx: a * xa / xs - c * (a - 2.0) * xa2 / xs * y2,
                    my: -2.0 * c * xa2 * y,
                    mxx: a * (a - 1.0) * xa2 - c * (a - 2.0) * (a - 3.0) * xa2 / (xs * xs) * y2,
                    mxy: -2.0 * c * (a - 2.0) * xa2 / xs * y,
                    myy: -2.0 * c * xa2,
                })
            }
            SurfaceKind::Bobkov => {
                if xs <= 0.0 || xs >= 1.0 {
                    return Err(singular());
                }
                let i = isoperimetric_profile(xs)?;
                let di = profile_derivative(xs)?;
                let r2 = i * i + y * y;
                let r = r2.sqrt();
                let r3 = r2 * r;
                Ok(SurfaceJet {
                    m: -r,
                    mx: -i * di / r,
                    my: -y / r,
                    mxx: -(di * di - 1.0) / r + (i * di).powi(2) / r3,
                    mxy: y * i * di / r3,
                    myy: -i * i / r3,
                })
            }
            SurfaceKind::ThreeHalves => {
                let s = xs.hypot(y);
                if s == 0.0 {
                    return Err(singular());
                }
                let k = 3.0 / (2.0 * std::f64::consts::SQRT_2);
                let w = xs + s;
                let sw = w.sqrt();
                // y / sqrt(w) = sqrt(s - x) for y >= 0, written without cancellation.
                let y_over_sw = y / sw;
                Ok(SurfaceJet {
                    m: (2.0 * xs - s) * sw / std::f64::consts::SQRT_2,
                    mx: k * sw,
                    my: -k * y_over_sw,
                    mxx: k * sw / (2.0 * s),
                    mxy: k * y_over_sw / (2.0 * s),
                    myy: -k * sw / (2.0 * s),
                })
            }
            SurfaceKind::Arccos => arccos::arccos_jet(xs, y).map_err(|e| match e {
                Error::Singular(_) => singular(),
                other => other,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::std_normal_pdf;

    pub(crate) fn all_surfaces() -> Vec<MSurface> {
        let mut v: Vec<MSurface> = [
            "gross",
            "nash",
            "bobkov",
            "three_halves",
            "arccos",
            "b_theorem",
        ]
        .iter()
        .map(|n| make_catalog_surface(n, None).unwrap())
        .collect();
        for p in [1.0, 1.25, 1.5, 1.75, 2.0] {
            v.push(make_catalog_surface("beckner", Some(p)).unwrap());
        }
        v
    }

    fn interior_points(s: &MSurface) -> Vec<(f64, f64)> {
        let xs: Vec<f64> = match s.kind {
            SurfaceKind::Bobkov => vec![0.05, 0.2, 0.5, 0.7, 0.93],
            SurfaceKind::Arccos => vec![-0.9, -0.3, 0.0, 0.4, 0.85],
            SurfaceKind::Nash | SurfaceKind::BTheorem => vec![-2.0, -0.4, 0.3, 1.5],
            _ => vec![0.2, 0.7, 1.0, 2.5, 6.0],
        };
        let ys = [0.05, 0.3, 1.0, 2.2];
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .collect()
    }

    #[test]
    fn catalog_examples() {
        let gross = make_catalog_surface("gross", None).unwrap();
        assert_eq!(gross.value(1.0, 0.0).unwrap(), 0.0);
        let bobkov = make_catalog_surface("bobkov", None).unwrap();
        let v = bobkov.value(0.5, 0.0).unwrap();
        assert!((v + std_normal_pdf(0.0)).abs() < 1e-15);
        let nash = make_catalog_surface("nash", None).unwrap();
        assert_eq!(nash.value(2.0, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(
            make_catalog_surface("foo", None),
            Err(Error::UnknownName { .. })
        ));
        assert!(make_catalog_surface("beckner", Some(2.5)).is_err());
        assert!(make_catalog_surface("beckner", Some(0.9)).is_err());
        assert!(make_catalog_surface("beckner", None).is_err());
        assert_eq!(CATALOG.len(), 7);
    }

    #[test]
    fn domain_and_singularities() {
        let gross = make_catalog_surface("gross", None).unwrap();
        assert!(matches!(gross.jet(0.0, 1.0), Err(Error::Singular(_))));
        assert!(matches!(gross.jet(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gross.jet(1.0, -1.0), Err(Error::Domain(_))));
        let shifted = gross.with_epsilon_shift(0.1).unwrap();
        let j = shifted.jet(0.0, 1.0).unwrap();
        let direct = gross.jet(0.1, 1.0).unwrap();
        assert_eq!(j, direct);
        let bobkov = make_catalog_surface("bobkov", None).unwrap();
        assert!(matches!(bobkov.jet(0.0, 0.5), Err(Error::Singular(_))));
        assert_eq!(bobkov.value(0.0, 0.0).unwrap(), 0.0);
        assert!(bobkov.jet(1.2, 0.5).is_err());
        let th = make_catalog_surface("three_halves", None).unwrap();
        assert!(matches!(th.jet(0.0, 0.0), Err(Error::Singular(_))));
        assert!(th.jet(0.0, 1.0).is_ok());
        assert_eq!(th.value(0.0, 0.0).unwrap(), 0.0);
        let edge = th.value(0.0, 2.0).unwrap();
        assert!((edge - th.jet(0.0, 2.0).unwrap().m).abs() < 1e-15);
        assert!((edge + 2.0f64.powf(1.5) / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn my_vanishes_on_boundary() {
        for s in all_surfaces() {
            for (x, _) in interior_points(&s) {
                let j = s.jet(x, 0.0).unwrap();
                assert_eq!(j.my, 0.0, "{}", s.label());
            }
        }
    }

    #[test]
    fn my_nonpositive() {
        for s in all_surfaces() {
            for (x, y) in interior_points(&s) {
                assert!(s.jet(x, y).unwrap().my <= 0.0, "{} at ({x},{y})", s.label());
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        // Richardson-extrapolated centered differences, steps 2e-4 and 1e-4.
        for s in all_surfaces() {
            for (x, y) in interior_points(&s) {
                let m = |a: f64, b: f64| s.value(a, b).unwrap();
                let stencil = |h: f64| {
                    [
                        (m(x + h, y) - m(x - h, y)) / (2.0 * h),
                        (m(x, y + h) - m(x, y - h)) / (2.0 * h),
                        (m(x + h, y) - 2.0 * m(x, y) + m(x - h, y)) / (h * h),
                        (m(x + h, y + h) - m(x + h, y - h) - m(x - h, y + h) + m(x - h, y - h))
                            / (4.0 * h * h),
                        (m(x, y + h) - 2.0 * m(x, y) + m(x, y - h)) / (h * h),
                    ]
                };
                let (coarse, fine) = (stencil(2e-4), stencil(1e-4));
                let j = s.jet(x, y).unwrap();
                let an = [j.mx, j.my, j.mxx, j.mxy, j.myy];
                let scale = an.iter().fold(j.m.abs().max(1.0), |a, v| a.max(v.abs()));
                for k in 0..5 {
                    let fd = (4.0 * fine[k] - coarse[k]) / 3.0;
                    assert!(
                        (an[k] - fd).abs() <= 1e-6 * scale,
                        "{} derivative {k} at ({x},{y}): {} vs {fd}",
                        s.label(),
                        an[k]
                    );
                }
            }
        }
    }

    #[test]
    fn beckner_endpoints_reduce() {
        // p = 1 is the Nash quadratic, p = 2 is linear.
        let b1 = make_catalog_surface("beckner", Some(1.0)).unwrap();
        let b2 = make_catalog_surface("beckner", Some(2.0)).unwrap();
        for &(x, y) in &[(0.5, 0.2), (2.0, 3.0)] {
            assert!((b1.value(x, y).unwrap() - (x * x - y * y)).abs() < 1e-13);
            assert!((b2.value(x, y).unwrap() - x).abs() < 1e-13);
        }
    }
}
