use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Grid2};

use super::{MSurface, SurfaceJet, SurfaceKind};

/// `[[M_xx + M_y/y, M_xy], [M_xy, M_yy]]` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl ConstraintMatrix {
    /// At `y = 0` the ratio `M_y / y` is replaced by its limit `M_yy(x, 0)`.
    pub fn from_jet(jet: &SurfaceJet, y: f64) -> Self {
        let ratio = if y > 0.0 { jet.my / y } else { jet.myy };
        ConstraintMatrix {
            a11: jet.mxx + ratio,
            a12: jet.mxy,
            a22: jet.myy,
        }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a22.abs())
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.a11 + self.a22);
        let rad = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
        [mean - rad, mean + rad]
    }

    /// The matrix divided by its largest entry (unchanged if zero).
    pub fn normalized(&self) -> Self {
        let s = self.max_abs();
        if s == 0.0 || !s.is_finite() {
            return *self;
        }
        ConstraintMatrix {
            a11: self.a11 / s,
            a12: self.a12 / s,
            a22: self.a22 / s,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()
    }
}

pub fn constraint_matrix(m: &MSurface, x: f64, y: f64) -> Result<ConstraintMatrix> {
    let c = ConstraintMatrix::from_jet(&m.jet(x, y)?, y);
    if !c.is_finite() {
        return Err(Error::Singular(format!(
            "{} constraint matrix is not finite at ({x}, {y})",
            m.label()
        )));
    }
    Ok(c)
}

/// 2x2 negative semidefiniteness: `trace <= tol` and `det >= -tol`.
pub fn is_nsd(c: &ConstraintMatrix, tol: f64) -> bool {
    c.trace() <= tol && c.det() >= -tol
}

/// `y (M_xx M_yy - M_xy^2) + M_y M_yy`, which equals `y` times the
/// constraint determinant.
pub fn degeneracy_residual(m: &MSurface, x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain(format!(
            "degeneracy residual needs y > 0, got {y}"
        )));
    }
    let j = m.jet(x, y)?;
    Ok(y * (j.mxx * j.myy - j.mxy * j.mxy) + j.my * j.myy)
}

/// Signed degeneracy residual divided by `y s^2`, with `s` the largest of
/// `|M_xx|, |M_y/y|, |M_xy|, |M_yy|`.
pub fn relative_degeneracy(m: &MSurface, x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain(format!(
            "degeneracy residual needs y > 0, got {y}"
        )));
    }
    Ok(jet_relative_degeneracy(&m.jet(x, y)?, y))
}

/// [`relative_degeneracy`] for a jet obtained some other way, e.g. by
/// finite differences. `y` must be positive.
pub fn jet_relative_degeneracy(j: &SurfaceJet, y: f64) -> f64 {
    let res = y * (j.mxx * j.myy - j.mxy * j.mxy) + j.my * j.myy;
    let s = j
        .mxx
        .abs()
        .max((j.my / y).abs())
        .max(j.mxy.abs())
        .max(j.myy.abs());
    if s == 0.0 {
        return 0.0;
    }
    res / (y * s * s)
}

/// One node of a constraint sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub y: f64,
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub eig_max: f64,
    /// Raw degeneracy residual, zero at `y = 0`.
    pub residual: f64,
    pub relative_residual: f64,
    pub nsd: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub x: f64,
    pub y: f64,
    pub eigenvalues: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub surface: String,
    pub tol: f64,
    pub rows: Vec<SweepRow>,
    pub violations: Vec<Violation>,
    /// Nodes where the surface could not be evaluated, with the reason.
    pub skipped: Vec<(f64, f64, String)>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.skipped.is_empty()
    }

    /// Largest `|relative residual|` over nodes with `y > 0`.
    pub fn max_relative_residual(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.y > 0.0)
            .fold(0.0, |a, r| a.max(r.relative_residual.abs()))
    }

    /// Share of `y > 0` nodes whose relative residual exceeds `threshold`.
    pub fn fraction_positive(&self, threshold: f64) -> f64 {
        let rows: Vec<_> = self.rows.iter().filter(|r| r.y > 0.0).collect();
        if rows.is_empty() {
            return 0.0;
        }
        rows.iter()
            .filter(|r| r.relative_residual > threshold)
            .count() as f64
            / rows.len() as f64
    }
}

/// Default sweep grid: 100x100, `y` linear on `[0, 10]`; `x` log-spaced on
/// `[0.1, 10]` for half-lines, linear on `[-5, 5]` for the real line and
/// strictly interior for bounded domains.
pub fn default_sweep_grid(m: &MSurface) -> Grid2 {
    let x = match m.kind {
        SurfaceKind::Gross | SurfaceKind::Beckner { .. } | SurfaceKind::ThreeHalves => {
            Axis::log(0.1, 10.0, 100)
        }
        SurfaceKind::Nash | SurfaceKind::BTheorem => Axis::linear(-5.0, 5.0, 100),
        SurfaceKind::Bobkov | SurfaceKind::Arccos => {
            let d = m.domain();
            Axis::interior(d.lo, d.hi, 100)
        }
    };
    Grid2::new(x, Axis::linear(0.0, 10.0, 100))
}

/// Evaluate the constraint matrix on every grid node.
///
/// Each matrix is scaled by its largest entry before the trace/determinant
/// test, so `tol` acts as a relative tolerance.
pub fn nsd_grid_sweep(m: &MSurface, grid: &Grid2, tol: f64) -> Result<SweepReport> {
    grid.validate()?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut violations = Vec::new();
    let mut skipped = Vec::new();
    for (x, y) in grid.nodes() {
        let c = match constraint_matrix(m, x, y) {
            Ok(c) => c,
            Err(e) => {
                skipped.push((x, y, e.to_string()));
                continue;
            }
        };
        let (residual, relative_residual) = if y > 0.0 {
            (degeneracy_residual(m, x, y)?, relative_degeneracy(m, x, y)?)
        } else {
            (0.0, 0.0)
        };
        let eig = c.eigenvalues();
        let nsd = is_nsd(&c.normalized(), tol);
        if !nsd {
            violations.push(Violation {
                x,
                y,
                eigenvalues: eig,
            });
        }
        rows.push(SweepRow {
            x,
            y,
            a11: c.a11,
            a12: c.a12,
            a22: c.a22,
            eig_max: eig[1],
            residual,
            relative_residual,
            nsd,
        });
    }
    Ok(SweepReport {
        surface: m.label(),
        tol,
        rows,
        violations,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::make_catalog_surface;

    fn surface(name: &str) -> MSurface {
        make_catalog_surface(name, None).unwrap()
    }

    #[test]
    fn matrix_examples() {
        let c = constraint_matrix(&surface("gross"), 1.0, 1.0).unwrap();
        assert_eq!((c.a11, c.a12, c.a22), (-1.0, 1.0, -1.0));
        for &(x, y) in &[(0.0, 0.0), (2.0, 1.0), (-3.0, 7.5)] {
            let c = constraint_matrix(&surface("nash"), x, y).unwrap();
            assert_eq!((c.a11, c.a12, c.a22), (0.0, 0.0, -2.0));
            let c = constraint_matrix(&surface("b_theorem"), x, y).unwrap();
            assert_eq!((c.a11, c.a12, c.a22), (1.0, 0.0, -1.0));
        }
        assert!(matches!(
            constraint_matrix(&surface("gross"), 0.0, 1.0),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn nsd_examples() {
        let m = |a11, a12, a22| ConstraintMatrix { a11, a12, a22 };
        assert!(is_nsd(&m(0.0, 0.0, -2.0), 0.0));
        assert!(!is_nsd(&m(1.0, 0.0, -1.0), 1e-9));
        assert!(is_nsd(&m(-1.0, 1.0, -1.0), 0.0));
        assert_eq!(m(-1.0, 1.0, -1.0).eigenvalues(), [-2.0, 0.0]);
    }

    #[test]
    fn degeneracy_examples() {
        let gross = surface("gross");
        for &(x, y) in &[(0.3, 0.2), (1.0, 1.0), (5.0, 9.0)] {
            assert!(degeneracy_residual(&gross, x, y).unwrap().abs() < 1e-10);
        }
        let b = make_catalog_surface("beckner", Some(1.5)).unwrap();
        assert!(degeneracy_residual(&b, 1.0, 1.0).unwrap() > 0.0);
        assert_eq!(
            degeneracy_residual(&surface("nash"), 2.0, 3.0).unwrap(),
            0.0
        );
        assert!(degeneracy_residual(&gross, 1.0, 0.0).is_err());
    }

    #[test]
    fn beckner_determinant_closed_form() {
        // det = 2 c^2 (a-2)(1-a) x^(2a-6) y^2, a = 2/p, c = (2-p)/p^2
        for &p in &[1.25, 1.5, 1.75] {
            let s = make_catalog_surface("beckner", Some(p)).unwrap();
            let (a, c) = (2.0 / p, (2.0 - p) / (p * p));
            for &(x, y) in &[(0.5f64, 0.3f64), (2.0, 1.0), (3.0, 4.0)] {
                let det = constraint_matrix(&s, x, y).unwrap().det();
                let expect = 2.0 * c * c * (a - 2.0) * (1.0 - a) * x.powf(2.0 * a - 6.0) * y * y;
                assert!((det - expect).abs() < 1e-12 * expect.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn sweep_examples() {
        let gross = surface("gross");
        let grid = default_sweep_grid(&gross);
        assert_eq!(grid.x, Axis::log(0.1, 10.0, 100));
        let r = nsd_grid_sweep(&gross, &grid, 1e-9).unwrap();
        assert!(r.passed(), "{:?}", r.violations.first());
        assert_eq!(r.rows.len(), 10_000);

        let bt = surface("b_theorem");
        let r = nsd_grid_sweep(&bt, &default_sweep_grid(&bt), 1e-9).unwrap();
        assert_eq!(r.violations.len(), 10_000);

        let b1 = make_catalog_surface("beckner", Some(1.0)).unwrap();
        let r = nsd_grid_sweep(&b1, &default_sweep_grid(&b1), 1e-9).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn sweep_skips_singular_nodes() {
        let gross = surface("gross");
        let grid = Grid2::new(Axis::linear(0.0, 1.0, 3), Axis::linear(0.0, 1.0, 2));
        let r = nsd_grid_sweep(&gross, &grid, 1e-9).unwrap();
        assert_eq!(r.skipped.len(), 2);
        assert!(!r.passed());
    }
}
