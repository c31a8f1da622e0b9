use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Grid2};
use crate::roots::{reference_point, solve_increasing};
use crate::surface::{
    is_nsd, jet_relative_degeneracy, make_catalog_surface, ConstraintMatrix, MSurface, SurfaceJet,
};

use super::boundary::{legendre_boundary, BoundaryData, BoundaryKind, ConvexFunction};
use super::heat::{
    bobkov_heat_solution_with_horizon, solve_backward_heat, ClosedForm, HeatJet, HeatMethod,
    HeatSolution, SpectralOptions, DEFAULT_HORIZON,
};

const MAX_NEWTON: usize = 100;
/// Residual accepted when Newton stagnates short of full precision.
const STAGNATION_RESIDUAL: f64 = 1e-10;
/// Step for the finite-difference checks of a reconstructed grid.
pub const FD_STEP: f64 = 1e-4;
/// Relative tolerance for the NSD test on finite-difference jets.
pub const FD_NSD_TOL: f64 = 1e-9;
/// Bound on the relative degeneracy residual of finite-difference jets.
pub const FD_DEGENERACY_TOL: f64 = 1e-6;
/// Bound on `|dM/dx - p|` and `|dM/dy - q|`.
pub const GRADIENT_TOL: f64 = 1e-6;
pub const DEVIATION_TOL: f64 = 1e-8;
pub const ITERATION_LIMIT: usize = 15;

/// One solved point of the characteristic map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub m: f64,
    pub p: f64,
    /// Always `<= 0`.
    pub q: f64,
    pub iterations: usize,
    /// Max-norm of `(u_p - x, q u_t - y)` at the solution.
    pub residual: f64,
}

fn jet_at(u: &HeatSolution, p: f64, q: f64) -> Result<HeatJet> {
    u.eval(p, 0.5 * q * q)
}

fn map_residual(j: &HeatJet, q: f64, x: f64, y: f64) -> [f64; 2] {
    [j.up - x, q * j.ut - y]
}

/// Solve `u_p(p, 0) = x`, which inverts the boundary gradient.
fn boundary_p(u: &HeatSolution, x: f64, start: Option<f64>) -> Result<f64> {
    let domain = u.region().p_interval();
    let start = start.unwrap_or_else(|| reference_point(&domain));
    solve_increasing(
        |p| {
            let j = u.eval(p, 0.0)?;
            Ok((j.up, j.upp))
        },
        x,
        &domain,
        start,
    )
}

/// Recover `M(x, y)` from a heat solution by solving
/// `x = u_p(p, q^2/2)`, `y = q u_t(p, q^2/2)` with `q <= 0`.
///
/// `seed` is a starting `(p, q)`, typically the solution at a neighbouring
/// node. Without one, Newton starts from `(Phi'(x), 0)`.
pub fn reconstruct_point(
    u: &HeatSolution,
    x: f64,
    y: f64,
    seed: Option<(f64, f64)>,
) -> Result<ReconstructionResult> {
    if !x.is_finite() || !(y >= 0.0) || !y.is_finite() {
        return Err(Error::domain(format!(
            "reconstruction needs finite x and y >= 0, got ({x}, {y})"
        )));
    }
    if y == 0.0 {
        let p = boundary_p(u, x, seed.map(|s| s.0))?;
        let j = u.eval(p, 0.0)?;
        return Ok(ReconstructionResult {
            m: p * x - j.u,
            p,
            q: 0.0,
            iterations: 0,
            residual: (j.up - x).abs(),
        });
    }

    let (mut p, mut q) = match seed {
        Some((p, q)) if jet_at(u, p, q.min(0.0)).is_ok() => (p, q.min(0.0)),
        _ => (boundary_p(u, x, seed.map(|s| s.0))?, 0.0),
    };
    let tol = 1e-14 * x.abs().max(y).max(1.0);
    let mut j = jet_at(u, p, q)?;
    let mut f = map_residual(&j, q, x, y);
    let norm2 = |f: &[f64; 2]| f[0] * f[0] + f[1] * f[1];
    let finish = |p: f64, q: f64, j: &HeatJet, f: &[f64; 2], iterations| ReconstructionResult {
        m: p * x + q * y - j.u,
        p,
        q,
        iterations,
        residual: f[0].abs().max(f[1].abs()),
    };

    for it in 0..MAX_NEWTON {
        let r = f[0].abs().max(f[1].abs());
        if r <= tol {
            return Ok(finish(p, q, &j, &f, it));
        }
        let (a, b, d) = (j.upp, q * j.upt, j.ut + q * q * j.utt);
        let det = a * d - b * b;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular(format!(
                "characteristic Jacobian is singular at (p, q) = ({p}, {q})"
            )));
        }
        let dp = -(d * f[0] - b * f[1]) / det;
        let dq = -(a * f[1] - b * f[0]) / det;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let tp = p + lambda * dp;
            let mut tq = q + lambda * dq;
            if tq > 0.0 {
                tq = 0.5 * q;
            }
            if let Ok(tj) = jet_at(u, tp, tq) {
                let tf = map_residual(&tj, tq, x, y);
                if norm2(&tf) <= (1.0 - 2e-4 * lambda) * norm2(&f) {
                    accepted = Some((tp, tq, tj, tf));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((tp, tq, tj, tf)) => {
                p = tp;
                q = tq;
                j = tj;
                f = tf;
            }
            None if r <= STAGNATION_RESIDUAL => return Ok(finish(p, q, &j, &f, it)),
            None => {
                return Err(Error::NoConvergence {
                    iterations: it,
                    residual: r,
                });
            }
        }
    }
    let r = f[0].abs().max(f[1].abs());
    if r <= STAGNATION_RESIDUAL {
        Ok(finish(p, q, &j, &f, MAX_NEWTON))
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_NEWTON,
            residual: r,
        })
    }
}

/// Exact derivatives of the reconstructed surface at a solved point.
///
/// The Hessian of `M` is the inverse of the characteristic Jacobian
/// `[[u_pp, q u_pt], [q u_pt, u_t + q^2 u_tt]]`, whose determinant is minus
/// the ellipticity certificate. A vanishing certificate is reported as a
/// singular node.
pub fn reconstructed_jet(u: &HeatSolution, r: &ReconstructionResult) -> Result<SurfaceJet> {
    let j = jet_at(u, r.p, r.q)?;
    let (a, b, d) = (j.upp, r.q * j.upt, j.ut + r.q * r.q * j.utt);
    let det = a * d - b * b;
    let scale = a.abs().max(b.abs()).max(d.abs());
    if !(det.abs() > 1e-14 * scale * scale) {
        return Err(Error::Singular(format!(
            "ellipticity certificate vanishes at (p, q) = ({}, {})",
            r.p, r.q
        )));
    }
    Ok(SurfaceJet {
        m: r.m,
        mx: r.p,
        my: r.q,
        mxx: d / det,
        mxy: -b / det,
        myy: a / det,
    })
}

/// Per-node outcome of [`reconstruct_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub x: f64,
    pub y: f64,
    pub result: ReconstructionResult,
    /// `M` from the reference surface, when one was given.
    pub reference: Option<f64>,
    /// Largest of `|dM/dx - p|`, `|dM/dy - q|` by central differences.
    pub gradient_error: Option<f64>,
    /// Jet with second derivatives from differences of `p` and `q`.
    pub fd_jet: Option<SurfaceJet>,
    pub nsd: Option<bool>,
    /// Zero at `y = 0`.
    pub relative_degeneracy: Option<f64>,
}

impl GridNode {
    pub fn deviation(&self) -> Option<f64> {
        self.reference.map(|m| (m - self.result.m).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFailure {
    pub x: f64,
    pub y: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub heat: String,
    pub reference: Option<String>,
    pub nodes: Vec<GridNode>,
    /// Nodes outside the characteristic image or where Newton failed.
    pub failed: Vec<NodeFailure>,
    /// Nodes whose finite-difference checks could not be formed.
    pub fd_skipped: Vec<NodeFailure>,
}

impl ReconstructionReport {
    pub fn total(&self) -> usize {
        self.nodes.len() + self.failed.len()
    }

    pub fn failure_fraction(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.failed.len() as f64 / self.total() as f64
        }
    }

    pub fn max_deviation(&self) -> Option<f64> {
        self.nodes
            .iter()
            .filter_map(GridNode::deviation)
            .reduce(f64::max)
    }

    pub fn max_iterations(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.result.iterations)
            .max()
            .unwrap_or(0)
    }

    pub fn max_residual(&self) -> f64 {
        self.nodes.iter().fold(0.0, |a, n| a.max(n.result.residual))
    }

    pub fn max_gradient_error(&self) -> f64 {
        self.nodes
            .iter()
            .filter_map(|n| n.gradient_error)
            .fold(0.0, f64::max)
    }

    pub fn max_relative_degeneracy(&self) -> f64 {
        self.nodes
            .iter()
            .filter_map(|n| n.relative_degeneracy)
            .fold(0.0, |a, r| a.max(r.abs()))
    }

    pub fn nsd_violations(&self) -> usize {
        self.nodes.iter().filter(|n| n.nsd == Some(false)).count()
    }

    /// Every node solved within the iteration budget, the finite-difference
    /// checks hold, and the reference surface (if any) is matched.
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
            && self.fd_skipped.is_empty()
            && self.max_iterations() <= ITERATION_LIMIT
            && self.max_gradient_error() <= GRADIENT_TOL
            && self.nsd_violations() == 0
            && self.max_relative_degeneracy() <= FD_DEGENERACY_TOL
            && self.max_deviation().is_none_or(|d| d <= DEVIATION_TOL)
    }
}

struct FdCheck {
    gradient_error: f64,
    jet: SurfaceJet,
}

/// Central differences at step `h` (one-sided second order near `y = 0`):
/// `[M_xx, M_xy, M_yy, dM/dx, dM/dy]`.
fn fd_derivatives(
    u: &HeatSolution,
    x: f64,
    y: f64,
    r: &ReconstructionResult,
    h: f64,
) -> Result<[f64; 5]> {
    let seed = Some((r.p, r.q));
    let at = |xx: f64, yy: f64| reconstruct_point(u, xx, yy, seed);
    let (xp, xm) = (at(x + h, y)?, at(x - h, y)?);
    let (myy, dm_dy) = if y >= h {
        let (yp, ym) = (at(x, y + h)?, at(x, y - h)?);
        ((yp.q - ym.q) / (2.0 * h), (yp.m - ym.m) / (2.0 * h))
    } else {
        let (y1, y2) = (at(x, y + h)?, at(x, y + 2.0 * h)?);
        (
            (-3.0 * r.q + 4.0 * y1.q - y2.q) / (2.0 * h),
            (-3.0 * r.m + 4.0 * y1.m - y2.m) / (2.0 * h),
        )
    };
    Ok([
        (xp.p - xm.p) / (2.0 * h),
        (xp.q - xm.q) / (2.0 * h),
        myy,
        (xp.m - xm.m) / (2.0 * h),
        dm_dy,
    ])
}

/// Differences at `FD_STEP` and `FD_STEP / 2`, combined by one Richardson step.
fn fd_check(u: &HeatSolution, x: f64, y: f64, r: &ReconstructionResult) -> Result<FdCheck> {
    let coarse = fd_derivatives(u, x, y, r, FD_STEP)?;
    let fine = fd_derivatives(u, x, y, r, 0.5 * FD_STEP)?;
    let d: Vec<f64> = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    Ok(FdCheck {
        gradient_error: (d[3] - r.p).abs().max((d[4] - r.q).abs()),
        jet: SurfaceJet {
            m: r.m,
            mx: r.p,
            my: r.q,
            mxx: d[0],
            mxy: d[1],
            myy: d[2],
        },
    })
}

/// Reconstruct every grid node, continuing along `y` within each `x` row,
/// and check the result by finite differences against the constraint
/// matrix and, when given, against a reference surface.
pub fn reconstruct_grid(
    u: &HeatSolution,
    grid: &Grid2,
    reference: Option<&MSurface>,
) -> Result<ReconstructionReport> {
    grid.validate()?;
    let mut ys = grid.y.points();
    ys.sort_by(f64::total_cmp);
    let mut report = ReconstructionReport {
        heat: u.name(),
        reference: reference.map(MSurface::label),
        nodes: Vec::with_capacity(grid.len()),
        failed: Vec::new(),
        fd_skipped: Vec::new(),
    };
    for x in grid.x.points() {
        let mut seed = None;
        for &y in &ys {
            let r = match reconstruct_point(u, x, y, seed) {
                Ok(r) => r,
                Err(e) => {
                    report.failed.push(NodeFailure {
                        x,
                        y,
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            seed = Some((r.p, r.q));
            let mut node = GridNode {
                x,
                y,
                result: r,
                reference: None,
                gradient_error: None,
                fd_jet: None,
                nsd: None,
                relative_degeneracy: None,
            };
            if let Some(m) = reference {
                match m.value(x, y) {
                    Ok(v) => node.reference = Some(v),
                    Err(e) => report.fd_skipped.push(NodeFailure {
                        x,
                        y,
                        reason: format!("reference surface: {e}"),
                    }),
                }
            }
            match fd_check(u, x, y, &r) {
                Ok(fd) => {
                    let c = ConstraintMatrix::from_jet(&fd.jet, y);
                    node.gradient_error = Some(fd.gradient_error);
                    node.nsd = Some(is_nsd(&c.normalized(), FD_NSD_TOL));
                    node.relative_degeneracy = Some(if y > 0.0 {
                        jet_relative_degeneracy(&fd.jet, y)
                    } else {
                        0.0
                    });
                    node.fd_jet = Some(fd.jet);
                }
                Err(e) => report.fd_skipped.push(NodeFailure {
                    x,
                    y,
                    reason: e.to_string(),
                }),
            }
            report.nodes.push(node);
        }
    }
    Ok(report)
}

/// Method used for a boundary when no closed form is requested explicitly.
pub fn default_heat_method(boundary: &BoundaryData) -> HeatMethod {
    match boundary.kind() {
        BoundaryKind::Gross => HeatMethod::ClosedForm(ClosedForm::Exponential),
        BoundaryKind::Nash => HeatMethod::ClosedForm(ClosedForm::Quadratic),
        BoundaryKind::Bobkov => HeatMethod::ClosedForm(ClosedForm::BobkovCdf),
        BoundaryKind::Arccos => HeatMethod::ClosedForm(ClosedForm::Sine),
        BoundaryKind::ThreeHalves | BoundaryKind::Power(_) => HeatMethod::Polynomial {
            p_window: (0.0, 4.0),
            max_degree: 12,
        },
        BoundaryKind::Custom { .. } => {
            let image = boundary.gradient_image();
            let c = reference_point(&image);
            HeatMethod::Spectral(SpectralOptions {
                center: c,
                p_window: (c - 3.0, c + 3.0),
                ..SpectralOptions::default()
            })
        }
    }
}

/// Legendre-transform the boundary data and solve the backwards heat
/// equation from it up to `horizon`.
pub fn heat_solution_for(
    boundary: &BoundaryData,
    method: &HeatMethod,
    horizon: f64,
) -> Result<HeatSolution> {
    let u0 = legendre_boundary(boundary.clone())?;
    solve_backward_heat(&|p| u0.value(p), boundary.gradient_image(), method, horizon)
}

/// Everything needed to reconstruct one catalog boundary.
#[derive(Debug, Clone)]
pub struct ReconstructionCase {
    pub boundary: BoundaryData,
    pub heat: HeatSolution,
    /// Catalog surface with the same boundary values.
    pub surface: Option<MSurface>,
    pub grid: Grid2,
}

/// Default horizon for a named boundary.
pub fn default_horizon(name: &str) -> f64 {
    if name == "bobkov" {
        0.45
    } else {
        DEFAULT_HORIZON
    }
}

/// Default 50x50 grid inside the characteristic image of each boundary.
pub fn default_reconstruction_grid(name: &str) -> Option<Grid2> {
    let (x, y) = match name {
        "gross" => ((0.5, 5.0), (0.0, 1.5)),
        "nash" => ((-2.0, 2.0), (0.0, 1.5)),
        "bobkov" => ((0.05, 0.95), (0.0, 0.25)),
        "three_halves" => ((0.1, 5.0), (0.0, 3.0)),
        "arccos" => ((-0.9, 0.9), (0.0, 2.0)),
        _ => return None,
    };
    Some(Grid2::new(
        Axis::linear(x.0, x.1, 50),
        Axis::linear(y.0, y.1, 50),
    ))
}

/// Build the reconstruction for a catalog boundary; `horizon` overrides the
/// default validity horizon in `t`.
pub fn reconstruction_case(name: &str, horizon: Option<f64>) -> Result<ReconstructionCase> {
    let boundary = BoundaryData::by_name(name, None)?;
    let horizon = horizon.unwrap_or_else(|| default_horizon(name));
    let heat = match boundary.kind() {
        BoundaryKind::Bobkov => bobkov_heat_solution_with_horizon(horizon)?,
        _ => heat_solution_for(&boundary, &default_heat_method(&boundary), horizon)?,
    };
    let grid = default_reconstruction_grid(name).ok_or_else(|| Error::UnknownName {
        kind: "boundary",
        name: name.to_string(),
    })?;
    Ok(ReconstructionCase {
        surface: Some(make_catalog_surface(name, None)?),
        boundary,
        heat,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eds::heat::{bobkov_heat_solution, HeatSolution};

    fn closed(form: ClosedForm) -> HeatSolution {
        HeatSolution::closed_form(form, 8.0).unwrap()
    }

    #[test]
    fn nash_point() {
        let u = closed(ClosedForm::Quadratic);
        for &(x, y) in &[(0.3, 0.4), (-1.5, 1.0), (2.0, 0.01)] {
            let r = reconstruct_point(&u, x, y, None).unwrap();
            assert!((r.p - 2.0 * x).abs() < 1e-13);
            assert!((r.q + 2.0 * y).abs() < 1e-13);
            assert!((r.m - (x * x - y * y)).abs() < 1e-13);
        }
    }

    #[test]
    fn gross_point() {
        let u = closed(ClosedForm::Exponential);
        for &(x, y) in &[(1.0, 0.5), (0.5, 1.5), (4.0, 0.2)] {
            let r = reconstruct_point(&u, x, y, None).unwrap();
            let x: f64 = x;
            assert!((r.q + y / x).abs() < 1e-13);
            assert!((r.p - (x.ln() + y * y / (2.0 * x * x) + 1.0)).abs() < 1e-12);
            assert!((r.m - (x * x.ln() - y * y / (2.0 * x))).abs() < 1e-12);
            assert!(r.residual <= 1e-10);
        }
    }

    #[test]
    #[allow(clippy::type_complexity)]
    fn boundary_values() {
        let cases: [(HeatSolution, fn(f64) -> f64, &[f64]); 3] = [
            (
                closed(ClosedForm::Exponential),
                |x| x * x.ln(),
                &[0.2, 1.0, 3.0],
            ),
            (closed(ClosedForm::Quadratic), |x| x * x, &[-1.0, 0.5]),
            (
                closed(ClosedForm::Sine),
                |x| x * (-x).acos() + (1.0 - x * x).sqrt(),
                &[-0.7, 0.0, 0.9],
            ),
        ];
        for (u, phi, xs) in &cases {
            for &x in *xs {
                let r = reconstruct_point(u, x, 0.0, None).unwrap();
                assert_eq!(r.q, 0.0);
                assert!((r.m - phi(x)).abs() < 1e-13, "{} at {x}", u.name());
            }
        }
    }

    #[test]
    fn three_halves_seed_is_exact() {
        let case = reconstruction_case("three_halves", None).unwrap();
        for &(x, y) in &[(1.0f64, 1.0f64), (0.1, 3.0), (5.0, 0.5)] {
            let p = 0.75 * (2.0 * x + 2.0 * x.hypot(y)).sqrt();
            let q = -9.0 / 8.0 * y / p;
            let r = reconstruct_point(&case.heat, x, y, Some((p, q))).unwrap();
            assert!(r.iterations <= 1, "{}", r.iterations);
            assert!((r.p - p).abs() < 1e-12 && (r.q - q).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_jet_matches_catalog() {
        for name in ["gross", "nash", "bobkov", "three_halves", "arccos"] {
            let case = reconstruction_case(name, None).unwrap();
            let m = case.surface.unwrap();
            let (x, y) = match name {
                "bobkov" => (0.3, 0.1),
                "arccos" => (0.2, 0.7),
                _ => (1.2, 0.6),
            };
            let r = reconstruct_point(&case.heat, x, y, None).unwrap();
            let got = reconstructed_jet(&case.heat, &r).unwrap();
            let want = m.jet(x, y).unwrap();
            for (a, b) in [
                (got.m, want.m),
                (got.mx, want.mx),
                (got.my, want.my),
                (got.mxx, want.mxx),
                (got.mxy, want.mxy),
                (got.myy, want.myy),
            ] {
                assert!(
                    (a - b).abs() < 1e-9 * b.abs().max(1.0),
                    "{name}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn region_is_enforced() {
        let u = bobkov_heat_solution_with_horizon(0.2).unwrap();
        // needs |q| > sqrt(0.4)
        assert!(reconstruct_point(&u, 0.05, 0.25, None).is_err());
        assert!(reconstruct_point(&bobkov_heat_solution(), 0.05, 0.25, None).is_ok());
        assert!(matches!(
            reconstruction_case("bobkov", Some(0.6)),
            Err(Error::Region(_))
        ));
        assert!(reconstruct_point(&u, 0.5, -1.0, None).is_err());
    }

    #[test]
    fn grid_reports_unreachable_nodes() {
        let u = bobkov_heat_solution_with_horizon(0.2).unwrap();
        let grid = Grid2::new(Axis::linear(0.05, 0.5, 3), Axis::linear(0.0, 0.3, 4));
        let rep = reconstruct_grid(&u, &grid, None).unwrap();
        assert!(!rep.failed.is_empty());
        assert_eq!(rep.total(), 12);
        assert!(!rep.passed());
    }

    #[test]
    fn nash_grid() {
        let case = reconstruction_case("nash", None).unwrap();
        let rep = reconstruct_grid(&case.heat, &case.grid, case.surface.as_ref()).unwrap();
        assert!(rep.passed(), "{:?}", rep.failed.first());
        assert!(rep.max_deviation().unwrap() <= 1e-10);
    }
}
