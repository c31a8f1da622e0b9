use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Grid2};
use crate::special::{heat_polynomial, hermite_rule_1d, std_normal_cdf, std_normal_pdf};
use crate::surface::Interval;

/// Default horizon for closed-form solutions.
pub const DEFAULT_HORIZON: f64 = 8.0;
/// Mode amplification above which the spectral solver refuses to run.
pub const AMPLIFICATION_LIMIT: f64 = 1e6;

/// `u` and its derivatives up to second order in `(p, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatJet {
    pub u: f64,
    pub up: f64,
    pub ut: f64,
    pub upp: f64,
    pub upt: f64,
    pub utt: f64,
}

impl HeatJet {
    pub fn det_hessian(&self) -> f64 {
        self.upp * self.utt - self.upt * self.upt
    }

    /// `u_t^2 - 2 t det(Hess u)`.
    pub fn certificate(&self, t: f64) -> f64 {
        self.ut * self.ut - 2.0 * t * self.det_hessian()
    }
}

/// Validity region of a heat solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub p_lo: f64,
    pub p_hi: f64,
    pub t_max: f64,
    /// `t < t_max` rather than `t <= t_max`.
    pub t_exclusive: bool,
}

impl Region {
    pub fn contains(&self, p: f64, t: f64) -> bool {
        let t_ok = t >= 0.0
            && if self.t_exclusive {
                t < self.t_max
            } else {
                t <= self.t_max
            };
        t_ok && p >= self.p_lo && p <= self.p_hi
    }

    pub fn check(&self, p: f64, t: f64) -> Result<()> {
        if self.contains(p, t) {
            Ok(())
        } else {
            Err(Error::Region(format!(
                "(p, t) = ({p}, {t}) outside p in [{}, {}], 0 <= t {} {}",
                self.p_lo,
                self.p_hi,
                if self.t_exclusive { "<" } else { "<=" },
                self.t_max
            )))
        }
    }

    pub fn p_interval(&self) -> Interval {
        Interval {
            lo: self.p_lo,
            hi: self.p_hi,
            lo_closed: self.p_lo.is_finite(),
            hi_closed: self.p_hi.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    /// `e^(p - t - 1)`.
    Exponential,
    /// `p^2/4 - t/2`.
    Quadratic,
    /// `sqrt(1-2t) phi(p/sqrt(1-2t)) + p Phi(p/sqrt(1-2t))`, `t < 1/2`.
    BobkovCdf,
    /// `-e^t sin p` on `[0, pi]`.
    Sine,
}

impl ClosedForm {
    fn region(self, horizon: f64) -> Result<Region> {
        let real = |t_max| Region {
            p_lo: f64::NEG_INFINITY,
            p_hi: f64::INFINITY,
            t_max,
            t_exclusive: false,
        };
        Ok(match self {
            ClosedForm::Exponential | ClosedForm::Quadratic => real(horizon),
            ClosedForm::Sine => Region {
                p_lo: 0.0,
                p_hi: std::f64::consts::PI,
                t_max: horizon,
                t_exclusive: false,
            },
            ClosedForm::BobkovCdf => {
                if horizon >= 0.5 {
                    return Err(Error::Region(format!(
                        "the Bobkov heat solution blows up at t = 1/2; horizon {horizon} is not allowed"
                    )));
                }
                real(horizon)
            }
        })
    }

    fn eval(self, p: f64, t: f64) -> HeatJet {
        match self {
            ClosedForm::Exponential => {
                let e = (p - t - 1.0).exp();
                HeatJet {
                    u: e,
                    up: e,
                    ut: -e,
                    upp: e,
                    upt: -e,
                    utt: e,
                }
            }
            ClosedForm::Quadratic => HeatJet {
                u: 0.25 * p * p - 0.5 * t,
                up: 0.5 * p,
                ut: -0.5,
                upp: 0.5,
                upt: 0.0,
                utt: 0.0,
            },
            ClosedForm::BobkovCdf => {
                let tau = (1.0 - 2.0 * t).sqrt();
                let z = p / tau;
                let phi = std_normal_pdf(z);
                HeatJet {
                    u: tau * phi + p * std_normal_cdf(z),
                    up: std_normal_cdf(z),
                    ut: -phi / tau,
                    upp: phi / tau,
                    upt: z * phi / (tau * tau),
                    utt: (z * z - 1.0) * phi / (tau * tau * tau),
                }
            }
            ClosedForm::Sine => {
                let e = t.exp();
                let (s, c) = p.sin_cos();
                HeatJet {
                    u: -e * s,
                    up: -e * c,
                    ut: -e * s,
                    upp: e * s,
                    upt: -e * c,
                    utt: -e * s,
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClosedForm::Exponential => "exponential",
            ClosedForm::Quadratic => "quadratic",
            ClosedForm::BobkovCdf => "bobkov_cdf",
            ClosedForm::Sine => "sine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    ClosedForm,
    Polynomial,
    Spectral,
}

/// Options for the Hermite-mode solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Center `c` of the Gaussian weight `exp(-(p - c)^2 / (2 sigma^2))`.
    pub center: f64,
    pub sigma: f64,
    /// Number of Hermite modes kept.
    pub modes: usize,
    /// Quadrature order used for the projection.
    pub order: usize,
    /// Reported validity window in `p`.
    pub p_window: (f64, f64),
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            center: 0.0,
            sigma: 1.0,
            modes: 24,
            order: 128,
            p_window: (-3.0, 3.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HeatMethod {
    ClosedForm(ClosedForm),
    /// Least-squares fit of a polynomial of degree at most `max_degree` on
    /// `p_window`, accepted only if it reproduces `u0` there.
    Polynomial {
        p_window: (f64, f64),
        max_degree: usize,
    },
    Spectral(SpectralOptions),
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Closed(ClosedForm),
    /// Monomial coefficients of `u0`; `u = sum a_k H_k(p, t)`.
    Polynomial(Vec<f64>),
    /// Normalized Hermite coefficients of `u0(center + sigma z)`.
    Spectral {
        center: f64,
        sigma: f64,
        coeffs: Vec<f64>,
    },
}

/// A solution of `u_pp + u_t = 0` with an explicit validity region.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatSolution {
    repr: Repr,
    region: Region,
    amplification: Option<f64>,
}

impl HeatSolution {
    pub fn closed_form(form: ClosedForm, horizon: f64) -> Result<Self> {
        check_horizon(horizon)?;
        Ok(HeatSolution {
            repr: Repr::Closed(form),
            region: form.region(horizon)?,
            amplification: None,
        })
    }

    pub fn method(&self) -> MethodKind {
        match self.repr {
            Repr::Closed(_) => MethodKind::ClosedForm,
            Repr::Polynomial(_) => MethodKind::Polynomial,
            Repr::Spectral { .. } => MethodKind::Spectral,
        }
    }

    pub fn name(&self) -> String {
        match &self.repr {
            Repr::Closed(f) => f.name().to_string(),
            Repr::Polynomial(c) => format!("polynomial(degree {})", c.len().saturating_sub(1)),
            Repr::Spectral { coeffs, .. } => format!("spectral({} modes)", coeffs.len()),
        }
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// Largest mode amplification at the horizon (spectral solutions only).
    pub fn amplification(&self) -> Option<f64> {
        self.amplification
    }

    /// Monomial coefficients of `u(p, 0)` for polynomial solutions.
    pub fn polynomial_coefficients(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Polynomial(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, p: f64, t: f64) -> Result<HeatJet> {
        self.region.check(p, t)?;
        Ok(self.eval_unchecked(p, t))
    }

    fn eval_unchecked(&self, p: f64, t: f64) -> HeatJet {
        match &self.repr {
            Repr::Closed(f) => f.eval(p, t),
            Repr::Polynomial(a) => {
                // d/dp H_k = k H_{k-1}, u_t = -u_pp.
                let sum = |shift: usize| -> f64 {
                    a.iter()
                        .enumerate()
                        .skip(shift)
                        .map(|(k, c)| {
                            let falling: f64 = (0..shift).map(|j| (k - j) as f64).product();
                            c * falling * heat_polynomial(k - shift, p, t)
                        })
                        .sum()
                };
                let upp = sum(2);
                HeatJet {
                    u: sum(0),
                    up: sum(1),
                    ut: -upp,
                    upp,
                    upt: -sum(3),
                    utt: sum(4),
                }
            }
            Repr::Spectral {
                center,
                sigma,
                coeffs,
            } => {
                let b = evolve_modes(coeffs, t / (sigma * sigma));
                let z = (p - center) / sigma;
                let d = |k: usize| series_derivative(&b, z, k) / sigma.powi(k as i32);
                let upp = d(2);
                HeatJet {
                    u: d(0),
                    up: d(1),
                    ut: -upp,
                    upp,
                    upt: -d(3),
                    utt: d(4),
                }
            }
        }
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon >= 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "horizon must be finite and >= 0, got {horizon}"
        )))
    }
}

/// The Bobkov solution on `0 <= t <= horizon < 1/2`.
pub fn bobkov_heat_solution_with_horizon(horizon: f64) -> Result<HeatSolution> {
    HeatSolution::closed_form(ClosedForm::BobkovCdf, horizon)
}

/// The Bobkov solution on its full region `0 <= t < 1/2`.
pub fn bobkov_heat_solution() -> HeatSolution {
    HeatSolution {
        repr: Repr::Closed(ClosedForm::BobkovCdf),
        region: Region {
            p_lo: f64::NEG_INFINITY,
            p_hi: f64::INFINITY,
            t_max: 0.5,
            t_exclusive: true,
        },
        amplification: None,
    }
}

/// Sample points used to compare `u0` with a candidate solution.
fn probe(domain: &Interval, window: (f64, f64), n: usize) -> Vec<f64> {
    let lo = if domain.lo.is_finite() {
        domain.lo.max(window.0)
    } else {
        window.0
    };
    let hi = if domain.hi.is_finite() {
        domain.hi.min(window.1)
    } else {
        window.1
    };
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .filter(|p| domain.contains(*p))
        .collect()
}

/// Solve the backwards heat equation `u_pp + u_t = 0` from `u(p, 0) = u0(p)`.
pub fn solve_backward_heat(
    u0: &dyn Fn(f64) -> Result<f64>,
    p_domain: Interval,
    method: &HeatMethod,
    horizon: f64,
) -> Result<HeatSolution> {
    check_horizon(horizon)?;
    match *method {
        HeatMethod::ClosedForm(form) => {
            let sol = HeatSolution::closed_form(form, horizon)?;
            for p in probe(&p_domain, (-4.0, 4.0), 17) {
                if !sol.region.contains(p, 0.0) {
                    continue;
                }
                let want = u0(p)?;
                let got = form.eval(p, 0.0).u;
                if (want - got).abs() > 1e-9 * want.abs().max(1.0) {
                    return Err(Error::precondition(format!(
                        "u0({p}) = {want} does not match the {} family ({got})",
                        form.name()
                    )));
                }
            }
            Ok(sol)
        }
        HeatMethod::Polynomial {
            p_window,
            max_degree,
        } => {
            let coeffs = fit_polynomial(u0, &p_domain, p_window, max_degree)?;
            Ok(HeatSolution {
                repr: Repr::Polynomial(coeffs),
                region: Region {
                    p_lo: p_domain.lo,
                    p_hi: p_domain.hi,
                    t_max: horizon,
                    t_exclusive: false,
                },
                amplification: None,
            })
        }
        HeatMethod::Spectral(opts) => spectral(u0, &p_domain, &opts, horizon),
    }
}

/// Smallest-degree polynomial reproducing `u0` on the window to 1e-10.
fn fit_polynomial(
    u0: &dyn Fn(f64) -> Result<f64>,
    domain: &Interval,
    window: (f64, f64),
    max_degree: usize,
) -> Result<Vec<f64>> {
    if max_degree > 12 {
        return Err(Error::Unsupported(format!(
            "polynomial boundary data limited to degree 12, got {max_degree}"
        )));
    }
    let fit_pts = probe(domain, window, 41);
    let check_pts = probe(domain, (window.0 + 0.013, window.1 - 0.017), 37);
    if fit_pts.len() < max_degree + 2 {
        return Err(Error::domain(
            "polynomial fit window does not meet the boundary domain",
        ));
    }
    let values: Vec<f64> = fit_pts.iter().map(|&p| u0(p)).collect::<Result<_>>()?;
    let checks: Vec<f64> = check_pts.iter().map(|&p| u0(p)).collect::<Result<_>>()?;
    let scale = values
        .iter()
        .chain(&checks)
        .fold(1.0f64, |a, v| a.max(v.abs()));
    let mid = 0.5 * (fit_pts[0] + fit_pts[fit_pts.len() - 1]);
    let half = 0.5 * (fit_pts[fit_pts.len() - 1] - fit_pts[0]);

    for degree in 0..=max_degree {
        let a = DMatrix::from_fn(fit_pts.len(), degree + 1, |i, j| {
            ((fit_pts[i] - mid) / half).powi(j as i32)
        });
        let svd = a.svd(true, true);
        let scaled = svd
            .solve(&DVector::from_vec(values.clone()), 1e-14)
            .map_err(|e| Error::Precondition(e.to_string()))?;
        // Expand sum c_j ((p - mid)/half)^j into monomials of p.
        let mut coeffs = vec![0.0; degree + 1];
        for (j, c) in scaled.iter().enumerate() {
            let cj = c / half.powi(j as i32);
            let mut binom = 1.0;
            for (k, coeff) in coeffs.iter_mut().enumerate().take(j + 1) {
                *coeff += cj * binom * (-mid).powi((j - k) as i32);
                binom = binom * (j - k) as f64 / (k + 1) as f64;
            }
        }
        let eval = |p: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * p + c);
        let ok = check_pts
            .iter()
            .zip(&checks)
            .chain(fit_pts.iter().zip(&values))
            .all(|(&p, &v)| (eval(p) - v).abs() <= 1e-10 * scale);
        if ok {
            return Ok(coeffs);
        }
    }
    Err(Error::precondition(format!(
        "boundary data is not a polynomial of degree <= {max_degree} on the fit window"
    )))
}

/// Orthonormal Hermite values `h_0(z), ..., h_{n-1}(z)`.
fn hermite_values(z: f64, n: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(n);
    if n == 0 {
        return h;
    }
    h.push(1.0);
    if n > 1 {
        h.push(z);
    }
    for k in 1..n.saturating_sub(1) {
        let next = (z * h[k] - (k as f64).sqrt() * h[k - 1]) / ((k + 1) as f64).sqrt();
        h.push(next);
    }
    h
}

/// Coefficients after backwards evolution by `s = t / sigma^2`:
/// `b_m = sum_j c_{m+2j} (-s)^j / j! sqrt((m+2j)! / m!)`.
fn evolve_modes(c: &[f64], s: f64) -> Vec<f64> {
    if s == 0.0 {
        return c.to_vec();
    }
    let n = c.len();
    (0..n)
        .map(|m| {
            let mut total = 0.0;
            let mut weight = 1.0; // (-s)^j / j! * sqrt((m+2j)!/m!)
            let mut j = 0;
            while m + 2 * j < n {
                total += c[m + 2 * j] * weight;
                let k = m + 2 * j;
                weight *= -s / (j + 1) as f64 * (((k + 1) * (k + 2)) as f64).sqrt();
                j += 1;
            }
            total
        })
        .collect()
}

/// `d^k/dz^k` of `sum b_m h_m(z)`, using `h_m' = sqrt(m) h_{m-1}`.
fn series_derivative(b: &[f64], z: f64, k: usize) -> f64 {
    let n = b.len();
    if k >= n {
        return 0.0;
    }
    let h = hermite_values(z, n - k);
    (k..n)
        .map(|m| {
            let factor: f64 = (0..k).map(|j| ((m - j) as f64).sqrt()).product();
            b[m] * factor * h[m - k]
        })
        .sum()
}

/// `||e^{-s D^2} h_k||` in the Gaussian `L^2` norm.
fn mode_amplification(k: usize, s: f64) -> f64 {
    // A^2 = sum_j s^{2j} k! / ((j!)^2 (k-2j)!)
    let mut total = 0.0;
    let mut term = 1.0;
    let mut j = 0;
    while 2 * j <= k {
        total += term;
        let kk = (k - 2 * j) as f64;
        term *= s * s * kk * (kk - 1.0) / (((j + 1) * (j + 1)) as f64);
        j += 1;
    }
    total.sqrt()
}

fn max_amplification(modes: usize, s: f64) -> f64 {
    (0..modes)
        .map(|k| mode_amplification(k, s))
        .fold(1.0, f64::max)
}

fn spectral(
    u0: &dyn Fn(f64) -> Result<f64>,
    domain: &Interval,
    opts: &SpectralOptions,
    horizon: f64,
) -> Result<HeatSolution> {
    if !(opts.sigma > 0.0) || opts.modes == 0 {
        return Err(Error::domain(
            "spectral solver needs sigma > 0 and at least one mode",
        ));
    }
    let s_max = horizon / (opts.sigma * opts.sigma);
    let amplification = max_amplification(opts.modes, s_max);
    if amplification > AMPLIFICATION_LIMIT {
        let (mut lo, mut hi) = (0.0, horizon);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if max_amplification(opts.modes, mid / (opts.sigma * opts.sigma)) > AMPLIFICATION_LIMIT
            {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Err(Error::IllPosed {
            amplification,
            limit: AMPLIFICATION_LIMIT,
            safe_horizon: lo,
        });
    }
    let rule = hermite_rule_1d(opts.order)?;
    let mut coeffs = vec![0.0; opts.modes];
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        let p = opts.center + opts.sigma * z;
        if !domain.contains(p) {
            return Err(Error::domain(format!(
                "spectral projection node p = {p} lies outside the boundary data domain {domain}"
            )));
        }
        let v = u0(p)?;
        if !v.is_finite() {
            return Err(Error::Integration {
                node: vec![p],
                value: v,
            });
        }
        for (c, h) in coeffs.iter_mut().zip(hermite_values(z, opts.modes)) {
            *c += w * v * h;
        }
    }
    Ok(HeatSolution {
        repr: Repr::Spectral {
            center: opts.center,
            sigma: opts.sigma,
            coeffs,
        },
        region: Region {
            p_lo: opts.p_window.0.max(domain.lo),
            p_hi: opts.p_window.1.min(domain.hi),
            t_max: horizon,
            t_exclusive: false,
        },
        amplification: Some(amplification),
    })
}

/// Summary of the ellipticity certificate over a `(p, t)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub nodes: usize,
    /// Minimum of `u_t^2 - 2 t det(Hess u)`.
    pub min_certificate: f64,
    pub max_ut: f64,
    pub max_pde_residual: f64,
    pub min_det_hessian: f64,
    pub max_det_hessian: f64,
    pub pass: bool,
}

/// Default `(p, t)` grid: 50x50 over the region, `p` clipped to `[-5, 5]`
/// and `t` stopped at 90% of an open horizon.
pub fn default_ellipticity_grid(u: &HeatSolution) -> Grid2 {
    let r = u.region();
    let t_hi = if r.t_exclusive {
        0.9 * r.t_max
    } else {
        r.t_max
    };
    Grid2::new(
        Axis::linear(r.p_lo.max(-5.0), r.p_hi.min(5.0), 50),
        Axis::linear(0.0, t_hi, 50),
    )
}

/// Evaluate the certificate on a grid whose `x` axis is `p` and `y` axis is `t`.
pub fn ellipticity_check(u: &HeatSolution, grid: &Grid2) -> Result<EllipticityReport> {
    grid.validate()?;
    let mut rep = EllipticityReport {
        nodes: 0,
        min_certificate: f64::INFINITY,
        max_ut: f64::NEG_INFINITY,
        max_pde_residual: 0.0,
        min_det_hessian: f64::INFINITY,
        max_det_hessian: f64::NEG_INFINITY,
        pass: false,
    };
    for (p, t) in grid.nodes() {
        let j = u.eval(p, t)?;
        let det = j.det_hessian();
        rep.nodes += 1;
        rep.min_certificate = rep.min_certificate.min(j.certificate(t));
        rep.max_ut = rep.max_ut.max(j.ut);
        rep.max_pde_residual = rep.max_pde_residual.max((j.upp + j.ut).abs());
        rep.min_det_hessian = rep.min_det_hessian.min(det);
        rep.max_det_hessian = rep.max_det_hessian.max(det);
    }
    rep.pass = rep.min_certificate >= -1e-9 && rep.max_ut <= 1e-9;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fourth-order centered differences of `u` for the PDE residual.
    fn fd_residual(sol: &HeatSolution, p: f64, t: f64) -> f64 {
        let u = |p: f64, t: f64| sol.eval(p, t).unwrap().u;
        let h = 2e-3;
        let upp = (-u(p + 2.0 * h, t) + 16.0 * u(p + h, t) - 30.0 * u(p, t) + 16.0 * u(p - h, t)
            - u(p - 2.0 * h, t))
            / (12.0 * h * h);
        let ut = (-u(p, t + 2.0 * h) + 8.0 * u(p, t + h) - 8.0 * u(p, t - h) + u(p, t - 2.0 * h))
            / (12.0 * h);
        upp + ut
    }

    fn fd_jet(sol: &HeatSolution, p: f64, t: f64) -> [f64; 5] {
        let u = |p: f64, t: f64| sol.eval(p, t).unwrap().u;
        let h = 1e-3;
        [
            (u(p + h, t) - u(p - h, t)) / (2.0 * h),
            (u(p, t + h) - u(p, t - h)) / (2.0 * h),
            (u(p + h, t) - 2.0 * u(p, t) + u(p - h, t)) / (h * h),
            (u(p + h, t + h) - u(p + h, t - h) - u(p - h, t + h) + u(p - h, t - h)) / (4.0 * h * h),
            (u(p, t + h) - 2.0 * u(p, t) + u(p, t - h)) / (h * h),
        ]
    }

    #[test]
    fn closed_form_examples() {
        let e = HeatSolution::closed_form(ClosedForm::Exponential, 8.0).unwrap();
        let j = e.eval(0.7, 1.3).unwrap();
        assert!((j.u - (0.7f64 - 1.3 - 1.0).exp()).abs() < 1e-15);
        let q = HeatSolution::closed_form(ClosedForm::Quadratic, 8.0).unwrap();
        assert_eq!(q.eval(2.0, 1.0).unwrap().u, 0.5);
        let s = HeatSolution::closed_form(ClosedForm::Sine, 8.0).unwrap();
        let j = s.eval(1.0, 0.5).unwrap();
        assert!((j.u + 0.5f64.exp() * 1f64.sin()).abs() < 1e-15);
        assert!(s.eval(4.0, 0.5).is_err());
    }

    #[test]
    fn bobkov_solution() {
        let b = bobkov_heat_solution();
        for &p in &[-1.2, 0.0, 0.8] {
            let j = b.eval(p, 0.0).unwrap();
            assert!((j.u - (std_normal_pdf(p) + p * std_normal_cdf(p))).abs() < 1e-15);
            let j = b.eval(p, 0.3).unwrap();
            assert_eq!(j.up, std_normal_cdf(p / 0.4f64.sqrt()));
        }
        assert!(fd_residual(&b, 0.3, 0.2).abs() < 1e-9);
        assert!(matches!(b.eval(0.0, 0.5), Err(Error::Region(_))));
        assert!(matches!(
            bobkov_heat_solution_with_horizon(0.6),
            Err(Error::Region(_))
        ));
        assert!(bobkov_heat_solution_with_horizon(0.45).is_ok());
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let sols = [
            HeatSolution::closed_form(ClosedForm::Exponential, 8.0).unwrap(),
            HeatSolution::closed_form(ClosedForm::Quadratic, 8.0).unwrap(),
            HeatSolution::closed_form(ClosedForm::Sine, 8.0).unwrap(),
            bobkov_heat_solution(),
        ];
        for sol in &sols {
            for &(p, t) in &[(0.5, 0.1), (1.3, 0.3), (2.0, 0.25)] {
                let j = sol.eval(p, t).unwrap();
                let fd = fd_jet(sol, p, t);
                let an = [j.up, j.ut, j.upp, j.upt, j.utt];
                for k in 0..5 {
                    assert!((an[k] - fd[k]).abs() < 1e-5, "{} {k}", sol.name());
                }
                assert!(fd_residual(sol, p, t).abs() < 1e-8, "{}", sol.name());
            }
        }
    }

    #[test]
    fn closed_form_validates_boundary() {
        let ok = solve_backward_heat(
            &|p| Ok((p - 1.0f64).exp()),
            Interval::REAL,
            &HeatMethod::ClosedForm(ClosedForm::Exponential),
            8.0,
        );
        assert!(ok.is_ok());
        let bad = solve_backward_heat(
            &|p| Ok(p * p),
            Interval::REAL,
            &HeatMethod::ClosedForm(ClosedForm::Quadratic),
            8.0,
        );
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }

    #[test]
    fn polynomial_method() {
        let domain = Interval {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_closed: true,
            hi_closed: false,
        };
        let sol = solve_backward_heat(
            &|p| Ok(4.0 / 27.0 * p * p * p),
            domain,
            &HeatMethod::Polynomial {
                p_window: (0.0, 4.0),
                max_degree: 12,
            },
            8.0,
        )
        .unwrap();
        assert_eq!(sol.polynomial_coefficients().unwrap().len(), 4);
        for &(p, t) in &[(0.5, 0.0), (1.7, 0.4), (3.0, 2.0)] {
            let j = sol.eval(p, t).unwrap();
            let expect = 4.0 / 27.0 * (p * p * p - 6.0 * t * p);
            assert!((j.u - expect).abs() < 1e-12, "{p} {t}");
            assert!((j.ut + 24.0 / 27.0 * p).abs() < 1e-12);
            assert!((j.upt + 24.0 / 27.0).abs() < 1e-12);
        }
        assert!(sol.eval(-0.1, 0.0).is_err());
        let not_poly = solve_backward_heat(
            &|p: f64| Ok(p.exp()),
            Interval::REAL,
            &HeatMethod::Polynomial {
                p_window: (-1.0, 6.0),
                max_degree: 4,
            },
            1.0,
        );
        assert!(matches!(not_poly, Err(Error::Precondition(_))));
    }

    #[test]
    fn amplification_closed_form() {
        // k = 2: A^2 = 1 + 2 s^2
        assert!((mode_amplification(2, 0.5) - 1.5f64.sqrt()).abs() < 1e-15);
        // k = 4: A^2 = 1 + 12 s^2 + 6 s^4
        let s: f64 = 0.7;
        let expect = (1.0 + 12.0 * s * s + 6.0 * s.powi(4)).sqrt();
        assert!((mode_amplification(4, s) - expect).abs() < 1e-14);
    }

    #[test]
    fn spectral_reproduces_polynomials_and_flags_instability() {
        let opts = SpectralOptions {
            modes: 8,
            ..Default::default()
        };
        let sol = solve_backward_heat(
            &|p| Ok(p * p * p - 2.0 * p),
            Interval::REAL,
            &HeatMethod::Spectral(opts),
            0.5,
        )
        .unwrap();
        for &(p, t) in &[(0.3, 0.0), (-1.1, 0.25), (2.0, 0.5)] {
            let j = sol.eval(p, t).unwrap();
            let expect = heat_polynomial(3, p, t) - 2.0 * p;
            assert!((j.u - expect).abs() < 1e-12);
            assert!((j.upp + j.ut).abs() < 1e-12);
        }
        assert!(sol.amplification().unwrap() < AMPLIFICATION_LIMIT);

        let wide = SpectralOptions {
            modes: 24,
            ..Default::default()
        };
        match solve_backward_heat(
            &|p: f64| Ok(p.cos()),
            Interval::REAL,
            &HeatMethod::Spectral(wide),
            8.0,
        ) {
            Err(Error::IllPosed {
                safe_horizon,
                amplification,
                ..
            }) => {
                assert!(amplification > AMPLIFICATION_LIMIT);
                assert!(safe_horizon > 0.0 && safe_horizon < 8.0);
                let at_safe = max_amplification(24, safe_horizon);
                assert!(at_safe <= AMPLIFICATION_LIMIT * (1.0 + 1e-9));
            }
            other => panic!("expected ill-posedness, got {other:?}"),
        }
    }

    #[test]
    fn spectral_matches_gross_solution() {
        // e^{p-1} is entire; its truncated Hermite expansion evolves to e^{p-t-1}.
        let opts = SpectralOptions {
            modes: 30,
            ..Default::default()
        };
        let sol = solve_backward_heat(
            &|p: f64| Ok((p - 1.0).exp()),
            Interval::REAL,
            &HeatMethod::Spectral(opts),
            0.2,
        )
        .unwrap();
        for &(p, t) in &[(0.0, 0.0), (1.0, 0.1), (-1.5, 0.2)] {
            let exact = (p - t - 1.0f64).exp();
            assert!((sol.eval(p, t).unwrap().u - exact).abs() < 1e-9, "{p} {t}");
        }
    }

    #[test]
    fn ellipticity_examples() {
        let e = HeatSolution::closed_form(ClosedForm::Exponential, 8.0).unwrap();
        let r = ellipticity_check(&e, &default_ellipticity_grid(&e)).unwrap();
        assert!(r.pass);
        assert!(r.max_det_hessian.abs() < 1e-12 && r.min_det_hessian.abs() < 1e-12);

        let b = bobkov_heat_solution();
        let r = ellipticity_check(&b, &default_ellipticity_grid(&b)).unwrap();
        assert!(r.pass && r.max_det_hessian < 0.0);

        let s = HeatSolution::closed_form(ClosedForm::Sine, 8.0).unwrap();
        let r = ellipticity_check(&s, &default_ellipticity_grid(&s)).unwrap();
        assert!(r.pass);
        for &(p, t) in &[(0.4, 0.0), (1.5, 2.0), (3.0, 7.0)] {
            let j = s.eval(p, t).unwrap();
            let expect = (2.0 * t).exp() * (2.0 * t + p.sin().powi(2));
            assert!((j.certificate(t) - expect).abs() < 1e-9 * expect);
        }
    }
}
