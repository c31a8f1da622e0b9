use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gauss_hermite_rule, QuadratureRule};
use crate::surface::MSurface;

use super::test_function::TestFunction;

/// Times at or beyond this are evaluated as the equilibrium limit.
pub const EQUILIBRIUM_T: f64 = 40.0;
pub const DEFAULT_ORDER: usize = 64;
pub const INTERPOLATION_TOL: f64 = 1e-8;
pub const MONOTONE_STEP_TOL: f64 = 1e-9;
pub const LIMIT_TOL: f64 = 1e-8;

/// `P_t = e^{tL}` for `L = Delta - x . grad`, realized by Mehler's formula
/// with a tensor Gauss–Hermite rule.
#[derive(Debug, Clone)]
pub struct OuOperator {
    pub t: f64,
    rule: QuadratureRule,
}

impl OuOperator {
    pub fn new(t: f64, n: usize, order: usize) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!(
                "semigroup time must be >= 0, got {t}"
            )));
        }
        Ok(OuOperator {
            t,
            rule: gauss_hermite_rule(order, n)?,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    fn at_equilibrium(&self) -> bool {
        self.t >= EQUILIBRIUM_T
    }

    /// `int g(e^-t x + sqrt(1 - e^-2t) z) dgamma(z)`.
    pub fn apply_fn<G: FnMut(&[f64]) -> f64>(&self, mut g: G, x: &[f64]) -> f64 {
        let n = self.rule.dimension();
        let (a, s) = if self.at_equilibrium() {
            (0.0, 1.0)
        } else {
            ((-self.t).exp(), (-(-2.0 * self.t).exp_m1()).sqrt())
        };
        let mut y = vec![0.0; n];
        self.rule.integrate(|z| {
            for i in 0..n {
                y[i] = a * x[i] + s * z[i];
            }
            g(&y)
        })
    }

    pub fn apply(&self, f: &TestFunction, x: &[f64]) -> f64 {
        self.apply_fn(|y| f.value(y), x)
    }

    /// `grad P_t f = e^-t P_t grad f`.
    pub fn gradient(&self, f: &TestFunction, x: &[f64]) -> Vec<f64> {
        let n = self.rule.dimension();
        let factor = (-self.t).exp();
        (0..n)
            .map(|i| factor * self.apply_fn(|y| f.gradient(y)[i], x))
            .collect()
    }

    /// `(P_t f, ||grad P_t f||)` in one pass over the rule.
    pub fn value_and_grad_norm(&self, f: &TestFunction, x: &[f64]) -> (f64, f64) {
        let n = self.rule.dimension();
        let mut grad = vec![0.0; n];
        let mut value = 0.0;
        let (a, s) = if self.at_equilibrium() {
            (0.0, 1.0)
        } else {
            ((-self.t).exp(), (-(-2.0 * self.t).exp_m1()).sqrt())
        };
        let mut y = vec![0.0; n];
        for (z, w) in self.rule.iter() {
            for i in 0..n {
                y[i] = a * x[i] + s * z[i];
            }
            value += w * f.value(&y);
            for (g, d) in grad.iter_mut().zip(f.gradient(&y)) {
                *g += w * d;
            }
        }
        let factor = (-self.t).exp();
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt() * factor;
        (value, norm)
    }
}

pub fn ou_apply(f: &TestFunction, t: f64, x: &[f64], order: usize) -> Result<f64> {
    Ok(OuOperator::new(t, f.dimension(), order)?.apply(f, x))
}

pub fn ou_gradient(f: &TestFunction, t: f64, x: &[f64], order: usize) -> Result<Vec<f64>> {
    Ok(OuOperator::new(t, f.dimension(), order)?.gradient(f, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationPoint {
    pub t: f64,
    pub x: f64,
    /// `P_t M(f, |grad f|)(x)`.
    pub lhs: f64,
    /// `M(P_t f(x), |grad P_t f(x)|)`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub surface: String,
    pub test_function: String,
    pub points: Vec<InterpolationPoint>,
    /// Largest `lhs - rhs`.
    pub max_violation: f64,
    pub pass: bool,
}

fn m_of(m: &MSurface, f: &TestFunction, y: &[f64]) -> Result<f64> {
    let v = f.check_range(y)?;
    let (_, g) = f.value_and_grad_norm(y);
    m.value(v, g)
}

/// Check `P_t M(f, |grad f|) <= M(P_t f, |grad P_t f|)` at every `(t, x)`.
///
/// `xs` are points on the diagonal `(x, ..., x)`.
pub fn interpolation_check(
    m: &MSurface,
    f: &TestFunction,
    ts: &[f64],
    xs: &[f64],
    order: usize,
) -> Result<InterpolationReport> {
    let n = f.dimension();
    let mut points = Vec::with_capacity(ts.len() * xs.len());
    for &t in ts {
        let op = OuOperator::new(t, n, order)?;
        for &x in xs {
            let point = vec![x; n];
            let mut err = None;
            let lhs = op.apply_fn(
                |y| match m_of(m, f, y) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::NAN
                    }
                },
                &point,
            );
            if let Some(e) = err {
                return Err(e);
            }
            let (pf, pg) = op.value_and_grad_norm(f, &point);
            let rhs = m.value(pf, pg)?;
            points.push(InterpolationPoint { t, x, lhs, rhs });
        }
    }
    let max_violation = points
        .iter()
        .map(|p| p.lhs - p.rhs)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(InterpolationReport {
        surface: m.label(),
        test_function: f.name.clone(),
        pass: max_violation <= INTERPOLATION_TOL,
        points,
        max_violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityPoint {
    pub t: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub surface: String,
    pub test_function: String,
    pub trace: Vec<MonotonicityPoint>,
    /// `M(int f dgamma, 0)`.
    pub limit: f64,
    /// Most negative step `G(t_{k+1}) - G(t_k)`.
    pub min_step: f64,
    /// `G(t_max) - M(int f, 0)`.
    pub final_gap: f64,
    pub pass: bool,
}

/// `G(t) = int M(P_t f, |grad P_t f|) dgamma` over increasing `ts`
/// (`f64::INFINITY` allowed).
pub fn monotonicity_check(
    m: &MSurface,
    f: &TestFunction,
    ts: &[f64],
    order: usize,
) -> Result<MonotonicityReport> {
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(
            "monotonicity times must be strictly increasing",
        ));
    }
    let n = f.dimension();
    let outer = gauss_hermite_rule(order, n)?;
    let mean = outer.integrate(|z| f.value(z));
    let limit = m.value(mean, 0.0)?;
    let mut trace = Vec::with_capacity(ts.len());
    for &t in ts {
        let g = if t >= EQUILIBRIUM_T {
            limit
        } else {
            let op = OuOperator::new(t, n, order)?;
            let mut total = 0.0;
            for (z, w) in outer.iter() {
                let (pf, pg) = if t == 0.0 {
                    (f.check_range(z)?, f.value_and_grad_norm(z).1)
                } else {
                    op.value_and_grad_norm(f, z)
                };
                total += w * m.value(pf, pg)?;
            }
            total
        };
        trace.push(MonotonicityPoint { t, g });
    }
    let min_step = trace
        .windows(2)
        .map(|w| w[1].g - w[0].g)
        .fold(f64::INFINITY, f64::min);
    let final_gap = trace.last().map_or(0.0, |p| p.g - limit);
    let pass = min_step >= -MONOTONE_STEP_TOL && final_gap <= LIMIT_TOL;
    Ok(MonotonicityReport {
        surface: m.label(),
        test_function: f.name.clone(),
        trace,
        limit,
        min_step,
        final_gap,
        pass,
    })
}
