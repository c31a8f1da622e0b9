use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::semigroup::TestFunction;

use super::measure::{sample, MeasureSpec, Sample};

/// Default acceptance threshold: a report passes iff `margin >= -MARGIN_TOL`.
pub const MARGIN_TOL: f64 = 1e-9;
/// Margins smaller than this in magnitude are recomputed at twice the order.
pub const DOUBLING_THRESHOLD: f64 = 1e-7;

/// Outcome of one inequality check, `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub case: String,
    pub surface: String,
    pub test_function: String,
    pub n: usize,
    pub sigma: f64,
    pub order: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Both sides of an inequality at one quadrature order.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Sides {
    pub lhs: f64,
    pub rhs: f64,
    /// Extra conditions that must hold besides the margin.
    pub side_conditions: bool,
    pub notes: Vec<String>,
}

impl Sides {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Sides {
            lhs,
            rhs,
            side_conditions: true,
            notes: Vec::new(),
        }
    }
}

/// Identity of a check, shared by every order it is evaluated at.
pub(crate) struct Case<'a> {
    pub name: String,
    pub surface: String,
    pub f: &'a TestFunction,
    pub spec: MeasureSpec,
    pub tol: f64,
}

impl Case<'_> {
    fn report(&self, order: usize, sides: Sides) -> VerificationReport {
        let margin = sides.rhs - sides.lhs;
        let mut notes = vec![format!("tolerance {:e}", self.tol)];
        notes.extend(sides.notes);
        VerificationReport {
            case: self.name.clone(),
            surface: self.surface.clone(),
            test_function: self.f.name.clone(),
            n: self.spec.n,
            sigma: self.spec.sigma,
            order,
            lhs: sides.lhs,
            rhs: sides.rhs,
            margin,
            pass: margin >= -self.tol && sides.side_conditions,
            notes,
        }
    }

    /// Evaluate at `order`; when the margin is within [`DOUBLING_THRESHOLD`]
    /// of zero, evaluate again at `2 order` and require both to pass.
    pub fn run<C>(&self, order: usize, compute: C) -> Result<VerificationReport>
    where
        C: Fn(&[Sample]) -> Result<Sides>,
    {
        let first = self.report(order, compute(&sample(self.f, &self.spec, order)?)?);
        if first.margin.abs() >= DOUBLING_THRESHOLD {
            return Ok(first);
        }
        let doubled = 2 * order;
        let mut second = self.report(doubled, compute(&sample(self.f, &self.spec, doubled)?)?);
        second.notes.push(format!(
            "sign check: margin {:e} at order {order}, {:e} at order {doubled}",
            first.margin, second.margin
        ));
        if first.pass != second.pass {
            second
                .notes
                .push("margin sign unstable under quadrature refinement".into());
        }
        second.pass &= first.pass;
        Ok(second)
    }
}

/// Count of passing and failing reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(reports: &[VerificationReport]) -> Self {
        let passed = reports.iter().filter(|r| r.pass).count();
        Summary {
            total: reports.len(),
            passed,
            failed: reports.len() - passed,
        }
    }
}
