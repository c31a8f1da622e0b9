use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semigroup::TestFunction;
use crate::special::gauss_hermite_rule;

/// The isotropic Gaussian `N(0, sigma^2 I)` on `R^n`, with curvature
/// `R = 1 / sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub n: usize,
    pub sigma: f64,
}

impl MeasureSpec {
    pub fn new(n: usize, sigma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(MeasureSpec { n, sigma })
    }

    pub fn standard(n: usize) -> Self {
        MeasureSpec {
            n: n.max(1),
            sigma: 1.0,
        }
    }

    pub fn curvature(&self) -> f64 {
        1.0 / (self.sigma * self.sigma)
    }
}

fn finite(node: &[f64], value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Integration {
            node: node.to_vec(),
            value,
        })
    }
}

/// `int g dmu` by a tensor Gauss–Hermite rule with nodes scaled by `sigma`.
pub fn integrate<G: FnMut(&[f64]) -> f64>(
    mut g: G,
    spec: &MeasureSpec,
    order: usize,
) -> Result<f64> {
    try_integrate(|x| Ok(g(x)), spec, order)
}

/// As [`integrate`], for integrands that can fail.
pub fn try_integrate<G>(mut g: G, spec: &MeasureSpec, order: usize) -> Result<f64>
where
    G: FnMut(&[f64]) -> Result<f64>,
{
    let rule = gauss_hermite_rule(order, spec.n)?;
    let mut x = vec![0.0; spec.n];
    let mut total = 0.0;
    for (z, w) in rule.iter() {
        for (xi, zi) in x.iter_mut().zip(z) {
            *xi = spec.sigma * zi;
        }
        total += w * finite(&x, g(&x)?)?;
    }
    Ok(total)
}

/// A test function evaluated at one quadrature node.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub weight: f64,
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
}

/// Values and gradient norms of `f` at every node, checked against its
/// codomain.
pub fn sample(f: &TestFunction, spec: &MeasureSpec, order: usize) -> Result<Vec<Sample>> {
    if f.dimension() != spec.n {
        return Err(Error::domain(format!(
            "test function lives in dimension {}, measure in {}",
            f.dimension(),
            spec.n
        )));
    }
    let rule = gauss_hermite_rule(order, spec.n)?;
    rule.iter()
        .map(|(z, weight)| {
            let x: Vec<f64> = z.iter().map(|zi| spec.sigma * zi).collect();
            let value = f.check_range(&x)?;
            let (_, grad_norm) = f.value_and_grad_norm(&x);
            finite(&x, grad_norm)?;
            Ok(Sample {
                weight,
                x,
                value,
                grad_norm,
            })
        })
        .collect()
}

/// `sum_i w_i h(sample_i)`, failing on the first non-finite term.
pub fn sum_over<H>(samples: &[Sample], mut h: H) -> Result<f64>
where
    H: FnMut(&Sample) -> Result<f64>,
{
    let mut total = 0.0;
    for s in samples {
        total += s.weight * finite(&s.x, h(s)?)?;
    }
    Ok(total)
}
