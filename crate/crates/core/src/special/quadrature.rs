use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// One-dimensional Gauss–Hermite rule for the standard Gaussian measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Tensor Gauss–Hermite rule on `R^n`, weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dimension: usize,
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterate over `(node, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes
            .chunks_exact(self.dimension)
            .zip(self.weights.iter().copied())
    }

    /// Integral of `g` against the standard Gaussian.
    pub fn integrate<G: FnMut(&[f64]) -> f64>(&self, mut g: G) -> f64 {
        self.iter().map(|(x, w)| w * g(x)).sum()
    }
}

/// `E[X^j]` for a standard normal `X` (double factorial recursion).
pub fn gaussian_moment(j: u32) -> f64 {
    if j % 2 == 1 {
        return 0.0;
    }
    let mut m = 1.0;
    let mut k = 1;
    while k < j {
        m *= k as f64;
        k += 2;
    }
    m
}

fn rule_cache() -> &'static Mutex<HashMap<usize, Arc<Rule1d>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule1d>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Orthonormal Hermite values `He_{n-1}(x)/sqrt((n-1)!)` and `He_n(x)/sqrt(n!)`.
fn normalized_hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

fn compute_rule(order: usize) -> Rule1d {
    if order == 1 {
        return Rule1d {
            nodes: vec![0.0],
            weights: vec![1.0],
        };
    }
    // Golub–Welsch: eigenvalues of the Jacobi matrix seed the roots, Newton on
    // the three-term recurrence polishes them.
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let mut roots: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let sqrt_n = (order as f64).sqrt();
    let mut weights = Vec::with_capacity(order);
    for x in roots.iter_mut() {
        for _ in 0..6 {
            let (lower, top) = normalized_hermite_pair(order, *x);
            let step = top / (sqrt_n * lower);
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (lower, _) = normalized_hermite_pair(order, *x);
        weights.push(1.0 / (order as f64 * lower * lower));
    }

    // Enforce exact symmetry about the origin.
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let x = 0.5 * (roots[j] - roots[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        roots[i] = -x;
        roots[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if order % 2 == 1 {
        roots[order / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    Rule1d {
        nodes: roots,
        weights,
    }
}

/// One-dimensional rule of the given order, cached per process.
pub fn hermite_rule_1d(order: usize) -> Result<Arc<Rule1d>> {
    if order == 0 {
        return Err(Error::domain("quadrature order must be at least 1"));
    }
    if order > 512 {
        return Err(Error::Unsupported(format!(
            "quadrature order {order} exceeds the supported maximum of 512"
        )));
    }
    let mut cache = rule_cache().lock().expect("quadrature cache poisoned");
    Ok(cache
        .entry(order)
        .or_insert_with(|| Arc::new(compute_rule(order)))
        .clone())
}

/// Tensor Gauss–Hermite rule of `order` nodes per axis in `dimension` dimensions.
pub fn gauss_hermite_rule(order: usize, dimension: usize) -> Result<QuadratureRule> {
    if dimension == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if dimension > 3 {
        return Err(Error::Unsupported(format!(
            "tensor rules are capped at dimension 3 (dimension {dimension} at order {order} would need {} nodes)",
            (order as f64).powi(dimension as i32)
        )));
    }
    let rule = hermite_rule_1d(order)?;
    let total = order.pow(dimension as u32);
    let mut nodes = Vec::with_capacity(total * dimension);
    let mut weights = Vec::with_capacity(total);
    let mut index = vec![0usize; dimension];
    for _ in 0..total {
        let mut w = 1.0;
        for &k in &index {
            nodes.push(rule.nodes[k]);
            w *= rule.weights[k];
        }
        weights.push(w);
        for slot in index.iter_mut().rev() {
            *slot += 1;
            if *slot < order {
                break;
            }
            *slot = 0;
        }
    }
    Ok(QuadratureRule {
        dimension,
        order,
        nodes,
        weights,
    })
}
