use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the vanishing of the condition form.
pub const ERTI_TOL: f64 = 1e-10;

/// A function `B(u_0, ..., u_m)` with first and second derivatives.
pub trait SecondOrder {
    fn arity(&self) -> usize;
    fn gradient(&self, u: &[f64]) -> Vec<f64>;
    fn hessian(&self, u: &[f64]) -> Vec<Vec<f64>>;
}

/// `B(u) = sum_k c_k u_k^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalQuadratic {
    pub coeffs: Vec<f64>,
}

impl DiagonalQuadratic {
    /// `c_k = (-1)^k / k!` for `k = 0..=m`.
    pub fn houdre_kagan(m: usize) -> Self {
        let mut coeffs = Vec::with_capacity(m + 1);
        let mut factorial = 1.0;
        for k in 0..=m {
            if k > 0 {
                factorial *= k as f64;
            }
            coeffs.push(if k % 2 == 0 { 1.0 } else { -1.0 } / factorial);
        }
        DiagonalQuadratic { coeffs }
    }
}

impl SecondOrder for DiagonalQuadratic {
    fn arity(&self) -> usize {
        self.coeffs.len()
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        self.coeffs
            .iter()
            .zip(u)
            .map(|(c, u)| 2.0 * c * u)
            .collect()
    }

    fn hessian(&self, _u: &[f64]) -> Vec<Vec<f64>> {
        let n = self.coeffs.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 2.0 * self.coeffs[i] } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

/// The matrix
/// `A_ij = B_mi B_mj - B_mm B_ij - delta_ij (B_mm / u_{j+1}) (j+1) B_{j+1}`,
/// `i, j < m`, and its quadratic form in `(u_1, ..., u_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErtiCondition {
    pub m: usize,
    pub matrix: Vec<Vec<f64>>,
    pub form: f64,
    /// The form with every entry multiplied by `prod_j u_{j+1}`, free of
    /// divisions.
    pub scaled_form: f64,
    pub b_mm: f64,
    /// Whether `B_mm < 0`, the sign the condition requires.
    pub nsd_precondition: bool,
}

pub fn erti_condition_matrix<B: SecondOrder + ?Sized>(
    b: &B,
    u: &[f64],
    m: usize,
) -> Result<ErtiCondition> {
    if m == 0 || u.len() != m + 1 || b.arity() != m + 1 {
        return Err(Error::domain(format!(
            "condition matrix needs m >= 1 and {} coordinates, got m = {m} and {} coordinates",
            m + 1,
            u.len()
        )));
    }
    let grad = b.gradient(u);
    let hess = b.hessian(u);
    let b_mm = hess[m][m];
    if b_mm == 0.0 {
        return Err(Error::precondition("B_mm vanishes at the point"));
    }
    if let Some(j) = (1..=m).find(|&j| u[j] == 0.0) {
        return Err(Error::Singular(format!("coordinate u_{j} is zero")));
    }
    let tail = &u[1..];
    let product: f64 = tail.iter().product();
    let mut matrix = vec![vec![0.0; m]; m];
    let mut form = 0.0;
    let mut scaled_form = 0.0;
    for i in 0..m {
        for j in 0..m {
            let mut plain = hess[m][i] * hess[m][j] - b_mm * hess[i][j];
            let mut scaled = plain * product;
            if i == j {
                let l = (j + 1) as f64 * grad[j + 1];
                plain -= b_mm / u[j + 1] * l;
                let others: f64 = tail
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, v)| v)
                    .product();
                scaled -= b_mm * l * others;
            }
            matrix[i][j] = plain;
            form += tail[i] * plain * tail[j];
            scaled_form += tail[i] * scaled * tail[j];
        }
    }
    Ok(ErtiCondition {
        m,
        matrix,
        form,
        scaled_form,
        b_mm,
        nsd_precondition: b_mm < 0.0,
    })
}

/// Seeded random sweep of the condition form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErtiSweep {
    pub m: usize,
    pub seed: u64,
    pub points: usize,
    /// Draws discarded for having a zero coordinate.
    pub excluded: usize,
    pub max_abs_form: f64,
    pub max_abs_scaled_form: f64,
    pub precondition_failures: usize,
    pub pass: bool,
}

/// Evaluate the form at `points` draws from `[-3, 3]^{m+1}` with nonzero
/// coordinates.
pub fn erti_sweep<B: SecondOrder + ?Sized>(
    b: &B,
    m: usize,
    points: usize,
    seed: u64,
) -> Result<ErtiSweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sweep = ErtiSweep {
        m,
        seed,
        points,
        excluded: 0,
        max_abs_form: 0.0,
        max_abs_scaled_form: 0.0,
        precondition_failures: 0,
        pass: true,
    };
    let mut done = 0;
    while done < points {
        let u: Vec<f64> = (0..=m).map(|_| rng.gen_range(-3.0..=3.0)).collect();
        if u.contains(&0.0) {
            sweep.excluded += 1;
            continue;
        }
        let c = erti_condition_matrix(b, &u, m)?;
        sweep.max_abs_form = sweep.max_abs_form.max(c.form.abs());
        sweep.max_abs_scaled_form = sweep.max_abs_scaled_form.max(c.scaled_form.abs());
        if !c.nsd_precondition {
            sweep.precondition_failures += 1;
        }
        done += 1;
    }
    sweep.pass = sweep.max_abs_form <= ERTI_TOL
        && sweep.max_abs_scaled_form <= ERTI_TOL
        && sweep.precondition_failures == 0;
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_for_alternating_sum() {
        let b = DiagonalQuadratic::houdre_kagan(1);
        let c = erti_condition_matrix(&b, &[2.0, 3.0], 1).unwrap();
        assert_eq!(c.b_mm, -2.0);
        assert!(c.nsd_precondition && c.form.abs() < 1e-14 && c.matrix[0][0].abs() < 1e-14);
        for m in [1, 3] {
            let s = erti_sweep(&DiagonalQuadratic::houdre_kagan(m), m, 200, 5).unwrap();
            assert!(s.pass, "{s:?}");
        }
    }

    #[test]
    fn errors_and_sign() {
        let b = DiagonalQuadratic::houdre_kagan(3);
        assert!(matches!(
            erti_condition_matrix(&b, &[1.0, 0.0, 1.0, 1.0], 3),
            Err(Error::Singular(_))
        ));
        let flat = DiagonalQuadratic {
            coeffs: vec![1.0, 0.0],
        };
        assert!(matches!(
            erti_condition_matrix(&flat, &[1.0, 1.0], 1),
            Err(Error::Precondition(_))
        ));
        let up = DiagonalQuadratic {
            coeffs: vec![1.0, 1.0],
        };
        assert!(
            !erti_condition_matrix(&up, &[1.0, 2.0], 1)
                .unwrap()
                .nsd_precondition
        );
    }

    #[test]
    fn deterministic() {
        let b = DiagonalQuadratic::houdre_kagan(3);
        assert_eq!(
            erti_sweep(&b, 3, 50, 9).unwrap(),
            erti_sweep(&b, 3, 50, 9).unwrap()
        );
    }
}
