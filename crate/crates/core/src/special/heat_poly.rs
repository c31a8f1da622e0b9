/// Coefficients `c_j` of the caloric polynomial `H_k(p, t) = sum_j c_j t^j p^(k-2j)`.
///
/// `H_k(p, 0) = p^k` and `H_k` solves the backwards heat equation
/// `u_t + u_pp = 0`, so `c_j = (-1)^j k! / (j! (k-2j)!)`.
pub fn heat_polynomial_coefficients(k: usize) -> Vec<f64> {
    let mut coeffs = Vec::with_capacity(k / 2 + 1);
    let mut c = 1.0;
    coeffs.push(c);
    for j in 1..=k / 2 {
        c *= -(((k - 2 * j + 2) * (k - 2 * j + 1)) as f64) / j as f64;
        coeffs.push(c);
    }
    coeffs
}

/// Evaluate the caloric polynomial `H_k(p, t)`.
pub fn heat_polynomial(k: usize, p: f64, t: f64) -> f64 {
    let coeffs = heat_polynomial_coefficients(k);
    let mut sum = 0.0;
    for (j, c) in coeffs.iter().enumerate() {
        sum += c * t.powi(j as i32) * p.powi((k - 2 * j) as i32);
    }
    sum
}
