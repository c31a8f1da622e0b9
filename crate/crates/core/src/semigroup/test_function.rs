use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{std_normal_cdf, std_normal_pdf};
use crate::surface::Interval;

/// Highest derivative order carried by every profile.
pub const MAX_ORDER: usize = 4;

/// One-dimensional building block `h` of a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Base {
    /// Monomial coefficients, lowest degree first.
    Polynomial {
        coeffs: Vec<f64>,
    },
    Exp,
    Logistic,
    NormalCdf,
    Tanh,
}

impl Base {
    /// `[h, h', h'', h''', h'''']` at `z`.
    fn derivatives(&self, z: f64) -> [f64; MAX_ORDER + 1] {
        match self {
            Base::Polynomial { coeffs } => {
                let mut out = [0.0; MAX_ORDER + 1];
                for (k, slot) in out.iter_mut().enumerate() {
                    // Horner on the k-th derivative's coefficients.
                    *slot = coeffs
                        .iter()
                        .enumerate()
                        .skip(k)
                        .rev()
                        .fold(0.0, |acc, (j, c)| {
                            let falling: f64 = (0..k).map(|i| (j - i) as f64).product();
                            acc * z + c * falling
                        });
                }
                out
            }
            Base::Exp => [z.exp(); MAX_ORDER + 1],
            Base::Logistic => {
                let s = if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                };
                let d1 = s * (1.0 - s);
                let a = 1.0 - 2.0 * s;
                let d2 = d1 * a;
                let d3 = d2 * a - 2.0 * d1 * d1;
                let d4 = d3 * a - 6.0 * d1 * d2;
                [s, d1, d2, d3, d4]
            }
            Base::NormalCdf => {
                let phi = std_normal_pdf(z);
                [
                    std_normal_cdf(z),
                    phi,
                    -z * phi,
                    (z * z - 1.0) * phi,
                    (3.0 * z - z * z * z) * phi,
                ]
            }
            Base::Tanh => {
                let t = z.tanh();
                let d1 = 1.0 - t * t;
                let d2 = -2.0 * t * d1;
                let d3 = -2.0 * d1 * d1 - 2.0 * t * d2;
                let d4 = -6.0 * d1 * d2 - 2.0 * t * d3;
                [t, d1, d2, d3, d4]
            }
        }
    }
}

/// `g(s) = offset + scale * h(a s + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub base: Base,
    pub a: f64,
    pub b: f64,
    pub scale: f64,
    pub offset: f64,
}

impl Profile {
    pub fn new(base: Base) -> Self {
        Profile {
            base,
            a: 1.0,
            b: 0.0,
            scale: 1.0,
            offset: 0.0,
        }
    }

    /// `[g, g', ..., g'''']` at `s`.
    pub fn derivatives(&self, s: f64) -> [f64; MAX_ORDER + 1] {
        let h = self.base.derivatives(self.a * s + self.b);
        let mut out = [0.0; MAX_ORDER + 1];
        let mut ak = 1.0;
        for k in 0..=MAX_ORDER {
            out[k] = self.scale * ak * h[k];
            ak *= self.a;
        }
        out[0] += self.offset;
        out
    }
}

/// A ridge function `f(x) = g(w . x)` on `R^n` with analytic derivatives up
/// to order four.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub name: String,
    pub profile: Profile,
    pub weights: Vec<f64>,
    /// Declared range; checked at every quadrature node that is used.
    pub codomain: Interval,
    pub even: bool,
}

impl TestFunction {
    /// One-dimensional test function; use [`TestFunction::in_dimension`] to
    /// spread it over `R^n`.
    pub fn new(name: impl Into<String>, profile: Profile, codomain: Interval, even: bool) -> Self {
        TestFunction {
            name: name.into(),
            profile,
            weights: vec![1.0],
            codomain,
            even,
        }
    }

    pub fn constant(c: f64) -> Self {
        let profile = Profile::new(Base::Polynomial { coeffs: vec![c] });
        TestFunction::new(format!("const({c})"), profile, Interval::closed(c, c), true)
    }

    /// `sum c_k x^k` with a declared codomain.
    pub fn polynomial(name: impl Into<String>, coeffs: Vec<f64>, codomain: Interval) -> Self {
        let even = coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0);
        TestFunction::new(
            name,
            Profile::new(Base::Polynomial { coeffs }),
            codomain,
            even,
        )
    }

    /// `e^(a x)`.
    pub fn exp(a: f64) -> Self {
        let profile = Profile {
            a,
            ..Profile::new(Base::Exp)
        };
        TestFunction::new(
            format!("exp({a}x)"),
            profile,
            Interval::open(0.0, f64::INFINITY),
            a == 0.0,
        )
    }

    /// `1 / (1 + e^-(a x + b))`.
    pub fn logistic(a: f64, b: f64) -> Self {
        let profile = Profile {
            a,
            b,
            ..Profile::new(Base::Logistic)
        };
        TestFunction::new(
            format!("logistic({a}x+{b})"),
            profile,
            Interval::closed(0.0, 1.0),
            false,
        )
    }

    /// `Phi(a x + b)`.
    pub fn normal_cdf(a: f64, b: f64) -> Self {
        let profile = Profile {
            a,
            b,
            ..Profile::new(Base::NormalCdf)
        };
        TestFunction::new(
            format!("ncdf({a}x+{b})"),
            profile,
            Interval::closed(0.0, 1.0),
            false,
        )
    }

    /// `offset + scale tanh(x)`. Closed codomain: tanh saturates in floating point.
    pub fn tanh(offset: f64, scale: f64) -> Self {
        let profile = Profile {
            scale,
            offset,
            ..Profile::new(Base::Tanh)
        };
        let r = scale.abs();
        TestFunction::new(
            format!("{offset}+{scale}tanh(x)"),
            profile,
            Interval::closed(offset - r, offset + r),
            false,
        )
    }

    /// Same profile along `(1, ..., 1) / sqrt(n)`.
    pub fn in_dimension(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        let norm: f64 = self.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        let w = norm / (n as f64).sqrt();
        self.weights = vec![w; n];
        Ok(self)
    }

    /// `x -> f(sigma x)`.
    pub fn scaled(mut self, sigma: f64) -> Self {
        for w in &mut self.weights {
            *w *= sigma;
        }
        self.name = format!("{}(sigma={sigma})", self.name);
        self
    }

    /// `x -> eps f(x)`.
    pub fn times(mut self, eps: f64) -> Self {
        self.profile.scale *= eps;
        self.profile.offset *= eps;
        let (lo, hi) = (eps * self.codomain.lo, eps * self.codomain.hi);
        self.codomain = if eps >= 0.0 {
            Interval {
                lo,
                hi,
                ..self.codomain
            }
        } else {
            Interval {
                lo: hi,
                hi: lo,
                lo_closed: self.codomain.hi_closed,
                hi_closed: self.codomain.lo_closed,
            }
        };
        if eps == 0.0 {
            self.codomain = Interval::closed(0.0, 0.0);
        }
        self.name = format!("{eps}*{}", self.name);
        self
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    /// Highest available derivative order.
    pub fn order(&self) -> usize {
        MAX_ORDER
    }

    fn ridge(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, x)| w * x).sum()
    }

    fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.profile.derivatives(self.ridge(x))[0]
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let g1 = self.profile.derivatives(self.ridge(x))[1];
        self.weights.iter().map(|w| g1 * w).collect()
    }

    /// `(f, ||grad f||)`.
    pub fn value_and_grad_norm(&self, x: &[f64]) -> (f64, f64) {
        let d = self.profile.derivatives(self.ridge(x));
        (d[0], d[1].abs() * self.weight_norm())
    }

    /// `||nabla^k f||` (Frobenius norm of the k-th derivative tensor).
    pub fn derivative_norm(&self, k: usize, x: &[f64]) -> Result<f64> {
        if k > MAX_ORDER {
            return Err(Error::precondition(format!(
                "{} carries derivatives up to order {MAX_ORDER}, order {k} requested",
                self.name
            )));
        }
        let d = self.profile.derivatives(self.ridge(x));
        Ok(d[k].abs() * self.weight_norm().powi(k as i32))
    }

    /// Fail unless `f(x)` lies in the declared codomain.
    pub fn check_range(&self, x: &[f64]) -> Result<f64> {
        let v = self.value(x);
        if self.codomain.contains(v) {
            Ok(v)
        } else {
            Err(Error::domain(format!(
                "{}({x:?}) = {v} leaves the declared codomain {}",
                self.name, self.codomain
            )))
        }
    }
}

/// Names accepted by [`catalog_function`].
pub const TEST_FUNCTIONS: [&str; 18] = [
    "const",
    "x",
    "affine",
    "exp0.3",
    "exp0.5",
    "quad",
    "hermite2",
    "x2",
    "x2p1",
    "x4",
    "cubic",
    "hermite_mix",
    "square",
    "logistic",
    "logistic2",
    "ncdf",
    "tanh",
    "tanh_shift",
];

const POSITIVE: Interval = Interval {
    lo: 0.0,
    hi: f64::INFINITY,
    lo_closed: false,
    hi_closed: false,
};

/// Catalog test function `name` on `R^n`.
pub fn catalog_function(name: &str, n: usize) -> Result<TestFunction> {
    let from = |lo: f64, closed: bool| Interval {
        lo,
        hi: f64::INFINITY,
        lo_closed: closed,
        hi_closed: false,
    };
    let f = match name {
        "const" => TestFunction::constant(0.5),
        "x" => TestFunction::polynomial("x", vec![0.0, 1.0], Interval::REAL),
        // Positive at every node of the order-128 rule in two dimensions.
        "affine" => TestFunction::polynomial("x+40", vec![40.0, 1.0], POSITIVE),
        "exp0.3" => TestFunction::exp(0.3),
        "exp0.5" => TestFunction::exp(0.5),
        "quad" => TestFunction::polynomial("1+0.2x^2", vec![1.0, 0.0, 0.2], from(1.0, true)),
        "hermite2" => TestFunction::polynomial("x^2-1", vec![-1.0, 0.0, 1.0], from(-1.0, true)),
        "x2" => TestFunction::polynomial("x^2", vec![0.0, 0.0, 1.0], from(0.0, true)),
        "x2p1" => TestFunction::polynomial("x^2+1", vec![1.0, 0.0, 1.0], from(1.0, true)),
        "x4" => TestFunction::polynomial("x^4", vec![0.0, 0.0, 0.0, 0.0, 1.0], from(0.0, true)),
        "cubic" => TestFunction::polynomial("x^3+x", vec![0.0, 1.0, 0.0, 1.0], Interval::REAL),
        // 2 + He_1/2 + He_2/4
        "hermite_mix" => {
            TestFunction::polynomial("2+He1/2+He2/4", vec![1.75, 0.5, 0.25], from(1.5, true))
        }
        // (1 + 0.3 x^2)^2
        "square" => TestFunction::polynomial(
            "(1+0.3x^2)^2",
            vec![1.0, 0.0, 0.6, 0.0, 0.09],
            from(1.0, true),
        ),
        "logistic" => TestFunction::logistic(1.0, 0.0),
        "logistic2" => TestFunction::logistic(2.0, 0.0),
        "ncdf" => TestFunction::normal_cdf(1.0, 0.3),
        "tanh" => TestFunction::tanh(0.0, 0.5),
        "tanh_shift" => TestFunction::tanh(1.0, 0.5),
        other => {
            return Err(Error::UnknownName {
                kind: "test function",
                name: other.to_string(),
            })
        }
    };
    let mut f = f.in_dimension(n)?;
    f.name = name.to_string();
    Ok(f)
}
