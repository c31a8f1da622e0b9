use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// Evenly spaced, both endpoints included.
    Linear,
    /// Evenly spaced in `ln x`, both endpoints included. Requires `lo > 0`.
    Log,
    /// Evenly spaced strictly inside the interval, endpoints excluded.
    Interior,
}

/// One grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(lo: f64, hi: f64, n: usize) -> Self {
        Axis {
            lo,
            hi,
            n,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(lo: f64, hi: f64, n: usize) -> Self {
        Axis {
            lo,
            hi,
            n,
            spacing: Spacing::Log,
        }
    }

    pub fn interior(lo: f64, hi: f64, n: usize) -> Self {
        Axis {
            lo,
            hi,
            n,
            spacing: Spacing::Interior,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("grid axis needs at least one point"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(Error::domain(format!(
                "grid axis range [{}, {}] is not a finite interval",
                self.lo, self.hi
            )));
        }
        if self.spacing == Spacing::Log && self.lo <= 0.0 {
            return Err(Error::domain("log-spaced axis needs a positive lower end"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n;
        match self.spacing {
            Spacing::Linear if n == 1 => vec![self.lo],
            Spacing::Linear => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.hi
                    } else {
                        self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
            Spacing::Log if n == 1 => vec![self.lo],
            Spacing::Log => {
                let (a, b) = (self.lo.ln(), self.hi.ln());
                (0..n)
                    .map(|i| {
                        if i == 0 {
                            self.lo
                        } else if i == n - 1 {
                            self.hi
                        } else {
                            (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                        }
                    })
                    .collect()
            }
            Spacing::Interior => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * (i + 1) as f64 / (n + 1) as f64)
                .collect(),
        }
    }
}

/// Tensor grid in the `(x, y)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub x: Axis,
    pub y: Axis,
}

impl Grid2 {
    pub fn new(x: Axis, y: Axis) -> Self {
        Grid2 { x, y }
    }

    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()
    }

    /// Nodes in row-major order: `x` outer, `y` inner.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let ys = self.y.points();
        self.x
            .points()
            .into_iter()
            .flat_map(|x| ys.iter().map(move |&y| (x, y)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.x.n * self.y.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Grid override as typed on the command line.
///
/// `"NXxNY"` keeps a default grid's ranges and replaces its counts;
/// `"x0:x1:nx,y0:y1:ny"` gives linear axes, and a fourth field
/// `log` or `interior` picks another spacing for that axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridOverride {
    Counts(usize, usize),
    Explicit(Grid2),
}

impl GridOverride {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::domain(format!("cannot parse grid `{text}`"));
        let text = text.trim();
        if let Some((a, b)) = text.split_once(',') {
            let axis = |s: &str| -> Result<Axis> {
                let parts: Vec<&str> = s.trim().split(':').collect();
                if parts.len() < 3 || parts.len() > 4 {
                    return Err(bad());
                }
                let lo: f64 = parts[0].parse().map_err(|_| bad())?;
                let hi: f64 = parts[1].parse().map_err(|_| bad())?;
                let n: usize = parts[2].parse().map_err(|_| bad())?;
                let spacing = match parts.get(3).copied() {
                    None | Some("lin") | Some("linear") => Spacing::Linear,
                    Some("log") => Spacing::Log,
                    Some("interior") => Spacing::Interior,
                    Some(_) => return Err(bad()),
                };
                let axis = Axis { lo, hi, n, spacing };
                axis.validate()?;
                Ok(axis)
            };
            return Ok(GridOverride::Explicit(Grid2::new(axis(a)?, axis(b)?)));
        }
        let (a, b) = text.split_once(['x', 'X', '×']).ok_or_else(bad)?;
        let nx: usize = a.trim().parse().map_err(|_| bad())?;
        let ny: usize = b.trim().parse().map_err(|_| bad())?;
        if nx == 0 || ny == 0 {
            return Err(bad());
        }
        Ok(GridOverride::Counts(nx, ny))
    }

    pub fn apply(&self, default: Grid2) -> Grid2 {
        match *self {
            GridOverride::Counts(nx, ny) => Grid2 {
                x: Axis { n: nx, ..default.x },
                y: Axis { n: ny, ..default.y },
            },
            GridOverride::Explicit(g) => g,
        }
    }
}
