use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm on d-dimensional space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Norm {
    /// p-norm, `p` in `[1, inf]`. Infinity is written as `f64::INFINITY`
    /// (or `"inf"` on the command line).
    P { p: f64 },
    /// `sqrt(sum w_i x_i^2)` with positive weights.
    Weighted2 { weights: Vec<f64> },
}

impl Default for Norm {
    fn default() -> Self {
        Norm::P { p: 2.0 }
    }
}

impl Norm {
    pub fn euclidean() -> Self {
        Norm::P { p: 2.0 }
    }

    pub fn max() -> Self {
        Norm::P { p: f64::INFINITY }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Norm::P { p } if p.is_nan() || *p < 1.0 => {
                Err(Error::InvalidNorm(format!("p = {p} is outside [1, inf]")))
            }
            Norm::Weighted2 { weights }
                if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) =>
            {
                Err(Error::InvalidNorm("weights must be finite and positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        match self {
            Norm::P { p } => {
                if *p == 1.0 {
                    x.iter().map(|v| v.abs()).sum()
                } else if *p == 2.0 {
                    x.iter().map(|v| v * v).sum::<f64>().sqrt()
                } else if p.is_infinite() {
                    x.iter().fold(0.0, |m, v| m.max(v.abs()))
                } else {
                    // scale by the max entry to avoid overflow for large p
                    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if scale == 0.0 {
                        return 0.0;
                    }
                    scale
                        * x.iter()
                            .map(|v| (v.abs() / scale).powf(*p))
                            .sum::<f64>()
                            .powf(1.0 / p)
                }
            }
            Norm::Weighted2 { weights } => {
                debug_assert_eq!(weights.len(), x.len());
                x.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt()
            }
        }
    }

    /// `norm(a - b)`.
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }
}
