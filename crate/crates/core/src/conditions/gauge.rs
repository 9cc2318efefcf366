use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauge φ of the contractive-like bound: strictly increasing, continuous,
/// `φ(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeFunction {
    /// `t ↦ L t`, `L > 0`.
    Linear { l: f64 },
    /// `t ↦ c t^q`, `c > 0`, `q ≥ 1`.
    Power { c: f64, q: f64 },
    /// Piecewise-linear interpolation through `(t, φ(t))` knots starting at
    /// `(0, 0)`, extended past the last knot with the last slope.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl GaugeFunction {
    pub fn linear(l: f64) -> Result<Self> {
        let g = GaugeFunction::Linear { l };
        g.validate()?;
        Ok(g)
    }

    pub fn power(c: f64, q: f64) -> Result<Self> {
        let g = GaugeFunction::Power { c, q };
        g.validate()?;
        Ok(g)
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let g = GaugeFunction::Tabulated { knots };
        g.validate()?;
        Ok(g)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            GaugeFunction::Linear { l } => l * t,
            GaugeFunction::Power { c, q } => c * t.powf(*q),
            GaugeFunction::Tabulated { knots } => {
                let last = knots.len() - 1;
                let j = knots.partition_point(|(x, _)| *x <= t).clamp(1, last);
                let (x0, y0) = knots[j - 1];
                let (x1, y1) = knots[j];
                y0 + (t - x0) * (y1 - y0) / (x1 - x0)
            }
        }
    }

    fn check_params(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGauge(msg));
        match self {
            GaugeFunction::Linear { l } if !(l.is_finite() && *l > 0.0) => {
                bad(format!("linear slope {l} must be finite and > 0"))
            }
            GaugeFunction::Power { c, q } if !(c.is_finite() && *c > 0.0 && q.is_finite() && *q >= 1.0) => {
                bad(format!("power gauge needs c > 0 and q >= 1, got c={c}, q={q}"))
            }
            GaugeFunction::Tabulated { knots } => {
                if knots.len() < 2 {
                    return bad("tabulated gauge needs at least two knots".into());
                }
                if knots[0] != (0.0, 0.0) {
                    return bad("tabulated gauge must start at (0, 0)".into());
                }
                if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return bad("tabulated knots must be finite".into());
                }
                if knots.windows(2).any(|w| !(w[0].0 < w[1].0 && w[0].1 < w[1].1)) {
                    return bad("tabulated knots must be strictly increasing in t and value".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Structural checks plus a sampled check on `[0, 10]`: `φ(0) = 0`,
    /// strict increase, and the largest step between neighbours shrinking
    /// under grid refinement.
    pub fn validate(&self) -> Result<()> {
        self.check_params()?;
        if self.eval(0.0) != 0.0 {
            return Err(Error::InvalidGauge("φ(0) != 0".into()));
        }
        let max_step = |n: usize| -> Result<f64> {
            let mut prev = 0.0;
            let mut worst = 0.0f64;
            for i in 1..=n {
                let v = self.eval(10.0 * i as f64 / n as f64);
                if !(v > prev) {
                    return Err(Error::InvalidGauge(format!(
                        "not strictly increasing near t = {}",
                        10.0 * i as f64 / n as f64
                    )));
                }
                worst = worst.max(v - prev);
                prev = v;
            }
            Ok(worst)
        };
        let coarse = max_step(512)?;
        let fine = max_step(1024)?;
        if fine > 0.75 * coarse {
            return Err(Error::InvalidGauge(
                "largest jump does not shrink under refinement".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates() {
        assert_eq!(GaugeFunction::linear(2.0).unwrap().eval(1.5), 3.0);
        assert_eq!(GaugeFunction::power(0.5, 2.0).unwrap().eval(2.0), 2.0);
        let tab = GaugeFunction::tabulated(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        assert_eq!(tab.eval(0.5), 1.0);
        assert_eq!(tab.eval(1.5), 2.5);
        assert_eq!(tab.eval(4.0), 5.0);
    }

    #[test]
    fn rejects_invalid() {
        assert!(GaugeFunction::linear(0.0).is_err());
        assert!(GaugeFunction::power(1.0, 0.5).is_err());
        assert!(GaugeFunction::tabulated(vec![(0.0, 0.1), (1.0, 1.0)]).is_err());
        assert!(GaugeFunction::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)]).is_err());
        assert!(GaugeFunction::tabulated(vec![(0.0, 0.0)]).is_err());
    }

    #[test]
    fn serde_shape() {
        let g: GaugeFunction = serde_json::from_str(r#"{"kind":"linear","l":1.0}"#).unwrap();
        assert_eq!(g, GaugeFunction::Linear { l: 1.0 });
    }
}
