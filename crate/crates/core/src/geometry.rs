//! Points, the box-shaped domain and the convex-combination primitive every
//! scheme is built from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of d-dimensional space.
pub type Point = Vec<f64>;

/// Axis-aligned closed box `[lo, hi]`, the closed convex set the maps act on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidMap("domain must have dimension >= 1".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                actual: hi.len(),
            });
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() || l > h {
                return Err(Error::InvalidMap(format!(
                    "axis {i}: bounds [{l}, {h}] do not form a closed interval"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// `steps` evenly spaced points per axis (both endpoints included), in
    /// lexicographic order.
    pub fn grid(&self, steps: usize) -> Vec<Point> {
        let steps = steps.max(1);
        let axis = |i: usize| -> Vec<f64> {
            if steps == 1 {
                return vec![0.5 * (self.lo[i] + self.hi[i])];
            }
            let width = self.hi[i] - self.lo[i];
            (0..steps)
                .map(|j| {
                    if j + 1 == steps {
                        self.hi[i]
                    } else {
                        self.lo[i] + width * (j as f64) / ((steps - 1) as f64)
                    }
                })
                .collect()
        };
        let mut points: Vec<Point> = vec![Vec::new()];
        for i in 0..self.dimension() {
            let values = axis(i);
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// `(1 - t) a + t b`, evaluated as `a + t (b - a)` and confined to the segment
/// `[a, b]` coordinate-wise. `t = 0` returns `a` and `t = 1` returns `b` exactly,
/// so a point combined with itself is returned unchanged.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Point {
    debug_assert_eq!(a.len(), b.len());
    if t == 0.0 {
        return a.to_vec();
    }
    if t == 1.0 {
        return b.to_vec();
    }
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let v = x + t * (y - x);
            v.clamp(x.min(y), x.max(y))
        })
        .collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_rejects_inverted_bounds() {
        assert!(BoxDomain::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxDomain::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(BoxDomain::new(vec![], vec![]).is_err());
    }

    #[test]
    fn grid_covers_corners() {
        let d = BoxDomain::cube(2, 0.0, 2.0).unwrap();
        let g = d.grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.0, 0.0]);
        assert_eq!(g[8], vec![2.0, 2.0]);
        assert!(g.iter().all(|p| d.contains(p)));
    }

    #[test]
    fn lerp_endpoints_are_exact() {
        let a = [0.1, -3.0];
        let b = [0.7, 5.0];
        assert_eq!(lerp(&a, &b, 0.0), a.to_vec());
        assert_eq!(lerp(&a, &b, 1.0), b.to_vec());
        assert_eq!(lerp(&a, &a, 0.37), a.to_vec());
        assert_eq!(lerp(&[1.0], &[0.5], 0.5), vec![0.75]);
    }
}
