use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{BoxDomain, Point};

/// Ordered point pairs over which a condition is certified.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub pairs: Vec<(Point, Point)>,
}

impl SampleSet {
    pub fn from_pairs(pairs: Vec<(Point, Point)>) -> Self {
        Self { pairs }
    }

    /// Every ordered pair of points of `domain.grid(steps)`.
    pub fn grid(domain: &BoxDomain, steps: usize) -> Self {
        let points = domain.grid(steps);
        let pairs = points
            .iter()
            .flat_map(|x| points.iter().map(move |y| (x.clone(), y.clone())))
            .collect();
        Self { pairs }
    }

    /// `count` uniformly drawn pairs from a ChaCha8 stream seeded with `seed`.
    pub fn random(domain: &BoxDomain, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Point {
            domain
                .lo
                .iter()
                .zip(&domain.hi)
                .map(|(l, h)| if l == h { *l } else { rng.random_range(*l..=*h) })
                .collect()
        };
        let pairs = (0..count).map(|_| (draw(), draw())).collect();
        Self { pairs }
    }

    /// Exactly `count` pairs: the largest full grid using at most half the
    /// budget, topped up with seeded random pairs.
    pub fn seeded(domain: &BoxDomain, count: usize, seed: u64) -> Self {
        let d = domain.dimension() as u32;
        let mut steps = 1usize;
        while (steps + 1).pow(2 * d) <= count / 2 {
            steps += 1;
        }
        let mut set = if steps >= 2 {
            Self::grid(domain, steps)
        } else {
            Self { pairs: Vec::new() }
        };
        let rest = count - set.pairs.len();
        set.pairs.extend(Self::random(domain, rest, seed).pairs);
        set
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_is_exact_size_and_reproducible() {
        let d2 = BoxDomain::cube(2, 0.0, 2.0).unwrap();
        let a = SampleSet::seeded(&d2, 10_000, 42);
        let b = SampleSet::seeded(&d2, 10_000, 42);
        let c = SampleSet::seeded(&d2, 10_000, 43);
        assert_eq!(a.len(), 10_000);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.pairs.iter().all(|(x, y)| d2.contains(x) && d2.contains(y)));

        let d1 = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        assert_eq!(SampleSet::seeded(&d1, 10_000, 7).len(), 10_000);
        assert_eq!(SampleSet::seeded(&d1, 3, 7).len(), 3);
    }

    #[test]
    fn grid_pairs_are_all_ordered_pairs() {
        let d = BoxDomain::cube(1, 0.0, 2.0).unwrap();
        assert_eq!(SampleSet::grid(&d, 50).len(), 2500);
    }
}
