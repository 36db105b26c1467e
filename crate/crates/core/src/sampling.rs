//! Seeded point sampling over a domain box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcm::Point;

/// Probability that a sampled coordinate is snapped to one of the box
/// bounds instead of drawn uniformly. Extremal ratios of the example maps sit
/// on the boundary, so plain uniform sampling would only approach them.
const EDGE_PROBABILITY: f64 = 0.25;

/// Closed per-coordinate interval bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if lower.is_empty() {
            return Err(Error::InvalidArgument("domain box needs at least one coordinate".into()));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidArgument(format!(
                    "domain box coordinate {i}: need finite lower <= upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(DomainBox { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim()
            && coords.iter().zip(self.lower.iter().zip(&self.upper)).all(|(c, (lo, hi))| lo <= c && c <= hi)
    }

    /// Checks `coords` against the box; `context` names the offending value in
    /// the error.
    pub fn check(&self, coords: &[f64], context: &str) -> Result<()> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: coords.len() });
        }
        for (index, (&value, (&lower, &upper))) in coords.iter().zip(self.lower.iter().zip(&self.upper)).enumerate() {
            if !(lower <= value && value <= upper) {
                return Err(Error::OutOfDomain { context: context.to_string(), index, value, lower, upper });
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Point {
        let coords = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| {
                let u: f64 = rng.random();
                if u < EDGE_PROBABILITY / 2.0 {
                    lo
                } else if u < EDGE_PROBABILITY {
                    hi
                } else {
                    // `random_range` panics on an empty range
                    if lo == hi {
                        lo
                    } else {
                        rng.random_range(lo..=hi)
                    }
                }
            })
            .collect();
        Point::from_vec_unchecked(coords)
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_in_box_and_hit_edges() {
        let b = DomainBox::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let mut r = rng(3);
        let pts: Vec<Point> = (0..2000).map(|_| b.sample(&mut r)).collect();
        assert!(pts.iter().all(|p| b.contains(p.coords())));
        assert!(pts.iter().any(|p| p.coords()[0] == 0.0));
        assert!(pts.iter().any(|p| p.coords()[1] == 1.0));
    }

    #[test]
    fn degenerate_interval() {
        let b = DomainBox::cube(1, 0.5, 0.5).unwrap();
        assert_eq!(b.sample(&mut rng(0)).coords(), &[0.5]);
    }

    #[test]
    fn invalid_boxes() {
        assert!(DomainBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(DomainBox::new(vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(DomainBox::new(vec![], vec![]).is_err());
    }

    #[test]
    fn check_names_context() {
        let b = DomainBox::cube(2, 0.0, 1.0).unwrap();
        let err = b.check(&[0.5, 2.0], "iterate 3").unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { index: 1, .. }));
        assert!(err.to_string().starts_with("iterate 3"));
    }
}
