//! The ambient ordered vector space `E`: finite coordinate vectors ordered by
//! the nonnegative orthant cone.
//!
//! `x <= y` holds iff `y - x` lies in the cone, i.e. every coordinate of
//! `y - x` is at least `-order_tolerance`. With a tolerance of zero this is the
//! exact coordinatewise order.

use std::fmt;
use std::ops::{Add, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default per-coordinate slack for cone membership.
pub const DEFAULT_ORDER_TOLERANCE: f64 = 1e-12;

/// An element of the ambient space.
///
/// Coordinates are always finite. Arithmetic operators panic when the two
/// operands have different lengths; use the checked operations on
/// [`AmbientSpace`] at API boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConeVector(Vec<f64>);

impl ConeVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(ConeVector(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        ConeVector(vec![0.0; dim])
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        ConeVector(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scale(&self, factor: f64) -> ConeVector {
        ConeVector(self.0.iter().map(|c| c * factor).collect())
    }

    /// Coordinatewise product.
    pub fn hadamard(&self, other: &ConeVector) -> ConeVector {
        self.zip_with(other, |a, b| a * b)
    }

    /// Coordinatewise maximum of two vectors.
    pub fn max(&self, other: &ConeVector) -> ConeVector {
        self.zip_with(other, f64::max)
    }

    /// Smallest coordinate; `+inf` for the empty vector.
    pub fn min_coord(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn zip_with(&self, other: &ConeVector, f: impl Fn(f64, f64) -> f64) -> ConeVector {
        assert_eq!(self.dim(), other.dim(), "cone vector dimension mismatch");
        ConeVector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl Add for &ConeVector {
    type Output = ConeVector;

    fn add(self, rhs: &ConeVector) -> ConeVector {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ConeVector {
    type Output = ConeVector;

    fn sub(self, rhs: &ConeVector) -> ConeVector {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl fmt::Display for ConeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// Maximum absolute coordinate.
    Sup,
    /// Sum of absolute coordinates (truncated l1).
    OneSum,
}

/// Descriptor of the ambient space: its dimension, norm and the numerical
/// slack used for cone membership. The cone is the nonnegative orthant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientSpace {
    dimension: usize,
    norm_kind: NormKind,
    order_tolerance: f64,
}

impl AmbientSpace {
    pub fn new(dimension: usize, norm_kind: NormKind) -> Result<Self> {
        Self::with_tolerance(dimension, norm_kind, DEFAULT_ORDER_TOLERANCE)
    }

    pub fn with_tolerance(dimension: usize, norm_kind: NormKind, order_tolerance: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be at least 1".into()));
        }
        if !(order_tolerance >= 0.0 && order_tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "order tolerance must be finite and nonnegative, got {order_tolerance}"
            )));
        }
        Ok(AmbientSpace { dimension, norm_kind, order_tolerance })
    }

    /// Same space with exact cone membership.
    pub fn exact(self) -> Self {
        AmbientSpace { order_tolerance: 0.0, ..self }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn order_tolerance(&self) -> f64 {
        self.order_tolerance
    }

    pub fn check_dim(&self, v: &ConeVector) -> Result<()> {
        if v.dim() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: v.dim() });
        }
        Ok(())
    }

    pub fn cone_contains(&self, v: &ConeVector) -> Result<bool> {
        self.check_dim(v)?;
        Ok(self.in_cone(v))
    }

    pub(crate) fn in_cone(&self, v: &ConeVector) -> bool {
        v.coords().iter().all(|&c| c >= -self.order_tolerance)
    }

    /// `x <= y` in the cone order.
    pub fn leq(&self, x: &ConeVector, y: &ConeVector) -> Result<bool> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.in_cone(&(y - x)))
    }

    /// Coordinatewise maximum (the lattice join) of a nonempty list.
    pub fn join(&self, vs: &[ConeVector]) -> Result<ConeVector> {
        let (first, rest) = vs.split_first().ok_or(Error::EmptyJoin)?;
        self.check_dim(first)?;
        let mut acc = first.clone();
        for v in rest {
            self.check_dim(v)?;
            acc = acc.max(v);
        }
        Ok(acc)
    }

    pub fn norm(&self, v: &ConeVector) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.norm_unchecked(v))
    }

    pub(crate) fn norm_unchecked(&self, v: &ConeVector) -> f64 {
        let abs = v.coords().iter().map(|c| c.abs());
        match self.norm_kind {
            NormKind::Sup => abs.fold(0.0, f64::max),
            NormKind::OneSum => abs.sum(),
        }
    }

    /// Normal constant of the orthant cone under a monotone norm. Both
    /// supported norms are monotone on the cone, so the value is exactly 1.
    /// [`AmbientSpace::normal_constant`] estimates it from samples.
    pub fn normal_constant_bound(&self) -> f64 {
        1.0
    }

    /// Empirical lower bound on the normal constant: the largest
    /// `norm(x) / norm(y)` over sampled pairs `0 <= x <= y`, `y != 0`.
    ///
    /// Each pair draws `y` uniformly from `[0, 1]^dim` and sets
    /// `x_i = t_i * y_i`, where `t_i` is 1 with probability one half and
    /// uniform on `[0, 1]` otherwise, so pairs touching on some or all
    /// coordinates are well represented.
    pub fn normal_constant(&self, samples: usize, seed: u64) -> Result<f64> {
        if samples == 0 {
            return Err(Error::InvalidArgument("normal_constant needs at least one sample".into()));
        }
        let exact = self.exact();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: f64 = 0.0;
        for _ in 0..samples {
            let y: Vec<f64> = (0..self.dimension).map(|_| rng.random::<f64>()).collect();
            let x: Vec<f64> =
                y.iter().map(|&yi| if rng.random_bool(0.5) { yi } else { rng.random::<f64>() * yi }).collect();
            let (x, y) = (ConeVector(x), ConeVector(y));
            let zero = ConeVector::zeros(self.dimension);
            if !(exact.in_cone(&(&x - &zero)) && exact.in_cone(&(&y - &x))) {
                continue;
            }
            let ny = self.norm_unchecked(&y);
            if ny > 0.0 {
                best = best.max(self.norm_unchecked(&x) / ny);
            }
        }
        Ok(best)
    }
}
