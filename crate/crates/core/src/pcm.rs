//! Partial cone metric spaces.
//!
//! A partial cone metric `p: X × X → E` satisfies, for all `x, y, z`:
//!
//! * PCM1: `0 <= p(x,x) <= p(x,y)`
//! * PCM2: `x = y` iff `p(x,x) = p(x,y) = p(y,y)`
//! * PCM3: `p(x,y) = p(y,x)`
//! * PCM4: `p(x,y) <= p(x,z) + p(z,y) - p(z,z)`
//!
//! Unlike a cone metric, the self-distance `p(x,x)` need not vanish. The
//! induced `d_p(x,y) = 2p(x,y) - p(x,x) - p(y,y)` is a genuine cone metric.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordered_space::{AmbientSpace, ConeVector};
use crate::sampling::{self, DomainBox};

/// An element of the point set `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Point(coords))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        ConeVector::from_vec_unchecked(self.0.clone()).fmt(f)
    }
}

pub type MetricFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// A point domain with a partial cone metric into an ordered ambient space.
#[derive(Clone)]
pub struct PartialConeMetricSpace {
    name: String,
    ambient: AmbientSpace,
    domain: DomainBox,
    metric: MetricFn,
}

impl fmt::Debug for PartialConeMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialConeMetricSpace")
            .field("name", &self.name)
            .field("ambient", &self.ambient)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl PartialConeMetricSpace {
    pub fn new(
        name: impl Into<String>,
        ambient: AmbientSpace,
        domain: DomainBox,
        metric: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        PartialConeMetricSpace { name: name.into(), ambient, domain, metric: Arc::new(metric) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn point_dimension(&self) -> usize {
        self.domain.dim()
    }

    /// Replaces the ambient descriptor, e.g. to switch to exact cone order.
    pub fn with_ambient(mut self, ambient: AmbientSpace) -> Result<Self> {
        if ambient.dimension() != self.ambient.dimension() {
            return Err(Error::DimensionMismatch { expected: self.ambient.dimension(), found: ambient.dimension() });
        }
        self.ambient = ambient;
        Ok(self)
    }

    /// Replaces the domain by the cube `[0, upper]^dim`.
    pub fn with_box(mut self, upper: f64) -> Result<Self> {
        self.domain = DomainBox::cube(self.domain.dim(), 0.0, upper)?;
        Ok(self)
    }

    pub fn check_point(&self, x: &Point, context: &str) -> Result<()> {
        self.domain.check(x.coords(), context)
    }

    /// `p(x, y)`, with both points checked against the domain box.
    pub fn pcm_eval(&self, x: &Point, y: &Point) -> Result<ConeVector> {
        self.check_point(x, "first point")?;
        self.check_point(y, "second point")?;
        self.p(x, y)
    }

    /// `p(x, y)` without the domain check. The output is still validated.
    pub(crate) fn p(&self, x: &Point, y: &Point) -> Result<ConeVector> {
        let v = ConeVector::new((self.metric)(x.coords(), y.coords()))?;
        self.ambient.check_dim(&v)?;
        Ok(v)
    }

    pub fn norm(&self, v: &ConeVector) -> f64 {
        self.ambient.norm_unchecked(v)
    }

    /// The induced cone metric `2p(x,y) - p(x,x) - p(y,y)`.
    pub fn induced_metric(&self, x: &Point, y: &Point) -> Result<ConeVector> {
        self.check_point(x, "first point")?;
        self.check_point(y, "second point")?;
        self.d(x, y)
    }

    pub(crate) fn d(&self, x: &Point, y: &Point) -> Result<ConeVector> {
        let pxy = self.p(x, y)?;
        let pxx = self.p(x, x)?;
        let pyy = self.p(y, y)?;
        // summing the self-distances first keeps d(x,y) == d(y,x) bit for bit
        Ok(&pxy.scale(2.0) - &(&pxx + &pyy))
    }

    /// Whether the last point of `trace_tail` is within `tol` of `candidate`
    /// in the partial-metric sense: both `p(x_n, x) - p(x, x)` and
    /// `p(x_n, x_n) - p(x, x)` have norm at most `tol`.
    pub fn is_converged(&self, trace_tail: &[Point], candidate: &Point, tol: f64) -> Result<bool> {
        let last = trace_tail
            .last()
            .ok_or_else(|| Error::InvalidArgument("convergence check needs a nonempty trace".into()))?;
        let pcc = self.p(candidate, candidate)?;
        let to_candidate = self.norm(&(&self.p(last, candidate)? - &pcc));
        let self_gap = self.norm(&(&self.p(last, last)? - &pcc));
        Ok(to_candidate <= tol && self_gap <= tol)
    }

    /// `norm(p(x_m, x_n))`: the Cauchy residual against the anchor 0.
    pub fn cauchy_residual(&self, x_m: &Point, x_n: &Point) -> Result<f64> {
        Ok(self.norm(&self.p(x_m, x_n)?))
    }

    /// Samples `n` seeded triples and checks PCM1 through PCM4 on each.
    pub fn check_axioms(&self, seed: u64, n: usize) -> Result<AxiomReport> {
        if n == 0 {
            return Err(Error::InvalidArgument("axiom check needs at least one sample".into()));
        }
        let mut rng = sampling::rng(seed);
        let mut violations = Vec::new();
        for _ in 0..n {
            let x = self.domain.sample(&mut rng);
            let y = self.domain.sample(&mut rng);
            let z = self.domain.sample(&mut rng);
            violations.extend(self.check_triple(&x, &y, &z)?);
        }
        Ok(AxiomReport { samples_checked: n, violations })
    }

    /// Checks all four axioms on one triple.
    pub fn check_triple(&self, x: &Point, y: &Point, z: &Point) -> Result<Vec<AxiomViolation>> {
        let amb = &self.ambient;
        let pxy = self.p(x, y)?;
        let pyx = self.p(y, x)?;
        let pxx = self.p(x, x)?;
        let pyy = self.p(y, y)?;
        let pxz = self.p(x, z)?;
        let pzy = self.p(z, y)?;
        let pzz = self.p(z, z)?;
        let mut out = Vec::new();

        // PCM1, for x and (by symmetry of the roles) for y
        for (a, b, self_dist, cross) in [(x, y, &pxx, &pxy), (y, x, &pyy, &pyx)] {
            let slack = self_dist.min_with(&(cross - self_dist));
            if !amb.in_cone(&slack) {
                out.push(AxiomViolation { axiom: Axiom::Pcm1, points: vec![a.clone(), b.clone()], slack });
            }
        }

        // PCM2, contrapositive direction: distinct points must be told apart
        if x != y {
            let gap = (&pxx - &pxy).zip_with(&(&pyy - &pxy), |a, b| a.abs().max(b.abs()));
            if gap.coords().iter().all(|&g| g <= amb.order_tolerance()) {
                out.push(AxiomViolation { axiom: Axiom::Pcm2, points: vec![x.clone(), y.clone()], slack: gap });
            }
        }

        // PCM3 is checked exactly
        if pxy != pyx {
            let slack = (&pxy - &pyx).zip_with(&pxy, |d, _| -d.abs());
            out.push(AxiomViolation { axiom: Axiom::Pcm3, points: vec![x.clone(), y.clone()], slack });
        }

        let slack = &(&(&pxz + &pzy) - &pzz) - &pxy;
        if !amb.in_cone(&slack) {
            out.push(AxiomViolation { axiom: Axiom::Pcm4, points: vec![x.clone(), y.clone(), z.clone()], slack });
        }
        Ok(out)
    }
}

impl ConeVector {
    fn min_with(&self, other: &ConeVector) -> ConeVector {
        self.zip_with(other, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    #[serde(rename = "PCM1")]
    Pcm1,
    #[serde(rename = "PCM2")]
    Pcm2,
    #[serde(rename = "PCM3")]
    Pcm3,
    #[serde(rename = "PCM4")]
    Pcm4,
}

/// A failed axiom instance. For PCM1, PCM3 and PCM4 the slack is the
/// right-hand side minus the left-hand side (negative coordinates fail). For
/// PCM2 it is the coordinatewise spread of `p(x,x)`, `p(y,y)` around `p(x,y)`,
/// which should not vanish for distinct points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub points: Vec<Point>,
    pub slack: ConeVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub samples_checked: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}
