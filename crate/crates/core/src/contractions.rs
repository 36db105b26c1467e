//! Contraction conditions for a mapping pair `(T, S)`.
//!
//! Each family is an inequality in the cone order between combinations of
//! partial-metric values. [`ContractionSpec::holds_at`] evaluates it at one
//! pair of points, [`ContractionSpec::verify_sampled`] over seeded samples,
//! and [`fit_constants`] searches for the parameters with the smallest
//! contraction rate that pass on a sample set.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordered_space::ConeVector;
use crate::pcm::{PartialConeMetricSpace, Point};
use crate::sampling;

/// Default grid resolution of [`fit_constants`].
pub const DEFAULT_FIT_STEP: f64 = 1.0 / 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `p(Tx,Sy) <= α p(x,Tx) + β p(y,Sy)`
    Kannan,
    /// `p(Tx,Sy) <= α p(x,y) + β p(x,Tx) + γ p(y,Sy)`
    Reich,
    /// `p(Tx,Sy) <= α p(x,Tx) p(y,Sy) / (1 + p(x,y)) + β p(x,y)`
    Rational,
    /// `α p(Tx,Sy) + β[p(x,Tx) + p(y,Sy)] + γ[p(Tx,y) + p(x,Sy)] <= s p(x,y) + r p(x,STx)`
    ImplicitLinear,
    /// `p(Tx,Sy) <= α max{p(x,y), p(x,Tx), p(y,Sy)}`
    MaxType,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Kannan, Family::Reich, Family::Rational, Family::ImplicitLinear, Family::MaxType];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Kannan => "kannan",
            Family::Reich => "reich",
            Family::Rational => "rational",
            Family::ImplicitLinear => "implicit-linear",
            Family::MaxType => "max-type",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A contraction family with its parameters. Slots a family does not use
/// must be zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionSpec {
    pub family: Family,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub s: f64,
    pub r: f64,
}

impl ContractionSpec {
    fn raw(family: Family, alpha: f64, beta: f64, gamma: f64, s: f64, r: f64) -> Self {
        ContractionSpec { family, alpha, beta, gamma, s, r }
    }

    pub fn kannan(alpha: f64, beta: f64) -> Self {
        Self::raw(Family::Kannan, alpha, beta, 0.0, 0.0, 0.0)
    }

    /// Kannan condition with equal weights, `α [p(x,Tx) + p(y,Sy)]`.
    pub fn kannan_symmetric(alpha: f64) -> Self {
        Self::kannan(alpha, alpha)
    }

    pub fn reich(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self::raw(Family::Reich, alpha, beta, gamma, 0.0, 0.0)
    }

    pub fn reich_symmetric(alpha: f64) -> Self {
        Self::reich(alpha, alpha, alpha)
    }

    pub fn rational(alpha: f64, beta: f64) -> Self {
        Self::raw(Family::Rational, alpha, beta, 0.0, 0.0, 0.0)
    }

    pub fn implicit_linear(alpha: f64, beta: f64, gamma: f64, s: f64, r: f64) -> Self {
        Self::raw(Family::ImplicitLinear, alpha, beta, gamma, s, r)
    }

    pub fn max_type(alpha: f64) -> Self {
        Self::raw(Family::MaxType, alpha, 0.0, 0.0, 0.0, 0.0)
    }

    /// Checks the family's parameter constraints. Every violated constraint
    /// is listed in the returned [`Error::Constraint`].
    pub fn validate(&self) -> Result<()> {
        let ContractionSpec { family, alpha, beta, gamma, s, r } = *self;
        let mut bad = Vec::new();
        for (name, v) in [("α", alpha), ("β", beta), ("γ", gamma), ("s", s), ("r", r)] {
            if !v.is_finite() {
                bad.push(format!("{name} must be finite"));
            }
        }
        if !bad.is_empty() {
            return Err(Error::Constraint(bad));
        }
        let unit = |bad: &mut Vec<String>, name: &str, v: f64| {
            if !(0.0..1.0).contains(&v) {
                bad.push(format!("{name}∈[0,1) violated"));
            }
        };
        let unused = |bad: &mut Vec<String>, slots: &[(&str, f64)]| {
            for (name, v) in slots {
                if *v != 0.0 {
                    bad.push(format!("{name} is unused by the {family} family and must be 0"));
                }
            }
        };
        match family {
            Family::Kannan | Family::Rational => {
                unit(&mut bad, "α", alpha);
                unit(&mut bad, "β", beta);
                if alpha + beta >= 1.0 {
                    bad.push("α+β<1 violated".into());
                }
                unused(&mut bad, &[("γ", gamma), ("s", s), ("r", r)]);
            }
            Family::Reich => {
                unit(&mut bad, "α", alpha);
                unit(&mut bad, "β", beta);
                unit(&mut bad, "γ", gamma);
                if alpha + beta + gamma >= 1.0 {
                    bad.push("α+β+γ<1 violated".into());
                }
                unused(&mut bad, &[("s", s), ("r", r)]);
            }
            Family::ImplicitLinear => {
                let denom = alpha + beta;
                if denom == 0.0 {
                    bad.push("α+β≠0 violated".into());
                } else {
                    let k = (s - beta) / denom;
                    if k < 0.0 {
                        bad.push("0≤(s−β)/(α+β) violated".into());
                    }
                    if k >= 1.0 {
                        bad.push("(s−β)/(α+β)<1 violated".into());
                    }
                }
                if alpha + beta + gamma <= 0.0 {
                    bad.push("α+β+γ>0 violated".into());
                }
                if gamma <= 0.0 {
                    bad.push("γ>0 violated".into());
                }
                if gamma - r < 0.0 {
                    bad.push("γ−r≥0 violated".into());
                }
            }
            Family::MaxType => {
                unit(&mut bad, "α", alpha);
                unused(&mut bad, &[("β", beta), ("γ", gamma), ("s", s), ("r", r)]);
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Constraint(bad))
        }
    }

    /// The geometric factor `K` bounding consecutive iterate distances.
    pub fn contraction_rate(&self) -> Result<f64> {
        self.validate()?;
        let ContractionSpec { alpha, beta, gamma, s, .. } = *self;
        Ok(match self.family {
            Family::Kannan => alpha / (1.0 - beta),
            Family::Reich => (alpha + beta) / (1.0 - gamma),
            Family::Rational => beta / (1.0 - alpha),
            Family::ImplicitLinear => (s - beta) / (alpha + beta),
            Family::MaxType => alpha,
        })
    }

    /// Left- and right-hand sides of the family's inequality at `(x, y)`.
    pub fn sides(
        &self,
        space: &PartialConeMetricSpace,
        maps: &MappingPair,
        x: &Point,
        y: &Point,
    ) -> Result<(ConeVector, ConeVector)> {
        let t = Terms::evaluate(space, maps, x, y, self.family == Family::ImplicitLinear)?;
        let ContractionSpec { alpha, beta, gamma, s, r, .. } = *self;
        Ok(match self.family {
            Family::Kannan => (t.ptxsy, &t.pxtx.scale(alpha) + &t.pysy.scale(beta)),
            Family::Reich => {
                let rhs = &(&t.pxy.scale(alpha) + &t.pxtx.scale(beta)) + &t.pysy.scale(gamma);
                (t.ptxsy, rhs)
            }
            Family::Rational => {
                let rhs = &t.rational_quotient().scale(alpha) + &t.pxy.scale(beta);
                (t.ptxsy, rhs)
            }
            Family::ImplicitLinear => {
                let (ptxy, pxsy, pxstx) = t.implicit.as_ref().expect("implicit terms requested");
                let lhs = &(&t.ptxsy.scale(alpha) + &(&t.pxtx + &t.pysy).scale(beta)) + &(ptxy + pxsy).scale(gamma);
                let rhs = &t.pxy.scale(s) + &pxstx.scale(r);
                (lhs, rhs)
            }
            Family::MaxType => {
                let rhs = t.max_term().scale(alpha);
                (t.ptxsy, rhs)
            }
        })
    }

    /// Evaluates the condition at `(x, y)`. The slack is right-hand side
    /// minus left-hand side; the condition holds when the slack lies in the
    /// cone (up to the ambient order tolerance).
    pub fn holds_at(
        &self,
        space: &PartialConeMetricSpace,
        maps: &MappingPair,
        x: &Point,
        y: &Point,
    ) -> Result<(bool, ConeVector)> {
        self.validate()?;
        space.check_point(x, "x")?;
        space.check_point(y, "y")?;
        let (lhs, rhs) = self.sides(space, maps, x, y)?;
        let slack = &rhs - &lhs;
        Ok((space.ambient().in_cone(&slack), slack))
    }

    /// Checks the condition on `n` seeded sample pairs.
    pub fn verify_sampled(
        &self,
        space: &PartialConeMetricSpace,
        maps: &MappingPair,
        seed: u64,
        n: usize,
    ) -> Result<Certificate> {
        self.validate()?;
        let pairs = sample_pairs(space, seed, n)?;
        self.verify_pairs(space, maps, &pairs)
    }

    /// Checks the condition on the given pairs. Pairs are evaluated in
    /// parallel; the certificate lists violations in input order.
    pub fn verify_pairs(
        &self,
        space: &PartialConeMetricSpace,
        maps: &MappingPair,
        pairs: &[(Point, Point)],
    ) -> Result<Certificate> {
        let results = pairs.par_iter().map(|(x, y)| self.holds_at(space, maps, x, y)).collect::<Result<Vec<_>>>()?;
        let mut worst_slack = f64::INFINITY;
        let mut violations = Vec::new();
        for ((x, y), (holds, slack)) in pairs.iter().zip(results) {
            worst_slack = worst_slack.min(slack.min_coord());
            if !holds {
                violations.push(ContractionViolation { x: x.clone(), y: y.clone(), slack });
            }
        }
        Ok(Certificate { spec: *self, samples_checked: pairs.len(), violations, worst_slack })
    }
}

/// All partial-metric values the five families combine.
struct Terms {
    pxy: ConeVector,
    pxtx: ConeVector,
    pysy: ConeVector,
    ptxsy: ConeVector,
    /// `p(Tx,y)`, `p(x,Sy)`, `p(x,STx)`; only needed by the implicit family.
    implicit: Option<(ConeVector, ConeVector, ConeVector)>,
}

impl Terms {
    fn evaluate(
        space: &PartialConeMetricSpace,
        maps: &MappingPair,
        x: &Point,
        y: &Point,
        implicit: bool,
    ) -> Result<Terms> {
        let tx = maps.apply(Which::T, space, x, "T(x)")?;
        let sy = maps.apply(Which::S, space, y, "S(y)")?;
        let implicit = if implicit {
            let stx = maps.apply(Which::S, space, &tx, "S(T(x))")?;
            Some((space.p(&tx, y)?, space.p(x, &sy)?, space.p(x, &stx)?))
        } else {
            None
        };
        Ok(Terms {
            pxy: space.p(x, y)?,
            pxtx: space.p(x, &tx)?,
            pysy: space.p(y, &sy)?,
            ptxsy: space.p(&tx, &sy)?,
            implicit,
        })
    }

    /// `p(x,Tx) p(y,Sy) / (1 + p(x,y))`, coordinatewise.
    fn rational_quotient(&self) -> ConeVector {
        self.pxtx.hadamard(&self.pysy).zip_with(&self.pxy, |num, d| num / (1.0 + d))
    }

    fn max_term(&self) -> ConeVector {
        self.pxy.max(&self.pxtx).max(&self.pysy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionViolation {
    pub x: Point,
    pub y: Point,
    pub slack: ConeVector,
}

/// Outcome of a sampled verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub spec: ContractionSpec,
    pub samples_checked: usize,
    pub violations: Vec<ContractionViolation>,
    /// Smallest slack coordinate over all samples.
    pub worst_slack: f64,
}

impl Certificate {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    T,
    S,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::T => "T",
            Which::S => "S",
        })
    }
}

/// The two self-maps `T` and `S` of a common fixed point problem.
#[derive(Clone)]
pub struct MappingPair {
    t_name: String,
    s_name: String,
    t: MapFn,
    s: MapFn,
}

impl fmt::Debug for MappingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MappingPair").field("t", &self.t_name).field("s", &self.s_name).finish()
    }
}

impl MappingPair {
    pub fn new(
        t_name: impl Into<String>,
        t: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        s_name: impl Into<String>,
        s: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        MappingPair { t_name: t_name.into(), s_name: s_name.into(), t: Arc::new(t), s: Arc::new(s) }
    }

    pub fn t_name(&self) -> &str {
        &self.t_name
    }

    pub fn s_name(&self) -> &str {
        &self.s_name
    }

    /// Applies `T` or `S` and checks that the image stays in the domain box.
    /// `context` labels the image in domain errors.
    pub fn apply(&self, which: Which, space: &PartialConeMetricSpace, x: &Point, context: &str) -> Result<Point> {
        let f = match which {
            Which::T => &self.t,
            Which::S => &self.s,
        };
        let image = f(x.coords());
        // non-finite values fail the bounds check as well
        space.domain().check(&image, context)?;
        Ok(Point::from_vec_unchecked(image))
    }
}

fn sample_pairs(space: &PartialConeMetricSpace, seed: u64, n: usize) -> Result<Vec<(Point, Point)>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sampled verification needs at least one sample".into()));
    }
    let mut rng = sampling::rng(seed);
    Ok((0..n)
        .map(|_| {
            let x = space.domain().sample(&mut rng);
            let y = space.domain().sample(&mut rng);
            (x, y)
        })
        .collect())
}

/// Parameter layouts [`fit_constants`] can search. The implicit-linear
/// family has five coupled parameters and is not fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitFamily {
    Kannan,
    /// Kannan with `α = β`.
    KannanSymmetric,
    Reich,
    /// Reich with `α = β = γ`.
    ReichSymmetric,
    Rational,
    MaxType,
}

impl FitFamily {
    pub fn family(self) -> Family {
        match self {
            FitFamily::Kannan | FitFamily::KannanSymmetric => Family::Kannan,
            FitFamily::Reich | FitFamily::ReichSymmetric => Family::Reich,
            FitFamily::Rational => Family::Rational,
            FitFamily::MaxType => Family::MaxType,
        }
    }

    fn outer_len(self) -> usize {
        match self {
            FitFamily::Kannan | FitFamily::Rational => 1,
            FitFamily::Reich => 2,
            FitFamily::KannanSymmetric | FitFamily::ReichSymmetric | FitFamily::MaxType => 0,
        }
    }

    /// Builds a spec from the free parameter and the outer grid values.
    fn spec(self, free: f64, outer: &[f64]) -> ContractionSpec {
        match self {
            FitFamily::Kannan => ContractionSpec::kannan(free, outer[0]),
            FitFamily::KannanSymmetric => ContractionSpec::kannan_symmetric(free),
            FitFamily::Reich => ContractionSpec::reich(free, outer[0], outer[1]),
            FitFamily::ReichSymmetric => ContractionSpec::reich_symmetric(free),
            FitFamily::Rational => ContractionSpec::rational(outer[0], free),
            FitFamily::MaxType => ContractionSpec::max_type(free),
        }
    }

    /// Splits the slack into `free * coef + Σ outer_j * outer_coef_j - lhs`,
    /// one row per ambient coordinate.
    fn rows(self, t: &Terms) -> Vec<Row> {
        let (free, outer): (ConeVector, Vec<&ConeVector>) = match self {
            FitFamily::Kannan => (t.pxtx.clone(), vec![&t.pysy]),
            FitFamily::KannanSymmetric => (&t.pxtx + &t.pysy, vec![]),
            FitFamily::Reich => (t.pxy.clone(), vec![&t.pxtx, &t.pysy]),
            FitFamily::ReichSymmetric => (&(&t.pxy + &t.pxtx) + &t.pysy, vec![]),
            FitFamily::Rational => {
                let q = t.rational_quotient();
                return (0..q.dim())
                    .map(|i| Row { free: t.pxy.coords()[i], outer: vec![q.coords()[i]], lhs: t.ptxsy.coords()[i] })
                    .collect();
            }
            FitFamily::MaxType => (t.max_term(), vec![]),
        };
        (0..free.dim())
            .map(|i| Row {
                free: free.coords()[i],
                outer: outer.iter().map(|v| v.coords()[i]).collect(),
                lhs: t.ptxsy.coords()[i],
            })
            .collect()
    }
}

impl TryFrom<Family> for FitFamily {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        match family {
            Family::Kannan => Ok(FitFamily::Kannan),
            Family::Reich => Ok(FitFamily::Reich),
            Family::Rational => Ok(FitFamily::Rational),
            Family::MaxType => Ok(FitFamily::MaxType),
            Family::ImplicitLinear => Err(Error::InvalidArgument("unsupported family for fitting".into())),
        }
    }
}

impl FromStr for FitFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kannan" => Ok(FitFamily::Kannan),
            "kannan-sym" => Ok(FitFamily::KannanSymmetric),
            "reich" => Ok(FitFamily::Reich),
            "reich-sym" => Ok(FitFamily::ReichSymmetric),
            "rational" => Ok(FitFamily::Rational),
            "max" | "max-type" => Ok(FitFamily::MaxType),
            "implicit-linear" => Err(Error::InvalidArgument("unsupported family for fitting".into())),
            other => Err(Error::InvalidArgument(format!("unknown contraction family `{other}`"))),
        }
    }
}

struct Row {
    free: f64,
    outer: Vec<f64>,
    lhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum FitOutcome {
    Fitted { spec: ContractionSpec, rate: f64 },
    Infeasible,
}

/// [`fit_constants_with_step`] at the default grid step of 1/256.
pub fn fit_constants(
    family: FitFamily,
    space: &PartialConeMetricSpace,
    maps: &MappingPair,
    seed: u64,
    n: usize,
) -> Result<FitOutcome> {
    fit_constants_with_step(family, space, maps, seed, n, DEFAULT_FIT_STEP)
}

/// Searches for valid parameters of minimal contraction rate that pass on the
/// `n` pairs [`ContractionSpec::verify_sampled`] would draw from `seed`.
///
/// All but one parameter run over the grid `{0, step, 2 step, ...} ∩ [0, 1)`.
/// The remaining (free) parameter enters the slack linearly, so its smallest
/// passing value is solved from the samples, rounded up to the grid, and then
/// refined once by testing the midpoint below the rounded value.
pub fn fit_constants_with_step(
    family: FitFamily,
    space: &PartialConeMetricSpace,
    maps: &MappingPair,
    seed: u64,
    n: usize,
    step: f64,
) -> Result<FitOutcome> {
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::InvalidArgument(format!("fit step must lie in (0, 1), got {step}")));
    }
    let pairs = sample_pairs(space, seed, n)?;
    let rows: Vec<Row> = pairs
        .par_iter()
        .map(|(x, y)| Terms::evaluate(space, maps, x, y, false).map(|t| family.rows(&t)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let tol = space.ambient().order_tolerance();

    let levels: Vec<f64> = (0..).map(|g| g as f64 * step).take_while(|&v| v < 1.0).collect();
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..family.outer_len() {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                levels.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .filter(|p| p.iter().sum::<f64>() < 1.0)
            .collect();
    }

    let mut candidates: Vec<(f64, f64, usize, ContractionSpec)> = grid
        .par_iter()
        .enumerate()
        .filter_map(|(index, outer)| {
            let free_min = min_free_value(&rows, outer, tol)?;
            let free = round_up_refined(free_min, step);
            let spec = family.spec(free, outer);
            let rate = spec.contraction_rate().ok()?;
            Some((rate, free + outer.iter().sum::<f64>(), index, spec))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));

    for (rate, _, _, spec) in candidates {
        if spec.verify_pairs(space, maps, &pairs)?.pass() {
            return Ok(FitOutcome::Fitted { spec, rate });
        }
    }
    Ok(FitOutcome::Infeasible)
}

/// Smallest nonnegative free parameter satisfying every row, or `None` when a
/// row without free coefficient already fails.
fn min_free_value(rows: &[Row], outer: &[f64], tol: f64) -> Option<f64> {
    let mut need: f64 = 0.0;
    for row in rows {
        let fixed: f64 = row.outer.iter().zip(outer).map(|(c, v)| c * v).sum();
        let deficit = row.lhs - tol - fixed;
        if row.free > 0.0 {
            need = need.max(deficit / row.free);
        } else if deficit > 0.0 {
            return None;
        }
    }
    Some(need)
}

fn round_up_refined(value: f64, step: f64) -> f64 {
    if value <= 0.0 {
        return 0.0;
    }
    let up = (value / step).ceil() * step;
    let mid = up - step / 2.0;
    if mid >= value {
        mid
    } else {
        up
    }
}
