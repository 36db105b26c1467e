//! Alternating Picard iteration for a common fixed point of `(T, S)`.
//!
//! Starting from `x0` the solver produces `x1 = T x0`, `x2 = S x1`,
//! `x3 = T x2`, ...: odd iterates come from `T`, even ones from `S`. Under a
//! contraction condition with rate `K` consecutive distances shrink
//! geometrically, `p(x_{n+1}, x_n) <= K^n p(x_1, x_0)`, and the tail obeys
//! `‖p(x_m, x_n)‖ <= M K^n ‖p(x_1, x_0)‖ / (1 - K)` for `m > n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contractions::{ContractionSpec, Family, MappingPair, Which};
use crate::error::{Error, Result};
use crate::pcm::{PartialConeMetricSpace, Point};

/// Iterate coordinates are recorded in the trace up to this point dimension.
pub const MAX_TRACED_POINT_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopConfig {
    /// Residual threshold in the ambient norm.
    pub tol: f64,
    pub max_iters: usize,
    /// Also stop once the a-priori tail bound drops below `tol` (requires a
    /// contraction spec). Residuals are still confirmed before stopping.
    pub use_apriori: bool,
}

impl Default for StopConfig {
    fn default() -> Self {
        StopConfig { tol: 1e-10, max_iters: 100_000, use_apriori: false }
    }
}

impl StopConfig {
    pub fn new(tol: f64, max_iters: usize) -> Self {
        StopConfig { tol, max_iters, use_apriori: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// One iteration step: `step_norm = ‖p(x_{n+1}, x_n)‖`, `self_norm = ‖p(x_n, x_n)‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: usize,
    pub step_norm: f64,
    pub self_norm: f64,
    /// `x_n`, omitted when the point dimension exceeds [`MAX_TRACED_POINT_DIM`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn step_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.step_norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxItersExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Residual,
    Apriori,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    pub stop_reason: StopReason,
    pub x_star: Point,
    /// Index of `x_star` in the iterate sequence.
    pub iterations: usize,
    /// `‖p(x*, T x*)‖`
    pub residual_t: f64,
    /// `‖p(x*, S x*)‖`
    pub residual_s: f64,
    /// `‖p(x*, x*)‖`
    pub self_distance: f64,
    pub trace: IterationTrace,
    /// Every iterate produced, `x_0` first. One longer than the trace.
    #[serde(skip)]
    pub iterates: Vec<Point>,
    /// Map evaluations made only to measure a residual, outside the iterate
    /// sequence. Total map calls are `trace.len() + probes`.
    pub probes: usize,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// `M K^n ‖p(x_1, x_0)‖ / (1 - K)`.
pub fn apriori_bound(k: f64, m: f64, p10_norm: f64, n: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::constraint(format!("K∈[0,1) violated (K = {k})")));
    }
    if !(m > 0.0 && m.is_finite()) || !(p10_norm >= 0.0 && p10_norm.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "normal constant and first-step norm must be finite and nonnegative, got M = {m}, ‖p(x1,x0)‖ = {p10_norm}"
        )));
    }
    if p10_norm == 0.0 {
        return Ok(0.0);
    }
    Ok(m * k.powi(n as i32) * p10_norm / (1.0 - k))
}

fn map_for_step(n: usize) -> Which {
    if n.is_multiple_of(2) {
        Which::T
    } else {
        Which::S
    }
}

fn other(which: Which) -> Which {
    match which {
        Which::T => Which::S,
        Which::S => Which::T,
    }
}

/// Runs the alternating iteration from `x0`.
///
/// At each iterate `x_n` the next map is applied once. When the resulting
/// residual is within `tol` the other map is probed at `x_n`; if that residual
/// is within `tol` too, `x_n` is returned. The trace then ends with the step
/// out of `x_n`. Non-convergence is reported through the status, never as an
/// error; mapping outputs outside the domain box are errors.
pub fn solve(
    space: &PartialConeMetricSpace,
    maps: &MappingPair,
    x0: &Point,
    stop: &StopConfig,
    spec: Option<&ContractionSpec>,
) -> Result<SolveResult> {
    stop.validate()?;
    space.check_point(x0, "x0")?;
    let rate = match spec {
        Some(spec) => Some(spec.contraction_rate()?),
        None => None,
    };
    let normal = space.ambient().normal_constant_bound();

    let mut trace = IterationTrace::default();
    let mut iterates = vec![x0.clone()];
    let mut probes = 0;
    let mut apriori_tried = false;

    for n in 0..stop.max_iters {
        let x = iterates[n].clone();
        let self_norm = space.norm(&space.p(&x, &x)?);

        if stop.use_apriori && !apriori_tried && n > 0 {
            if let Some(k) = rate {
                let first = trace.records[0].step_norm;
                if apriori_bound(k, normal, first, n as u32)? <= stop.tol {
                    apriori_tried = true;
                    let rt = residual(space, maps, Which::T, &x, n)?;
                    let rs = residual(space, maps, Which::S, &x, n)?;
                    probes += 2;
                    if rt <= stop.tol && rs <= stop.tol {
                        return Ok(SolveResult {
                            status: Status::Converged,
                            stop_reason: StopReason::Apriori,
                            x_star: x,
                            iterations: n,
                            residual_t: rt,
                            residual_s: rs,
                            self_distance: self_norm,
                            trace,
                            iterates,
                            probes,
                        });
                    }
                }
            }
        }

        let which = map_for_step(n);
        let next = maps.apply(which, space, &x, &format!("step {n} ({which})"))?;
        let step_norm = space.norm(&space.p(&next, &x)?);
        let applied = space.norm(&space.p(&x, &next)?);
        let point = (space.point_dimension() <= MAX_TRACED_POINT_DIM).then(|| x.coords().to_vec());
        trace.records.push(TraceRecord { n, step_norm, self_norm, point });
        iterates.push(next);

        if applied <= stop.tol {
            let probe = residual(space, maps, other(which), &x, n)?;
            probes += 1;
            if probe <= stop.tol {
                let (residual_t, residual_s) = match which {
                    Which::T => (applied, probe),
                    Which::S => (probe, applied),
                };
                return Ok(SolveResult {
                    status: Status::Converged,
                    stop_reason: StopReason::Residual,
                    x_star: x,
                    iterations: n,
                    residual_t,
                    residual_s,
                    self_distance: self_norm,
                    trace,
                    iterates,
                    probes,
                });
            }
        }
    }

    let n = stop.max_iters;
    let x = iterates[n].clone();
    let residual_t = residual(space, maps, Which::T, &x, n)?;
    let residual_s = residual(space, maps, Which::S, &x, n)?;
    Ok(SolveResult {
        status: Status::MaxItersExceeded,
        stop_reason: StopReason::MaxIters,
        self_distance: space.norm(&space.p(&x, &x)?),
        x_star: x,
        iterations: n,
        residual_t,
        residual_s,
        trace,
        iterates,
        probes: probes + 2,
    })
}

fn residual(space: &PartialConeMetricSpace, maps: &MappingPair, which: Which, x: &Point, n: usize) -> Result<f64> {
    let image = maps.apply(which, space, x, &format!("residual probe at iterate {n} ({which})"))?;
    Ok(space.norm(&space.p(x, &image)?))
}

/// Residual norms at a candidate common fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub pass: bool,
    pub residual_t: f64,
    pub residual_s: f64,
    pub self_distance: f64,
    /// `‖d_p(x, T x)‖`
    pub induced_t: f64,
    /// `‖d_p(x, S x)‖`
    pub induced_s: f64,
}

/// Accepts `x` when `p(x,Tx)`, `p(x,Sx)` and `p(x,x)` have norm at most `tol`
/// and the induced distances `d_p(x,Tx)`, `d_p(x,Sx)` at most `4 tol`.
///
/// A fixed point with nonzero self-distance is rejected.
pub fn certify_fixed_point(
    space: &PartialConeMetricSpace,
    maps: &MappingPair,
    x: &Point,
    tol: f64,
) -> Result<FixedPointReport> {
    space.check_point(x, "candidate")?;
    let tx = maps.apply(Which::T, space, x, "T(candidate)")?;
    let sx = maps.apply(Which::S, space, x, "S(candidate)")?;
    let residual_t = space.norm(&space.p(x, &tx)?);
    let residual_s = space.norm(&space.p(x, &sx)?);
    let self_distance = space.norm(&space.p(x, x)?);
    let induced_t = space.norm(&space.d(x, &tx)?);
    let induced_s = space.norm(&space.d(x, &sx)?);
    let pass = residual_t <= tol
        && residual_s <= tol
        && self_distance <= tol
        && induced_t <= 4.0 * tol
        && induced_s <= 4.0 * tol;
    Ok(FixedPointReport { pass, residual_t, residual_s, self_distance, induced_t, induced_s })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRun {
    pub seed: Point,
    pub status: Status,
    pub x_star: Point,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub runs: Vec<UniquenessRun>,
    /// Largest coordinate difference between converged limits.
    pub max_disagreement: f64,
    /// All converged limits agree within `10 tol`. Unconverged runs are
    /// listed but excluded from the comparison.
    pub pass: bool,
    /// Whether the contraction family guarantees a unique common fixed point.
    pub uniqueness_asserted: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Solves from every seed (runs are independent and execute in parallel) and
/// compares the limits.
pub fn check_uniqueness(
    space: &PartialConeMetricSpace,
    maps: &MappingPair,
    seeds: &[Point],
    stop: &StopConfig,
    spec: Option<&ContractionSpec>,
) -> Result<UniquenessReport> {
    if seeds.len() < 2 {
        return Err(Error::InvalidArgument("uniqueness probing needs at least two seeds".into()));
    }
    let results = seeds.par_iter().map(|seed| solve(space, maps, seed, stop, spec)).collect::<Result<Vec<_>>>()?;
    let runs: Vec<UniquenessRun> = seeds
        .iter()
        .zip(&results)
        .map(|(seed, r)| UniquenessRun {
            seed: seed.clone(),
            status: r.status,
            x_star: r.x_star.clone(),
            iterations: r.iterations,
        })
        .collect();
    let limits: Vec<&Point> = results.iter().filter(|r| r.converged()).map(|r| &r.x_star).collect();
    let mut max_disagreement: f64 = 0.0;
    for (i, a) in limits.iter().enumerate() {
        for b in &limits[i + 1..] {
            max_disagreement = max_disagreement.max(a.max_abs_diff(b));
        }
    }
    let implicit = spec.is_some_and(|s| s.family == Family::ImplicitLinear);
    Ok(UniquenessReport {
        runs,
        max_disagreement,
        pass: max_disagreement <= 10.0 * stop.tol,
        uniqueness_asserted: !implicit,
        note: implicit.then(|| "uniqueness not asserted for the implicit-linear family".to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, make_r2_max_space, CoordMap};
    use std::f64::consts::FRAC_PI_4;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn half_sin() -> (PartialConeMetricSpace, MappingPair) {
        (make_r2_max_space(1.0).unwrap(), MappingPair::coordinatewise(CoordMap::Scale(0.5), CoordMap::SinThird))
    }

    #[test]
    fn apriori_bound_values() {
        assert_eq!(apriori_bound(0.5, 1.0, 1.0, 10).unwrap(), 0.001953125);
        assert_eq!(apriori_bound(0.3, 1.0, 0.0, 0).unwrap(), 0.0);
        assert_eq!(apriori_bound(0.0, 1.0, 5.0, 1).unwrap(), 0.0);
        assert!(apriori_bound(1.0, 1.0, 1.0, 1).is_err());
        assert!(apriori_bound(0.5, f64::NAN, 1.0, 1).is_err());
    }

    #[test]
    fn solves_half_sin_to_zero() {
        let (space, maps) = half_sin();
        let r = solve(&space, &maps, &pt(&[0.7]), &StopConfig::new(1e-10, 1000), None).unwrap();
        assert!(r.converged());
        assert!(r.x_star.coords()[0].abs() <= 1e-10);
        assert!(r.residual_t <= 1e-10 && r.residual_s <= 1e-10);
    }

    #[test]
    fn start_at_fixed_point() {
        let (space, maps) = half_sin();
        let r = solve(&space, &maps, &pt(&[0.0]), &StopConfig::default(), None).unwrap();
        assert!(r.converged());
        assert_eq!(r.iterations, 0);
        assert_eq!(r.x_star, pt(&[0.0]));
    }

    #[test]
    fn parity_alternates_t_then_s() {
        let space = make_r2_max_space(1.0).unwrap();
        let maps = MappingPair::coordinatewise(CoordMap::Scale(0.5), CoordMap::Scale(0.25));
        let r = solve(&space, &maps, &pt(&[0.64]), &StopConfig::new(1e-10, 4), None).unwrap();
        let xs: Vec<f64> = r.iterates.iter().map(|p| p.coords()[0]).collect();
        assert_eq!(xs, vec![0.64, 0.32, 0.08, 0.04, 0.01]);
        assert_eq!(r.status, Status::MaxItersExceeded);
        assert_eq!(r.iterations, 4);
        assert_eq!(r.trace.len(), 4);
        assert_eq!(r.trace.records[0].point.as_deref(), Some(&[0.64][..]));
    }

    #[test]
    fn one_map_call_per_step_plus_probes() {
        let calls = Arc::new(AtomicUsize::new(0));
        let (c1, c2) = (calls.clone(), calls.clone());
        let maps = MappingPair::new(
            "T",
            move |x: &[f64]| {
                c1.fetch_add(1, Ordering::SeqCst);
                vec![x[0] / 2.0]
            },
            "S",
            move |x: &[f64]| {
                c2.fetch_add(1, Ordering::SeqCst);
                vec![x[0] / 3.0]
            },
        );
        let space = make_r2_max_space(1.0).unwrap();
        for stop in [StopConfig::new(1e-10, 1000), StopConfig::new(1e-10, 5)] {
            calls.store(0, Ordering::SeqCst);
            let r = solve(&space, &maps, &pt(&[0.7]), &stop, None).unwrap();
            assert_eq!(calls.load(Ordering::SeqCst), r.trace.len() + r.probes);
            assert_eq!(r.iterates.len(), r.trace.len() + 1);
        }
    }

    #[test]
    fn divergent_maps_are_reported_not_raised() {
        let space = make_r2_max_space(1.0).unwrap();
        let maps = MappingPair::coordinatewise(CoordMap::Identity, CoordMap::Identity);
        let r = solve(&space, &maps, &pt(&[0.5]), &StopConfig::new(1e-10, 50), None).unwrap();
        assert_eq!(r.status, Status::MaxItersExceeded);
        assert_eq!(r.trace.len(), 50);
    }

    #[test]
    fn escaping_map_names_the_step() {
        let space = make_r2_max_space(1.0).unwrap();
        let maps = MappingPair::coordinatewise(CoordMap::Scale(0.5), CoordMap::Scale(4.0));
        let err = solve(&space, &maps, &pt(&[0.7]), &StopConfig::default(), None).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { ref context, .. } if context == "step 1 (S)"), "{err}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let (space, maps) = half_sin();
        assert!(solve(&space, &maps, &pt(&[1.0]), &StopConfig::default(), None).is_err());
        assert!(solve(&space, &maps, &pt(&[0.5]), &StopConfig::new(0.0, 10), None).is_err());
        assert!(solve(&space, &maps, &pt(&[0.5]), &StopConfig::new(1e-3, 0), None).is_err());
        let bad = ContractionSpec::kannan(0.6, 0.5);
        assert!(solve(&space, &maps, &pt(&[0.5]), &StopConfig::default(), Some(&bad)).is_err());
    }

    #[test]
    fn apriori_stop_confirms_residuals() {
        let e = catalog::interval_half_sin(1.0).unwrap();
        let stop = StopConfig { use_apriori: true, ..StopConfig::default() };
        let r = solve(&e.space, &e.maps, &pt(&[0.7]), &stop, Some(&e.spec)).unwrap();
        assert!(r.converged());
        assert!(r.residual_t <= stop.tol && r.residual_s <= stop.tol);
        let plain = solve(&e.space, &e.maps, &pt(&[0.7]), &StopConfig::default(), Some(&e.spec)).unwrap();
        assert!(r.iterations <= plain.iterations + 1);
    }

    #[test]
    fn certify_examples() {
        let e = catalog::interval_cos_half(1.0).unwrap();
        assert!(certify_fixed_point(&e.space, &e.maps, &pt(&[0.0]), 1e-10).unwrap().pass);

        let space = make_r2_max_space(1.0).unwrap();
        let halves = MappingPair::coordinatewise(CoordMap::Scale(0.5), CoordMap::Scale(0.5));
        assert!(!certify_fixed_point(&space, &halves, &pt(&[0.5]), 1e-8).unwrap().pass);

        // identity fixes every point, but the max metric has p(x,x) = x
        let ident = MappingPair::coordinatewise(CoordMap::Identity, CoordMap::Identity);
        let report = certify_fixed_point(&space, &ident, &pt(&[0.5]), 1e-8).unwrap();
        assert!(!report.pass);
        assert_eq!(report.induced_t, 0.0);
        assert_eq!(report.self_distance, 0.5);
    }

    #[test]
    fn uniqueness_examples() {
        let (space, maps) = half_sin();
        let seeds = [pt(&[0.1]), pt(&[0.4]), pt(&[FRAC_PI_4])];
        let report = check_uniqueness(&space, &maps, &seeds, &StopConfig::default(), None).unwrap();
        assert!(report.pass && report.uniqueness_asserted);
        assert!(report.runs.iter().all(|r| r.status == Status::Converged));

        let halves = MappingPair::coordinatewise(CoordMap::Scale(0.5), CoordMap::Scale(0.5));
        let report =
            check_uniqueness(&space, &halves, &[pt(&[0.0]), pt(&[0.7])], &StopConfig::default(), None).unwrap();
        assert!(report.pass);

        let implicit = ContractionSpec::implicit_linear(1.0, 0.0, 0.5, 0.5, 0.5);
        let report =
            check_uniqueness(&space, &halves, &[pt(&[0.0]), pt(&[0.7])], &StopConfig::default(), Some(&implicit))
                .unwrap();
        assert!(!report.uniqueness_asserted);
        assert!(report.note.is_some());

        assert!(check_uniqueness(&space, &halves, &[pt(&[0.0])], &StopConfig::default(), None).is_err());
    }

    #[test]
    fn unconverged_runs_are_skipped_in_comparison() {
        let space = make_r2_max_space(1.0).unwrap();
        let ident = MappingPair::coordinatewise(CoordMap::Identity, CoordMap::Identity);
        let report =
            check_uniqueness(&space, &ident, &[pt(&[0.0]), pt(&[0.7])], &StopConfig::new(1e-10, 20), None).unwrap();
        assert_eq!(report.runs[0].status, Status::Converged);
        assert_eq!(report.runs[1].status, Status::MaxItersExceeded);
        assert!(report.pass);
    }
}
