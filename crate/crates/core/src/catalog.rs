//! Built-in spaces, coordinatewise maps and worked example bundles.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::contractions::{ContractionSpec, MappingPair};
use crate::error::{Error, Result};
use crate::ordered_space::{AmbientSpace, NormKind};
use crate::pcm::{PartialConeMetricSpace, Point};
use crate::sampling::DomainBox;

/// Default upper bound of the example domains, `π/4`.
pub const DEFAULT_BOX: f64 = FRAC_PI_4;

/// Default truncation dimension of the l1 example.
pub const DEFAULT_L1_DIM: usize = 8;

fn check_k(k: f64) -> Result<()> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::constraint(format!("k≥0 violated (k = {k})")));
    }
    Ok(())
}

/// `X = [0, π/4]`, `E = R²` with the sup norm, `p(x,y) = (max{x,y}, k max{x,y})`.
pub fn make_r2_max_space(k: f64) -> Result<PartialConeMetricSpace> {
    make_r2_max_space_on(k, DEFAULT_BOX)
}

/// As [`make_r2_max_space`] on the box `[0, bound]`.
pub fn make_r2_max_space_on(k: f64, bound: f64) -> Result<PartialConeMetricSpace> {
    check_k(k)?;
    let ambient = AmbientSpace::new(2, NormKind::Sup)?;
    let domain = DomainBox::cube(1, 0.0, bound)?;
    Ok(PartialConeMetricSpace::new(format!("r2-max(k={k})"), ambient, domain, move |x, y| {
        let m = x[0].max(y[0]);
        vec![m, k * m]
    }))
}

/// The max space with `max` replaced by `min`. Not a partial cone metric:
/// `p(x,x) = x > min{x,y}` whenever `x > y`. Used as a negative control.
pub fn make_min_metric_space(k: f64) -> Result<PartialConeMetricSpace> {
    check_k(k)?;
    let ambient = AmbientSpace::new(2, NormKind::Sup)?;
    let domain = DomainBox::cube(1, 0.0, DEFAULT_BOX)?;
    Ok(PartialConeMetricSpace::new(format!("r2-min(k={k})"), ambient, domain, move |x, y| {
        let m = x[0].min(y[0]);
        vec![m, k * m]
    }))
}

/// Truncated l1: `X = [0, π/4]^dim`, `E = R^dim` with the one-sum norm,
/// `p(x,y)` the coordinatewise maximum.
pub fn make_l1_max_space(dim: usize) -> Result<PartialConeMetricSpace> {
    let ambient = AmbientSpace::new(dim, NormKind::OneSum)?;
    let domain = DomainBox::cube(dim, 0.0, DEFAULT_BOX)?;
    Ok(PartialConeMetricSpace::new(format!("l1-max(dim={dim})"), ambient, domain, |x, y| {
        x.iter().zip(y).map(|(a, b)| a.max(*b)).collect()
    }))
}

/// Scalar maps applied to every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordMap {
    Identity,
    Zero,
    /// `x ↦ c x`
    Scale(f64),
    /// `x ↦ x tan(x) / 3`
    TanThird,
    /// `x ↦ x sin(x) / 3`
    SinThird,
    /// `x ↦ x (1 − cos x) / 3`
    CosForm,
}

impl CoordMap {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            CoordMap::Identity => x,
            CoordMap::Zero => 0.0,
            CoordMap::Scale(c) => c * x,
            CoordMap::TanThird => x * x.tan() / 3.0,
            CoordMap::SinThird => x * x.sin() / 3.0,
            CoordMap::CosForm => x * (1.0 - x.cos()) / 3.0,
        }
    }
}

impl fmt::Display for CoordMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordMap::Identity => f.write_str("identity"),
            CoordMap::Zero => f.write_str("zero"),
            CoordMap::Scale(c) => write!(f, "scale:{c}"),
            CoordMap::TanThird => f.write_str("tanthird"),
            CoordMap::SinThird => f.write_str("sinthird"),
            CoordMap::CosForm => f.write_str("cosform"),
        }
    }
}

impl std::str::FromStr for CoordMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" | "id" => Ok(CoordMap::Identity),
            "zero" => Ok(CoordMap::Zero),
            "tanthird" => Ok(CoordMap::TanThird),
            "sinthird" => Ok(CoordMap::SinThird),
            "cosform" => Ok(CoordMap::CosForm),
            _ => match s.strip_prefix("scale:") {
                Some(c) => c
                    .parse::<f64>()
                    .ok()
                    .filter(|c| c.is_finite())
                    .map(CoordMap::Scale)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad scale factor in `{s}`"))),
                None => Err(Error::InvalidArgument(format!("unknown map form `{s}`"))),
            },
        }
    }
}

impl MappingPair {
    pub fn coordinatewise(t: CoordMap, s: CoordMap) -> Self {
        MappingPair::new(
            t.to_string(),
            move |x: &[f64]| x.iter().map(|&v| t.apply(v)).collect(),
            s.to_string(),
            move |x: &[f64]| x.iter().map(|&v| s.apply(v)).collect(),
        )
    }
}

/// A worked example: space, maps, a contraction condition they satisfy and
/// the common fixed point.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub space: PartialConeMetricSpace,
    pub maps: MappingPair,
    pub spec: ContractionSpec,
    pub expected_fixed_point: Point,
    pub provenance: &'static str,
}

pub const ENTRY_IDS: [&str; 3] = ["l1-tan-quarter", "interval-half-sin", "interval-cos-half"];

/// `T = x tan x / 3`, `S = x / 4` on truncated l1 of the given dimension.
pub fn l1_tan_quarter(dim: usize) -> Result<CatalogEntry> {
    Ok(CatalogEntry {
        id: "l1-tan-quarter",
        description: "truncated l1 with coordinatewise max; T = x tan x / 3, S = x / 4",
        space: make_l1_max_space(dim)?,
        maps: MappingPair::coordinatewise(CoordMap::TanThird, CoordMap::Scale(0.25)),
        spec: ContractionSpec::kannan_symmetric(1.0 / 3.0),
        expected_fixed_point: Point::new(vec![0.0; dim])?,
        provenance: "symmetric Kannan condition with α = 1/3; common fixed point 0",
    })
}

/// `T = x / 2`, `S = x sin x / 3` on the R² max space with parameter `k`.
///
/// The rational constants are the minimal-rate fit on the default grid:
/// `α = 0`, `β = 1/2`. The bound `β >= 1/2` is forced at `y = 0`, where the
/// rational term vanishes.
pub fn interval_half_sin(k: f64) -> Result<CatalogEntry> {
    Ok(CatalogEntry {
        id: "interval-half-sin",
        description: "R² max space on [0, π/4]; T = x / 2, S = x sin x / 3",
        space: make_r2_max_space(k)?,
        maps: MappingPair::coordinatewise(CoordMap::Scale(0.5), CoordMap::SinThird),
        spec: ContractionSpec::rational(0.0, 0.5),
        expected_fixed_point: Point::scalar(0.0)?,
        provenance: "rational condition with fitted constants; common fixed point 0",
    })
}

/// `T = x (1 − cos x) / 3`, `S = x / 2` on the R² max space with parameter `k`.
pub fn interval_cos_half(k: f64) -> Result<CatalogEntry> {
    Ok(CatalogEntry {
        id: "interval-cos-half",
        description: "R² max space on [0, π/4]; T = x (1 - cos x) / 3, S = x / 2",
        space: make_r2_max_space(k)?,
        maps: MappingPair::coordinatewise(CoordMap::CosForm, CoordMap::Scale(0.5)),
        spec: ContractionSpec::max_type(2.0 / 3.0),
        expected_fixed_point: Point::scalar(0.0)?,
        provenance: "max-type condition with α = 2/3; common fixed point 0",
    })
}

/// All built-in entries with default parameters (l1 dimension 8, `k = 1`).
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        l1_tan_quarter(DEFAULT_L1_DIM).expect("valid default entry"),
        interval_half_sin(1.0).expect("valid default entry"),
        interval_cos_half(1.0).expect("valid default entry"),
    ]
}

pub fn catalog_entry(id: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.id == id)
}
