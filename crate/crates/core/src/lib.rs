//! Partial cone metric spaces over finite-dimensional ordered vector spaces,
//! and common fixed points of mapping pairs `(T, S)` by alternating Picard
//! iteration.
//!
//! * [`ordered_space`]: coordinate vectors, the orthant cone, order, join, norms.
//! * [`pcm`]: partial cone metrics, axiom sampling, the induced cone metric.
//! * [`contractions`]: the five contraction families, sampled verification,
//!   constant fitting.
//! * [`solver`]: the iteration, a-priori bounds, certification, uniqueness.
//! * [`catalog`]: built-in spaces, maps and worked examples.

pub mod catalog;
pub mod contractions;
pub mod error;
pub mod ordered_space;
pub mod pcm;
pub mod sampling;
pub mod solver;

pub use catalog::{catalog, catalog_entry, CatalogEntry, CoordMap};
pub use contractions::{
    fit_constants, fit_constants_with_step, Certificate, ContractionSpec, ContractionViolation, Family, FitFamily,
    FitOutcome, MappingPair, Which,
};
pub use error::{Error, Result};
pub use ordered_space::{AmbientSpace, ConeVector, NormKind};
pub use pcm::{Axiom, AxiomReport, AxiomViolation, PartialConeMetricSpace, Point};
pub use sampling::DomainBox;
pub use solver::{
    apriori_bound, certify_fixed_point, check_uniqueness, solve, FixedPointReport, IterationTrace, SolveResult, Status,
    StopConfig, StopReason, TraceRecord, UniquenessReport,
};
