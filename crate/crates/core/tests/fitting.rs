use conefix_core::catalog::{self, make_r2_max_space};
use conefix_core::{fit_constants, ContractionSpec, CoordMap, Family, FitFamily, FitOutcome, MappingPair};

const STEP: f64 = 1.0 / 256.0;

fn fitted(out: FitOutcome) -> (ContractionSpec, f64) {
    match out {
        FitOutcome::Fitted { spec, rate } => (spec, rate),
        FitOutcome::Infeasible => panic!("expected a feasible fit"),
    }
}

#[test]
fn l1_symmetric_kannan_fits_one_third() {
    let e = catalog::l1_tan_quarter(8).unwrap();
    let (spec, _) = fitted(fit_constants(FitFamily::KannanSymmetric, &e.space, &e.maps, 1, 10_000).unwrap());
    assert_eq!(spec.alpha, spec.beta);
    assert!((spec.alpha - 1.0 / 3.0).abs() <= STEP, "alpha = {}", spec.alpha);
    assert!(spec.alpha >= 1.0 / 3.0 - 1e-12);
}

#[test]
fn cos_half_max_type_fits_at_most_two_thirds() {
    let e = catalog::interval_cos_half(1.0).unwrap();
    let (spec, rate) = fitted(fit_constants(FitFamily::MaxType, &e.space, &e.maps, 1, 10_000).unwrap());
    assert_eq!(spec.family, Family::MaxType);
    assert!(spec.alpha <= 2.0 / 3.0 + STEP);
    // S(y) = y/2 at x <= y forces α >= 1/2
    assert!((spec.alpha - 0.5).abs() <= STEP, "alpha = {}", spec.alpha);
    assert_eq!(rate, spec.alpha);
}

#[test]
fn half_sin_rational_fit_matches_catalog_constants() {
    let e = catalog::interval_half_sin(1.0).unwrap();
    let (spec, rate) = fitted(fit_constants(FitFamily::Rational, &e.space, &e.maps, 1, 10_000).unwrap());
    assert_eq!(spec, e.spec);
    assert_eq!(rate, 0.5);
    assert!(spec.alpha + spec.beta < 1.0);
    // confirmed on fresh samples
    assert!(spec.verify_sampled(&e.space, &e.maps, 99, 10_000).unwrap().pass());
}

#[test]
fn reich_and_kannan_fits_pass_their_own_samples() {
    let e = catalog::interval_cos_half(1.0).unwrap();
    for fam in [FitFamily::Kannan, FitFamily::Reich, FitFamily::ReichSymmetric] {
        let (spec, rate) = fitted(fit_constants(fam, &e.space, &e.maps, 4, 400).unwrap());
        assert!(spec.validate().is_ok());
        assert!((0.0..1.0).contains(&rate));
        assert!(spec.verify_sampled(&e.space, &e.maps, 4, 400).unwrap().pass(), "{fam:?}");
    }
}

#[test]
fn identity_kannan_is_infeasible() {
    let space = make_r2_max_space(1.0).unwrap();
    let maps = MappingPair::coordinatewise(CoordMap::Identity, CoordMap::Identity);
    assert_eq!(fit_constants(FitFamily::Kannan, &space, &maps, 0, 1000).unwrap(), FitOutcome::Infeasible);
}

#[test]
fn fit_is_deterministic() {
    let e = catalog::l1_tan_quarter(3).unwrap();
    let a = fit_constants(FitFamily::Kannan, &e.space, &e.maps, 9, 500).unwrap();
    let b = fit_constants(FitFamily::Kannan, &e.space, &e.maps, 9, 500).unwrap();
    assert_eq!(a, b);
}
