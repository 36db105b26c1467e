//! Property tests for the order, metric and contraction invariants.

use conefix_core::catalog::{self, make_l1_max_space, make_r2_max_space};
use conefix_core::{solve, AmbientSpace, ConeVector, ContractionSpec, NormKind, Point, StopConfig};
use proptest::prelude::*;

const DIM: usize = 3;

fn vector(dim: usize) -> impl Strategy<Value = ConeVector> {
    prop::collection::vec(-10.0f64..10.0, dim).prop_map(|c| ConeVector::new(c).unwrap())
}

fn cone_vector(dim: usize) -> impl Strategy<Value = ConeVector> {
    prop::collection::vec(0.0f64..10.0, dim).prop_map(|c| ConeVector::new(c).unwrap())
}

fn ambient() -> impl Strategy<Value = AmbientSpace> {
    prop_oneof![Just(NormKind::Sup), Just(NormKind::OneSum)].prop_map(|k| AmbientSpace::new(DIM, k).unwrap())
}

fn unit_point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(0.0f64..=std::f64::consts::FRAC_PI_4, dim).prop_map(|c| Point::new(c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn order_is_reflexive(s in ambient(), x in vector(DIM)) {
        prop_assert!(s.leq(&x, &x).unwrap());
    }

    #[test]
    fn order_is_antisymmetric_up_to_tolerance(s in ambient(), x in vector(DIM), eps in prop::collection::vec(-2e-12f64..2e-12, DIM)) {
        let y = ConeVector::new(x.coords().iter().zip(&eps).map(|(a, e)| a + e).collect()).unwrap();
        if s.leq(&x, &y).unwrap() && s.leq(&y, &x).unwrap() {
            let gap = s.norm(&(&x - &y)).unwrap();
            prop_assert!(gap <= 2.0 * DIM as f64 * s.order_tolerance() + 1e-15);
        }
    }

    #[test]
    fn order_is_transitive_in_exact_mode(s in ambient(), x in vector(DIM), a in cone_vector(DIM), b in cone_vector(DIM)) {
        let s = s.exact();
        let y = &x + &a;
        let z = &y + &b;
        prop_assert!(s.leq(&x, &y).unwrap() && s.leq(&y, &z).unwrap());
        prop_assert!(s.leq(&x, &z).unwrap());
    }

    #[test]
    fn join_is_least_upper_bound(s in ambient(), x in vector(DIM), y in vector(DIM), u in vector(DIM)) {
        let s = s.exact();
        let j = s.join(&[x.clone(), y.clone()]).unwrap();
        prop_assert!(s.leq(&x, &j).unwrap() && s.leq(&y, &j).unwrap());
        prop_assert_eq!(&j, &s.join(&[y.clone(), x.clone()]).unwrap());
        if s.leq(&x, &u).unwrap() && s.leq(&y, &u).unwrap() {
            prop_assert!(s.leq(&j, &u).unwrap());
        }
    }

    #[test]
    fn cone_is_closed_under_nonnegative_combinations(s in ambient(), x in cone_vector(DIM), y in cone_vector(DIM), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let s = s.exact();
        prop_assert!(s.cone_contains(&(&x.scale(a) + &y.scale(b))).unwrap());
    }

    #[test]
    fn norm_is_monotone_on_the_cone(s in ambient(), x in cone_vector(DIM), d in cone_vector(DIM)) {
        let y = &x + &d;
        let m = s.normal_constant_bound();
        prop_assert!(s.norm(&x).unwrap() <= m * s.norm(&y).unwrap());
    }

    #[test]
    fn norm_is_absolutely_homogeneous(s in ambient(), x in vector(DIM), c in -4.0f64..4.0) {
        let lhs = s.norm(&x.scale(c)).unwrap();
        let rhs = c.abs() * s.norm(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn induced_metric_is_a_cone_metric(x in unit_point(4), y in unit_point(4), z in unit_point(4)) {
        let space = make_l1_max_space(4).unwrap();
        let tol = space.ambient().order_tolerance();
        let dxy = space.induced_metric(&x, &y).unwrap();
        prop_assert_eq!(&dxy, &space.induced_metric(&y, &x).unwrap());
        prop_assert!(space.induced_metric(&x, &x).unwrap().coords().iter().all(|&c| c == 0.0));
        prop_assert!(space.ambient().cone_contains(&dxy).unwrap());
        let sum = &space.induced_metric(&x, &z).unwrap() + &space.induced_metric(&z, &y).unwrap();
        let slack = &sum - &dxy;
        prop_assert!(slack.coords().iter().all(|&c| c >= -4.0 * tol));
    }

    #[test]
    fn metric_dominates_self_distances(k in 0.0f64..5.0, x in unit_point(1), y in unit_point(1)) {
        let space = make_r2_max_space(k).unwrap();
        let amb = space.ambient();
        let pxy = space.pcm_eval(&x, &y).unwrap();
        prop_assert!(amb.leq(&space.pcm_eval(&x, &x).unwrap(), &pxy).unwrap());
        prop_assert!(amb.leq(&space.pcm_eval(&y, &y).unwrap(), &pxy).unwrap());
    }

    #[test]
    fn slack_is_rhs_minus_lhs(x in unit_point(1), y in unit_point(1), a in 0.0f64..0.5, b in 0.0f64..0.5) {
        let e = catalog::interval_half_sin(1.0).unwrap();
        for spec in [ContractionSpec::rational(a, b), ContractionSpec::kannan(a, b), ContractionSpec::reich(a / 2.0, b, 0.2), ContractionSpec::max_type(a)] {
            let (_, slack) = spec.holds_at(&e.space, &e.maps, &x, &y).unwrap();
            let (lhs, rhs) = spec.sides(&e.space, &e.maps, &x, &y).unwrap();
            prop_assert_eq!(slack, &rhs - &lhs);
        }
    }

    #[test]
    fn max_type_sides_vanish_at_common_fixed_point(alpha in 0.0f64..1.0) {
        let e = catalog::interval_cos_half(1.0).unwrap();
        let zero = Point::scalar(0.0).unwrap();
        let (lhs, rhs) = ContractionSpec::max_type(alpha).sides(&e.space, &e.maps, &zero, &zero).unwrap();
        prop_assert!(lhs.coords().iter().chain(rhs.coords()).all(|&c| c == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solve_is_deterministic(x0 in unit_point(1)) {
        let e = catalog::interval_cos_half(1.0).unwrap();
        let a = solve(&e.space, &e.maps, &x0, &StopConfig::default(), Some(&e.spec)).unwrap();
        let b = solve(&e.space, &e.maps, &x0, &StopConfig::default(), Some(&e.spec)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn converged_result_satisfies_limit_definition(x0 in unit_point(8)) {
        let e = catalog::l1_tan_quarter(8).unwrap();
        let stop = StopConfig::default();
        let r = solve(&e.space, &e.maps, &x0, &stop, Some(&e.spec)).unwrap();
        prop_assert!(r.converged());
        prop_assert!(r.self_distance <= stop.tol);
        prop_assert!(e.space.is_converged(&r.iterates[..=r.iterations], &r.x_star, stop.tol).unwrap());
    }
}

#[test]
fn contraction_rate_stays_in_unit_interval_on_valid_grid() {
    let levels: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
    let mut accepted = 0;
    for &a in &levels {
        for &b in &levels {
            for &c in &levels {
                for spec in [
                    ContractionSpec::kannan(a, b),
                    ContractionSpec::reich(a, b, c),
                    ContractionSpec::rational(a, b),
                    ContractionSpec::max_type(a),
                ] {
                    if spec.validate().is_ok() {
                        accepted += 1;
                        let k = spec.contraction_rate().unwrap();
                        assert!((0.0..1.0).contains(&k), "{spec:?} -> {k}");
                    }
                }
            }
        }
    }
    assert!(accepted > 0);
}
