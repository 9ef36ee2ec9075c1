use std::sync::Arc;

use approx::assert_relative_eq;
use meanconvex::conformal::ConstantField;
use meanconvex::estimates::{
    alpha_lower_bound, elementary_inequalities, equidistant_closed_form, main_estimate_hyperbolic, theorem_bound,
    EstimateConfig,
};
use meanconvex::geodesic::{initial_segment, minimize, GeodesicProblem};
use meanconvex::hypersurface::{self, example_fixture};
use meanconvex::spaceform::SpaceForm;

#[test]
fn equidistant_bound_is_twice_the_curvature() {
    for a in [0.25, 0.5, 1.0, 2.0, 5.0] {
        for n in 1..=3 {
            let (d, h) = equidistant_closed_form(a, n);
            assert_relative_eq!(theorem_bound(1.0, n, d).unwrap(), 2.0 * h, max_relative = 1e-13);
        }
    }
}

#[test]
fn equidistant_distance_from_the_solver() {
    for a in [0.5, 1.0] {
        let fixture = example_fixture("hyperbolic-equidistant", &[("a", a), ("dim", 3.0)]).unwrap();
        let u = Arc::new(ConstantField::new(3, 1.0));
        let initial = initial_segment(&fixture, 1.5, 200, 9).unwrap();
        let problem = GeodesicProblem::new(fixture.space, u, fixture.sigma1.clone(), fixture.sigma2.clone(), initial)
            .segments(128);
        let d = minimize(&problem).unwrap().length();
        assert_relative_eq!(d, equidistant_closed_form(a, 2).0, max_relative = 1e-7);
    }
}

#[test]
fn geodesic_sphere_curvature() {
    for dim in 2..=4 {
        let space = SpaceForm::hyperbolic(dim, 1.0).unwrap();
        let n = (dim - 1) as f64;
        for r in [0.5, 1.0, 2.0, 7.0] {
            let h = hypersurface::sphere_mean_curvature(&space, r).unwrap();
            assert_relative_eq!(h, n / r.tanh(), max_relative = 1e-12);
        }
    }
}

#[test]
fn quarter_slack_is_exact() {
    let r = elementary_inequalities(1000);
    let at_quarter = r.details["slack_at_quarter"].as_f64().unwrap();
    assert_relative_eq!(at_quarter, 41.0 / 36.0 - 256.0 / 225.0, max_relative = 1e-12);
    assert!(r.pass);
}

#[test]
fn alpha_bound_sits_below_one_and_grows_with_length() {
    let mut last = 0.0;
    for k in 1..50 {
        let l0 = 0.1 * k as f64;
        let a = alpha_lower_bound(l0, 4.0 * l0 + 1.0);
        assert!(a > last && a < 1.0);
        last = a;
    }
}

#[test]
fn equidistant_curvatures_satisfy_the_hyperbolic_estimate() {
    for a in [0.5, 1.0, 2.0] {
        let (d, h) = equidistant_closed_form(a, 2);
        for radius in [20.0, 100.0, 1000.0] {
            let cfg = EstimateConfig {
                kappa: 1.0,
                ..EstimateConfig::new(2, radius, d, h, h)
            };
            let r = main_estimate_hyperbolic(&cfg).unwrap();
            assert!(r.pass, "{}", r.to_json());
        }
    }
}
