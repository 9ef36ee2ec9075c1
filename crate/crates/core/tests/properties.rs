use std::sync::Arc;

use meanconvex::conformal::oracle::law_discrepancy;
use meanconvex::conformal::{RadialField, RadialProfile, ScalarField};
use meanconvex::estimates::theorem_bound;
use meanconvex::geodesic::solve_fixture;
use meanconvex::hypersurface::example_fixture;
use meanconvex::spaceform::SpaceForm;
use meanconvex::variation::{
    coth_minus_inverse, j_values, j_values_direct, traced_variation_report, Geometry, JInputs, TestFunction,
};
use meanconvex::{Point, Vector};
use proptest::prelude::*;

fn ball_point(dim: usize) -> impl Strategy<Value = Point> {
    (prop::collection::vec(-1.0f64..1.0, dim), 0.0f64..3.0).prop_map(move |(v, r)| {
        let dir = Vector::from_vec(v);
        if dir.norm() < 1e-6 {
            return Point::zeros(dim);
        }
        SpaceForm::hyperbolic(dim, 1.0).unwrap().point_at_distance(&dir, r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hyperbolic_triangle_inequality(p in ball_point(3), q in ball_point(3), w in ball_point(3)) {
        let s = SpaceForm::hyperbolic(3, 1.0).unwrap();
        let pq = s.distance(&p, &q).unwrap();
        let qw = s.distance(&q, &w).unwrap();
        let pw = s.distance(&p, &w).unwrap();
        prop_assert!(pw <= pq + qw + 1e-9 * (1.0 + pw));
        prop_assert!((pq - s.distance(&q, &p).unwrap()).abs() <= 1e-9 * (1.0 + pq));
    }

    #[test]
    fn mobius_recentering_is_an_isometry(c in ball_point(3), x in ball_point(3)) {
        let s = SpaceForm::hyperbolic(3, 1.0).unwrap();
        let y = s.mobius_center(&c, &x).unwrap();
        let back = s.mobius_uncenter(&c, &y).unwrap();
        prop_assert!((back - &x).norm() <= 1e-9);
        let d = s.distance(&c, &x).unwrap();
        prop_assert!((s.radius_of(&y) - d).abs() <= 1e-8 * (1.0 + d));
    }

    #[test]
    fn phi_identities(l in 1e-2f64..50.0, t in 0.0f64..1.0) {
        let phi = TestFunction::cosh(l).unwrap();
        let half = (0.5 * l).tanh();
        prop_assert!((phi.psi(0.0) + half).abs() <= 1e-12);
        prop_assert!((phi.psi(l) - half).abs() <= 1e-12);
        let s = t * l;
        let (p, dp) = (phi.phi(s), phi.dphi(s));
        prop_assert!((phi.dpsi(s) - (p * p + dp * dp)).abs() <= 1e-12);
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-15);
        prop_assert!(phi.square_integral(l) <= 1.2);
    }

    #[test]
    fn crucial_bounds_hold_off_grid(
        n in 1usize..=4,
        radius in 2.0f64..200.0,
        t in 0.0f64..=1.0,
        r_t in -1.0f64..=1.0,
        hyperbolic in any::<bool>(),
    ) {
        let profile = RadialProfile::quartic(radius).unwrap();
        let geometry = if hyperbolic { Geometry::Hyperbolic } else { Geometry::Euclidean };
        let r = t * radius;
        let (j1, j2) = j_values(&JInputs { geometry, n, profile: &profile, r, r_t }).unwrap();
        let nf = n as f64;
        let r2 = radius.powi(-2);
        let j2_bound = if hyperbolic { 16.0 * nf * r2 - nf * profile.d1(r) } else { 16.0 * nf * r2 };
        prop_assert!(j2 <= j2_bound + 1e-12);
        prop_assert!(j1 >= -8.0 * nf * r2 - 1e-12);
    }

    #[test]
    fn j_values_agree_with_the_field_jets(
        radius in 3.0f64..30.0,
        t in 0.05f64..0.95,
        r_t in -1.0f64..=1.0,
        hyperbolic in any::<bool>(),
    ) {
        let dim = 3;
        let (space, geometry) = if hyperbolic {
            (SpaceForm::hyperbolic(dim, 1.0).unwrap(), Geometry::Hyperbolic)
        } else {
            (SpaceForm::euclidean(dim), Geometry::Euclidean)
        };
        // keep the hyperbolic point well inside the model
        let r = t * if hyperbolic { radius.min(6.0) } else { radius };
        let profile = RadialProfile::quartic(radius).unwrap();
        let u = RadialField::new(space, Point::zeros(dim), profile.clone()).unwrap();
        let mut e0 = Vector::zeros(dim);
        e0[0] = 1.0;
        let x = space.point_at_distance(&e0, r);
        let mut e1 = Vector::zeros(dim);
        e1[1] = 1.0;
        let radial = &e0 / space.norm(&x, &e0);
        let normal = &e1 / space.norm(&x, &e1);
        let tangent = radial * r_t + normal * (1.0 - r_t * r_t).sqrt();
        let direct = j_values_direct(&space, &u, &x, &tangent).unwrap();
        let closed = j_values(&JInputs { geometry, n: space.n(), profile: &profile, r, r_t }).unwrap();
        let scale = radius.powi(-2).max(1e-300);
        prop_assert!((direct.0 - closed.0).abs() <= 1e-7 * scale.max(closed.0.abs()), "{direct:?} {closed:?}");
        prop_assert!((direct.1 - closed.1).abs() <= 1e-7 * scale.max(closed.1.abs()), "{direct:?} {closed:?}");
    }

    #[test]
    fn coth_gap_in_unit_interval(r in 1e-8f64..50.0) {
        let c = coth_minus_inverse(r);
        prop_assert!(c > 0.0 && c < 1.0);
        if r > 1e-2 {
            prop_assert!((c - (1.0 / r.tanh() - 1.0 / r)).abs() <= 1e-12);
        }
    }

    #[test]
    fn bound_increases_with_distance(n in 1usize..5, kappa in 0.1f64..3.0, d in 1e-3f64..20.0, step in 1e-3f64..5.0) {
        let a = theorem_bound(kappa, n, d).unwrap();
        let b = theorem_bound(kappa, n, d + step).unwrap();
        prop_assert!(b >= a);
        prop_assert!(b <= 2.0 * n as f64 * kappa);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn laws_at_random_samples(seed in any::<u64>(), dim in 2usize..=4, hyperbolic in any::<bool>()) {
        let space = if hyperbolic { SpaceForm::hyperbolic(dim, 1.0).unwrap() } else { SpaceForm::euclidean(dim) };
        let w = law_discrepancy(&space, 4, seed).unwrap();
        prop_assert!(w.worst() <= 1e-4, "{w:?}");
    }

    #[test]
    fn traced_form_nonnegative_on_slab(y in -1.0f64..1.0, z in -1.0f64..1.0, radius in 4.0f64..30.0) {
        let fixture = example_fixture("euclid-slab", &[]).unwrap();
        let run = solve_fixture(&fixture, Point::from_vec(vec![0.0, y, z]), radius, 128).unwrap();
        let (report, terms) = traced_variation_report(&run, None).unwrap();
        prop_assert!(terms.total >= -1e-6, "{}", report.to_json());
        prop_assert!((terms.parts_sum() - terms.total).abs() <= 1e-12 * terms.total.abs().max(1.0));
        prop_assert!(report.pass, "{}", report.to_json());
    }

    #[test]
    fn traced_form_nonnegative_on_circles(a in 0.8f64..2.0, cx in -0.2f64..0.2, cy in -0.2f64..0.2) {
        let fixture = example_fixture("poincare-circles", &[("a", a)]).unwrap();
        let run = solve_fixture(&fixture, Point::from_vec(vec![cx, cy]), 10.0, 128).unwrap();
        let (report, terms) = traced_variation_report(&run, None).unwrap();
        prop_assert!(terms.total >= -1e-6, "{}", report.to_json());
        prop_assert!(report.pass, "{}", report.to_json());
    }
}

#[test]
fn profile_derivatives_match_differences() {
    let profile = RadialProfile::quartic(12.0).unwrap();
    let h = 1e-4;
    for k in 1..40 {
        let r = 12.0 * k as f64 / 40.0;
        let d1 = (profile.value(r + h) - profile.value(r - h)) / (2.0 * h);
        let d2 = (profile.value(r + h) - 2.0 * profile.value(r) + profile.value(r - h)) / (h * h);
        assert!((d1 - profile.d1(r)).abs() < 1e-8, "r = {r}");
        assert!((d2 - profile.d2(r)).abs() < 1e-5, "r = {r}");
    }
    let field: Arc<dyn ScalarField> =
        Arc::new(RadialField::new(SpaceForm::euclidean(2), Point::zeros(2), profile).unwrap());
    assert!(field.value(&Point::from_vec(vec![1.0, 1.0])) > 0.0);
}

#[test]
fn off_center_circles_converge() {
    for (a, cx, cy) in [(1.3254213, -0.1357708, -0.0187445), (1.5101912, -0.0480357, -0.0785969)] {
        let fixture = example_fixture("poincare-circles", &[("a", a)]).unwrap();
        let run = solve_fixture(&fixture, Point::from_vec(vec![cx, cy]), 10.0, 128).unwrap();
        assert!(run.solution.stationarity <= 1e-11, "{}", run.solution.stationarity);
    }
}
