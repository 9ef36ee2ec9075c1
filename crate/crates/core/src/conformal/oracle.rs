//! Randomized comparison of the conformal laws with finite differences of
//! the coordinate metric `u⁻² g`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{ExpQuadraticField, RadialField, ScalarField};
use super::profile::RadialProfile;
use super::{
    conformal_connection, conformal_mean_curvature, conformal_ricci, conformal_sectional, ConformalFrame,
    VectorJet,
};
use crate::fd::{self, Steps};
use crate::hypersurface::{self, Hypersurface};
use crate::report::{GridMeta, VerificationReport};
use crate::spaceform::SpaceForm;
use crate::{Matrix, Point, Result, Vector};

/// Worst relative discrepancy of each law over a set of samples.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct LawDiscrepancy {
    pub connection: f64,
    pub sectional: f64,
    pub ricci: f64,
    pub mean_curvature: f64,
}

impl LawDiscrepancy {
    pub fn worst(&self) -> f64 {
        worse(
            worse(self.connection, self.sectional),
            worse(self.ricci, self.mean_curvature),
        )
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// `max` that keeps a NaN instead of discarding it.
fn worse(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn uniform_vector(rng: &mut ChaCha8Rng, d: usize, half_width: f64) -> Vector {
    Vector::from_fn(d, |_, _| rng.gen_range(-half_width..half_width))
}

/// A random positive field: exponential of a quadratic for even `k`, the
/// radial profile around a nearby center for odd `k`.
fn random_field(rng: &mut ChaCha8Rng, space: &SpaceForm, x: &Point, k: usize) -> Result<Box<dyn ScalarField>> {
    let d = space.dim();
    if k.is_multiple_of(2) {
        let a = uniform_vector(rng, d * d, 0.5);
        let quadratic = Matrix::from_column_slice(d, d, a.as_slice());
        Ok(Box::new(ExpQuadraticField::new(
            rng.gen_range(0.5..2.0),
            uniform_vector(rng, d, 0.5),
            quadratic,
        )?))
    } else {
        let radius = rng.gen_range(2.0..5.0);
        let offset = uniform_vector(rng, d, 1.0);
        let r = rng.gen_range(0.2..1.0);
        let center = if space.is_flat() {
            x + offset.normalize() * r
        } else {
            space.mobius_uncenter(x, &space.point_at_distance(&offset, r))?
        };
        Ok(Box::new(RadialField::new(*space, center, RadialProfile::quartic(radius)?)?))
    }
}

fn random_point(rng: &mut ChaCha8Rng, space: &SpaceForm) -> Point {
    let d = space.dim();
    if space.is_flat() {
        uniform_vector(rng, d, 1.0)
    } else {
        let dir = uniform_vector(rng, d, 1.0);
        space.point_at_distance(&dir, rng.gen_range(0.0..1.5))
    }
}

/// Compare all four laws at `samples` random `(u, x, frame)` triples.
pub fn law_discrepancy(space: &SpaceForm, samples: usize, seed: u64) -> Result<LawDiscrepancy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = space.dim();
    let mut worst = LawDiscrepancy::default();
    for k in 0..samples {
        let x = random_point(&mut rng, space);
        let u = random_field(&mut rng, space, &x, k)?;
        let u_value = u.value(&x);
        let metric = fd::conformal_metric(space, u.as_ref());
        let steps = Steps::DEFAULT.scaled(if space.is_flat() { 1.0 } else { 1.0 - x.norm_squared() });

        let xv = uniform_vector(&mut rng, d, 1.0);
        let jac = Matrix::from_column_slice(d, d, uniform_vector(&mut rng, d * d, 1.0).as_slice());
        let y = VectorJet::new(uniform_vector(&mut rng, d, 1.0), jac);
        let law = conformal_connection(space, u.as_ref(), &x, &xv, &y)?;
        let oracle = fd::connection(&metric, &x, &xv, &y.value, &y.jacobian, steps.inner);
        let scale = oracle.amax().max(1.0);
        worst.connection = worse(worst.connection, (law - oracle).amax() / scale);

        let leading = [uniform_vector(&mut rng, d, 1.0), uniform_vector(&mut rng, d, 1.0)];
        let frame = ConformalFrame::new(space, &x, u_value, &leading)?;
        let (ei, ej) = (&frame.base[0], &frame.base[1]);
        let law = conformal_sectional(space, u.as_ref(), &x, ei, ej)?;
        let oracle = fd::sectional(&metric, &x, &frame.scaled[0], &frame.scaled[1], steps);
        worst.sectional = worse(worst.sectional, rel(law, oracle));

        let law = conformal_ricci(space, u.as_ref(), &x, ej)?;
        let oracle = fd::ricci(&metric, &x, &frame.scaled[1], steps);
        worst.ricci = worse(worst.ricci, rel(law, oracle));

        // a coordinate sphere through x with inward normal along a random direction
        let radius = rng.gen_range(0.3..1.0) * if space.is_flat() { 1.0 } else { 1.0 - x.norm() };
        let center = &x + ei.normalize() * radius;
        let sigma = Hypersurface::coordinate_sphere(center, radius)?;
        let law = conformal_mean_curvature(space, u.as_ref(), &sigma, &x)?;
        let level = |y: &Point| sigma.level(y);
        let oracle = fd::mean_curvature(&metric, &level, &x, steps.scaled(radius.min(1.0)));
        worst.mean_curvature = worse(worst.mean_curvature, rel(law, oracle));
    }
    Ok(worst)
}

/// Report of [`law_discrepancy`] against a relative tolerance.
pub fn law_suite(space: &SpaceForm, samples: usize, seed: u64, tolerance: f64) -> Result<VerificationReport> {
    let start = Instant::now();
    let worst = law_discrepancy(space, samples, seed)?;
    Ok(VerificationReport::new(
        "conformal-laws",
        "connection, sectional, Ricci and mean-curvature laws against finite differences",
    )
    .input("dim", space.dim())
    .input("kappa", space.kappa())
    .input("samples", samples)
    .agreement(worst.worst(), 0.0, tolerance)
    .grid(GridMeta {
        description: "random (u, point, frame) samples".into(),
        points: samples,
        start: None,
    })
    .seed(seed)
    .detail("connection", worst.connection)
    .detail("sectional", worst.sectional)
    .detail("ricci", worst.ricci)
    .detail("mean_curvature", worst.mean_curvature)
    .timed(start))
}

/// Flat space with `u = (1 − |x|²)/2` against the hyperbolic values: Ricci
/// `−n` in every direction and geodesic spheres of radius `R` with
/// `H = n + 2n/(e^{2R} − 1)`.
pub fn poincare_recovery(dim: usize, radii: &[f64], seed: u64) -> Result<VerificationReport> {
    let start = Instant::now();
    let flat = SpaceForm::euclidean(dim);
    let n = (dim - 1) as f64;
    let u = RadialField::new(flat, Point::zeros(dim), RadialProfile::poincare_disk())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ricci_law: f64 = 0.0;
    let mut ricci_fd: f64 = 0.0;
    for _ in 0..10 {
        let dir = uniform_vector(&mut rng, dim, 1.0);
        let x = dir.normalize() * rng.gen_range(0.0..0.7);
        let e = uniform_vector(&mut rng, dim, 1.0).normalize();
        ricci_law = worse(ricci_law, rel(conformal_ricci(&flat, &u, &x, &e)?, -n));
        let metric = fd::conformal_metric(&flat, &u);
        let steps = Steps::DEFAULT.scaled(1.0 - x.norm_squared());
        ricci_fd = worse(ricci_fd, rel(fd::ricci(&metric, &x, &e, steps), -n));
    }
    let hyperbolic = SpaceForm::hyperbolic(dim, 1.0)?;
    let mut sphere: f64 = 0.0;
    for &r in radii {
        let euclidean_radius = (0.5 * r).tanh();
        let sigma = Hypersurface::coordinate_sphere(Point::zeros(dim), euclidean_radius)?;
        let mut x = Point::zeros(dim);
        x[0] = euclidean_radius;
        let h = conformal_mean_curvature(&flat, &u, &sigma, &x)?;
        let target = n + 2.0 * n / (2.0 * r).exp_m1();
        sphere = worse(sphere, rel(h, target));
        let model = hypersurface::sphere_mean_curvature(&hyperbolic, r)?;
        sphere = worse(sphere, rel(model, target));
    }
    Ok(VerificationReport::new(
        "poincare-recovery",
        "u = (1 - |x|^2)/2 on flat space reproduces Ricci = -n and hyperbolic sphere curvature",
    )
    .input("dim", dim)
    .input("radii", radii)
    .agreement(ricci_law.max(ricci_fd), 0.0, 1e-4)
    .seed(seed)
    .detail("ricci_law", ricci_law)
    .detail("ricci_fd", ricci_fd)
    .detail("sphere", sphere)
    .require("sphere_curvature", sphere <= 1e-6)
    .timed(start))
}
