//! Oriented hypersurfaces and their mean curvature in both ambient models.
//!
//! A [`Hypersurface`] is always the zero set of a [`LevelSet`] function `F`
//! that is positive on the side the normal points to, so the inward normal is
//! `∇F / |∇F|`. A parametric [`Chart`] and a one-parameter generating curve
//! ([`Profile1D`]) can be attached when the surface has them.

pub mod fixtures;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::conformal::field::{RadialField, ScalarField};
use crate::conformal::profile::RadialProfile;
use crate::spaceform::{mobius_add, SpaceForm};
use crate::{Error, Matrix, Point, Result, Vector};

pub use fixtures::{example_fixture, FixtureSpec, RegionFixture};

/// Scalar function whose zero set is the hypersurface, positive on the
/// normal side.
pub trait LevelSet: Send + Sync {
    fn dim(&self) -> usize;
    fn level(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Vector;
    fn hessian(&self, x: &Point) -> Matrix;
}

/// Parametrization by an `n`-dimensional parameter box.
pub trait Chart: Send + Sync {
    fn param_dim(&self) -> usize;
    fn point(&self, p: &[f64]) -> Point;
    /// Columns are `∂_a φ`.
    fn jacobian(&self, p: &[f64]) -> Matrix;
    /// `∂_a ∂_b φ`.
    fn second(&self, p: &[f64], a: usize, b: usize) -> Vector;
}

/// Generating curve of a surface whose mean curvature depends on one
/// parameter only (curves, graphs over a line, rotation hypersurfaces).
pub trait Profile1D: Send + Sync {
    fn point(&self, t: f64) -> Point;
    /// Parameter interval whose image contains every point of the modeled
    /// surface at model distance at most `radius` from the origin.
    fn domain_for(&self, space: &SpaceForm, radius: f64) -> (f64, f64);
}

#[derive(Clone)]
pub struct Hypersurface {
    name: String,
    level: Arc<dyn LevelSet>,
    chart: Option<Arc<dyn Chart>>,
    profile: Option<Arc<dyn Profile1D>>,
}

impl fmt::Debug for Hypersurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypersurface")
            .field("name", &self.name)
            .field("chart", &self.chart.is_some())
            .field("profile", &self.profile.is_some())
            .finish()
    }
}

impl Hypersurface {
    pub fn implicit(name: impl Into<String>, level: Arc<dyn LevelSet>) -> Self {
        Self {
            name: name.into(),
            level,
            chart: None,
            profile: None,
        }
    }

    pub fn with_chart(mut self, chart: Arc<dyn Chart>) -> Self {
        self.chart = Some(chart);
        self
    }

    pub fn with_profile(mut self, profile: Arc<dyn Profile1D>) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn level_set(&self) -> &dyn LevelSet {
        self.level.as_ref()
    }

    pub fn chart(&self) -> Option<&dyn Chart> {
        self.chart.as_deref()
    }

    pub fn profile(&self) -> Option<&dyn Profile1D> {
        self.profile.as_deref()
    }

    pub fn level(&self, x: &Point) -> f64 {
        self.level.level(x)
    }

    /// `F / |∇F|`, a first-order signed distance (positive on the normal side).
    pub fn signed_distance(&self, x: &Point) -> f64 {
        let g = self.level.gradient(x).norm();
        self.level.level(x) / g
    }

    /// Coordinate sphere `|x − c| = radius`, normal pointing to the center.
    pub fn coordinate_sphere(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("sphere radius {radius}")));
        }
        let profile = CircleProfile {
            center: center.clone(),
            radius,
            axis: 0,
        };
        Ok(Self::implicit(
            format!("sphere(r={radius})"),
            Arc::new(SphereLevel { center, radius }),
        )
        .with_profile(Arc::new(profile)))
    }

    /// Geodesic sphere of the model around the origin.
    pub fn geodesic_sphere(space: &SpaceForm, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("sphere radius {radius}")));
        }
        let euclidean_radius = if space.is_flat() {
            radius
        } else {
            (0.5 * space.kappa() * radius).tanh()
        };
        Self::coordinate_sphere(Point::zeros(space.dim()), euclidean_radius)
    }

    /// Hyperplane `⟨normal, x⟩ = offset` with the normal side `⟨normal, x⟩ > offset`.
    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0) {
            return Err(Error::InvalidParameter("zero hyperplane normal".into()));
        }
        let normal = normal / len;
        Ok(Self::implicit(
            "hyperplane",
            Arc::new(PlaneLevel {
                normal,
                offset: offset / len,
            }),
        ))
    }
}

struct SphereLevel {
    center: Point,
    radius: f64,
}

impl LevelSet for SphereLevel {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn level(&self, x: &Point) -> f64 {
        (self.radius * self.radius - (x - &self.center).norm_squared()) / (2.0 * self.radius)
    }
    fn gradient(&self, x: &Point) -> Vector {
        -(x - &self.center) / self.radius
    }
    fn hessian(&self, _: &Point) -> Matrix {
        let d = self.dim();
        Matrix::identity(d, d) * (-1.0 / self.radius)
    }
}

pub(crate) struct PlaneLevel {
    pub normal: Vector,
    pub offset: f64,
}

impl LevelSet for PlaneLevel {
    fn dim(&self) -> usize {
        self.normal.len()
    }
    fn level(&self, x: &Point) -> f64 {
        self.normal.dot(x) - self.offset
    }
    fn gradient(&self, _: &Point) -> Vector {
        self.normal.clone()
    }
    fn hessian(&self, _: &Point) -> Matrix {
        let d = self.dim();
        Matrix::zeros(d, d)
    }
}

/// Circle in the plane of the first two coordinates; rotating it about the
/// `x₀` axis sweeps out a sphere in any dimension.
#[derive(Debug, Clone)]
pub(crate) struct CircleProfile {
    pub center: Point,
    pub radius: f64,
    pub axis: usize,
}

impl Profile1D for CircleProfile {
    fn point(&self, t: f64) -> Point {
        let mut p = self.center.clone();
        p[self.axis] += self.radius * t.cos();
        let next = (self.axis + 1) % p.len();
        p[next] += self.radius * t.sin();
        p
    }

    fn domain_for(&self, space: &SpaceForm, radius: f64) -> (f64, f64) {
        if space.is_flat() {
            return (-std::f64::consts::PI, std::f64::consts::PI);
        }
        // keep the part of the circle inside the ball and within `radius`
        let inside = |t: f64| {
            let p = self.point(t);
            p.norm() < 1.0 && space.radius_of(&p) <= radius * (1.0 + 1e-9)
        };
        let pi = std::f64::consts::PI;
        let t0 = (0..=720)
            .map(|k| -pi + 2.0 * pi * k as f64 / 720.0)
            .find(|&t| inside(t));
        let Some(seed) = t0 else {
            return (0.0, 0.0);
        };
        let edge = |dir: f64| {
            let (mut a, mut b) = (seed, seed + dir * pi);
            if inside(b) {
                return b;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if inside(m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            a
        };
        let lo = edge(-1.0);
        let hi = edge(1.0);
        (lo, hi)
    }
}

fn check_on_surface(sigma: &Hypersurface, x: &Point) -> Result<(Vector, f64)> {
    let level = sigma.level(x);
    let scale = x.norm().max(1.0);
    if !(level.abs() <= 1e-8 * scale) {
        return Err(Error::NotOnSurface { level });
    }
    let grad = sigma.level.gradient(x);
    let len = grad.norm();
    if !(len >= 1e-10) {
        return Err(Error::Singular(format!("|∇F| = {len:e}")));
    }
    Ok((grad, len))
}

/// Inward unit normal under `g`, in coordinates.
pub fn unit_normal(space: &SpaceForm, sigma: &Hypersurface, x: &Point) -> Result<Vector> {
    space.check_point(x)?;
    let (grad, len) = check_on_surface(sigma, x)?;
    Ok(grad / (len * space.conformal_factor(x)))
}

/// Euclidean `H·ν` from the level set: `−(ΔF − νᵀ ∇²F ν) / |∇F|`.
fn euclidean_mean_curvature(sigma: &Hypersurface, x: &Point) -> Result<(f64, Vector)> {
    let (grad, len) = check_on_surface(sigma, x)?;
    let nu = grad / len;
    let hess = sigma.level.hessian(x);
    let h = -(hess.trace() - nu.dot(&(&hess * &nu))) / len;
    Ok((h, nu))
}

/// `H·ν` with respect to the inward normal under the ambient metric.
///
/// On the ball the Euclidean value is converted through the conformal law
/// with `u = κ (1 − |x|²) / 2`, for which `u⁻² δ` is the model metric.
pub fn mean_curvature(space: &SpaceForm, sigma: &Hypersurface, x: &Point) -> Result<f64> {
    space.check_point(x)?;
    let (h, nu) = euclidean_mean_curvature(sigma, x)?;
    Ok(to_model(space, x, h, &nu))
}

fn to_model(space: &SpaceForm, x: &Point, h: f64, nu: &Vector) -> f64 {
    if space.is_flat() {
        return h;
    }
    let u = RadialField::new(
        SpaceForm::euclidean(space.dim()),
        Point::zeros(space.dim()),
        RadialProfile::poincare_disk(),
    )
    .expect("origin is a valid center");
    let n = space.n() as f64;
    space.kappa() * (u.value(x) * h + n * u.differential(x).dot(nu))
}

/// `H·ν = tr(G⁻¹ b)` with `b_ab = ∂_a∂_b φ · ν`, the normal taken from the
/// level set so that the orientation agrees with [`mean_curvature`].
pub fn mean_curvature_param(space: &SpaceForm, sigma: &Hypersurface, p: &[f64]) -> Result<f64> {
    let chart = sigma
        .chart()
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no chart", sigma.name)))?;
    let x = chart.point(p);
    space.check_point(&x)?;
    let grad = sigma.level.gradient(&x);
    let nu = &grad / grad.norm();
    let jac = chart.jacobian(p);
    let first = jac.transpose() * &jac;
    let inv = first
        .clone()
        .try_inverse()
        .filter(|_| first.determinant().abs() > 1e-20)
        .ok_or_else(|| Error::Singular("degenerate first fundamental form".into()))?;
    let m = chart.param_dim();
    let mut h = 0.0;
    for a in 0..m {
        for b in 0..m {
            h += inv[(a, b)] * chart.second(p, a, b).dot(&nu);
        }
    }
    Ok(to_model(space, &x, h, &nu))
}

/// `n/R` in flat space and `n κ coth(κR)` on the ball.
pub fn sphere_mean_curvature(space: &SpaceForm, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    let n = space.n() as f64;
    if space.is_flat() {
        Ok(n / radius)
    } else {
        let k = space.kappa();
        Ok(n * k * (1.0 + 2.0 / (2.0 * k * radius).exp_m1()))
    }
}

/// Sampled infimum of `H·ν` over `Σ ∩ {R/3 < r < R}`.
#[derive(Debug, Clone, Serialize)]
pub struct AnnulusInfimum {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Number of surface points evaluated at the finest level.
    pub samples: usize,
    /// Parameter samples per unit parameter length at the finest level.
    pub density: f64,
    pub levels: usize,
    /// Infimum at each refinement level.
    pub history: Vec<f64>,
}

const ANNULUS_START: usize = 256;
const ANNULUS_MAX_LEVELS: usize = 9;
const ANNULUS_REL_TOL: f64 = 1e-3;

/// Infimum over the open annulus, sampled along the generating curve with
/// boundary crossings included; the grid doubles until the value moves by
/// less than `1e-3` relative.
pub fn infimum_over_annulus(space: &SpaceForm, sigma: &Hypersurface, radius: f64) -> Result<AnnulusInfimum> {
    infimum_over_shell(space, sigma, radius / 3.0, radius)
}

/// Infimum over `Σ ∩ {r < radius}`.
pub fn infimum_over_ball(space: &SpaceForm, sigma: &Hypersurface, radius: f64) -> Result<AnnulusInfimum> {
    infimum_over_shell(space, sigma, -1.0, radius)
}

fn infimum_over_shell(space: &SpaceForm, sigma: &Hypersurface, inner: f64, outer: f64) -> Result<AnnulusInfimum> {
    if !(outer > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {outer}")));
    }
    let profile = sigma
        .profile()
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no generating curve", sigma.name)))?;
    let (t0, t1) = profile.domain_for(space, outer);
    if !(t1 > t0) {
        return Err(Error::EmptyIntersection);
    }
    let radius_at = |t: f64| space.radius_of(&profile.point(t));
    let inside = |r: f64| r > inner && r < outer;
    let mut history = Vec::new();
    let mut count = ANNULUS_START;
    loop {
        let ts: Vec<f64> = (0..=count)
            .map(|k| t0 + (t1 - t0) * k as f64 / count as f64)
            .collect();
        let rs: Vec<f64> = ts.iter().map(|&t| radius_at(t)).collect();
        let mut params: Vec<f64> = Vec::new();
        for k in 0..=count {
            if inside(rs[k]) {
                params.push(ts[k]);
            }
            if k < count && inside(rs[k]) != inside(rs[k + 1]) {
                for bound in [inner, outer] {
                    if bound > 0.0 && (rs[k] - bound) * (rs[k + 1] - bound) <= 0.0 {
                        params.push(bisect_radius(&radius_at, ts[k], ts[k + 1], bound));
                    }
                }
            }
        }
        if params.is_empty() {
            if history.is_empty() && count < ANNULUS_START << ANNULUS_MAX_LEVELS {
                count *= 2;
                continue;
            }
            return Err(Error::EmptyIntersection);
        }
        let mut best = f64::INFINITY;
        let mut best_t = params[0];
        for &t in &params {
            let h = mean_curvature(space, sigma, &profile.point(t))?;
            if h < best {
                best = h;
                best_t = t;
            }
        }
        history.push(best);
        let settled = history.len() >= 2 && {
            let prev = history[history.len() - 2];
            (prev - best).abs() <= ANNULUS_REL_TOL * best.abs().max(f64::MIN_POSITIVE)
                || (prev - best).abs() <= 1e-14
        };
        if settled || history.len() >= ANNULUS_MAX_LEVELS {
            return Ok(AnnulusInfimum {
                value: best,
                argmin: profile.point(best_t).iter().copied().collect(),
                samples: params.len(),
                density: count as f64 / (t1 - t0),
                levels: history.len(),
                history,
            });
        }
        count *= 2;
    }
}

fn bisect_radius(radius_at: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, target: f64) -> f64 {
    let fa = radius_at(a) - target;
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let fm = radius_at(m) - target;
        if (fm <= 0.0) == (fa <= 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    // return the endpoint on the closed annulus side
    if (radius_at(a) - target).abs() <= (radius_at(b) - target).abs() {
        a
    } else {
        b
    }
}

/// Outcome of comparing `H·ν` at a point with the mean curvature of a sphere
/// that touches the surface there from the inside of the region.
#[derive(Debug, Clone, Serialize)]
pub struct BallComparison {
    pub mean_curvature: f64,
    pub sphere_mean_curvature: f64,
    pub radius: f64,
    /// Smallest signed distance of sampled sphere points to the region
    /// boundaries (nonnegative when the sphere is inscribed).
    pub min_clearance: f64,
    pub inscribed: bool,
    pub holds: bool,
}

/// Sphere of model radius `radius` tangent to `sigma` at `y` from the normal
/// side; checks it lies in `{F ≥ 0}` for every level set in `region` and
/// compares curvatures.
pub fn inscribed_sphere_comparison(
    space: &SpaceForm,
    sigma: &Hypersurface,
    region: &[&Hypersurface],
    y: &Point,
    radius: f64,
    samples: usize,
) -> Result<BallComparison> {
    let h = mean_curvature(space, sigma, y)?;
    let sphere_h = sphere_mean_curvature(space, radius)?;
    let grad = sigma.level.gradient(y);
    let dir = &grad / grad.norm();
    let d = space.dim();
    let (center, euclid_radius) = if space.is_flat() {
        (y + &dir * radius, radius)
    } else {
        let k = space.kappa();
        (mobius_add(y, &(&dir * (0.5 * k * radius).tanh())), (0.5 * k * radius).tanh())
    };
    let mut min_clearance = f64::INFINITY;
    let directions = sphere_directions(d, samples, &dir);
    for w in &directions {
        let p = if space.is_flat() {
            &center + w * euclid_radius
        } else {
            mobius_add(&center, &(w * euclid_radius))
        };
        if space.check_point(&p).is_err() {
            min_clearance = f64::NEG_INFINITY;
            continue;
        }
        for s in region {
            min_clearance = min_clearance.min(s.signed_distance(&p));
        }
    }
    let inscribed = min_clearance >= -1e-9;
    Ok(BallComparison {
        mean_curvature: h,
        sphere_mean_curvature: sphere_h,
        radius,
        min_clearance,
        inscribed,
        holds: h <= sphere_h + 1e-8,
    })
}

/// Deterministic spread of unit vectors: a dense circle in the plane of
/// `axis` and each coordinate direction, plus the coordinate axes.
fn sphere_directions(d: usize, samples: usize, axis: &Vector) -> Vec<Vector> {
    let mut out = Vec::new();
    let a = axis.normalize();
    for k in 0..d {
        let mut e = Vector::zeros(d);
        e[k] = 1.0;
        let perp = &e - &a * a.dot(&e);
        if perp.norm() < 1e-8 {
            continue;
        }
        let b = perp.normalize();
        for j in 0..samples {
            let th = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
            out.push(&a * th.cos() + &b * th.sin());
        }
    }
    out
}

/// Graph `x_last = c + b·p + ½ pᵀ A p` over the first `n` coordinates,
/// normal side above (`upward`) or below.
#[derive(Debug, Clone)]
pub struct QuadraticGraph {
    pub height: f64,
    pub linear: Vector,
    pub quadratic: Matrix,
    pub upward: bool,
}

impl QuadraticGraph {
    pub fn new(height: f64, linear: Vector, quadratic: Matrix, upward: bool) -> Self {
        let quadratic = (&quadratic + quadratic.transpose()) * 0.5;
        Self {
            height,
            linear,
            quadratic,
            upward,
        }
    }

    fn sign(&self) -> f64 {
        if self.upward {
            1.0
        } else {
            -1.0
        }
    }

    fn height_at(&self, p: &Vector) -> f64 {
        self.height + self.linear.dot(p) + 0.5 * p.dot(&(&self.quadratic * p))
    }

    pub fn into_hypersurface(self) -> Hypersurface {
        let me = Arc::new(self);
        Hypersurface::implicit("quadratic-graph", me.clone()).with_chart(me)
    }
}

impl LevelSet for QuadraticGraph {
    fn dim(&self) -> usize {
        self.linear.len() + 1
    }
    fn level(&self, x: &Point) -> f64 {
        let n = self.linear.len();
        let p = x.rows(0, n).into_owned();
        self.sign() * (x[n] - self.height_at(&p))
    }
    fn gradient(&self, x: &Point) -> Vector {
        let n = self.linear.len();
        let p = x.rows(0, n).into_owned();
        let slope = &self.linear + &self.quadratic * p;
        let mut g = Vector::zeros(n + 1);
        g.rows_mut(0, n).copy_from(&(-slope));
        g[n] = 1.0;
        g * self.sign()
    }
    fn hessian(&self, _: &Point) -> Matrix {
        let n = self.linear.len();
        let mut h = Matrix::zeros(n + 1, n + 1);
        h.view_mut((0, 0), (n, n)).copy_from(&(-&self.quadratic));
        h * self.sign()
    }
}

impl Chart for QuadraticGraph {
    fn param_dim(&self) -> usize {
        self.linear.len()
    }
    fn point(&self, p: &[f64]) -> Point {
        let pv = Vector::from_column_slice(p);
        let mut x = Vector::zeros(p.len() + 1);
        x.rows_mut(0, p.len()).copy_from(&pv);
        x[p.len()] = self.height_at(&pv);
        x
    }
    fn jacobian(&self, p: &[f64]) -> Matrix {
        let n = p.len();
        let pv = Vector::from_column_slice(p);
        let slope = &self.linear + &self.quadratic * pv;
        let mut j = Matrix::zeros(n + 1, n);
        for a in 0..n {
            j[(a, a)] = 1.0;
            j[(n, a)] = slope[a];
        }
        j
    }
    fn second(&self, p: &[f64], a: usize, b: usize) -> Vector {
        let mut v = Vector::zeros(p.len() + 1);
        v[p.len()] = self.quadratic[(a, b)];
        v
    }
}
