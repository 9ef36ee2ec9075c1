//! Analytic two-boundary regions.
//!
//! | name | ambient | `Σ₁` | `Σ₂` |
//! |---|---|---|---|
//! | `poincare-circles` | disk, `κ = 1` | `|z + a|² = 1 + a²` | `|z − a|² = 1 + a²` |
//! | `hyperbolic-equidistant` | ball, `κ = 1` | same spheres in dimension `dim` | |
//! | `log-graph` | plane | `y = x / log x`, `x ≥ 3` | `y = 0` |
//! | `revolution-r4` | `ℝ⁴` | `|x′| = e^{1/(1−x₀)}`, `1/2 ≤ x₀ < 1` | `x₀ = 1` |
//! | `euclid-slab` | `ℝ^dim` | `x₀ = −d/2` | `x₀ = d/2` |

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{CircleProfile, Hypersurface, LevelSet, PlaneLevel, Profile1D};
use crate::spaceform::SpaceForm;
use crate::{Error, Matrix, Point, Result, Vector};

pub type CurvatureOracle = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Named fixture with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum FixtureSpec {
    PoincareCircles { a: f64 },
    LogGraph,
    RevolutionR4,
    EuclidSlab { d: f64, dim: usize },
    HyperbolicEquidistant { a: f64, dim: usize },
}

impl FixtureSpec {
    pub const NAMES: [&'static str; 5] = [
        "poincare-circles",
        "log-graph",
        "revolution-r4",
        "euclid-slab",
        "hyperbolic-equidistant",
    ];

    /// Build from a name and a parameter map (`a`, `d`, `dim`; missing keys
    /// take defaults `a = 1`, `d = 1`, `dim = 3`).
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "poincare-circles" => &["a"],
            "log-graph" | "revolution-r4" => &[],
            "euclid-slab" => &["d", "dim"],
            "hyperbolic-equidistant" => &["a", "dim"],
            other => return Err(Error::UnknownFixture(other.to_string())),
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "fixture {name} has no parameter `{bad}`"
            )));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let dim = |default: f64| -> Result<usize> {
            let v = get("dim", default);
            if v.fract() != 0.0 || v < 2.0 {
                return Err(Error::InvalidParameter(format!("dim = {v}")));
            }
            Ok(v as usize)
        };
        let spec = match name {
            "poincare-circles" => Self::PoincareCircles { a: get("a", 1.0) },
            "log-graph" => Self::LogGraph,
            "revolution-r4" => Self::RevolutionR4,
            "euclid-slab" => Self::EuclidSlab {
                d: get("d", 1.0),
                dim: dim(3.0)?,
            },
            _ => Self::HyperbolicEquidistant {
                a: get("a", 1.0),
                dim: dim(3.0)?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PoincareCircles { .. } => "poincare-circles",
            Self::LogGraph => "log-graph",
            Self::RevolutionR4 => "revolution-r4",
            Self::EuclidSlab { .. } => "euclid-slab",
            Self::HyperbolicEquidistant { .. } => "hyperbolic-equidistant",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::PoincareCircles { a } | Self::HyperbolicEquidistant { a, .. } if !(a > 0.0) => {
                Err(Error::InvalidParameter(format!("a must be positive, got {a}")))
            }
            Self::EuclidSlab { d, .. } if !(d > 0.0) => Err(Error::InvalidParameter(format!(
                "slab width must be positive, got {d}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<RegionFixture> {
        self.validate()?;
        match *self {
            Self::PoincareCircles { a } => equidistant(self.clone(), a, 2),
            Self::HyperbolicEquidistant { a, dim } => equidistant(self.clone(), a, dim),
            Self::LogGraph => Ok(log_graph()),
            Self::RevolutionR4 => Ok(revolution()),
            Self::EuclidSlab { d, dim } => slab(d, dim),
        }
    }
}

impl fmt::Display for FixtureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PoincareCircles { a } => write!(f, "poincare-circles(a={a})"),
            Self::LogGraph => write!(f, "log-graph"),
            Self::RevolutionR4 => write!(f, "revolution-r4"),
            Self::EuclidSlab { d, dim } => write!(f, "euclid-slab(d={d},dim={dim})"),
            Self::HyperbolicEquidistant { a, dim } => {
                write!(f, "hyperbolic-equidistant(a={a},dim={dim})")
            }
        }
    }
}

/// A region between two hypersurfaces, normals pointing into the region.
#[derive(Clone)]
pub struct RegionFixture {
    pub spec: FixtureSpec,
    pub space: SpaceForm,
    pub sigma1: Hypersurface,
    pub sigma2: Hypersurface,
    pub oracle1: Option<CurvatureOracle>,
    pub oracle2: Option<CurvatureOracle>,
}

impl fmt::Debug for RegionFixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegionFixture")
            .field("spec", &self.spec)
            .field("space", &self.space)
            .finish()
    }
}

impl RegionFixture {
    pub fn name(&self) -> String {
        self.spec.to_string()
    }

    pub fn boundary(&self, which: usize) -> &Hypersurface {
        if which == 1 {
            &self.sigma1
        } else {
            &self.sigma2
        }
    }

    pub fn oracle(&self, which: usize) -> Option<&CurvatureOracle> {
        if which == 1 {
            self.oracle1.as_ref()
        } else {
            self.oracle2.as_ref()
        }
    }

    /// Smallest of the two signed distances; nonnegative inside the closed region.
    pub fn clearance(&self, x: &Point) -> f64 {
        self.sigma1.signed_distance(x).min(self.sigma2.signed_distance(x))
    }

    /// Smallest Euclidean distance between sampled points of the two
    /// boundaries within model radius `radius`.
    pub fn sampled_separation(&self, radius: f64, samples: usize) -> Result<f64> {
        let pts = |s: &Hypersurface| -> Result<Vec<Point>> {
            let prof = s
                .profile()
                .ok_or_else(|| Error::InvalidParameter("boundary without generating curve".into()))?;
            let (t0, t1) = prof.domain_for(&self.space, radius);
            Ok((0..=samples)
                .map(|k| prof.point(t0 + (t1 - t0) * k as f64 / samples as f64))
                .filter(|p| self.space.check_point(p).is_ok())
                .collect())
        };
        let a = pts(&self.sigma1)?;
        let b = pts(&self.sigma2)?;
        let mut best = f64::INFINITY;
        for p in &a {
            for q in &b {
                best = best.min((p - q).norm());
            }
        }
        Ok(best)
    }
}

/// Build a fixture by name, e.g. `example_fixture("poincare-circles", &[("a", 1.0)])`.
pub fn example_fixture(name: &str, params: &[(&str, f64)]) -> Result<RegionFixture> {
    let map = params
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect::<BTreeMap<_, _>>();
    FixtureSpec::from_name(name, &map)?.build()
}

fn axis(dim: usize, k: usize) -> Vector {
    Vector::from_fn(dim, |i, _| if i == k { 1.0 } else { 0.0 })
}

/// Spheres `|x ± a e₀|² = 1 + a²` in the unit ball with `κ = 1`, each with
/// constant mean curvature `n / √(1 + a²)`.
fn equidistant(spec: FixtureSpec, a: f64, dim: usize) -> Result<RegionFixture> {
    let space = SpaceForm::hyperbolic(dim, 1.0)?;
    let radius = (1.0 + a * a).sqrt();
    let make = |sign: f64, label: &str| -> Result<Hypersurface> {
        let center = axis(dim, 0) * (sign * a);
        let sphere = Hypersurface::coordinate_sphere(center.clone(), radius)?;
        Ok(Hypersurface::implicit(label.to_string(), sphere.level.clone()).with_profile(Arc::new(
            CircleProfile {
                center,
                radius,
                axis: 0,
            },
        )))
    };
    let h = (dim - 1) as f64 / radius;
    let oracle: CurvatureOracle = Arc::new(move |_| h);
    Ok(RegionFixture {
        spec,
        space,
        sigma1: make(-1.0, "sigma1")?,
        sigma2: make(1.0, "sigma2")?,
        oracle1: Some(oracle.clone()),
        oracle2: Some(oracle),
    })
}

fn slab(d: f64, dim: usize) -> Result<RegionFixture> {
    let space = SpaceForm::new(dim, 0.0)?;
    let e0 = axis(dim, 0);
    let lower = Hypersurface::implicit(
        "sigma1",
        Arc::new(PlaneLevel {
            normal: e0.clone(),
            offset: -0.5 * d,
        }),
    )
    .with_profile(Arc::new(LineProfile { x0: -0.5 * d, dim }));
    let upper = Hypersurface::implicit(
        "sigma2",
        Arc::new(PlaneLevel {
            normal: -e0,
            offset: -0.5 * d,
        }),
    )
    .with_profile(Arc::new(LineProfile { x0: 0.5 * d, dim }));
    let zero: CurvatureOracle = Arc::new(|_| 0.0);
    Ok(RegionFixture {
        spec: FixtureSpec::EuclidSlab { d, dim },
        space,
        sigma1: lower,
        sigma2: upper,
        oracle1: Some(zero.clone()),
        oracle2: Some(zero),
    })
}

/// The line `{x₀ = c}` swept along `e₁`.
struct LineProfile {
    x0: f64,
    dim: usize,
}

impl Profile1D for LineProfile {
    fn point(&self, t: f64) -> Point {
        let mut p = Point::zeros(self.dim);
        p[0] = self.x0;
        p[1] = t;
        p
    }
    fn domain_for(&self, _: &SpaceForm, radius: f64) -> (f64, f64) {
        (0.0, radius)
    }
}

/// `y = x / log x` and its first two derivatives.
pub fn log_graph_height(x: f64) -> (f64, f64, f64) {
    let l = x.ln();
    (x / l, (l - 1.0) / (l * l), (2.0 - l) / (x * l * l * l))
}

/// Closed-form `H·ν` of `y = x / log x` for the normal pointing down into the region.
pub fn log_graph_mean_curvature(x: f64) -> f64 {
    let (_, d1, d2) = log_graph_height(x);
    -d2 / (1.0 + d1 * d1).powf(1.5)
}

/// Left end of the modeled branch.
pub const LOG_GRAPH_START: f64 = 3.0;

struct LogGraphLevel;

impl LevelSet for LogGraphLevel {
    fn dim(&self) -> usize {
        2
    }
    fn level(&self, x: &Point) -> f64 {
        log_graph_height(x[0]).0 - x[1]
    }
    fn gradient(&self, x: &Point) -> Vector {
        Vector::from_vec(vec![log_graph_height(x[0]).1, -1.0])
    }
    fn hessian(&self, x: &Point) -> Matrix {
        let mut h = Matrix::zeros(2, 2);
        h[(0, 0)] = log_graph_height(x[0]).2;
        h
    }
}

struct LogGraphProfile;

impl Profile1D for LogGraphProfile {
    fn point(&self, t: f64) -> Point {
        Point::from_vec(vec![t, log_graph_height(t).0])
    }
    fn domain_for(&self, _: &SpaceForm, radius: f64) -> (f64, f64) {
        (LOG_GRAPH_START, radius.max(LOG_GRAPH_START))
    }
}

fn log_graph() -> RegionFixture {
    let space = SpaceForm::euclidean(2);
    let sigma1 = Hypersurface::implicit("sigma1", Arc::new(LogGraphLevel))
        .with_profile(Arc::new(LogGraphProfile));
    let sigma2 = Hypersurface::implicit(
        "sigma2",
        Arc::new(PlaneLevel {
            normal: axis(2, 1),
            offset: 0.0,
        }),
    )
    .with_profile(Arc::new(AxisProfile {
        start: LOG_GRAPH_START,
    }));
    RegionFixture {
        spec: FixtureSpec::LogGraph,
        space,
        sigma1,
        sigma2,
        oracle1: Some(Arc::new(|x: &Point| log_graph_mean_curvature(x[0]))),
        oracle2: Some(Arc::new(|_| 0.0)),
    }
}

/// The `x`-axis from `start` on.
struct AxisProfile {
    start: f64,
}

impl Profile1D for AxisProfile {
    fn point(&self, t: f64) -> Point {
        Point::from_vec(vec![t, 0.0])
    }
    fn domain_for(&self, _: &SpaceForm, radius: f64) -> (f64, f64) {
        (self.start, radius.max(self.start))
    }
}

/// `h = f(t) = e^{1/(1−t)}` with `f′`, `f″` written through `h` and `log h`.
pub fn revolution_profile(t: f64) -> (f64, f64, f64) {
    let lh = 1.0 / (1.0 - t);
    let h = lh.exp();
    (h, h * lh * lh, h * lh.powi(4) + 2.0 * h * lh.powi(3))
}

/// Displayed closed form `(2 + h²(log h)³(log h − 2)) / (h (1 + h²(log h)⁴)^{3/2})`.
pub fn revolution_mean_curvature(t: f64) -> f64 {
    let lh = 1.0 / (1.0 - t);
    let h = lh.exp();
    let num = 2.0 + h * h * lh.powi(3) * (lh - 2.0);
    num / (h * (1.0 + h * h * lh.powi(4)).powf(1.5))
}

/// Principal-curvature form `(2(1 + f′²) − f f″) / (f (1 + f′²)^{3/2})` in `ℝ⁴`.
pub fn revolution_principal_mean_curvature(t: f64) -> f64 {
    let (f, d1, d2) = revolution_profile(t);
    let w = 1.0 + d1 * d1;
    (2.0 * w - f * d2) / (f * w.powf(1.5))
}

pub const REVOLUTION_START: f64 = 0.5;

struct RevolutionLevel;

impl LevelSet for RevolutionLevel {
    fn dim(&self) -> usize {
        4
    }
    fn level(&self, x: &Point) -> f64 {
        if x[0] >= 1.0 {
            return f64::INFINITY;
        }
        revolution_profile(x[0]).0 - x.rows(1, 3).norm()
    }
    fn gradient(&self, x: &Point) -> Vector {
        let rest = x.rows(1, 3).into_owned();
        let r = rest.norm();
        let mut g = Vector::zeros(4);
        g[0] = revolution_profile(x[0]).1;
        g.rows_mut(1, 3).copy_from(&(-rest / r));
        g
    }
    fn hessian(&self, x: &Point) -> Matrix {
        let rest = x.rows(1, 3).into_owned();
        let r = rest.norm();
        let dir = &rest / r;
        let mut h = Matrix::zeros(4, 4);
        h[(0, 0)] = revolution_profile(x[0]).2;
        let block = -(Matrix::identity(3, 3) - &dir * dir.transpose()) / r;
        h.view_mut((1, 1), (3, 3)).copy_from(&block);
        h
    }
}

struct RevolutionProfile;

impl Profile1D for RevolutionProfile {
    fn point(&self, t: f64) -> Point {
        Point::from_vec(vec![t, revolution_profile(t).0, 0.0, 0.0])
    }
    fn domain_for(&self, _: &SpaceForm, radius: f64) -> (f64, f64) {
        let end = if radius > 2f64.exp() {
            1.0 - 1.0 / radius.ln()
        } else {
            REVOLUTION_START
        };
        (REVOLUTION_START, end)
    }
}

/// `{x₀ = 1}` swept along `e₁`.
struct CapPlaneProfile;

impl Profile1D for CapPlaneProfile {
    fn point(&self, t: f64) -> Point {
        Point::from_vec(vec![1.0, t, 0.0, 0.0])
    }
    fn domain_for(&self, _: &SpaceForm, radius: f64) -> (f64, f64) {
        (0.0, radius)
    }
}

fn revolution() -> RegionFixture {
    let space = SpaceForm::euclidean(4);
    let sigma1 = Hypersurface::implicit("sigma1", Arc::new(RevolutionLevel))
        .with_profile(Arc::new(RevolutionProfile));
    let sigma2 = Hypersurface::implicit(
        "sigma2",
        Arc::new(PlaneLevel {
            normal: -axis(4, 0),
            offset: -1.0,
        }),
    )
    .with_profile(Arc::new(CapPlaneProfile));
    RegionFixture {
        spec: FixtureSpec::RevolutionR4,
        space,
        sigma1,
        sigma2,
        oracle1: Some(Arc::new(|x: &Point| revolution_mean_curvature(x[0]))),
        oracle2: Some(Arc::new(|_| 0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::mean_curvature;
    use approx::assert_relative_eq;

    #[test]
    fn unknown_names_and_bad_parameters() {
        assert!(matches!(
            example_fixture("torus", &[]),
            Err(Error::UnknownFixture(_))
        ));
        assert!(example_fixture("poincare-circles", &[("a", 0.0)]).is_err());
        assert!(example_fixture("euclid-slab", &[("d", -1.0)]).is_err());
        assert!(example_fixture("log-graph", &[("a", 1.0)]).is_err());
    }

    #[test]
    fn poincare_circles_curvature() {
        let f = example_fixture("poincare-circles", &[("a", 1.0)]).unwrap();
        let prof = f.sigma1.profile().unwrap();
        for t in [-0.5, 0.0, 0.3] {
            let x = prof.point(t);
            let h = mean_curvature(&f.space, &f.sigma1, &x).unwrap();
            assert_relative_eq!(h, 0.5f64.sqrt(), epsilon = 1e-12);
        }
        // axis crossing of Σ₁ sits on the positive side
        let b = 2f64.sqrt() - 1.0;
        assert!(f.sigma1.level(&Point::from_vec(vec![b, 0.0])).abs() < 1e-15);
        assert!(f.clearance(&Point::zeros(2)) > 0.0);
    }

    #[test]
    fn slab_is_flat_and_separated() {
        let f = example_fixture("euclid-slab", &[("d", 2.0), ("dim", 3.0)]).unwrap();
        let x = Point::from_vec(vec![-1.0, 0.3, 4.0]);
        assert_eq!(mean_curvature(&f.space, &f.sigma1, &x).unwrap(), 0.0);
        assert_relative_eq!(f.sampled_separation(10.0, 50).unwrap(), 2.0);
        assert_relative_eq!(f.clearance(&Point::zeros(3)), 1.0);
    }

    #[test]
    fn log_graph_matches_closed_form() {
        let f = example_fixture("log-graph", &[]).unwrap();
        let x = 4f64.exp();
        let p = f.sigma1.profile().unwrap().point(x);
        let h = mean_curvature(&f.space, &f.sigma1, &p).unwrap();
        assert_relative_eq!(h, log_graph_mean_curvature(x), max_relative = 1e-12);
        assert!(h > 0.0);
        assert!(log_graph_mean_curvature(5.0) < 0.0);
    }

    #[test]
    fn revolution_formula_at_the_left_end() {
        let e2 = 2f64.exp();
        let expected = 2.0 / (e2 * (1.0 + 16.0 * e2 * e2).powf(1.5));
        assert_relative_eq!(revolution_mean_curvature(0.5), expected, max_relative = 1e-13);
        assert_relative_eq!(
            revolution_principal_mean_curvature(0.5),
            expected,
            max_relative = 1e-12
        );
        let f = example_fixture("revolution-r4", &[]).unwrap();
        let p = f.sigma1.profile().unwrap().point(0.7);
        let h = mean_curvature(&f.space, &f.sigma1, &p).unwrap();
        assert_relative_eq!(h, revolution_mean_curvature(0.7), max_relative = 1e-9);
    }
}
