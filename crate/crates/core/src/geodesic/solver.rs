//! Free-boundary minimization of the discrete `g̃`-energy.
//!
//! The unknowns are all vertices `x_0, …, x_N`. The energy is
//! `E = N Σ ℓ̃_k²` with the trapezoid segment length
//! `ℓ̃_k = |x_{k+1} − x_k| (a_k + a_{k+1}) / 2`, `a = ρ / u`. By Cauchy-Schwarz
//! `L̃² ≤ E` with equality for equal segments, so minimizing `E` minimizes the
//! discrete length and spreads the vertices uniformly in `s̃`.
//!
//! Each iteration solves the damped KKT system of `E` with the constraints
//! `F₁(x_0) = 0`, `F₂(x_N) = 0` (block tridiagonal, multipliers attached to
//! the end blocks), then projects the endpoints back onto the surfaces. A
//! step is accepted only if it lowers `E` and keeps `u` above the floor.

use std::sync::Arc;

use nalgebra::linalg::FullPivLU;
use nalgebra::Dyn;

use super::curve::{DiscreteCurve, U_FLOOR};
use crate::conformal::field::ScalarField;
use crate::hypersurface::{self, Hypersurface};
use crate::spaceform::SpaceForm;
use crate::{Error, Matrix, Point, Result, Vector};

/// Line searches reject vertices with `u` below this value.
pub const SEARCH_FLOOR: f64 = 1e-9;

#[derive(Clone)]
pub struct GeodesicProblem {
    pub space: SpaceForm,
    pub u: Arc<dyn ScalarField>,
    pub sigma1: Hypersurface,
    pub sigma2: Hypersurface,
    /// Initial polyline from `Σ₁` to `Σ₂` (at least two points).
    pub initial: Vec<Point>,
    /// Number of segments.
    pub segments: usize,
    /// Relative stationarity at which the iteration stops.
    pub tolerance: f64,
    /// Accepted as converged when no further descent is possible or the
    /// iteration cap is reached.
    pub fallback_tolerance: f64,
    pub max_iterations: usize,
}

impl std::fmt::Debug for GeodesicProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeodesicProblem")
            .field("space", &self.space)
            .field("sigma1", &self.sigma1)
            .field("sigma2", &self.sigma2)
            .field("segments", &self.segments)
            .finish()
    }
}

impl GeodesicProblem {
    pub fn new(
        space: SpaceForm,
        u: Arc<dyn ScalarField>,
        sigma1: Hypersurface,
        sigma2: Hypersurface,
        initial: Vec<Point>,
    ) -> Self {
        Self {
            space,
            u,
            sigma1,
            sigma2,
            initial,
            segments: 256,
            tolerance: 1e-11,
            fallback_tolerance: 1e-8,
            max_iterations: 400,
        }
    }

    pub fn segments(mut self, segments: usize) -> Self {
        self.segments = segments;
        self
    }

    pub fn tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }
}

#[derive(Debug, Clone)]
pub struct GeodesicSolution {
    pub curve: DiscreteCurve,
    /// The discretized starting curve (uniform in `s̃`).
    pub initial: DiscreteCurve,
    pub iterations: usize,
    pub stationarity: f64,
    pub multipliers: (f64, f64),
    /// `L̃` after every accepted step, starting with the initial curve.
    pub length_history: Vec<f64>,
    /// `|T − g(T, ν)ν|_g` at `p` and at `q`.
    pub endpoint_orthogonality: [f64; 2],
}

impl GeodesicSolution {
    /// `L`.
    pub fn length(&self) -> f64 {
        self.curve.length()
    }

    /// `L̃`.
    pub fn conformal_length(&self) -> f64 {
        self.curve.conformal_length()
    }
}

/// `a = ρ/u` with coordinate gradient and Hessian.
struct Weight {
    a: f64,
    grad: Vector,
    hess: Matrix,
}

fn weight(space: &SpaceForm, u: &dyn ScalarField, x: &Point) -> Weight {
    let d = x.len();
    let uv = u.value(x);
    let du = u.differential(x) / uv;
    let hu = u.coordinate_hessian(x) / uv - &du * du.transpose();
    let a = space.conformal_factor(x) / uv;
    let (gl, hl) = if space.is_flat() {
        (-du, -hu)
    } else {
        let s = 1.0 - x.norm_squared();
        let f = x * (2.0 / s);
        let hf = Matrix::identity(d, d) * (2.0 / s) + x * x.transpose() * (4.0 / (s * s));
        (f - du, hf - hu)
    };
    let hess = (&gl * gl.transpose() + hl) * a;
    Weight {
        a,
        grad: gl * a,
        hess,
    }
}

/// Energy, gradient blocks and Hessian blocks (diagonal and upper).
struct Model {
    energy: f64,
    grad: Vec<Vector>,
    diag: Vec<Matrix>,
    upper: Vec<Matrix>,
    weights: Vec<f64>,
    conformal_length: f64,
}

fn assemble(space: &SpaceForm, u: &dyn ScalarField, xs: &[Point], with_hessian: bool) -> Model {
    let n_seg = xs.len() - 1;
    let nf = n_seg as f64;
    let d = xs[0].len();
    let ws: Vec<Weight> = xs.iter().map(|x| weight(space, u, x)).collect();
    let mut grad = vec![Vector::zeros(d); xs.len()];
    let mut diag = if with_hessian {
        vec![Matrix::zeros(d, d); xs.len()]
    } else {
        Vec::new()
    };
    let mut upper = Vec::with_capacity(if with_hessian { n_seg } else { 0 });
    let mut energy = 0.0;
    let mut total = 0.0;
    for k in 0..n_seg {
        let delta = &xs[k + 1] - &xs[k];
        let c = delta.norm();
        let e = &delta / c;
        let (w0, w1) = (&ws[k], &ws[k + 1]);
        let m = 0.5 * (w0.a + w1.a);
        let l = c * m;
        total += l;
        energy += nf * l * l;
        let g0 = -&e * m + &w0.grad * (0.5 * c);
        let g1 = &e * m + &w1.grad * (0.5 * c);
        grad[k] += &g0 * (2.0 * nf * l);
        grad[k + 1] += &g1 * (2.0 * nf * l);
        if with_hessian {
            let p = (Matrix::identity(d, d) - &e * e.transpose()) / c;
            let h00 = &p * m - &e * w0.grad.transpose() * 0.5 - &w0.grad * e.transpose() * 0.5
                + &w0.hess * (0.5 * c);
            let h01 = -&p * m - &e * w1.grad.transpose() * 0.5 + &w0.grad * e.transpose() * 0.5;
            let h11 = &p * m + &e * w1.grad.transpose() * 0.5 + &w1.grad * e.transpose() * 0.5
                + &w1.hess * (0.5 * c);
            let s = 2.0 * nf;
            diag[k] += (&g0 * g0.transpose() + h00 * l) * s;
            diag[k + 1] += (&g1 * g1.transpose() + h11 * l) * s;
            upper.push((&g0 * g1.transpose() + h01 * l) * s);
        }
    }
    Model {
        energy,
        grad,
        diag,
        upper,
        weights: ws.iter().map(|w| w.a).collect(),
        conformal_length: total,
    }
}

fn least_squares_multiplier(g: &Vector, n: &Vector) -> f64 {
    g.dot(n) / n.norm_squared()
}

/// `max_k |∇_k E − μ ∇F| / (2 L̃ a_k)`.
fn stationarity(model: &Model, n1: &Vector, n2: &Vector) -> (f64, f64, f64) {
    let last = model.grad.len() - 1;
    let mu1 = least_squares_multiplier(&model.grad[0], n1);
    let mu2 = least_squares_multiplier(&model.grad[last], n2);
    let scale = 2.0 * model.conformal_length;
    let mut worst: f64 = 0.0;
    for (k, g) in model.grad.iter().enumerate() {
        let r = if k == 0 {
            g - n1 * mu1
        } else if k == last {
            g - n2 * mu2
        } else {
            g.clone()
        };
        worst = worst.max(r.norm() / (scale * model.weights[k]));
    }
    (worst, mu1, mu2)
}

/// Newton projection onto `{F = 0}` along `∇F`.
pub fn project(sigma: &Hypersurface, x: &Point) -> Point {
    let ls = sigma.level_set();
    let mut y = x.clone();
    let scale = x.norm().max(1.0);
    for _ in 0..50 {
        let f = ls.level(&y);
        if !f.is_finite() {
            break;
        }
        if f.abs() <= 1e-15 * scale {
            break;
        }
        let g = ls.gradient(&y);
        y -= &g * (f / g.norm_squared());
    }
    y
}

fn valid(space: &SpaceForm, u: &dyn ScalarField, xs: &[Point], s1: &Hypersurface, s2: &Hypersurface) -> std::result::Result<(), bool> {
    for x in xs {
        if x.iter().any(|v| !v.is_finite()) || space.check_point(x).is_err() {
            return Err(false);
        }
        if !(u.value(x) > SEARCH_FLOOR) {
            return Err(true);
        }
    }
    let last = xs.len() - 1;
    let scale0 = xs[0].norm().max(1.0);
    let scale1 = xs[last].norm().max(1.0);
    if !(s1.level(&xs[0]).abs() <= 1e-10 * scale0) || !(s2.level(&xs[last]).abs() <= 1e-10 * scale1) {
        return Err(false);
    }
    for w in xs.windows(2) {
        if (&w[1] - &w[0]).norm() == 0.0 {
            return Err(false);
        }
    }
    Ok(())
}

/// Piecewise-linear curve through `points`, evaluated at Euclidean arclength.
struct Polyline {
    points: Vec<Point>,
    arclength: Vec<f64>,
}

impl Polyline {
    fn new(points: Vec<Point>) -> Self {
        let mut arclength = vec![0.0];
        for w in points.windows(2) {
            let last = *arclength.last().expect("nonempty");
            arclength.push(last + (&w[1] - &w[0]).norm());
        }
        Self { points, arclength }
    }

    fn total(&self) -> f64 {
        *self.arclength.last().expect("nonempty")
    }

    fn at(&self, sigma: f64) -> Point {
        let k = match self
            .arclength
            .binary_search_by(|v| v.partial_cmp(&sigma).expect("finite arclength"))
        {
            Ok(k) => return self.points[k].clone(),
            Err(k) => k.clamp(1, self.points.len() - 1),
        };
        let (a, b) = (self.arclength[k - 1], self.arclength[k]);
        let t = ((sigma - a) / (b - a)).clamp(0.0, 1.0);
        &self.points[k - 1] + (&self.points[k] - &self.points[k - 1]) * t
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + (ys[k] - ys[k - 1]) * t
}

/// `segments + 1` points on the polyline through `initial` whose trapezoid
/// `g̃`-segment lengths are equal to near machine precision.
pub fn equalized_initial(
    space: &SpaceForm,
    u: &dyn ScalarField,
    initial: &[Point],
    segments: usize,
) -> Result<Vec<Point>> {
    if initial.len() < 2 || segments < 2 {
        return Err(Error::InvalidParameter(
            "initial curve needs two points and at least two segments".into(),
        ));
    }
    // densify so that the polyline is well resolved before resampling
    let per = (4 * segments / (initial.len() - 1)).max(8);
    let mut fine = Vec::new();
    for w in initial.windows(2) {
        for j in 0..per {
            fine.push(&w[0] + (&w[1] - &w[0]) * (j as f64 / per as f64));
        }
    }
    fine.push(initial.last().expect("nonempty").clone());
    let line = Polyline::new(fine);
    let fine_curve = DiscreteCurve::new(*space, u, line.points.clone())?;
    let total = fine_curve.conformal_length();
    let mut sigma: Vec<f64> = (0..=segments)
        .map(|i| interpolate(&fine_curve.s_tilde, &line.arclength, total * i as f64 / segments as f64))
        .collect();
    sigma[0] = 0.0;
    sigma[segments] = line.total();
    for _ in 0..30 {
        let pts: Vec<Point> = sigma.iter().map(|&s| line.at(s)).collect();
        let curve = DiscreteCurve::new(*space, u, pts.clone())?;
        let mean = curve.conformal_length() / segments as f64;
        let spread = curve
            .conformal_lengths
            .iter()
            .map(|l| (l / mean - 1.0).abs())
            .fold(0.0, f64::max);
        if spread < 1e-14 {
            return Ok(pts);
        }
        let targets: Vec<f64> = (0..=segments).map(|i| mean * i as f64).collect();
        let new: Vec<f64> = targets
            .iter()
            .map(|&t| interpolate(&curve.s_tilde, &sigma, t))
            .collect();
        sigma = new;
        sigma[0] = 0.0;
        sigma[segments] = line.total();
    }
    Ok(sigma.iter().map(|&s| line.at(s)).collect())
}

/// Solve the block-tridiagonal KKT system. End blocks carry the multiplier
/// as an extra unknown. Returns vertex increments and the new multipliers.
#[allow(clippy::too_many_arguments)]
fn solve_kkt(
    model: &Model,
    damping: f64,
    n1: &Vector,
    n2: &Vector,
    h1: &Matrix,
    h2: &Matrix,
    f1: f64,
    f2: f64,
) -> Option<(Vec<Vector>, f64, f64)> {
    let m = model.grad.len();
    let last = m - 1;
    let d = model.grad[0].len();
    let size = |k: usize| if k == 0 || k == last { d + 1 } else { d };
    let diag_block = |k: usize| -> Matrix {
        let mut h = model.diag[k].clone();
        if k == 0 {
            h -= h1;
        }
        if k == last {
            h -= h2;
        }
        for i in 0..d {
            h[(i, i)] += damping * model.diag[k][(i, i)].abs().max(f64::MIN_POSITIVE) + damping * 1e-12;
        }
        if k == 0 || k == last {
            let n = if k == 0 { n1 } else { n2 };
            let mut a = Matrix::zeros(d + 1, d + 1);
            a.view_mut((0, 0), (d, d)).copy_from(&h);
            for i in 0..d {
                a[(i, d)] = -n[i];
                a[(d, i)] = -n[i];
            }
            a
        } else {
            h
        }
    };
    let rhs_block = |k: usize| -> Vector {
        let mut r = Vector::zeros(size(k));
        r.rows_mut(0, d).copy_from(&(-&model.grad[k]));
        if k == 0 {
            r[d] = f1;
        } else if k == last {
            r[d] = f2;
        }
        r
    };
    let upper_block = |k: usize| -> Matrix {
        let mut b = Matrix::zeros(size(k), size(k + 1));
        b.view_mut((0, 0), (d, d)).copy_from(&model.upper[k]);
        b
    };

    let mut lus: Vec<FullPivLU<f64, Dyn, Dyn>> = Vec::with_capacity(m);
    let mut ws: Vec<Matrix> = Vec::with_capacity(m);
    let mut vs: Vec<Vector> = Vec::with_capacity(m);
    let mut s = diag_block(0);
    let mut r = rhs_block(0);
    for k in 0..m {
        let lu = s.clone().full_piv_lu();
        if !lu.is_invertible() {
            return None;
        }
        let v = lu.solve(&r)?;
        if k < last {
            let b = upper_block(k);
            let w = lu.solve(&b)?;
            s = diag_block(k + 1) - b.transpose() * &w;
            r = rhs_block(k + 1) - b.transpose() * &v;
            ws.push(w);
        }
        vs.push(v);
        lus.push(lu);
    }
    let mut z = vec![Vector::zeros(0); m];
    z[last] = vs[last].clone();
    for k in (0..last).rev() {
        z[k] = &vs[k] - &ws[k] * &z[k + 1];
    }
    let mu1 = z[0][d];
    let mu2 = z[last][d];
    let steps = z.iter().map(|v| v.rows(0, d).into_owned()).collect();
    Some((steps, mu1, mu2))
}

fn orthogonality(space: &SpaceForm, sigma: &Hypersurface, curve: &DiscreteCurve, end: usize) -> Result<f64> {
    let x = &curve.vertices[end];
    let nu = hypersurface::unit_normal(space, sigma, x)?;
    let t = curve.tangent(end);
    let c = space.inner(x, &t, &nu);
    Ok(space.norm(x, &(&t - &nu * c)))
}

/// Minimize the discrete `g̃`-energy with endpoints sliding on `Σ₁`, `Σ₂`.
pub fn minimize(problem: &GeodesicProblem) -> Result<GeodesicSolution> {
    let space = problem.space;
    let u = problem.u.as_ref();
    let (s1, s2) = (&problem.sigma1, &problem.sigma2);
    if problem.initial.len() < 2 {
        return Err(Error::InvalidParameter("initial curve needs two points".into()));
    }
    let mut start = problem.initial.clone();
    let last_in = start.len() - 1;
    start[0] = project(s1, &start[0]);
    start[last_in] = project(s2, &start[last_in]);
    for (end, sigma) in [(0, s1), (last_in, s2)] {
        let v = u.value(&start[end]);
        if !(v > U_FLOOR) {
            return Err(Error::Hypothesis(format!(
                "u vanishes at the initial endpoint on {}",
                sigma.name()
            )));
        }
    }
    let mut xs = equalized_initial(&space, u, &start, problem.segments)?;
    let initial = DiscreteCurve::new(space, u, xs.clone())?;
    let last = xs.len() - 1;
    let mut history = vec![initial.conformal_length()];
    let mut lambda = 1e-8;
    let mut iterations = 0;
    let mut collapsed_attempts = 0usize;
    loop {
        let model = assemble(&space, u, &xs, true);
        let n1 = s1.level_set().gradient(&xs[0]);
        let n2 = s2.level_set().gradient(&xs[last]);
        let (stat, mu1, mu2) = stationarity(&model, &n1, &n2);
        if stat <= problem.tolerance {
            return finish(problem, xs, initial, iterations, stat, (mu1, mu2), history);
        }
        if iterations >= problem.max_iterations {
            // stalled at roundoff after tiny non-increasing steps
            if stat <= problem.fallback_tolerance {
                return finish(problem, xs, initial, iterations, stat, (mu1, mu2), history);
            }
            return Err(Error::NonConvergence {
                iterations,
                residual: stat,
            });
        }
        iterations += 1;
        let h1 = s1.level_set().hessian(&xs[0]) * mu1;
        let h2 = s2.level_set().hessian(&xs[last]) * mu2;
        let f1 = s1.level(&xs[0]);
        let f2 = s2.level(&xs[last]);
        let mut accepted = false;
        while lambda <= 1e12 {
            let Some((steps, _, _)) = solve_kkt(&model, lambda, &n1, &n2, &h1, &h2, f1, f2) else {
                lambda *= 10.0;
                continue;
            };
            for alpha in [1.0, 0.5, 0.25] {
                let mut trial: Vec<Point> = xs
                    .iter()
                    .zip(&steps)
                    .map(|(x, dx)| x + dx * alpha)
                    .collect();
                trial[0] = project(s1, &trial[0]);
                trial[last] = project(s2, &trial[last]);
                match valid(&space, u, &trial, s1, s2) {
                    Ok(()) => {}
                    Err(hit_floor) => {
                        if hit_floor {
                            collapsed_attempts += 1;
                        }
                        continue;
                    }
                }
                let e = assemble(&space, u, &trial, false);
                // near stationarity energy changes fall below its rounding error
                if e.energy <= model.energy + 8.0 * f64::EPSILON * model.energy.abs() {
                    history.push(e.conformal_length);
                    xs = trial;
                    accepted = true;
                    break;
                }
            }
            if accepted {
                lambda = (lambda / 4.0).max(1e-14);
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            if stat <= problem.fallback_tolerance {
                return finish(problem, xs, initial, iterations, stat, (mu1, mu2), history);
            }
            if collapsed_attempts > 0 {
                return Err(Error::CurveCollapsed { floor: SEARCH_FLOOR });
            }
            return Err(Error::NonConvergence {
                iterations,
                residual: stat,
            });
        }
    }
}

fn finish(
    problem: &GeodesicProblem,
    xs: Vec<Point>,
    initial: DiscreteCurve,
    iterations: usize,
    stationarity: f64,
    multipliers: (f64, f64),
    length_history: Vec<f64>,
) -> Result<GeodesicSolution> {
    let space = problem.space;
    let curve = DiscreteCurve::new(space, problem.u.as_ref(), xs)?;
    let last = curve.len() - 1;
    let endpoint_orthogonality = [
        orthogonality(&space, &problem.sigma1, &curve, 0)?,
        orthogonality(&space, &problem.sigma2, &curve, last)?,
    ];
    Ok(GeodesicSolution {
        curve,
        initial,
        iterations,
        stationarity,
        multipliers,
        length_history,
        endpoint_orthogonality,
    })
}
