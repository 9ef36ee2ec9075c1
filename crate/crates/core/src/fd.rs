//! Finite-difference geometry of an arbitrary coordinate metric `G(x)`.
//!
//! Nothing here uses the closed forms of the other modules: curvature comes
//! from central differences of the metric matrix only. The conformal laws,
//! mean curvatures and second variations are checked against these routines.

use crate::conformal::field::ScalarField;
use crate::spaceform::SpaceForm;
use crate::{Matrix, Point, Vector};

/// Coordinate metric as a matrix-valued function.
pub type CoordinateMetric<'a> = &'a (dyn Fn(&Point) -> Matrix + Sync);

/// Steps for first and second (nested) differences, as multiples of a local
/// length scale.
#[derive(Debug, Clone, Copy)]
pub struct Steps {
    pub inner: f64,
    pub outer: f64,
}

impl Steps {
    pub const DEFAULT: Steps = Steps {
        inner: 1e-5,
        outer: 1e-4,
    };

    pub fn scaled(self, scale: f64) -> Self {
        Self {
            inner: self.inner * scale,
            outer: self.outer * scale,
        }
    }
}

/// `G = ρ² u⁻² δ`, the coordinate matrix of `u⁻² g` on a model.
pub fn conformal_metric<'a>(
    space: &'a SpaceForm,
    u: &'a dyn ScalarField,
) -> impl Fn(&Point) -> Matrix + Sync + 'a {
    move |x: &Point| {
        let d = x.len();
        let w = space.conformal_factor(x) / u.value(x);
        Matrix::identity(d, d) * (w * w)
    }
}

fn shifted(x: &Point, k: usize, h: f64) -> Point {
    let mut y = x.clone();
    y[k] += h;
    y
}

/// `∂_k G` by central differences.
fn metric_derivatives(metric: CoordinateMetric, x: &Point, h: f64) -> Vec<Matrix> {
    (0..x.len())
        .map(|k| (metric(&shifted(x, k, h)) - metric(&shifted(x, k, -h))) / (2.0 * h))
        .collect()
}

/// `Γ^k_ij`, returned as `gamma[k][(i, j)]`.
pub fn christoffel(metric: CoordinateMetric, x: &Point, h: f64) -> Vec<Matrix> {
    let d = x.len();
    let inv = metric(x).try_inverse().expect("metric is invertible");
    let dg = metric_derivatives(metric, x, h);
    // lowered symbols Γ_lij = ½(∂_i G_lj + ∂_j G_li − ∂_l G_ij)
    let lowered: Vec<Matrix> = (0..d)
        .map(|l| Matrix::from_fn(d, d, |i, j| 0.5 * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)])))
        .collect();
    (0..d)
        .map(|k| {
            let mut m = Matrix::zeros(d, d);
            for (l, low) in lowered.iter().enumerate() {
                m += low * inv[(k, l)];
            }
            m
        })
        .collect()
}

/// `∇_X Y = DY·X + Γ(X, Y)` for a field `Y` with coordinate Jacobian `dy`.
pub fn connection(metric: CoordinateMetric, x: &Point, xv: &Vector, y: &Vector, dy: &Matrix, h: f64) -> Vector {
    let gamma = christoffel(metric, x, h);
    let mut out = dy * xv;
    for (k, g) in gamma.iter().enumerate() {
        out[k] += xv.dot(&(g * y));
    }
    out
}

/// Riemann tensor `R^a_bcd` stored at `[((a * d + b) * d + c) * d + e]`,
/// with `R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb`.
pub struct Riemann {
    dim: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn at(metric: CoordinateMetric, x: &Point, steps: Steps) -> Self {
        let d = x.len();
        let gamma = christoffel(metric, x, steps.inner);
        let dgamma: Vec<Vec<Matrix>> = (0..d)
            .map(|c| {
                let plus = christoffel(metric, &shifted(x, c, steps.outer), steps.inner);
                let minus = christoffel(metric, &shifted(x, c, -steps.outer), steps.inner);
                plus.iter()
                    .zip(&minus)
                    .map(|(p, m)| (p - m) / (2.0 * steps.outer))
                    .collect()
            })
            .collect();
        let mut data = vec![0.0; d * d * d * d];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let mut v = dgamma[c][a][(e, b)] - dgamma[e][a][(c, b)];
                        for f in 0..d {
                            v += gamma[a][(c, f)] * gamma[f][(e, b)] - gamma[a][(e, f)] * gamma[f][(c, b)];
                        }
                        data[((a * d + b) * d + c) * d + e] = v;
                    }
                }
            }
        }
        Self { dim: d, data }
    }

    pub fn get(&self, a: usize, b: usize, c: usize, e: usize) -> f64 {
        let d = self.dim;
        self.data[((a * d + b) * d + c) * d + e]
    }

    /// `R(v, w) z` as a coordinate vector.
    pub fn apply(&self, v: &Vector, w: &Vector, z: &Vector) -> Vector {
        let d = self.dim;
        Vector::from_fn(d, |a, _| {
            let mut s = 0.0;
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        s += self.get(a, b, c, e) * z[b] * v[c] * w[e];
                    }
                }
            }
            s
        })
    }

    /// `Ric(v, v)`.
    pub fn ricci(&self, v: &Vector) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                for e in 0..d {
                    s += self.get(a, b, a, e) * v[b] * v[e];
                }
            }
        }
        s
    }
}

/// Sectional curvature of the plane spanned by `v`, `w`.
pub fn sectional(metric: CoordinateMetric, x: &Point, v: &Vector, w: &Vector, steps: Steps) -> f64 {
    let g = metric(x);
    let riem = Riemann::at(metric, x, steps);
    let rvw = riem.apply(v, w, w);
    let num = v.dot(&(&g * rvw));
    let gvv = v.dot(&(&g * v));
    let gww = w.dot(&(&g * w));
    let gvw = v.dot(&(&g * w));
    num / (gvv * gww - gvw * gvw)
}

/// `Ric(v, v) / G(v, v)`.
pub fn ricci(metric: CoordinateMetric, x: &Point, v: &Vector, steps: Steps) -> f64 {
    let g = metric(x);
    Riemann::at(metric, x, steps).ricci(v) / v.dot(&(&g * v))
}

/// Mean curvature `−div_G ν` of the level set of `level` through `x`, with
/// `ν = G⁻¹∇F / |∇F|_{G⁻¹}` pointing to increasing `F`.
pub fn mean_curvature(
    metric: CoordinateMetric,
    level: &(dyn Fn(&Point) -> f64 + Sync),
    x: &Point,
    steps: Steps,
) -> f64 {
    let d = x.len();
    let field = |y: &Point| -> (Vector, f64) {
        let grad = Vector::from_fn(d, |k, _| {
            (level(&shifted(y, k, steps.inner)) - level(&shifted(y, k, -steps.inner))) / (2.0 * steps.inner)
        });
        let g = metric(y);
        let inv = g.clone().try_inverse().expect("metric is invertible");
        let raised = &inv * &grad;
        let len = grad.dot(&raised).sqrt();
        (raised / len, g.determinant().sqrt())
    };
    let mut div = 0.0;
    for k in 0..d {
        let (vp, sp) = field(&shifted(x, k, steps.outer));
        let (vm, sm) = field(&shifted(x, k, -steps.outer));
        div += (sp * vp[k] - sm * vm[k]) / (2.0 * steps.outer);
    }
    let (_, s0) = field(x);
    -div / s0
}

/// Second derivative at `0` of `f` by central differences at `ε` and `ε/2`
/// combined with one Richardson step.
pub fn second_derivative(f: &dyn Fn(f64) -> f64, eps: f64) -> f64 {
    let f0 = f(0.0);
    let coarse = (f(eps) + f(-eps) - 2.0 * f0) / (eps * eps);
    let h = 0.5 * eps;
    let fine = (f(h) + f(-h) - 2.0 * f0) / (h * h);
    (4.0 * fine - coarse) / 3.0
}
