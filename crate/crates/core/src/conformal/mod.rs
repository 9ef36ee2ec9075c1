//! Transformation laws for the conformal metric `g̃ = u⁻² g`.
//!
//! The background `g` is always one of the [`SpaceForm`] models, so every
//! quantity of `g` (Christoffel symbols, Ricci curvature, covariant Hessian of
//! `u`) is available in closed form. The laws here express the corresponding
//! quantities of `g̃` through those of `g` and the derivatives of `u`.

pub mod field;
pub mod oracle;
pub mod profile;

use serde::Serialize;

use crate::geodesic::curve::DiscreteCurve;
use crate::hypersurface::{self, Hypersurface};
use crate::spaceform::SpaceForm;
use crate::{Error, Matrix, Point, Result, Vector};

pub use field::{ConstantField, ExpQuadraticField, FieldJet, RadialField, ScalarField};
pub use profile::{ProfileKind, RadialProfile};

/// A vector field sampled at a point: its value and coordinate Jacobian
/// `jacobian[(i, j)] = ∂_j Y^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorJet {
    pub value: Vector,
    pub jacobian: Matrix,
}

impl VectorJet {
    pub fn new(value: Vector, jacobian: Matrix) -> Self {
        Self { value, jacobian }
    }

    /// A field with constant coordinate components.
    pub fn constant(value: Vector) -> Self {
        let d = value.len();
        Self {
            value,
            jacobian: Matrix::zeros(d, d),
        }
    }
}

fn positive_jet(space: &SpaceForm, u: &dyn ScalarField, x: &Point) -> Result<FieldJet> {
    space.check_point(x)?;
    let jet = FieldJet::at(space, u, x);
    if !(jet.value > 0.0) {
        return Err(Error::NonPositiveFactor(jet.value));
    }
    Ok(jet)
}

/// `∇_X Y` of the background metric.
pub fn background_connection(space: &SpaceForm, x: &Point, xv: &Vector, y: &VectorJet) -> Vector {
    &y.jacobian * xv + space.christoffel(x, xv, &y.value)
}

/// `∇̃_X Y = ∇_X Y − u⁻¹((X u) Y + (Y u) X − g(X, Y) ∇u)`.
pub fn conformal_connection(
    space: &SpaceForm,
    u: &dyn ScalarField,
    x: &Point,
    xv: &Vector,
    y: &VectorJet,
) -> Result<Vector> {
    let jet = positive_jet(space, u, x)?;
    let yv = &y.value;
    let base = background_connection(space, x, xv, y);
    let correction = yv * jet.derivative(xv) + xv * jet.derivative(yv)
        - &jet.gradient * space.inner(x, xv, yv);
    Ok(base - correction / jet.value)
}

/// `R̃(ẽ_i, ẽ_j, ẽ_j, ẽ_i) = u² K + u (u_ii + u_jj) − |∇u|²` for a
/// `g`-orthonormal pair `e_i, e_j`.
pub fn conformal_sectional(
    space: &SpaceForm,
    u: &dyn ScalarField,
    x: &Point,
    ei: &Vector,
    ej: &Vector,
) -> Result<f64> {
    let jet = positive_jet(space, u, x)?;
    let v = jet.value;
    Ok(v * v * space.sectional_curvature()
        + v * (jet.hessian_form(ei, ei) + jet.hessian_form(ej, ej))
        - jet.gradient_norm_sq())
}

/// `R̃ic(ẽ_j, ẽ_j) = u² Ric(e_j, e_j) + u Δu + (n − 1) u u_jj − n |∇u|²` for a
/// `g`-unit `e_j`.
pub fn conformal_ricci(
    space: &SpaceForm,
    u: &dyn ScalarField,
    x: &Point,
    ej: &Vector,
) -> Result<f64> {
    let jet = positive_jet(space, u, x)?;
    let n = space.n() as f64;
    let v = jet.value;
    Ok(v * v * space.ricci() + v * jet.laplacian() + (n - 1.0) * v * jet.hessian_form(ej, ej)
        - n * jet.gradient_norm_sq())
}

/// `H̃·ν̃ = u H·ν + n ∇_ν u` given the background scalar mean curvature and
/// the `g`-unit normal.
pub fn conformal_mean_curvature_from(
    space: &SpaceForm,
    u: &dyn ScalarField,
    x: &Point,
    mean_curvature: f64,
    normal: &Vector,
) -> Result<f64> {
    let jet = positive_jet(space, u, x)?;
    Ok(jet.value * mean_curvature + space.n() as f64 * jet.derivative(normal))
}

/// Mean curvature of `Σ` under `g̃ = u⁻² g` at a point of `Σ`.
pub fn conformal_mean_curvature(
    space: &SpaceForm,
    u: &dyn ScalarField,
    sigma: &Hypersurface,
    x: &Point,
) -> Result<f64> {
    let h = hypersurface::mean_curvature(space, sigma, x)?;
    let nu = hypersurface::unit_normal(space, sigma, x)?;
    conformal_mean_curvature_from(space, u, x, h, &nu)
}

/// `g`-orthonormal frame at a point and its `g̃`-orthonormal rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFrame {
    pub base: Vec<Vector>,
    pub scaled: Vec<Vector>,
}

impl ConformalFrame {
    /// Gram-Schmidt under `g`, starting from `leading` and completed by the
    /// coordinate basis. `u_value` is the conformal factor at `x`.
    pub fn new(space: &SpaceForm, x: &Point, u_value: f64, leading: &[Vector]) -> Result<Self> {
        space.check_point(x)?;
        if !(u_value > 0.0) {
            return Err(Error::NonPositiveFactor(u_value));
        }
        let d = space.dim();
        let rho = space.conformal_factor(x);
        let candidates = leading
            .iter()
            .cloned()
            .chain((0..d).map(|i| Vector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 })));
        let mut base: Vec<Vector> = Vec::with_capacity(d);
        for c in candidates {
            if base.len() == d {
                break;
            }
            let mut v = c;
            for _ in 0..2 {
                for b in &base {
                    let proj = rho * rho * b.dot(&v);
                    v -= b * proj;
                }
            }
            let norm = rho * v.norm();
            if norm > 1e-8 * rho {
                base.push(v / norm);
            }
        }
        if base.len() < d {
            return Err(Error::Singular("frame vectors are linearly dependent".into()));
        }
        let scaled = base.iter().map(|e| e * u_value).collect();
        Ok(Self { base, scaled })
    }

    /// Largest deviation of `⟨ẽ_i, ẽ_j⟩_g̃` from `δ_ij`.
    pub fn orthonormality_defect(&self, space: &SpaceForm, x: &Point, u_value: f64) -> f64 {
        let rho = space.conformal_factor(x);
        let scale = rho * rho / (u_value * u_value);
        let mut worst: f64 = 0.0;
        for (i, a) in self.scaled.iter().enumerate() {
            for (j, b) in self.scaled.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((scale * a.dot(b) - target).abs());
            }
        }
        worst
    }
}

/// Geodesic-equation data at one interior vertex.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicResidual {
    pub index: usize,
    /// `g`-norm of `u² ∇_T T − (∇_T u) u T + u ∇u`.
    pub equation_residual: f64,
    /// `k_g + u⁻¹ u_N`.
    pub curvature_residual: f64,
    pub k_g: f64,
    pub u_n: f64,
    /// Part of `∇u` orthogonal to `span{T, N}`, relative to `|∇u|`.
    pub off_plane: f64,
}

/// Below this `g`-norm the normal part of `∇u` counts as zero.
pub const NORMAL_GRADIENT_FLOOR: f64 = 1e-10;

/// Per-vertex residuals of the `g̃`-geodesic equation and of the identity
/// `k_g = −u⁻¹ u_N`, with `k_g` and `N` taken from the background metric.
pub fn geodesic_curvature_residual(
    u: &dyn ScalarField,
    curve: &DiscreteCurve,
) -> Result<Vec<GeodesicResidual>> {
    let space = curve.space;
    let mut out = Vec::with_capacity(curve.len().saturating_sub(2));
    for i in 1..curve.len() - 1 {
        let x = &curve.vertices[i];
        let jet = positive_jet(&space, u, x)?;
        let rho = jet.rho;
        let t = curve.tangent(i);
        let accel = curve.covariant_acceleration(i);
        let u_t = jet.derivative(&t);
        let v = jet.value;
        let eq = &accel * (v * v) - &t * (u_t * v) + &jet.gradient * v;
        let equation_residual = rho * eq.norm();

        let grad_perp = &jet.gradient - &t * u_t;
        let grad_perp_norm = rho * grad_perp.norm();
        let k_g = rho * accel.norm();
        let normal = if k_g > 1e-12 {
            Some(&accel / k_g)
        } else if grad_perp_norm >= NORMAL_GRADIENT_FLOOR {
            Some(&grad_perp / grad_perp_norm)
        } else {
            None
        };
        let (u_n, off_plane) = match &normal {
            Some(nv) => {
                let u_n = jet.derivative(nv);
                let rest = &grad_perp - nv * u_n;
                let full = jet.gradient_norm_sq().sqrt();
                let off = if full > 0.0 { rho * rest.norm() / full } else { 0.0 };
                (u_n, off)
            }
            None => (0.0, 0.0),
        };
        let u_n = if grad_perp_norm < NORMAL_GRADIENT_FLOOR { 0.0 } else { u_n };
        out.push(GeodesicResidual {
            index: i,
            equation_residual,
            curvature_residual: k_g + u_n / v,
            k_g,
            u_n,
            off_plane,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn identity_factor_leaves_connection_unchanged() {
        let space = SpaceForm::hyperbolic(3, 1.0).unwrap();
        let x = dvector![0.2, -0.1, 0.3];
        let xv = dvector![1.0, 0.5, -0.2];
        let y = VectorJet::new(dvector![0.3, 0.1, 0.7], dmatrix![1.0, 0.0, 0.2; 0.0, -1.0, 0.0; 0.5, 0.0, 0.3]);
        let one = ConstantField::new(3, 1.0);
        let got = conformal_connection(&space, &one, &x, &xv, &y).unwrap();
        assert_relative_eq!(got, background_connection(&space, &x, &xv, &y), epsilon = 1e-15);
    }

    #[test]
    fn exponential_factor_on_constant_fields() {
        let space = SpaceForm::euclidean(2);
        let u = ExpQuadraticField::new(1.0, dvector![1.0, 0.0], Matrix::zeros(2, 2)).unwrap();
        let e0 = dvector![1.0, 0.0];
        let got = conformal_connection(&space, &u, &dvector![0.4, -0.2], &e0, &VectorJet::constant(e0.clone()))
            .unwrap();
        assert_relative_eq!(got, -e0, epsilon = 1e-14);
    }

    #[test]
    fn constant_factor_keeps_flat_space_flat() {
        let space = SpaceForm::euclidean(3);
        let u = ConstantField::new(3, 2.5);
        let x = dvector![1.0, 2.0, 3.0];
        for j in 0..3 {
            let e = Vector::from_fn(3, |k, _| if k == j { 1.0 } else { 0.0 });
            assert_eq!(conformal_ricci(&space, &u, &x, &e).unwrap(), 0.0);
        }
    }

    #[test]
    fn poincare_factor_gives_constant_negative_ricci() {
        for dim in 2..=4 {
            let space = SpaceForm::euclidean(dim);
            let n = (dim - 1) as f64;
            let u =RadialField::new(space, Point::zeros(dim), RadialProfile::poincare_disk()).unwrap();
            let x = Vector::from_fn(dim, |k, _| 0.1 * (k as f64 + 1.0));
            let frame = ConformalFrame::new(&space, &x, u.value(&x), &[]).unwrap();
            for e in &frame.base {
                assert_relative_eq!(conformal_ricci(&space, &u, &x, e).unwrap(), -n, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn nonpositive_factor_is_an_error() {
        let space = SpaceForm::euclidean(2);
        let u = RadialField::new(space, Point::zeros(2), RadialProfile::quartic(1.0).unwrap()).unwrap();
        let e = dvector![1.0, 0.0];
        assert!(matches!(
            conformal_ricci(&space, &u, &dvector![2.0, 0.0], &e),
            Err(Error::NonPositiveFactor(_))
        ));
    }

    #[test]
    fn frame_is_orthonormal_for_conformal_metric() {
        let space = SpaceForm::hyperbolic(3, 1.5).unwrap();
        let x = dvector![0.3, 0.2, -0.5];
        let lead = dvector![1.0, 1.0, 0.0];
        let frame = ConformalFrame::new(&space, &x, 0.37, std::slice::from_ref(&lead)).unwrap();
        assert!(frame.orthonormality_defect(&space, &x, 0.37) < 1e-12);
        let first = &frame.base[0];
        assert_relative_eq!(first.normalize(), lead.normalize(), epsilon = 1e-14);
    }

    #[test]
    fn straight_segments_have_zero_residual() {
        let space = SpaceForm::euclidean(2);
        let pts: Vec<Point> = (0..21).map(|i| dvector![-0.5 + 0.05 * i as f64, 0.0]).collect();
        let one = ConstantField::new(2, 1.0);
        let curve = DiscreteCurve::new(space, &one, pts.clone()).unwrap();
        for r in geodesic_curvature_residual(&one, &curve).unwrap() {
            assert!(r.equation_residual < 1e-14 && r.curvature_residual.abs() < 1e-14);
        }
        let radial = RadialField::new(space, Point::zeros(2), RadialProfile::quartic(2.0).unwrap()).unwrap();
        let curve = DiscreteCurve::new(space, &radial, pts).unwrap();
        for r in geodesic_curvature_residual(&radial, &curve).unwrap() {
            assert!(r.equation_residual < 1e-14);
            assert_eq!(r.u_n, 0.0);
        }
    }
}
