//! Scalar fields with analytic first and second coordinate derivatives.

use crate::conformal::profile::RadialProfile;
use crate::spaceform::SpaceForm;
use crate::{Error, Matrix, Point, Result, Vector};

/// A smooth scalar field on model coordinates.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Point) -> f64;
    /// Coordinate partials `∂_i u`.
    fn differential(&self, x: &Point) -> Vector;
    /// Coordinate second partials `∂_i ∂_j u`.
    fn coordinate_hessian(&self, x: &Point) -> Matrix;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantField {
    dim: usize,
    value: f64,
}

impl ConstantField {
    pub fn new(dim: usize, value: f64) -> Self {
        Self { dim, value }
    }
}

impl ScalarField for ConstantField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _: &Point) -> f64 {
        self.value
    }
    fn differential(&self, _: &Point) -> Vector {
        Vector::zeros(self.dim)
    }
    fn coordinate_hessian(&self, _: &Point) -> Matrix {
        Matrix::zeros(self.dim, self.dim)
    }
}

/// `u(x) = c · exp(b·x + ½ xᵀ A x)` with symmetric `A`; positive everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpQuadraticField {
    pub scale: f64,
    pub linear: Vector,
    pub quadratic: Matrix,
}

impl ExpQuadraticField {
    pub fn new(scale: f64, linear: Vector, quadratic: Matrix) -> Result<Self> {
        if scale <= 0.0 {
            return Err(Error::NonPositiveFactor(scale));
        }
        let sym = (&quadratic + quadratic.transpose()) * 0.5;
        Ok(Self {
            scale,
            linear,
            quadratic: sym,
        })
    }

    fn exponent_gradient(&self, x: &Point) -> Vector {
        &self.linear + &self.quadratic * x
    }
}

impl ScalarField for ExpQuadraticField {
    fn dim(&self) -> usize {
        self.linear.len()
    }
    fn value(&self, x: &Point) -> f64 {
        self.scale * (self.linear.dot(x) + 0.5 * x.dot(&(&self.quadratic * x))).exp()
    }
    fn differential(&self, x: &Point) -> Vector {
        self.exponent_gradient(x) * self.value(x)
    }
    fn coordinate_hessian(&self, x: &Point) -> Matrix {
        let g = self.exponent_gradient(x);
        (&g * g.transpose() + &self.quadratic) * self.value(x)
    }
}

/// `u(x) = profile(d(center, x))` on a space form.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub profile: RadialProfile,
    pub center: Point,
    pub space: SpaceForm,
}

impl RadialField {
    pub fn new(space: SpaceForm, center: Point, profile: RadialProfile) -> Result<Self> {
        space.check_point(&center)?;
        Ok(Self {
            profile,
            center,
            space,
        })
    }

    pub fn radius_at(&self, x: &Point) -> f64 {
        self.space
            .distance(&self.center, x)
            .unwrap_or(f64::INFINITY)
    }

    /// `u′(r) λ′(r)/λ(r)`, extended continuously to `r = 0`.
    fn d1_lambda_ratio(&self, r: f64) -> f64 {
        let (lambda, lambda_prime) = self.space.lambda(r);
        let r_over_lambda = if r == 0.0 { 1.0 } else { r / lambda };
        self.profile.d1_over_r(r) * r_over_lambda * lambda_prime
    }
}

impl ScalarField for RadialField {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn value(&self, x: &Point) -> f64 {
        self.profile.value(self.radius_at(x))
    }

    fn differential(&self, x: &Point) -> Vector {
        match self.space.distance_differential(&self.center, x) {
            Ok(dr) => dr * self.profile.d1(self.radius_at(x)),
            Err(_) => Vector::zeros(self.dim()),
        }
    }

    fn coordinate_hessian(&self, x: &Point) -> Matrix {
        let d = self.dim();
        let r = self.radius_at(x);
        let rho = self.space.conformal_factor(x);
        let g = Matrix::identity(d, d) * (rho * rho);
        let tangential = self.d1_lambda_ratio(r);
        let dr = match self.space.distance_differential(&self.center, x) {
            Ok(dr) => dr,
            Err(_) => return g * tangential,
        };
        let d1 = self.profile.d1(r);
        let d2 = self.profile.d2(r);
        let f = self.space.log_factor_gradient(x);
        let drdr = &dr * dr.transpose();
        // covariant part: u″ dr⊗dr + u′(λ′/λ)(g − dr⊗dr); plus Γ^k_ij ∂_k u
        let covariant = &drdr * d2 + (g - &drdr) * tangential;
        let gamma = (&dr * f.transpose() + &f * dr.transpose()
            - Matrix::identity(d, d) * f.dot(&dr))
            * d1;
        covariant + gamma
    }
}

/// Value, `g`-gradient and covariant Hessian of a field at a point.
#[derive(Debug, Clone)]
pub struct FieldJet {
    pub value: f64,
    pub differential: Vector,
    /// `∇u = g⁻¹ du` in coordinates.
    pub gradient: Vector,
    /// `∇²u` as a coordinate bilinear form.
    pub hessian: Matrix,
    pub rho: f64,
}

impl FieldJet {
    pub fn at(space: &SpaceForm, u: &dyn ScalarField, x: &Point) -> Self {
        let value = u.value(x);
        let du = u.differential(x);
        let rho = space.conformal_factor(x);
        let mut hessian = u.coordinate_hessian(x);
        if !space.is_flat() {
            let f = space.log_factor_gradient(x);
            let d = x.len();
            hessian -= &du * f.transpose() + &f * du.transpose()
                - Matrix::identity(d, d) * f.dot(&du);
        }
        let gradient = &du / (rho * rho);
        Self {
            value,
            differential: du,
            gradient,
            hessian,
            rho,
        }
    }

    /// `du(v)`.
    pub fn derivative(&self, v: &Vector) -> f64 {
        self.differential.dot(v)
    }

    pub fn hessian_form(&self, v: &Vector, w: &Vector) -> f64 {
        v.dot(&(&self.hessian * w))
    }

    /// `|∇u|²_g`.
    pub fn gradient_norm_sq(&self) -> f64 {
        self.differential.norm_squared() / (self.rho * self.rho)
    }

    /// `Δu = tr_g ∇²u`.
    pub fn laplacian(&self) -> f64 {
        self.hessian.trace() / (self.rho * self.rho)
    }
}
