//! Flat space and the Poincaré ball model of constant curvature `−κ²`.
//!
//! Both models are conformally flat in their coordinates: `g = ρ(x)² δ` with
//! `ρ ≡ 1` for flat space and `ρ = 2 / (κ (1 − |x|²))` on the unit ball.
//! Everything downstream (Christoffel symbols, covariant Hessians, lengths)
//! is expressed through `ρ` and `∇ log ρ`.

use serde::Serialize;

use crate::{Error, Point, Result, Vector};

/// Ambient space of dimension `n + 1` and sectional curvature `−κ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceForm {
    dim: usize,
    kappa: f64,
}

/// Distance-to-a-center data at a point, together with the second
/// derivative of `r` along a supplied unit tangent.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialQuantities {
    pub r: f64,
    pub lambda: f64,
    pub lambda_prime: f64,
    /// `∇r` as a coordinate vector; unit length under `g`.
    pub grad_r: Vector,
    /// `Δr = n λ′/λ`.
    pub laplacian_r: f64,
    /// `r_T = g(∇r, T)`.
    pub r_t: f64,
    /// `Hess r (T, T) = (1 − r_T²) λ′/λ`.
    pub r_tt: f64,
}

impl SpaceForm {
    pub fn new(dim: usize, kappa: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "ambient dimension must be at least 2, got {dim}"
            )));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "curvature parameter must be finite and nonnegative, got {kappa}"
            )));
        }
        Ok(Self { dim, kappa })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(dim, 0.0).expect("valid euclidean dimension")
    }

    pub fn hyperbolic(dim: usize, kappa: f64) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(Error::InvalidParameter(
                "hyperbolic model needs kappa > 0".into(),
            ));
        }
        Self::new(dim, kappa)
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Hypersurface dimension `n`.
    pub fn n(&self) -> usize {
        self.dim - 1
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_flat(&self) -> bool {
        self.kappa == 0.0
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if !self.is_flat() {
            let norm = x.norm();
            if !(norm < 1.0) {
                return Err(Error::OutsideBall { norm });
            }
        }
        Ok(())
    }

    /// `ρ(x)` with `g = ρ² δ`.
    pub fn conformal_factor(&self, x: &Point) -> f64 {
        if self.is_flat() {
            1.0
        } else {
            2.0 / (self.kappa * (1.0 - x.norm_squared()))
        }
    }

    /// Coordinate gradient of `log ρ`.
    pub fn log_factor_gradient(&self, x: &Point) -> Vector {
        if self.is_flat() {
            Vector::zeros(self.dim)
        } else {
            x * (2.0 / (1.0 - x.norm_squared()))
        }
    }

    pub fn inner(&self, x: &Point, v: &Vector, w: &Vector) -> f64 {
        let rho = self.conformal_factor(x);
        rho * rho * v.dot(w)
    }

    pub fn norm(&self, x: &Point, v: &Vector) -> f64 {
        self.conformal_factor(x) * v.norm()
    }

    /// Contraction `Γ(v, w)^k = Γ^k_{ij} v^i w^j` of the Levi-Civita symbols.
    pub fn christoffel(&self, x: &Point, v: &Vector, w: &Vector) -> Vector {
        if self.is_flat() {
            return Vector::zeros(self.dim);
        }
        let f = self.log_factor_gradient(x);
        v * f.dot(w) + w * f.dot(v) - &f * v.dot(w)
    }

    /// Sectional curvature of every plane.
    pub fn sectional_curvature(&self) -> f64 {
        -self.kappa * self.kappa
    }

    /// `Ric(e, e)` for any `g`-unit vector `e`.
    pub fn ricci(&self) -> f64 {
        -(self.n() as f64) * self.kappa * self.kappa
    }

    /// `(λ(r), λ′(r))` with `λ = r` (flat) or `sinh(κr)/κ`.
    pub fn lambda(&self, r: f64) -> (f64, f64) {
        if self.is_flat() {
            (r, 1.0)
        } else {
            let k = self.kappa;
            ((k * r).sinh() / k, (k * r).cosh())
        }
    }

    /// `λ′/λ`, finite for every `r > 0`.
    pub fn lambda_ratio(&self, r: f64) -> f64 {
        if self.is_flat() {
            1.0 / r
        } else {
            let k = self.kappa;
            k / (k * r).tanh()
        }
    }

    /// Geodesic distance. On the ball this is `(2/κ) artanh` of the Möbius
    /// gauge `|(−p) ⊕ q|`.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        let diff = (p - q).norm_squared();
        if self.is_flat() {
            return Ok(diff.sqrt());
        }
        let gauge = mobius_gauge(p, q, diff);
        Ok(2.0 / self.kappa * gauge.atanh())
    }

    /// Isometry of the ball carrying `c` to the origin, applied to `x`.
    pub fn mobius_center(&self, c: &Point, x: &Point) -> Result<Point> {
        if self.is_flat() {
            return Err(Error::InvalidParameter(
                "Möbius centering needs kappa > 0; translate by x - c in flat space".into(),
            ));
        }
        self.check_point(c)?;
        self.check_point(x)?;
        Ok(mobius_add(&(-c), x))
    }

    /// Inverse of [`SpaceForm::mobius_center`]: carries the origin back to `c`.
    pub fn mobius_uncenter(&self, c: &Point, y: &Point) -> Result<Point> {
        if self.is_flat() {
            return Err(Error::InvalidParameter(
                "Möbius centering needs kappa > 0".into(),
            ));
        }
        self.check_point(c)?;
        self.check_point(y)?;
        Ok(mobius_add(c, y))
    }

    /// Coordinate differential `∂r` of `r = d(center, ·)` at `x ≠ center`.
    pub fn distance_differential(&self, center: &Point, x: &Point) -> Result<Vector> {
        self.check_point(center)?;
        self.check_point(x)?;
        let diff = x - center;
        let dist2 = diff.norm_squared();
        if dist2 == 0.0 {
            return Err(Error::AtCenter);
        }
        if self.is_flat() {
            return Ok(diff / dist2.sqrt());
        }
        // cosh(κr) = 1 + δ with δ = 2|x − c|² / ((1 − |x|²)(1 − |c|²))
        let ax = 1.0 - x.norm_squared();
        let ac = 1.0 - center.norm_squared();
        let delta = 2.0 * dist2 / (ax * ac);
        let d_delta = (&diff * (2.0 / ax) + x * (2.0 * dist2 / (ax * ax))) * (2.0 / ac);
        let sinh = (delta * (2.0 + delta)).sqrt();
        Ok(d_delta / (self.kappa * sinh))
    }

    /// `r`, `λ`, `∇r`, `Δr` and `Hess r (T, T)` for a `g`-unit tangent `T`.
    pub fn radial_quantities(
        &self,
        center: &Point,
        x: &Point,
        tangent: &Vector,
    ) -> Result<RadialQuantities> {
        let r = self.distance(center, x)?;
        if r == 0.0 {
            return Err(Error::AtCenter);
        }
        let t_norm = self.norm(x, tangent);
        if (t_norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "tangent must be g-unit, has norm {t_norm}"
            )));
        }
        let dr = self.distance_differential(center, x)?;
        let rho = self.conformal_factor(x);
        let grad_r = &dr / (rho * rho);
        let (lambda, lambda_prime) = self.lambda(r);
        let ratio = self.lambda_ratio(r);
        let r_t = dr.dot(tangent);
        Ok(RadialQuantities {
            r,
            lambda,
            lambda_prime,
            grad_r,
            laplacian_r: self.n() as f64 * ratio,
            r_t,
            r_tt: (1.0 - r_t * r_t) * ratio,
        })
    }

    /// `count ≥ 2` points along the model geodesic from `p` to `q`, equally
    /// spaced in `g`-length.
    pub fn geodesic_points(&self, p: &Point, q: &Point, count: usize) -> Result<Vec<Point>> {
        self.check_point(p)?;
        self.check_point(q)?;
        if count < 2 {
            return Err(Error::InvalidParameter("need at least two points".into()));
        }
        let steps = (count - 1) as f64;
        if self.is_flat() {
            return Ok((0..count)
                .map(|i| p + (q - p) * (i as f64 / steps))
                .collect());
        }
        let y = mobius_add(&(-p), q);
        let ny = y.norm();
        if ny == 0.0 {
            return Ok(vec![p.clone(); count]);
        }
        let half_dist = ny.atanh();
        Ok((0..count)
            .map(|i| {
                let t = i as f64 / steps;
                let yt = &y * ((t * half_dist).tanh() / ny);
                mobius_add(p, &yt)
            })
            .collect())
    }

    /// Point at model distance `r` from the origin in direction `dir`.
    pub fn point_at_distance(&self, dir: &Vector, r: f64) -> Point {
        let unit = dir / dir.norm();
        if self.is_flat() {
            unit * r
        } else {
            unit * (0.5 * self.kappa * r).tanh()
        }
    }

    /// Model distance from the origin.
    pub fn radius_of(&self, x: &Point) -> f64 {
        let e = x.norm();
        if self.is_flat() {
            e
        } else {
            2.0 / self.kappa * e.atanh()
        }
    }
}

/// Möbius addition on the unit ball.
pub fn mobius_add(a: &Vector, b: &Vector) -> Vector {
    let ab = a.dot(b);
    let a2 = a.norm_squared();
    let b2 = b.norm_squared();
    let num = a * (1.0 + 2.0 * ab + b2) + b * (1.0 - a2);
    num / (1.0 + 2.0 * ab + a2 * b2)
}

/// `|(−p) ⊕ q| = |p − q| / sqrt(|p − q|² + (1 − |p|²)(1 − |q|²))`.
fn mobius_gauge(p: &Point, q: &Point, diff2: f64) -> f64 {
    let denom = diff2 + (1.0 - p.norm_squared()) * (1.0 - q.norm_squared());
    (diff2 / denom).sqrt()
}
