use serde::Serialize;

use crate::conformal::field::ScalarField;
use crate::spaceform::SpaceForm;
use crate::{Error, Point, Result, Vector};

/// Vertices with `u` below this value are rejected by every length routine.
pub const U_FLOOR: f64 = 1e-12;

/// Polyline in model coordinates with `g`- and `g̃`-arclength tables.
#[derive(Debug, Clone)]
pub struct DiscreteCurve {
    pub space: SpaceForm,
    pub vertices: Vec<Point>,
    pub u_values: Vec<f64>,
    /// Per-segment `g`-length (model distance between consecutive vertices).
    pub g_lengths: Vec<f64>,
    /// Per-segment `g̃`-length, trapezoid rule on `ρ/u`.
    pub conformal_lengths: Vec<f64>,
    pub s: Vec<f64>,
    pub s_tilde: Vec<f64>,
}

/// One row of a curve dump.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub index: usize,
    pub coordinates: Vec<f64>,
    pub s: f64,
    pub s_tilde: f64,
    pub u: f64,
    pub kg_residual: f64,
}

impl DiscreteCurve {
    pub fn new(space: SpaceForm, u: &dyn ScalarField, vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidParameter(
                "a discrete curve needs at least three vertices".into(),
            ));
        }
        for v in &vertices {
            space.check_point(v)?;
        }
        let u_values: Vec<f64> = vertices.iter().map(|x| u.value(x)).collect();
        if let Some(&bad) = u_values.iter().find(|&&v| !(v > U_FLOOR)) {
            return Err(Error::NonPositiveFactor(bad));
        }
        let weights: Vec<f64> = vertices
            .iter()
            .zip(&u_values)
            .map(|(x, &uv)| space.conformal_factor(x) / uv)
            .collect();
        let mut g_lengths = Vec::with_capacity(vertices.len() - 1);
        let mut conformal_lengths = Vec::with_capacity(vertices.len() - 1);
        for (k, w) in vertices.windows(2).enumerate() {
            let chord = (&w[1] - &w[0]).norm();
            if chord == 0.0 {
                return Err(Error::DegenerateSegment(k));
            }
            g_lengths.push(space.distance(&w[0], &w[1])?);
            conformal_lengths.push(chord * 0.5 * (weights[k] + weights[k + 1]));
        }
        let s = cumulative(&g_lengths);
        let s_tilde = cumulative(&conformal_lengths);
        Ok(Self {
            space,
            vertices,
            u_values,
            g_lengths,
            conformal_lengths,
            s,
            s_tilde,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    /// `L`, the `g`-length.
    pub fn length(&self) -> f64 {
        *self.s.last().expect("nonempty")
    }

    /// `L̃`, the `g̃`-length.
    pub fn conformal_length(&self) -> f64 {
        *self.s_tilde.last().expect("nonempty")
    }

    pub fn p(&self) -> &Point {
        &self.vertices[0]
    }

    pub fn q(&self) -> &Point {
        self.vertices.last().expect("nonempty")
    }

    fn chord(&self, k: usize) -> f64 {
        (&self.vertices[k + 1] - &self.vertices[k]).norm()
    }

    /// Derivative of the coordinate curve with respect to chord length,
    /// second order on nonuniform spacing (one-sided at the ends).
    fn coordinate_velocity(&self, i: usize) -> Vector {
        let v = &self.vertices;
        let last = v.len() - 1;
        if i == 0 {
            let (h1, h2) = (self.chord(0), self.chord(1));
            &v[0] * (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) + &v[1] * ((h1 + h2) / (h1 * h2))
                - &v[2] * (h1 / (h2 * (h1 + h2)))
        } else if i == last {
            let (h1, h2) = (self.chord(last - 1), self.chord(last - 2));
            -(&v[last] * (-(2.0 * h1 + h2) / (h1 * (h1 + h2)))
                + &v[last - 1] * ((h1 + h2) / (h1 * h2))
                - &v[last - 2] * (h1 / (h2 * (h1 + h2))))
        } else {
            let (h1, h2) = (self.chord(i - 1), self.chord(i));
            ((&v[i + 1] - &v[i]) * (h1 * h1) + (&v[i] - &v[i - 1]) * (h2 * h2))
                / (h1 * h2 * (h1 + h2))
        }
    }

    /// Euclidean unit tangent at vertex `i`.
    pub fn euclidean_tangent(&self, i: usize) -> Vector {
        self.coordinate_velocity(i).normalize()
    }

    /// `g`-unit tangent `T` at vertex `i`.
    pub fn tangent(&self, i: usize) -> Vector {
        self.euclidean_tangent(i) / self.space.conformal_factor(&self.vertices[i])
    }

    /// Euclidean curvature vector at an interior vertex.
    pub fn euclidean_curvature(&self, i: usize) -> Vector {
        assert!(i > 0 && i + 1 < self.len(), "interior vertex expected");
        let v = &self.vertices;
        let (h1, h2) = (self.chord(i - 1), self.chord(i));
        let accel = ((&v[i + 1] - &v[i]) * h1 - (&v[i] - &v[i - 1]) * h2) * (2.0 / (h1 * h2 * (h1 + h2)));
        let vel = self.coordinate_velocity(i);
        let speed2 = vel.norm_squared();
        let t = &vel / speed2.sqrt();
        (&accel - &t * accel.dot(&t)) / speed2
    }

    /// `∇_T T` under `g` at an interior vertex, in coordinates.
    pub fn covariant_acceleration(&self, i: usize) -> Vector {
        let x = &self.vertices[i];
        let rho = self.space.conformal_factor(x);
        let k = self.euclidean_curvature(i);
        let t = self.euclidean_tangent(i);
        let f = self.space.log_factor_gradient(x);
        let f_perp = &f - &t * f.dot(&t);
        (k - f_perp) / (rho * rho)
    }
}

fn cumulative(lengths: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lengths.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for l in lengths {
        acc += l;
        out.push(acc);
    }
    out
}

/// `L̃ = ∫ ds/u` along the polyline (trapezoid rule; second order).
pub fn conformal_length(vertices: &[Point], u: &dyn ScalarField, space: &SpaceForm) -> Result<f64> {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for (k, x) in vertices.iter().enumerate() {
        space.check_point(x)?;
        let uv = u.value(x);
        if !(uv > U_FLOOR) {
            return Err(Error::NonPositiveFactor(uv));
        }
        let w = space.conformal_factor(x) / uv;
        if let Some(wp) = prev {
            total += (x - &vertices[k - 1]).norm() * 0.5 * (wp + w);
        }
        prev = Some(w);
    }
    Ok(total)
}

/// Resample a polyline to `count` vertices equally spaced in `g̃`-arclength
/// (linear interpolation along the input segments).
pub fn resample_uniform(
    space: &SpaceForm,
    u: &dyn ScalarField,
    vertices: &[Point],
    count: usize,
) -> Result<Vec<Point>> {
    let curve = DiscreteCurve::new(*space, u, vertices.to_vec())?;
    let total = curve.conformal_length();
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for i in 0..count {
        let target = total * i as f64 / (count - 1) as f64;
        while seg + 1 < curve.segments() && curve.s_tilde[seg + 1] < target {
            seg += 1;
        }
        let a = curve.s_tilde[seg];
        let b = curve.s_tilde[seg + 1];
        let t = ((target - a) / (b - a)).clamp(0.0, 1.0);
        out.push(&vertices[seg] + (&vertices[seg + 1] - &vertices[seg]) * t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::field::{ConstantField, RadialField};
    use crate::conformal::profile::RadialProfile;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn segment(a: Point, b: Point, n: usize) -> Vec<Point> {
        (0..n).map(|i| &a + (&b - &a) * (i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn unit_factor_gives_euclidean_length() {
        let s = SpaceForm::euclidean(2);
        let pts = segment(dvector![0.0, 0.0], dvector![3.0, 4.0], 11);
        let l = conformal_length(&pts, &ConstantField::new(2, 1.0), &s).unwrap();
        assert_relative_eq!(l, 5.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_factor_scales_length() {
        let s = SpaceForm::euclidean(2);
        let pts = segment(dvector![0.0, 0.0], dvector![4.0, 0.0], 5);
        let l = conformal_length(&pts, &ConstantField::new(2, 2.0), &s).unwrap();
        assert_relative_eq!(l, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn collapsed_factor_is_rejected() {
        let s = SpaceForm::euclidean(2);
        let u = RadialField::new(s, Point::zeros(2), RadialProfile::quartic(1.0).unwrap()).unwrap();
        let pts = segment(dvector![0.0, 0.0], dvector![1.0, 0.0], 5);
        assert!(matches!(
            conformal_length(&pts, &u, &s),
            Err(Error::NonPositiveFactor(_))
        ));
    }

    #[test]
    fn degenerate_segment_is_rejected() {
        let s = SpaceForm::euclidean(2);
        let u = ConstantField::new(2, 1.0);
        let pts = vec![dvector![0.0, 0.0], dvector![0.0, 0.0], dvector![1.0, 0.0]];
        assert_eq!(
            DiscreteCurve::new(s, &u, pts).unwrap_err(),
            Error::DegenerateSegment(0)
        );
    }

    #[test]
    fn circle_curvature_and_tangent() {
        let s = SpaceForm::euclidean(2);
        let u = ConstantField::new(2, 1.0);
        let radius = 2.0;
        let pts: Vec<Point> = (0..41)
            .map(|i| {
                let t = 0.05 * i as f64 + 0.01 * (i as f64 * 0.7).sin();
                dvector![radius * t.cos(), radius * t.sin()]
            })
            .collect();
        let c = DiscreteCurve::new(s, &u, pts.clone()).unwrap();
        for i in [1, 10, 20, 39] {
            let k = c.euclidean_curvature(i);
            assert_relative_eq!(k.norm(), 0.5, max_relative = 1e-3);
            assert!(k.dot(&pts[i]) < 0.0);
        }
        let t0 = c.euclidean_tangent(0);
        let theta = 0.0f64;
        assert!((t0.dot(&dvector![-theta.sin(), theta.cos()]) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn resampling_equalizes_conformal_segments() {
        let s = SpaceForm::euclidean(2);
        let u = RadialField::new(s, Point::zeros(2), RadialProfile::quartic(3.0).unwrap()).unwrap();
        let fine = segment(dvector![-1.0, 0.2], dvector![1.5, -0.3], 2001);
        let coarse = resample_uniform(&s, &u, &fine, 33).unwrap();
        let c = DiscreteCurve::new(s, &u, coarse).unwrap();
        let mean = c.conformal_length() / 32.0;
        for l in &c.conformal_lengths {
            assert_relative_eq!(*l, mean, max_relative = 1e-3);
        }
    }
}
