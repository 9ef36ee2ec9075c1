//! Traced second variation of `g̃`-length along a free-boundary geodesic.
//!
//! For `g̃`-parallel normal fields `φ ẽ_i` the trace of the index form splits,
//! after writing `g̃` quantities through `g` and `u`, into
//!
//! ```text
//! tr I = −u(p)H₁ − u(q)H₂ + ∫ u²(nφ′² − Ric(T,T)φ²) ds̃ + ∫ nφφ′ u u_T ds̃
//!        − ∫ ½(1 − φ²) u J₁ ds̃ + ∫ φ² u J₂ ds̃
//! ```
//!
//! with `J₁ = (n u_N² − n u u_TT)/u` and `J₂ = (n u_T² − (Δu − u_TT)u)/u`.
//! Here `φ` is a function of the `g`-arclength `s` and `φ′ = dφ/ds`.

use std::time::Instant;

use serde::Serialize;

use crate::conformal::field::{FieldJet, ScalarField};
use crate::conformal::geodesic_curvature_residual;
use crate::conformal::profile::RadialProfile;
use crate::geodesic::curve::DiscreteCurve;
use crate::geodesic::FixtureGeodesic;
use crate::hypersurface::{self, RegionFixture};
use crate::quadrature::{adaptive_simpson, trapezoid, trapezoid_richardson};
use crate::report::{GridMeta, VerificationReport};
use crate::spaceform::SpaceForm;
use crate::{Error, Result};

/// Test function `φ` on `[0, L]` with `φ(0) = φ(L) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    One,
    /// `φ(s) = (e^s + e^{L−s}) / (1 + e^L)`.
    Cosh { length: f64 },
}

impl TestFunction {
    pub fn cosh(length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "test function length must be positive, got {length}"
            )));
        }
        Ok(Self::Cosh { length })
    }

    pub fn phi(&self, s: f64) -> f64 {
        match *self {
            Self::One => 1.0,
            Self::Cosh { length } => ((s - length).exp() + (-s).exp()) / (1.0 + (-length).exp()),
        }
    }

    pub fn dphi(&self, s: f64) -> f64 {
        match *self {
            Self::One => 0.0,
            Self::Cosh { length } => ((s - length).exp() - (-s).exp()) / (1.0 + (-length).exp()),
        }
    }

    /// `ψ = φ φ′`.
    pub fn psi(&self, s: f64) -> f64 {
        self.phi(s) * self.dphi(s)
    }

    /// `ψ′` from its own closed form `2 (e^{2s} + e^{2L−2s}) / (1 + e^L)²`.
    pub fn dpsi(&self, s: f64) -> f64 {
        match *self {
            Self::One => 0.0,
            Self::Cosh { length } => {
                let denom = (1.0 + (-length).exp()).powi(2);
                2.0 * ((2.0 * (s - length)).exp() + (-2.0 * s).exp()) / denom
            }
        }
    }

    /// `∫₀^L φ² ds = (e^{2L} − 1 + 2L e^L) / (1 + e^L)²`.
    pub fn square_integral(&self, length: f64) -> f64 {
        match *self {
            Self::One => length,
            Self::Cosh { length } => {
                let em = (-length).exp();
                (1.0 - em * em + 2.0 * length * em) / (1.0 + em).powi(2)
            }
        }
    }
}

/// Ambient geometry for the `J` quantities (`κ = 1` for the hyperbolic case).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

impl Geometry {
    pub fn space(&self, dim: usize) -> SpaceForm {
        match self {
            Self::Euclidean => SpaceForm::euclidean(dim),
            Self::Hyperbolic => SpaceForm::hyperbolic(dim, 1.0).expect("unit curvature"),
        }
    }
}

/// `coth r − 1/r`, by its series below `r = 1e-4`.
pub fn coth_minus_inverse(r: f64) -> f64 {
    if r.abs() < 1e-4 {
        let r2 = r * r;
        r * (1.0 / 3.0 - r2 / 45.0 + 2.0 * r2 * r2 / 945.0)
    } else {
        1.0 / r.tanh() - 1.0 / r
    }
}

/// Inputs for the radial `J` values.
#[derive(Debug, Clone)]
pub struct JInputs<'a> {
    pub geometry: Geometry,
    pub n: usize,
    pub profile: &'a RadialProfile,
    pub r: f64,
    /// `r_T ∈ [−1, 1]`; `r_N² = 1 − r_T²`.
    pub r_t: f64,
}

/// `(J₁, J₂)` for a radial `u` with
/// `J₁ = n(u′²/u · r_N² − u′λ′/λ) − n(u′/λ)′λ · r_T²` and
/// `J₂ = n(u′²/u · r_T² − u′λ′/λ) − (u′/λ)′λ · r_N²`.
pub fn j_values(inputs: &JInputs) -> Result<(f64, f64)> {
    let JInputs {
        geometry,
        n,
        profile,
        r,
        r_t,
    } = *inputs;
    let radius = profile.radius();
    if !(r >= 0.0) || r > radius {
        return Err(Error::InvalidParameter(format!("r = {r} outside [0, {radius}]")));
    }
    if !(r_t.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("r_T = {r_t} outside [-1, 1]")));
    }
    let n = n as f64;
    let rt2 = r_t * r_t;
    let rn2 = 1.0 - rt2;
    let sq = profile.d1_sq_over_value(r)?;
    let d1_over_r = profile.d1_over_r(r);
    let excess = profile.curvature_excess(r);
    // u′λ′/λ and (u′/λ)′λ = u″ − u′λ′/λ
    let (tangential, radial) = match geometry {
        Geometry::Euclidean => (d1_over_r, excess),
        Geometry::Hyperbolic => {
            let d1 = profile.d1(r);
            let c = coth_minus_inverse(r);
            (d1_over_r + d1 * c, excess - d1 * c)
        }
    };
    let j1 = n * (sq * rn2 - tangential) - n * radial * rt2;
    let j2 = n * (sq * rt2 - tangential) - radial * rn2;
    Ok((j1, j2))
}

/// `(J₁, J₂)` from a general field at a point with a `g`-unit tangent:
/// `J₁ = (n u_N² − n u u_TT)/u`, `J₂ = (n u_T² − (Δu − u_TT)u)/u`, with
/// `u_N² = |∇u|² − u_T²`.
pub fn j_values_direct(
    space: &SpaceForm,
    u: &dyn ScalarField,
    x: &crate::Point,
    tangent: &crate::Vector,
) -> Result<(f64, f64)> {
    let jet = FieldJet::at(space, u, x);
    if !(jet.value > 0.0) {
        return Err(Error::NonPositiveFactor(jet.value));
    }
    let n = space.n() as f64;
    let ut = jet.derivative(tangent);
    let utt = jet.hessian_form(tangent, tangent);
    let un2 = (jet.gradient_norm_sq() - ut * ut).max(0.0);
    let v = jet.value;
    Ok((
        (n * un2 - n * v * utt) / v,
        (n * ut * ut - (jet.laplacian() - utt) * v) / v,
    ))
}

/// Grid certificate for the bounds on `J₁`, `J₂` over `r ∈ [0, R]`,
/// `r_T ∈ [−1, 1]`: `J₂ ≤ 16nR⁻²` (flat), `J₁ ≥ −8nR⁻²` and
/// `J₂ ≤ 16nR⁻² − nu′` (hyperbolic).
pub fn crucial_bounds_scan(
    geometry: Geometry,
    n: usize,
    radius: f64,
    radial_points: usize,
    tangent_points: usize,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let profile = RadialProfile::quartic(radius)?;
    let nf = n as f64;
    let r2 = radius.powi(-2);
    let mut min_j1_slack = f64::INFINITY;
    let mut min_j2_slack = f64::INFINITY;
    let mut max_j2 = f64::NEG_INFINITY;
    let mut argmax = (0.0, 0.0);
    let mut min_j1 = f64::INFINITY;
    for i in 0..radial_points {
        let r = radius * i as f64 / (radial_points - 1) as f64;
        let d1 = profile.d1(r);
        for j in 0..tangent_points {
            let r_t = -1.0 + 2.0 * j as f64 / (tangent_points - 1) as f64;
            let (j1, j2) = j_values(&JInputs {
                geometry,
                n,
                profile: &profile,
                r,
                r_t,
            })?;
            let j2_bound = match geometry {
                Geometry::Euclidean => 16.0 * nf * r2,
                Geometry::Hyperbolic => 16.0 * nf * r2 - nf * d1,
            };
            min_j2_slack = min_j2_slack.min(j2_bound - j2);
            min_j1_slack = min_j1_slack.min(j1 + 8.0 * nf * r2);
            min_j1 = min_j1.min(j1);
            if j2 > max_j2 {
                max_j2 = j2;
                argmax = (r, r_t);
            }
        }
    }
    let slack = min_j1_slack.min(min_j2_slack);
    let cell_r = radius / (radial_points - 1) as f64;
    let cell_t = 2.0 / (tangent_points - 1) as f64;
    let at_corner = (radius - argmax.0) <= cell_r && (1.0 - argmax.1.abs()) <= cell_t;
    let mut report = VerificationReport::new(
        "crucial-term-bounds",
        match geometry {
            Geometry::Euclidean => "J2 <= 16nR^-2 and J1 >= -8nR^-2 (flat)",
            Geometry::Hyperbolic => "J1 >= -8nR^-2 and J2 <= 16nR^-2 - nu' (hyperbolic)",
        },
    )
    .input("geometry", geometry)
    .input("n", n)
    .input("R", radius)
    .inequality(0.0, slack, 1e-12)
    .grid(GridMeta {
        description: format!("{radial_points} x {tangent_points} over (r, r_T)"),
        points: radial_points * tangent_points,
        start: None,
    })
    .detail("min_j1_slack", min_j1_slack)
    .detail("min_j2_slack", min_j2_slack)
    .detail("min_j1", min_j1)
    .detail("max_j2", max_j2)
    .detail("argmax_r", argmax.0)
    .detail("argmax_r_t", argmax.1);
    if geometry == Geometry::Euclidean {
        report = report
            .detail("j2_bound", 16.0 * nf * r2)
            .require("equality_at_corner", at_corner);
    }
    Ok(report.timed(start))
}

/// Terms of the traced index form along a discrete geodesic.
#[derive(Debug, Clone, Serialize)]
pub struct IndexFormReport {
    pub test_function: TestFunction,
    pub n: usize,
    pub length: f64,
    pub conformal_length: f64,
    /// `−u(p)H₁·ν₁(p)` and `−u(q)H₂·ν₂(q)`.
    pub boundary_terms: [f64; 2],
    pub ricci_integral: f64,
    pub cross_term: f64,
    pub j1_integral: f64,
    pub j2_integral: f64,
    pub total: f64,
    /// `u(p)H₁ + u(q)H₂`, bounded above by the integral terms when `tr I ≥ 0`.
    pub boundary_sum: f64,
    pub integral_bound: f64,
    /// `n (u_T(q) − u_T(p))`.
    pub identity_lhs: f64,
    /// `∫ f (n u u_TT − n u_N²) + n φφ′ u u_T ds̃` with `f = (1 + φ²)/2`.
    pub identity_rhs: f64,
    pub max_geodesic_residual: f64,
}

impl IndexFormReport {
    pub fn parts_sum(&self) -> f64 {
        self.boundary_terms[0]
            + self.boundary_terms[1]
            + self.ricci_integral
            + self.cross_term
            + self.j1_integral
            + self.j2_integral
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Largest geodesic-equation residual tolerated by [`index_form_trace`].
pub const STATIONARITY_LIMIT: f64 = 1e-4;

/// All terms of the traced index form by trapezoid quadrature in `s̃`.
/// `h1`, `h2` are `H·ν` of the boundaries at `p` and `q` under `g`.
pub fn index_form_trace(
    u: &dyn ScalarField,
    curve: &DiscreteCurve,
    h1: f64,
    h2: f64,
    phi: TestFunction,
) -> Result<IndexFormReport> {
    let space = curve.space;
    let length = curve.length();
    if let TestFunction::Cosh { length: l } = phi {
        if (l - length).abs() > 1e-9 * length.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "test function length {l} differs from the curve length {length}"
            )));
        }
    }
    let residuals = geodesic_curvature_residual(u, curve)?;
    let max_res = residuals
        .iter()
        .map(|r| r.equation_residual)
        .fold(0.0, f64::max);
    if max_res > STATIONARITY_LIMIT {
        return Err(Error::NotStationary(max_res));
    }
    let n = space.n();
    let nf = n as f64;
    let ric = space.ricci();
    let m = curve.len();
    let mut ricci_f = Vec::with_capacity(m);
    let mut cross_f = Vec::with_capacity(m);
    let mut j1_f = Vec::with_capacity(m);
    let mut j2_f = Vec::with_capacity(m);
    let mut ident_f = Vec::with_capacity(m);
    let mut ut_ends = [0.0; 2];
    for i in 0..m {
        let x = &curve.vertices[i];
        let t = curve.tangent(i);
        let jet = FieldJet::at(&space, u, x);
        let v = jet.value;
        let s = curve.s[i];
        let (ph, dph) = (phi.phi(s), phi.dphi(s));
        let ut = jet.derivative(&t);
        let utt = jet.hessian_form(&t, &t);
        let un2 = (jet.gradient_norm_sq() - ut * ut).max(0.0);
        let j1u = nf * un2 - nf * v * utt;
        let j2u = nf * ut * ut - (jet.laplacian() - utt) * v;
        ricci_f.push(v * v * (nf * dph * dph - ric * ph * ph));
        cross_f.push(nf * ph * dph * v * ut);
        j1_f.push(-0.5 * (1.0 - ph * ph) * j1u);
        j2_f.push(ph * ph * j2u);
        let f = 0.5 * (1.0 + ph * ph);
        ident_f.push(f * (nf * v * utt - nf * un2) + nf * ph * dph * v * ut);
        if i == 0 {
            ut_ends[0] = ut;
        }
        if i + 1 == m {
            ut_ends[1] = ut;
        }
    }
    let st = &curve.s_tilde;
    let up = curve.u_values[0];
    let uq = curve.u_values[m - 1];
    let boundary_terms = [-up * h1, -uq * h2];
    let ricci_integral = trapezoid(st, &ricci_f);
    let cross_term = trapezoid(st, &cross_f);
    let j1_integral = trapezoid(st, &j1_f);
    let j2_integral = trapezoid(st, &j2_f);
    let integral_bound = ricci_integral + cross_term + j1_integral + j2_integral;
    let total = boundary_terms[0] + boundary_terms[1] + integral_bound;
    Ok(IndexFormReport {
        test_function: phi,
        n,
        length,
        conformal_length: curve.conformal_length(),
        boundary_terms,
        ricci_integral,
        cross_term,
        j1_integral,
        j2_integral,
        total,
        boundary_sum: up * h1 + uq * h2,
        integral_bound,
        identity_lhs: nf * (ut_ends[1] - ut_ends[0]),
        identity_rhs: trapezoid(st, &ident_f),
        max_geodesic_residual: max_res,
    })
}

/// [`index_form_trace`] with boundary curvatures taken from a fixture.
pub fn index_form_trace_fixture(
    fixture: &RegionFixture,
    u: &dyn ScalarField,
    curve: &DiscreteCurve,
    phi: TestFunction,
) -> Result<IndexFormReport> {
    let h1 = hypersurface::mean_curvature(&fixture.space, &fixture.sigma1, curve.p())?;
    let h2 = hypersurface::mean_curvature(&fixture.space, &fixture.sigma2, curve.q())?;
    index_form_trace(u, curve, h1, h2, phi)
}

/// `n ∫ d(ψu)/ds ds` by trapezoid with one Richardson step, against the
/// endpoint form `n (u(p) + u(q)) tanh(L/2)`.
pub fn psi_identity(u: &dyn ScalarField, curve: &DiscreteCurve) -> Result<(f64, f64)> {
    let phi = TestFunction::cosh(curve.length())?;
    let space = curve.space;
    let nf = space.n() as f64;
    let values: Vec<f64> = (0..curve.len())
        .map(|i| {
            let x = &curve.vertices[i];
            let jet = FieldJet::at(&space, u, x);
            let s = curve.s[i];
            phi.dpsi(s) * jet.value + phi.psi(s) * jet.derivative(&curve.tangent(i))
        })
        .collect();
    let quadrature = if curve.len() % 2 == 1 {
        nf * trapezoid_richardson(&curve.s, &values)
    } else {
        nf * trapezoid(&curve.s, &values)
    };
    let m = curve.len() - 1;
    let closed = nf * (curve.u_values[0] + curve.u_values[m]) * (0.5 * curve.length()).tanh();
    Ok((quadrature, closed))
}

/// Sum over `directions` of `d²L̃/dε²` for the polyline moved to
/// `x_k + ε φ(s_k) u(x_k) e`, by central differences with one Richardson step.
/// Directions tangent to both boundaries keep the endpoints on them.
pub fn translation_second_variation(
    u: &dyn ScalarField,
    curve: &DiscreteCurve,
    directions: &[crate::Vector],
    phi: TestFunction,
    eps: f64,
) -> Result<f64> {
    let space = curve.space;
    let mut total = 0.0;
    for e in directions {
        let moves: Vec<crate::Vector> = (0..curve.len())
            .map(|k| e * (phi.phi(curve.s[k]) * curve.u_values[k]))
            .collect();
        let length = |t: f64| -> f64 {
            let pts: Vec<crate::Point> = curve
                .vertices
                .iter()
                .zip(&moves)
                .map(|(x, m)| x + m * t)
                .collect();
            crate::geodesic::curve::conformal_length(&pts, u, &space).unwrap_or(f64::NAN)
        };
        total += crate::fd::second_derivative(&length, eps);
    }
    if !total.is_finite() {
        return Err(Error::NonPositiveFactor(0.0));
    }
    Ok(total)
}

/// Quadrature tolerance for a curve with `segments` segments: `10 N⁻²`.
pub fn quadrature_tolerance(segments: usize) -> f64 {
    10.0 / (segments as f64).powi(2)
}

/// Traced index form along a fixture minimizer: nonnegativity, the parts
/// adding up, the f-identity, and, when `directions` are given, agreement
/// with the brute-force second variation under those translations. On
/// curved backgrounds the `ψ`-quadrature must reproduce its endpoint form.
pub fn traced_variation_report(
    run: &FixtureGeodesic,
    directions: Option<&[crate::Vector]>,
) -> Result<(VerificationReport, IndexFormReport)> {
    let start = Instant::now();
    let curve = &run.solution.curve;
    let u = run.u.as_ref();
    let phi = if curve.space.is_flat() {
        TestFunction::One
    } else {
        TestFunction::cosh(curve.length())?
    };
    let terms = index_form_trace_fixture(&run.fixture, u, curve, phi)?;
    let tol = quadrature_tolerance(curve.segments());
    let parts_gap = (terms.parts_sum() - terms.total).abs();
    let identity_gap = (terms.identity_lhs - terms.identity_rhs).abs();
    let mut report = VerificationReport::new("traced-variation", "traced index form of a minimizer is nonnegative")
        .input("fixture", run.fixture.name())
        .input("R", run.radius)
        .input("center", run.center.iter().copied().collect::<Vec<_>>())
        .input("segments", curve.segments())
        .inequality(0.0, terms.total, 1e-6)
        .detail("test_function", phi)
        .detail("parts_gap", parts_gap)
        .detail("identity_gap", identity_gap)
        .detail("quadrature_tolerance", tol)
        .detail("terms", &terms)
        .require("parts_add_up", parts_gap <= 1e-12 * terms.total.abs().max(1.0))
        .require("identity", identity_gap <= tol * terms.identity_rhs.abs().max(1.0));
    if let Some(dirs) = directions {
        let brute = translation_second_variation(u, curve, dirs, phi, 1e-2)?;
        let rel = (terms.total - brute).abs() / brute.abs().max(f64::MIN_POSITIVE);
        report = report
            .detail("brute_force", brute)
            .detail("brute_force_relative_gap", rel)
            .require("brute_force", rel <= 1e-4);
    }
    if !curve.space.is_flat() {
        let (quad, closed) = psi_identity(u, curve)?;
        report = report
            .detail("psi_quadrature", quad)
            .detail("psi_closed_form", closed)
            .require("psi_identity", (quad - closed).abs() <= 1e-8 * closed.abs().max(1.0));
    }
    Ok((report.timed(start), terms))
}

/// `(u′/r)′ ≥ 0` and `(u′/sinh r)′ ≥ 0` on `(0, R]` for the quartic profile.
pub fn profile_monotonicity(radius: f64, points: usize) -> Result<VerificationReport> {
    let start = Instant::now();
    let profile = RadialProfile::quartic(radius)?;
    let mut min_flat = f64::INFINITY;
    let mut min_hyp = f64::INFINITY;
    for k in 1..=points {
        let r = radius * k as f64 / points as f64;
        // (u′/r)′ = (u″ − u′/r)/r and (u′/sinh r)′ = (u″ − u′ coth r)/sinh r
        min_flat = min_flat.min(profile.curvature_excess(r) / r);
        let d1 = profile.d1(r);
        let hyp = (profile.curvature_excess(r) - d1 * coth_minus_inverse(r)) / r.sinh();
        min_hyp = min_hyp.min(hyp);
    }
    Ok(VerificationReport::new("profile-monotonicity", "(u'/r)' >= 0 and (u'/sinh r)' >= 0 on (0, R]")
        .input("R", radius)
        .input("points", points)
        .inequality(0.0, min_flat.min(min_hyp), 1e-12)
        .detail("min_flat", min_flat)
        .detail("min_hyperbolic", min_hyp)
        .timed(start))
}

/// Checks of the cosh test function at length `L`.
pub fn phi_calculus(length: f64) -> Result<VerificationReport> {
    let start = Instant::now();
    let phi = TestFunction::cosh(length)?;
    let samples = 401;
    let mut identity_gap: f64 = 0.0;
    let mut range_ok = true;
    for k in 0..samples {
        let s = length * k as f64 / (samples - 1) as f64;
        let (p, dp) = (phi.phi(s), phi.dphi(s));
        identity_gap = identity_gap.max((phi.dpsi(s) - (dp * dp + p * p)).abs());
        range_ok &= p > 0.0 && p <= 1.0 + 1e-15;
    }
    let half = (0.5 * length).tanh();
    let end_gap = (phi.psi(0.0) + half).abs().max((phi.psi(length) - half).abs());
    let closed = phi.square_integral(length);
    let quad = adaptive_simpson(&|s| phi.phi(s).powi(2), 0.0, length, 1e-14);
    Ok(VerificationReport::new("phi-calculus", "integral of phi^2 over [0, L] <= 6/5")
        .input("L", length)
        .inequality(closed, 1.2, 0.0)
        .detail("psi_0", phi.psi(0.0))
        .detail("psi_L", phi.psi(length))
        .detail("tanh_half_L", half)
        .detail("endpoint_gap", end_gap)
        .detail("derivative_identity_gap", identity_gap)
        .detail("quadrature", quad)
        .require("endpoints", end_gap <= 1e-12)
        .require("derivative_identity", identity_gap <= 1e-12)
        .require("range", range_ok)
        .require("quadrature_agrees", (quad - closed).abs() <= 1e-10 * closed.max(1e-300) + 1e-15)
        .timed(start))
}

/// [`phi_calculus`] over a list of lengths, with the value of `∫φ²` at
/// `L = 2` reported separately.
pub fn phi_calculus_grid(lengths: &[f64]) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut worst_slack = f64::INFINITY;
    let mut max_integral = f64::NEG_INFINITY;
    let mut all_pass = true;
    for &l in lengths {
        let r = phi_calculus(l)?;
        worst_slack = worst_slack.min(r.slack);
        max_integral = max_integral.max(r.lhs);
        all_pass &= r.pass;
    }
    let at_two = TestFunction::cosh(2.0)?;
    let closed = at_two.square_integral(2.0);
    let quad = adaptive_simpson(&|s| at_two.phi(s).powi(2), 0.0, 2.0, 1e-14);
    Ok(VerificationReport::new("phi-calculus", "integral of phi^2 over [0, L] <= 6/5 on a length grid")
        .input("lengths", lengths)
        .inequality(max_integral, 1.2, 0.0)
        .grid(GridMeta {
            description: "lengths".into(),
            points: lengths.len(),
            start: lengths.first().copied(),
        })
        .detail("min_slack", worst_slack)
        .detail("integral_at_2", closed)
        .detail("quadrature_at_2", quad)
        .require("every_length", all_pass)
        .require("value_at_2", (closed - quad).abs() <= 1e-6)
        .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cosh_function_basics() {
        let phi = TestFunction::cosh(2.0).unwrap();
        assert_relative_eq!(phi.phi(0.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(phi.phi(2.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(phi.psi(0.0), -(1f64).tanh(), epsilon = 1e-15);
        let e2 = 2f64.exp();
        let expected = (e2 * e2 - 1.0 + 4.0 * e2) / (1.0 + e2).powi(2);
        assert_relative_eq!(phi.square_integral(2.0), expected, epsilon = 1e-15);
        assert_relative_eq!(expected, 1.1816, epsilon = 1e-4);
        assert!(TestFunction::cosh(0.0).is_err());
    }

    #[test]
    fn small_length_integral_vanishes() {
        let phi = TestFunction::cosh(1e-8).unwrap();
        assert!(phi.square_integral(1e-8) < 2e-8);
    }

    #[test]
    fn coth_series_joins_the_direct_formula() {
        let r: f64 = 1e-4;
        let direct = 1.0 / r.tanh() - 1.0 / r;
        assert_relative_eq!(coth_minus_inverse(r * 0.999_999), direct, max_relative = 1e-6);
        assert_relative_eq!(coth_minus_inverse(1.0), 1.0 / 1f64.tanh() - 1.0, epsilon = 1e-15);
    }

    #[test]
    fn j_limits() {
        let profile = RadialProfile::quartic(10.0).unwrap();
        for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
            let (j1, j2) = j_values(&JInputs {
                geometry,
                n: 3,
                profile: &profile,
                r: 0.0,
                r_t: 0.4,
            })
            .unwrap();
            assert_relative_eq!(j1, 12.0 / 100.0, epsilon = 1e-15);
            assert_relative_eq!(j2, 12.0 / 100.0, epsilon = 1e-15);
        }
        let (_, j2) = j_values(&JInputs {
            geometry: Geometry::Euclidean,
            n: 2,
            profile: &profile,
            r: 10.0,
            r_t: 1.0,
        })
        .unwrap();
        assert_relative_eq!(j2, 0.32, epsilon = 1e-15);
        assert!(j_values(&JInputs {
            geometry: Geometry::Euclidean,
            n: 2,
            profile: &profile,
            r: 10.5,
            r_t: 0.0,
        })
        .is_err());
    }

    #[test]
    fn j_values_match_direct_evaluation() {
        use crate::conformal::field::RadialField;
        use nalgebra::dvector;
        for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
            let space = geometry.space(3);
            let profile = RadialProfile::quartic(5.0).unwrap();
            let u = RadialField::new(space, crate::Point::zeros(3), profile.clone()).unwrap();
            let x = space.point_at_distance(&dvector![1.0, 0.5, -0.3], 1.7);
            let rho = space.conformal_factor(&x);
            let t = dvector![0.3, -1.0, 0.4].normalize() / rho;
            let rq = space
                .radial_quantities(&crate::Point::zeros(3), &x, &t)
                .unwrap();
            let (a1, a2) = j_values(&JInputs {
                geometry,
                n: 2,
                profile: &profile,
                r: rq.r,
                r_t: rq.r_t,
            })
            .unwrap();
            let (b1, b2) = j_values_direct(&space, &u, &x, &t).unwrap();
            assert_relative_eq!(a1, b1, max_relative = 1e-10);
            assert_relative_eq!(a2, b2, max_relative = 1e-10);
        }
    }

    #[test]
    fn flat_scan_finds_the_corner() {
        let r = crucial_bounds_scan(Geometry::Euclidean, 2, 10.0, 200, 41).unwrap();
        assert!(r.pass, "{}", r.to_json());
        assert_relative_eq!(r.details["max_j2"].as_f64().unwrap(), 0.32, epsilon = 1e-14);
    }

    #[test]
    fn phi_calculus_passes_on_sample_lengths() {
        for l in [0.01, 0.1, 1.0, 2.0, 10.0, 50.0] {
            let r = phi_calculus(l).unwrap();
            assert!(r.pass, "{}", r.to_json());
        }
    }

    #[test]
    fn phi_grid_report() {
        let r = phi_calculus_grid(&[0.01, 2.0, 50.0]).unwrap();
        assert!(r.pass, "{}", r.to_json());
        assert!(r.lhs < 1.2 && r.lhs > 1.18);
    }

}
