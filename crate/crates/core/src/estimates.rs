//! Theorem-level curvature inequalities, decay scans and the elementary
//! inequalities behind them.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::hypersurface::{self, fixtures, Hypersurface, RegionFixture};
use crate::report::{GridMeta, VerificationReport};
use crate::spaceform::SpaceForm;
use crate::variation::coth_minus_inverse;
use crate::{Error, Point, Result};

/// Constants of the main estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantForm {
    /// `5/2, 30, 8` on `B(0, R)`.
    Statement,
    /// `10, 480, 32`: the statement applied on `B(q₀, R/4)`.
    QuarterRadius,
}

impl ConstantForm {
    fn constants(self) -> (f64, f64, f64) {
        match self {
            Self::Statement => (2.5, 30.0, 8.0),
            Self::QuarterRadius => (10.0, 480.0, 32.0),
        }
    }

    /// Radius of the ball the statement is applied on.
    fn effective_radius(self, radius: f64) -> f64 {
        match self {
            Self::Statement => radius,
            Self::QuarterRadius => radius / 4.0,
        }
    }
}

/// Inputs of the main estimate.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateConfig {
    pub fixture: String,
    pub n: usize,
    pub radius: f64,
    /// `g`-length of the reference curve.
    pub l0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Side whose `|c_j|` enters the error term (1 or 2).
    pub j: usize,
    pub kappa: f64,
    pub alpha: Option<f64>,
    pub form: ConstantForm,
    /// Synthetic curvature values, excluded from pass/fail accounting.
    pub probe: bool,
}

impl EstimateConfig {
    pub fn new(n: usize, radius: f64, l0: f64, c1: f64, c2: f64) -> Self {
        Self {
            fixture: "synthetic".into(),
            n,
            radius,
            l0,
            c1,
            c2,
            j: 2,
            kappa: 0.0,
            alpha: None,
            form: ConstantForm::Statement,
            probe: false,
        }
    }

    fn check_hypotheses(&self) -> Result<f64> {
        if self.n == 0 || !(self.radius > 0.0) || !(self.l0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "n = {}, R = {}, L0 = {}",
                self.n, self.radius, self.l0
            )));
        }
        if self.j != 1 && self.j != 2 {
            return Err(Error::InvalidParameter(format!("j = {}", self.j)));
        }
        let r = self.form.effective_radius(self.radius);
        if self.l0 > r / 4.0 {
            return Err(Error::Hypothesis(format!(
                "L0 = {} exceeds a quarter of the radius {r}",
                self.l0
            )));
        }
        Ok(r)
    }

    fn cj(&self) -> f64 {
        if self.j == 1 {
            self.c1
        } else {
            self.c2
        }
    }
}

/// `c₁ + c₂ ≤ a μ₀ |c_j| + b n L₀ R⁻²` in flat space.
pub fn main_estimate_euclid(cfg: &EstimateConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    if cfg.kappa != 0.0 {
        return Err(Error::InvalidParameter("flat branch needs kappa = 0".into()));
    }
    let r = cfg.check_hypotheses()?;
    let (a, b, _) = cfg.form.constants();
    let r_stmt = cfg.radius;
    let mu0 = cfg.l0 / r_stmt;
    let n = cfg.n as f64;
    let lhs = cfg.c1 + cfg.c2;
    let rhs = a * mu0 * cfg.cj().abs() + b * n * cfg.l0 / (r_stmt * r_stmt);
    Ok(VerificationReport::new(
        "main-estimate-euclid",
        "c1 + c2 <= (5/2) L0/R |c_j| + 30 n L0 R^-2",
    )
    .input("config", cfg)
    .inequality(lhs, rhs, 0.0)
    .probe(cfg.probe)
    .detail("constant_form", cfg.form)
    .detail("ball_radius", r)
    .detail("mu0", mu0)
    .timed(start))
}

/// Smallest admissible `α`: `tanh((1 + 5μ₀/9) L₀/2)` with `μ₀ = L₀/R`.
pub fn alpha_lower_bound(l0: f64, radius: f64) -> f64 {
    ((1.0 + 5.0 / 9.0 * l0 / radius) * l0 / 2.0).tanh()
}

/// `c₁ + c₂ − 2nα ≤ a μ₀|c_j − nα| + b n L₀R⁻² + c n L₀^{1/2} R⁻¹` at `κ = 1`
/// (curvatures are rescaled by `1/κ` and lengths by `κ`).
pub fn main_estimate_hyperbolic(cfg: &EstimateConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    if !(cfg.kappa > 0.0) {
        return Err(Error::InvalidParameter("hyperbolic branch needs kappa > 0".into()));
    }
    let k = cfg.kappa;
    let scaled = EstimateConfig {
        radius: cfg.radius * k,
        l0: cfg.l0 * k,
        c1: cfg.c1 / k,
        c2: cfg.c2 / k,
        ..cfg.clone()
    };
    let r = scaled.check_hypotheses()?;
    let r_stmt = scaled.radius;
    let lower = alpha_lower_bound(scaled.l0, r);
    let alpha = cfg.alpha.unwrap_or(lower);
    if alpha < lower || alpha > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} outside [{lower}, 1]"
        )));
    }
    let (a, b, c) = cfg.form.constants();
    let n = cfg.n as f64;
    let mu0 = scaled.l0 / r_stmt;
    let lhs = scaled.c1 + scaled.c2 - 2.0 * n * alpha;
    let rhs = a * mu0 * (scaled.cj() - n * alpha).abs()
        + b * n * scaled.l0 / (r_stmt * r_stmt)
        + c * n * scaled.l0.sqrt() / r_stmt;
    Ok(VerificationReport::new(
        "main-estimate-hyperbolic",
        "c1 + c2 - 2n alpha <= (5/2) L0/R |c_j - n alpha| + 30 n L0 R^-2 + 8 n L0^(1/2) R^-1",
    )
    .input("config", cfg)
    .inequality(lhs, rhs, 0.0)
    .probe(cfg.probe)
    .detail("constant_form", cfg.form)
    .detail("alpha", alpha)
    .detail("alpha_lower_bound", lower)
    .detail("mu0", mu0)
    .detail("limit_bound", theorem_bound(k, cfg.n, cfg.l0)?)
    .timed(start))
}

/// `2nκ tanh(κd/2)`, zero in flat space.
pub fn theorem_bound(kappa: f64, n: usize, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("distance must be positive, got {d}")));
    }
    if kappa < 0.0 {
        return Err(Error::InvalidParameter(format!("kappa = {kappa}")));
    }
    Ok(2.0 * n as f64 * kappa * (0.5 * kappa * d).tanh())
}

/// Distance between the two boundaries of an equidistant fixture and the
/// common value of `H`: `d = 4 artanh(√(1+a²) − a)`, `H = n/√(1+a²)`.
pub fn equidistant_closed_form(a: f64, n: usize) -> (f64, f64) {
    let s = (1.0 + a * a).sqrt();
    (4.0 * (s - a).atanh(), n as f64 / s)
}

/// Infimum of `H·ν` over `Σ ∩ B(center, radius)` (model distance), sampled
/// along the generating curve.
pub fn infimum_near(
    space: &SpaceForm,
    sigma: &Hypersurface,
    center: &Point,
    radius: f64,
    samples: usize,
) -> Result<(f64, Point)> {
    let profile = sigma
        .profile()
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no generating curve", sigma.name())))?;
    let reach = radius + space.radius_of(center);
    let (t0, t1) = profile.domain_for(space, reach);
    let mut best: Option<(f64, Point)> = None;
    for k in 0..=samples {
        let p = profile.point(t0 + (t1 - t0) * k as f64 / samples as f64);
        if space.check_point(&p).is_err() || space.distance(center, &p)? >= radius {
            continue;
        }
        let h = hypersurface::mean_curvature(space, sigma, &p)?;
        if best.as_ref().is_none_or(|(b, _)| h < *b) {
            best = Some((h, p));
        }
    }
    best.ok_or(Error::EmptyIntersection)
}

/// Flat main estimate on the log-graph fixture: the reference curve is the
/// vertical segment from `(x*, x*/log x*)` down to `q₀ = (x*, 0)`, the ball
/// is centered at `q₀`, and `c_j` are sampled infima over that ball.
pub fn log_graph_estimate(radius: f64, x_star: f64) -> Result<VerificationReport> {
    let fixture = fixtures::example_fixture("log-graph", &[])?;
    if x_star < fixtures::LOG_GRAPH_START {
        return Err(Error::InvalidParameter(format!("x* = {x_star} below the graph start")));
    }
    let (y, _, _) = fixtures::log_graph_height(x_star);
    let q0 = nalgebra::dvector![x_star, 0.0];
    let samples = 20_000;
    let (c1, at) = infimum_near(&fixture.space, &fixture.sigma1, &q0, radius, samples)?;
    let (c2, _) = infimum_near(&fixture.space, &fixture.sigma2, &q0, radius, samples)?;
    let cfg = EstimateConfig {
        fixture: fixture.name(),
        ..EstimateConfig::new(1, radius, y, c1, c2)
    };
    Ok(main_estimate_euclid(&cfg)?
        .input("x_star", x_star)
        .detail("argmin_h1", at.iter().copied().collect::<Vec<_>>()))
}

/// Flat and hyperbolic main estimates on an equidistant-type fixture along a
/// radius grid, with the reference curve the axis segment through the origin.
/// The gap between the main-estimate bound and the measured `c₁ + c₂` must
/// stay nonnegative and shrink like `R⁻¹`.
pub fn sharpness_scan(a: f64, dim: usize, radii: &[f64]) -> Result<VerificationReport> {
    let start = Instant::now();
    let fixture = fixtures::example_fixture("hyperbolic-equidistant", &[("a", a), ("dim", dim as f64)])?;
    let n = dim - 1;
    let (d, h) = equidistant_closed_form(a, n);
    let limit = theorem_bound(1.0, n, d)?;
    let origin = Point::zeros(dim);
    let mut gaps = Vec::new();
    let mut scaled = Vec::new();
    let mut measured = Vec::new();
    for &r in radii {
        let (c1, _) = infimum_near(&fixture.space, &fixture.sigma1, &origin, r, 4000)?;
        let (c2, _) = infimum_near(&fixture.space, &fixture.sigma2, &origin, r, 4000)?;
        let cfg = EstimateConfig {
            fixture: fixture.name(),
            kappa: 1.0,
            ..EstimateConfig::new(n, r, d, c1, c2)
        };
        let report = main_estimate_hyperbolic(&cfg)?;
        let alpha = report.details["alpha"].as_f64().unwrap_or(f64::NAN);
        let bound = 2.0 * n as f64 * alpha + report.rhs;
        gaps.push(bound - (c1 + c2));
        scaled.push((bound - (c1 + c2)) * r);
        measured.push(c1 + c2);
    }
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let worst_defect = measured
        .iter()
        .map(|m| (m - 2.0 * h).abs())
        .fold(0.0, f64::max);
    let decreasing = gaps.windows(2).all(|w| w[1] <= w[0]);
    let rate_bounded = scaled.iter().all(|s| s.is_finite())
        && scaled.last().copied().unwrap_or(0.0) <= scaled.first().copied().unwrap_or(0.0) * 1.5;
    Ok(VerificationReport::new(
        "sharp-equidistant",
        "measured c1 + c2 stays below the main-estimate bound, which tends to 2n tanh(d/2)",
    )
    .input("a", a)
    .input("dim", dim)
    .input("radii", radii)
    .inequality(0.0, min_gap, 0.0)
    .grid(GridMeta {
        description: "radius grid".into(),
        points: radii.len(),
        start: radii.first().copied(),
    })
    .detail("d", d)
    .detail("limit_bound", limit)
    .detail("measured_sum", measured)
    .detail("gaps", gaps)
    .detail("gap_times_r", scaled)
    .require("sum_equals_limit", (2.0 * h - limit).abs() <= 1e-12 && worst_defect <= 1e-8)
    .require("gap_decreasing", decreasing)
    .require("gap_order_inverse_r", rate_bounded)
    .timed(start))
}

/// Envelope for a decay scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Envelope {
    /// `40 n R⁻¹`.
    Linear,
    /// `C′ R⁻²` with `C′ = max (inf H₁ + inf H₂) R²` over the grid.
    Quadratic,
    /// `2nκ + 13 n κ^{1/3} R^{−2/3}`.
    Hyperbolic { kappa: f64 },
}

impl Envelope {
    pub fn check_id(&self) -> &'static str {
        match self {
            Self::Linear => "decay-linear",
            Self::Quadratic => "decay-quadratic",
            Self::Hyperbolic { .. } => "decay-hyperbolic",
        }
    }
}

/// Per-radius annulus infima and the envelope they are compared with.
#[derive(Debug, Clone, Serialize)]
pub struct DecayScan {
    pub fixture: String,
    pub envelope_kind: Envelope,
    pub n: usize,
    pub radii: Vec<f64>,
    pub inf1: Vec<f64>,
    pub inf2: Vec<f64>,
    pub sum: Vec<f64>,
    pub envelope: Vec<f64>,
    pub slack: Vec<f64>,
    /// First grid radius where every annulus met both boundaries.
    pub start: Option<f64>,
    /// Fitted `C′` for the quadratic envelope.
    pub fitted_constant: Option<f64>,
    /// Relative spread of the running maximum of `sum·R²` over the top decade.
    pub stability: Option<f64>,
}

pub const CSV_HEADER: &str = "R,inf_h1,inf_h2,sum,envelope,slack";

impl DecayScan {
    pub fn passes(&self) -> bool {
        self.slack.iter().all(|s| *s >= 0.0)
    }

    /// `sum · R^p · (log R)^q` along the grid.
    pub fn normalized(&self, p: f64, q: f64) -> Vec<f64> {
        self.radii
            .iter()
            .zip(&self.sum)
            .map(|(r, s)| s * r.powf(p) * r.ln().powf(q))
            .collect()
    }

    /// CSV with full double precision and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for i in 0..self.radii.len() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.radii[i], self.inf1[i], self.inf2[i], self.sum[i], self.envelope[i], self.slack[i]
            );
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    pub fn report(&self) -> VerificationReport {
        let min_slack = self.slack.iter().copied().fold(f64::INFINITY, f64::min);
        let mut r = VerificationReport::new(
            self.envelope_kind.check_id(),
            match self.envelope_kind {
                Envelope::Linear => "inf H1 + inf H2 <= 40 n R^-1 on the annulus",
                Envelope::Quadratic => "inf H <= C' R^-2 on the annulus with C' fitted",
                Envelope::Hyperbolic { .. } => "inf H1 + inf H2 <= 2n kappa + 13 n kappa^(1/3) R^(-2/3)",
            },
        )
        .input("fixture", &self.fixture)
        .input("radii", &self.radii)
        .input("envelope", self.envelope_kind)
        .grid(GridMeta {
            description: "radius grid".into(),
            points: self.radii.len(),
            start: self.start,
        });
        r = if self.radii.is_empty() {
            r.inequality(0.0, 0.0, 0.0).detail("warning", "empty radius grid")
        } else {
            r.inequality(0.0, min_slack, 0.0)
        };
        if let Some(c) = self.fitted_constant {
            let stable = self.stability.is_some_and(|s| s < 0.05);
            r = r
                .detail("fitted_constant", c)
                .detail("stability", self.stability)
                .require("constant_finite", c.is_finite())
                .require("constant_stable", stable);
        }
        r
    }
}

/// Annulus infima of both boundaries along a radius grid. Leading radii
/// where an annulus misses a boundary are skipped and the first usable
/// radius is recorded.
pub fn decay_scan(fixture: &RegionFixture, radii: &[f64], envelope: Envelope) -> Result<DecayScan> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("radius grid must be strictly increasing".into()));
    }
    let space = fixture.space;
    let n = space.n();
    let nf = n as f64;
    let mut scan = DecayScan {
        fixture: fixture.name(),
        envelope_kind: envelope,
        n,
        radii: Vec::new(),
        inf1: Vec::new(),
        inf2: Vec::new(),
        sum: Vec::new(),
        envelope: Vec::new(),
        slack: Vec::new(),
        start: None,
        fitted_constant: None,
        stability: None,
    };
    for &r in radii {
        let pair = hypersurface::infimum_over_annulus(&space, &fixture.sigma1, r)
            .and_then(|a| Ok((a, hypersurface::infimum_over_annulus(&space, &fixture.sigma2, r)?)));
        let (a, b) = match pair {
            Ok(p) => p,
            Err(Error::EmptyIntersection) if scan.start.is_none() => continue,
            Err(e) => return Err(e),
        };
        scan.start.get_or_insert(r);
        scan.radii.push(r);
        // `+ 0.0` folds a negative zero from flat boundaries
        scan.inf1.push(a.value + 0.0);
        scan.inf2.push(b.value + 0.0);
        scan.sum.push(a.value + b.value + 0.0);
    }
    if !radii.is_empty() && scan.radii.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let env: Vec<f64> = match envelope {
        Envelope::Linear => scan.radii.iter().map(|r| 40.0 * nf / r).collect(),
        Envelope::Hyperbolic { kappa } => scan
            .radii
            .iter()
            .map(|r| 2.0 * nf * kappa + 13.0 * nf * kappa.cbrt() * r.powf(-2.0 / 3.0))
            .collect(),
        Envelope::Quadratic => {
            let scaled = scan.normalized(2.0, 0.0);
            let c = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            scan.fitted_constant = Some(c);
            scan.stability = Some(top_decade_stability(&scan.radii, &scaled));
            scan.radii.iter().map(|r| c / (r * r)).collect()
        }
    };
    scan.slack = env.iter().zip(&scan.sum).map(|(e, s)| e - s).collect();
    scan.envelope = env;
    Ok(scan)
}

/// `(inf H₁ + inf H₂)·R·(log R)²` on the upper half of a linear-envelope
/// scan must lie in `[lo, hi]`.
pub fn log_rate_band(scan: &DecayScan, lo: f64, hi: f64) -> VerificationReport {
    let values = scan.normalized(1.0, 2.0);
    let top = &values[values.len() / 2..];
    let slack = top.iter().map(|v| (v - lo).min(hi - v)).fold(f64::INFINITY, f64::min);
    VerificationReport::new("decay-rate-log", "(inf H1 + inf H2) R log^2 R stays in a band on the upper half of the grid")
        .input("fixture", &scan.fixture)
        .input("radii", &scan.radii)
        .input("band", [lo, hi])
        .inequality(0.0, if top.is_empty() { 0.0 } else { slack }, 0.0)
        .grid(GridMeta {
            description: "upper half of the radius grid".into(),
            points: top.len(),
            start: scan.radii.get(values.len() / 2).copied(),
        })
        .detail("normalized", top)
}

/// Relative spread of the running maximum of `values` over radii within a
/// factor 10 of the largest one.
fn top_decade_stability(radii: &[f64], values: &[f64]) -> f64 {
    let Some(&last) = radii.last() else {
        return f64::NAN;
    };
    let mut running = f64::NEG_INFINITY;
    let mut top = Vec::new();
    for (r, v) in radii.iter().zip(values) {
        running = running.max(*v);
        if *r >= last / 10.0 {
            top.push(running);
        }
    }
    let hi = top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = top.iter().copied().fold(f64::INFINITY, f64::min);
    (hi - lo) / hi.abs()
}

/// Geometric grid of `count` radii from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// The three scalar inequalities used in the estimates:
/// `(1 − μ²)⁻² < 1 + 5μ/9` on `(0, 1/4]`, `|eˣ − 1| ≤ 4|x|/3` on `|x| < 1/2`,
/// and `0 < coth r − 1/r < 1` on `(0, 50]`.
pub fn elementary_inequalities(points: usize) -> VerificationReport {
    let start = Instant::now();
    let grid = |k: usize| (k + 1) as f64 / points as f64;
    let mu_slack = |mu: f64| 1.0 + 5.0 / 9.0 * mu - (1.0 - mu * mu).powi(-2);
    let mut min_mu = f64::INFINITY;
    let mut min_exp = f64::INFINITY;
    let mut min_coth = f64::INFINITY;
    for k in 0..points {
        min_mu = min_mu.min(mu_slack(0.25 * grid(k)));
        let x = -0.5 + (k as f64 + 0.5) / points as f64;
        min_exp = min_exp.min(4.0 / 3.0 * x.abs() - x.exp_m1().abs());
        let c = coth_minus_inverse(50.0 * grid(k));
        min_coth = min_coth.min(c.min(1.0 - c));
    }
    let at_quarter = mu_slack(0.25);
    let slack = min_mu.min(min_exp).min(min_coth);
    VerificationReport::new("elementary-inequalities", "three scalar inequalities on their domains")
        .input("points", points)
        .inequality(0.0, slack, 0.0)
        .grid(GridMeta {
            description: format!("{points} points per inequality"),
            points: 3 * points,
            start: None,
        })
        .detail("min_slack_mu", min_mu)
        .detail("min_slack_exp", min_exp)
        .detail("min_slack_coth", min_coth)
        .detail("slack_at_quarter", at_quarter)
        .require("strict_mu", min_mu > 0.0)
        .require("strict_coth", min_coth > 0.0)
        .timed(start)
}

/// Displayed closed form of `H` on the `R⁴` surface of revolution against the
/// principal-curvature computation at `samples` points of `[1/2, 0.95)`.
pub fn revolution_formula(samples: usize) -> VerificationReport {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let t = 0.5 + 0.45 * k as f64 / samples as f64;
        let a = fixtures::revolution_mean_curvature(t);
        let b = fixtures::revolution_principal_mean_curvature(t);
        worst = worst.max((a - b).abs() / b.abs());
    }
    VerificationReport::new("revolution-formula", "closed-form H equals the principal-curvature form")
        .input("samples", samples)
        .agreement(worst, 0.0, 1e-10)
        .timed(start)
}

/// Circles `|z ± a|² = 1 + a²` in the Poincaré disk: sampled `H` on both
/// boundaries, the distance from a free-boundary minimizer with `u ≡ 1`, and
/// the comparison `H₁ + H₂ = 2 tanh(d/2)`.
pub fn example_circles(a: f64, segments: usize) -> Result<VerificationReport> {
    use crate::conformal::field::ConstantField;
    use crate::geodesic::{initial_segment, minimize, GeodesicProblem};
    use std::sync::Arc;

    let start = Instant::now();
    let fixture = fixtures::example_fixture("poincare-circles", &[("a", a)])?;
    let space = fixture.space;
    let target = 1.0 / (1.0 + a * a).sqrt();
    let mut h_values = Vec::new();
    for sigma in [&fixture.sigma1, &fixture.sigma2] {
        let profile = sigma
            .profile()
            .ok_or_else(|| Error::InvalidParameter("boundary without generating curve".into()))?;
        let (t0, t1) = profile.domain_for(&space, 3.0);
        for k in 0..=20 {
            let p = profile.point(t0 + (t1 - t0) * k as f64 / 20.0);
            if space.check_point(&p).is_ok() {
                h_values.push(hypersurface::mean_curvature(&space, sigma, &p)?);
            }
        }
    }
    let h_gap = h_values.iter().map(|h| (h - target).abs()).fold(0.0, f64::max);
    let u = Arc::new(ConstantField::new(2, 1.0));
    let initial = initial_segment(&fixture, 1.5, 200, 9)?;
    let problem = GeodesicProblem::new(space, u, fixture.sigma1.clone(), fixture.sigma2.clone(), initial).segments(segments);
    let d = minimize(&problem)?.length();
    let tanh_gap = ((0.5 * d).tanh() - target).abs();
    let bound = theorem_bound(1.0, 1, d)?;
    let h_min = h_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(VerificationReport::new("example-circles", "H = (1 + a^2)^(-1/2) = tanh(d/2) on both circles")
        .input("a", a)
        .input("segments", segments)
        .agreement(2.0 * h_min, bound, 1e-6)
        .detail("h_closed_form", target)
        .detail("h_sampled_gap", h_gap)
        .detail("distance", d)
        .detail("tanh_half_distance", (0.5 * d).tanh())
        .detail("theorem_bound", bound)
        .require("h_matches", h_gap <= 1e-6)
        .require("tanh_matches", tanh_gap <= 1e-6)
        .timed(start))
}

/// Implicit mean curvature of the log graph against `−y″/(1 + y′²)^{3/2}`.
pub fn log_graph_curvature(samples: usize) -> Result<VerificationReport> {
    let start = Instant::now();
    let fixture = fixtures::example_fixture("log-graph", &[])?;
    let profile = fixture
        .sigma1
        .profile()
        .ok_or_else(|| Error::InvalidParameter("boundary without generating curve".into()))?;
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let x = (fixtures::LOG_GRAPH_START.ln() + 10.0 * k as f64 / samples as f64).exp();
        let h = hypersurface::mean_curvature(&fixture.space, &fixture.sigma1, &profile.point(x))?;
        let closed = fixtures::log_graph_mean_curvature(x);
        worst = worst.max((h - closed).abs() / closed.abs().max(f64::MIN_POSITIVE));
    }
    Ok(VerificationReport::new("log-graph-curvature", "implicit H of y = x / log x equals the graph formula")
        .input("samples", samples)
        .agreement(worst, 0.0, 1e-8)
        .timed(start))
}

/// Inscribed balls touching a fixture boundary: `H_Σ(y) ≤ H_{∂B}` whenever
/// the ball lies on the region side, for a few `(fixture, point, radius)` cases.
pub fn ball_lemma() -> Result<VerificationReport> {
    let start = Instant::now();
    let cases: [(&str, &[(&str, f64)], f64, f64); 5] = [
        ("poincare-circles", &[("a", 1.0)], 0.0, 0.3),
        ("poincare-circles", &[("a", 1.0)], 0.4, 0.8),
        ("hyperbolic-equidistant", &[("a", 0.5), ("dim", 3.0)], 0.0, 1.0),
        ("log-graph", &[], 4f64.exp(), 1.0),
        ("euclid-slab", &[("dim", 3.0)], 0.5, 0.45),
    ];
    let mut slack = f64::INFINITY;
    let mut inscribed = true;
    let mut rows = Vec::new();
    for (name, params, t, radius) in cases {
        let fixture = fixtures::example_fixture(name, params)?;
        let sigma = &fixture.sigma1;
        let profile = sigma
            .profile()
            .ok_or_else(|| Error::InvalidParameter("boundary without generating curve".into()))?;
        let y = profile.point(t);
        let region = [&fixture.sigma1, &fixture.sigma2];
        let c = hypersurface::inscribed_sphere_comparison(&fixture.space, sigma, &region, &y, radius, 64)?;
        slack = slack.min(c.sphere_mean_curvature - c.mean_curvature);
        inscribed &= c.inscribed;
        rows.push((fixture.name(), c));
    }
    Ok(VerificationReport::new("ball-lemma", "H of a boundary is at most that of an inscribed touching sphere")
        .input("cases", rows.len())
        .inequality(0.0, slack, 1e-8)
        .detail("cases", rows)
        .require("inscribed", inscribed)
        .timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn slab_is_trivial() {
        let cfg = EstimateConfig::new(2, 40.0, 1.0, 0.0, 0.0);
        let r = main_estimate_euclid(&cfg).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.slack, 30.0 * 2.0 / 1600.0, epsilon = 1e-15);
    }

    #[test]
    fn synthetic_probe_fails() {
        let cfg = EstimateConfig {
            probe: true,
            ..EstimateConfig::new(2, 100.0, 1.0, 1.0, 1.0)
        };
        let r = main_estimate_euclid(&cfg).unwrap();
        assert!(!r.pass && r.slack < 0.0 && !r.failed());
    }

    #[test]
    fn long_reference_is_rejected() {
        let cfg = EstimateConfig::new(2, 10.0, 3.0, 0.0, 0.0);
        assert!(matches!(main_estimate_euclid(&cfg), Err(Error::Hypothesis(_))));
        let q = EstimateConfig {
            form: ConstantForm::QuarterRadius,
            ..EstimateConfig::new(2, 10.0, 1.0, 0.0, 0.0)
        };
        assert!(matches!(main_estimate_euclid(&q), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn quarter_form_matches_statement_on_quarter_ball() {
        let q = EstimateConfig {
            form: ConstantForm::QuarterRadius,
            ..EstimateConfig::new(1, 400.0, 2.0, 0.3, 0.2)
        };
        let s = EstimateConfig::new(1, 100.0, 2.0, 0.3, 0.2);
        assert_relative_eq!(
            main_estimate_euclid(&q).unwrap().rhs,
            main_estimate_euclid(&s).unwrap().rhs,
            max_relative = 1e-14
        );
    }

    #[test]
    fn alpha_must_be_admissible() {
        let cfg = EstimateConfig {
            kappa: 1.0,
            alpha: Some(0.1),
            ..EstimateConfig::new(1, 40.0, 2.0, 0.5, 0.5)
        };
        assert!(matches!(main_estimate_hyperbolic(&cfg), Err(Error::InvalidParameter(_))));
        let ok = EstimateConfig {
            alpha: Some(1.0),
            c1: 0.0,
            c2: 0.0,
            ..cfg
        };
        let r = main_estimate_hyperbolic(&ok).unwrap();
        assert_eq!(r.lhs, -2.0);
        assert!(r.pass);
    }

    #[test]
    fn theorem_bound_values() {
        assert_eq!(theorem_bound(0.0, 3, 5.0).unwrap(), 0.0);
        let d = 4.0 * (2f64.sqrt() - 1.0).atanh();
        assert_relative_eq!(theorem_bound(1.0, 1, d).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        let sat = theorem_bound(1.0, 2, 100.0).unwrap();
        assert!(sat <= 4.0 && 4.0 - sat < 1e-40);
        assert!(theorem_bound(1.0, 1, 0.0).is_err());
    }

    #[test]
    fn equidistant_closed_form_is_sharp() {
        for a in [0.5, 1.0, 2.0] {
            let (d, h) = equidistant_closed_form(a, 1);
            assert_relative_eq!((0.5 * d).tanh(), h, epsilon = 1e-14);
        }
    }

    #[test]
    fn elementary_values() {
        let r = elementary_inequalities(10_000);
        assert!(r.pass, "{}", r.to_json());
        let q = r.details["slack_at_quarter"].as_f64().unwrap();
        assert_relative_eq!(q, 1.0 + 5.0 / 36.0 - (16.0f64 / 15.0).powi(2), epsilon = 1e-15);
        assert_relative_eq!(q, 1.11e-3, max_relative = 0.05);
    }

    #[test]
    fn csv_shape() {
        let f = fixtures::example_fixture("euclid-slab", &[("dim", 2.0)]).unwrap();
        let scan = decay_scan(&f, &[10.0, 20.0], Envelope::Linear).unwrap();
        let csv = scan.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(scan.inf1.iter().all(|v| *v == 0.0));
        assert!(!csv.contains('\r'));
        let empty = decay_scan(&f, &[], Envelope::Linear).unwrap();
        assert_eq!(empty.to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn grid_must_increase() {
        let f = fixtures::example_fixture("euclid-slab", &[]).unwrap();
        assert!(decay_scan(&f, &[10.0, 10.0], Envelope::Linear).is_err());
    }

    #[test]
    fn circles_are_sharp() {
        let r = example_circles(1.0, 128).unwrap();
        assert!(r.pass, "{}", r.to_json());
    }

    #[test]
    fn ball_lemma_cases_hold() {
        let r = ball_lemma().unwrap();
        assert!(r.pass, "{}", r.to_json());
    }

    #[test]
    fn revolution_formula_agrees() {
        assert!(revolution_formula(50).pass);
    }

    #[test]
    fn rate_band_reads_the_upper_half() {
        let fixture = fixtures::example_fixture("log-graph", &[]).unwrap();
        let scan = decay_scan(&fixture, &log_grid(4f64.exp(), 10f64.exp(), 5), Envelope::Linear).unwrap();
        let wide = log_rate_band(&scan, 0.5, 1.5);
        assert!(wide.pass && wide.grid.as_ref().unwrap().points == 3);
        let values = scan.normalized(1.0, 2.0);
        let lo = values[2..].iter().copied().fold(f64::INFINITY, f64::min);
        assert_relative_eq!(log_rate_band(&scan, lo, 2.0).slack, 0.0, epsilon = 1e-15);
    }

}
