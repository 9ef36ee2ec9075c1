//! Named checks grouped into suites.

use meanconvex::conformal::oracle::{law_suite, poincare_recovery};
use meanconvex::estimates::{self, ConstantForm, DecayScan, Envelope, EstimateConfig};
use meanconvex::geodesic::{self, FixtureGeodesic};
use meanconvex::hypersurface::FixtureSpec;
use meanconvex::report::VerificationReport;
use meanconvex::spaceform::SpaceForm;
use meanconvex::variation::{self, Geometry};
use meanconvex::{Point, Result, Vector};

use crate::config::{RunConfig, Suite};

/// What a check produced. `None` from a check means it does not apply.
pub struct Outcome {
    pub report: VerificationReport,
    pub csv: Option<String>,
}

type Runner = Box<dyn Fn(&RunConfig) -> Result<Option<Outcome>> + Send + Sync>;

pub struct Check {
    pub suite: Suite,
    pub name: String,
    run: Runner,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>, run: impl Fn(&RunConfig) -> Result<Option<Outcome>> + Send + Sync + 'static) -> Self {
        Self {
            suite,
            name: name.into(),
            run: Box::new(run),
        }
    }

    pub fn run(&self, cfg: &RunConfig) -> Result<Option<Outcome>> {
        (self.run)(cfg)
    }
}

fn report(r: VerificationReport) -> Result<Option<Outcome>> {
    Ok(Some(Outcome { report: r, csv: None }))
}

fn scan_outcome(scan: &DecayScan) -> Result<Option<Outcome>> {
    Ok(Some(Outcome {
        report: scan.report(),
        csv: Some(scan.to_csv()),
    }))
}

fn fixture(name: &str, params: &[(&str, f64)]) -> FixtureSpec {
    let map = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    FixtureSpec::from_name(name, &map).expect("built-in fixture parameters are valid")
}

fn tag(spec: &FixtureSpec) -> String {
    match *spec {
        FixtureSpec::PoincareCircles { a } | FixtureSpec::HyperbolicEquidistant { a, .. } => {
            format!("{}-a{a}", spec.name())
        }
        _ => spec.name().to_string(),
    }
}

/// All checks of `suite` for this configuration, in a fixed order.
pub fn checks(cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for suite in Suite::CONCRETE {
        if !cfg.suite.includes(suite) {
            continue;
        }
        match suite {
            Suite::Conformal => conformal(&mut out),
            Suite::Lemmas => lemmas(&mut out),
            Suite::Examples => examples(cfg, &mut out),
            Suite::Geodesic => geodesic_suite(cfg, &mut out),
            Suite::Estimates => estimates_suite(cfg, &mut out),
            Suite::Scan => scan(cfg, &mut out),
            Suite::All => unreachable!(),
        }
    }
    out
}

fn conformal(out: &mut Vec<Check>) {
    for dim in 2..=4 {
        for hyperbolic in [false, true] {
            let model = if hyperbolic { "hyperbolic" } else { "flat" };
            out.push(Check::new(Suite::Conformal, format!("conformal-laws-{model}-d{dim}"), move |cfg| {
                let space = if hyperbolic {
                    SpaceForm::hyperbolic(dim, 1.0)?
                } else {
                    SpaceForm::euclidean(dim)
                };
                report(law_suite(&space, cfg.grids.law_samples, cfg.seed, cfg.tolerances.law)?)
            }));
        }
        out.push(Check::new(Suite::Conformal, format!("poincare-recovery-d{dim}"), move |cfg| {
            report(poincare_recovery(dim, &[0.5, 1.0, 2.0], cfg.seed)?)
        }));
    }
}

fn lemmas(out: &mut Vec<Check>) {
    for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
        let g = match geometry {
            Geometry::Euclidean => "euclid",
            Geometry::Hyperbolic => "hyperbolic",
        };
        for n in 1..=3 {
            for radius in [10.0, 100.0] {
                out.push(Check::new(Suite::Lemmas, format!("crucial-term-bounds-{g}-n{n}-r{radius}"), move |cfg| {
                    report(variation::crucial_bounds_scan(
                        geometry,
                        n,
                        radius,
                        cfg.grids.radial_points,
                        cfg.grids.tangent_points,
                    )?)
                }));
            }
        }
    }
    out.push(Check::new(Suite::Lemmas, "elementary-inequalities", |cfg| {
        report(estimates::elementary_inequalities(cfg.grids.inequality_points))
    }));
    out.push(Check::new(Suite::Lemmas, "phi-calculus", |cfg| {
        report(variation::phi_calculus_grid(&estimates::log_grid(1e-2, 50.0, cfg.grids.phi_lengths))?)
    }));
    for radius in [10.0, 100.0] {
        out.push(Check::new(Suite::Lemmas, format!("profile-monotonicity-r{radius}"), move |cfg| {
            report(variation::profile_monotonicity(radius, cfg.grids.inequality_points)?)
        }));
    }
    out.push(Check::new(Suite::Lemmas, "ball-lemma", |_| report(estimates::ball_lemma()?)));
    let slab = GeodesicRun::centered(fixture("euclid-slab", &[]), 10.0);
    out.push(Check::new(Suite::Lemmas, "length-comparison-euclid-slab", {
        let run = slab.clone();
        move |cfg| run.length_comparison(cfg)
    }));
    out.push(Check::new(Suite::Lemmas, "shortness-bound-euclid-slab", move |cfg| slab.shortness(cfg)));
}

fn examples(cfg: &RunConfig, out: &mut Vec<Check>) {
    let chosen = cfg.fixture.as_ref().map(|f| f.spec.clone());
    let wanted = |name: &str| chosen.as_ref().is_none_or(|s| s.name() == name);
    let circles: Vec<f64> = match chosen {
        Some(FixtureSpec::PoincareCircles { a }) => vec![a],
        Some(_) => Vec::new(),
        None => vec![0.5, 1.0, 2.0],
    };
    for a in circles {
        out.push(Check::new(Suite::Examples, format!("example-circles-a{a}"), move |cfg| {
            report(estimates::example_circles(a, cfg.grids.segments)?)
        }));
    }
    if let Some(FixtureSpec::HyperbolicEquidistant { a, dim }) = chosen {
        out.push(Check::new(Suite::Examples, format!("sharp-equidistant-a{a}-d{dim}"), move |_| {
            report(estimates::sharpness_scan(a, dim, &estimates::log_grid(20.0, 2000.0, 7))?)
        }));
    }
    if wanted("revolution-r4") {
        out.push(Check::new(Suite::Examples, "revolution-formula", |_| {
            report(estimates::revolution_formula(50))
        }));
    }
    if wanted("log-graph") {
        out.push(Check::new(Suite::Examples, "log-graph-curvature", |_| {
            report(estimates::log_graph_curvature(50)?)
        }));
    }
    let (d, dim) = match chosen {
        Some(FixtureSpec::EuclidSlab { d, dim }) => (d, dim),
        _ => (1.0, 3),
    };
    if wanted("euclid-slab") {
        out.push(Check::new(Suite::Examples, format!("parallel-planes-d{d}"), move |cfg| {
            report(geodesic::parallel_planes(d, dim, cfg.grids.segments)?)
        }));
    }
}

/// A fixture minimizer under the radial profile, shared by several checks.
#[derive(Clone)]
struct GeodesicRun {
    spec: FixtureSpec,
    center: Vec<f64>,
    radius: f64,
}

impl GeodesicRun {
    fn centered(spec: FixtureSpec, radius: f64) -> Self {
        let dim = match spec {
            FixtureSpec::EuclidSlab { dim, .. } | FixtureSpec::HyperbolicEquidistant { dim, .. } => dim,
            _ => 2,
        };
        Self {
            spec,
            center: vec![0.0; dim],
            radius,
        }
    }

    fn tag(&self) -> String {
        let mut t = tag(&self.spec);
        if self.center.iter().any(|c| *c != 0.0) {
            t.push_str("-offcenter");
        }
        t
    }

    fn solve(&self, cfg: &RunConfig) -> Result<FixtureGeodesic> {
        let fixture = self.spec.build()?;
        geodesic::solve_fixture(&fixture, Point::from_vec(self.center.clone()), self.radius, cfg.grids.segments)
    }

    fn identity(&self, cfg: &RunConfig) -> Result<Option<Outcome>> {
        let run = self.solve(cfg)?;
        let r = geodesic::identity_report(run.u.as_ref(), &run.solution.curve, cfg.tolerances.geodesic_identity)?;
        report(r.input("fixture", run.fixture.name()).input("R", self.radius))
    }

    fn length_comparison(&self, cfg: &RunConfig) -> Result<Option<Outcome>> {
        let run = self.solve(cfg)?;
        match geodesic::length_comparison(&run.fixture.space, run.u.as_ref(), &run.solution.curve, &run.reference, self.radius) {
            Ok(r) => report(r.input("fixture", run.fixture.name())),
            Err(meanconvex::Error::Hypothesis(msg)) => {
                log::info!("length comparison skipped for {}: {msg}", self.tag());
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    fn shortness(&self, cfg: &RunConfig) -> Result<Option<Outcome>> {
        let run = self.solve(cfg)?;
        let l0 = meanconvex::geodesic::DiscreteCurve::new(run.fixture.space, run.u.as_ref(), run.reference.clone())?.length();
        if l0 > self.radius / 4.0 {
            log::info!("shortness bound skipped for {}: L0 = {l0} exceeds R/4", self.tag());
            return Ok(None);
        }
        let r = geodesic::shortness_check(run.u.as_ref(), &run.solution.curve, l0 / self.radius);
        report(r.input("fixture", run.fixture.name()).input("R", self.radius))
    }

    fn traced(&self, cfg: &RunConfig) -> Result<Option<Outcome>> {
        let run = self.solve(cfg)?;
        let dim = run.fixture.space.dim();
        let directions: Vec<Vector> = (1..dim)
            .map(|k| {
                let mut e = Vector::zeros(dim);
                e[k] = 1.0;
                e
            })
            .collect();
        // translations are only variation fields along a straight minimizer in flat space
        let brute = matches!(self.spec, FixtureSpec::EuclidSlab { .. });
        let (r, _) = variation::traced_variation_report(&run, brute.then_some(directions.as_slice()))?;
        report(r)
    }
}

fn geodesic_runs(cfg: &RunConfig) -> Vec<GeodesicRun> {
    if let Some(f) = &cfg.fixture {
        if matches!(f.spec, FixtureSpec::LogGraph | FixtureSpec::RevolutionR4) {
            log::warn!("{} has no geodesic run; using the built-in list", f.spec.name());
        } else {
            return vec![GeodesicRun::centered(f.spec.clone(), f.radius)];
        }
    }
    vec![
        GeodesicRun::centered(fixture("euclid-slab", &[]), 10.0),
        GeodesicRun::centered(fixture("poincare-circles", &[("a", 1.0)]), 10.0),
        GeodesicRun::centered(fixture("poincare-circles", &[("a", 0.5)]), 12.0),
        GeodesicRun::centered(fixture("hyperbolic-equidistant", &[("a", 2.0), ("dim", 3.0)]), 10.0),
        GeodesicRun {
            center: vec![0.1, 0.3],
            ..GeodesicRun::centered(fixture("poincare-circles", &[("a", 1.0)]), 3.0)
        },
    ]
}

fn geodesic_suite(cfg: &RunConfig, out: &mut Vec<Check>) {
    out.push(Check::new(Suite::Geodesic, "parallel-planes-d1", |cfg| {
        report(geodesic::parallel_planes(1.0, 3, cfg.grids.segments)?)
    }));
    for run in geodesic_runs(cfg) {
        let t = run.tag();
        let r = run.clone();
        out.push(Check::new(Suite::Geodesic, format!("geodesic-identity-{t}"), move |c| r.identity(c)));
        let r = run.clone();
        out.push(Check::new(Suite::Geodesic, format!("length-comparison-{t}"), move |c| r.length_comparison(c)));
        let r = run.clone();
        out.push(Check::new(Suite::Geodesic, format!("shortness-bound-{t}"), move |c| r.shortness(c)));
        out.push(Check::new(Suite::Geodesic, format!("traced-variation-{t}"), move |c| run.traced(c)));
    }
}

fn estimates_suite(cfg: &RunConfig, out: &mut Vec<Check>) {
    out.push(Check::new(Suite::Estimates, "main-estimate-euclid-slab", |_| {
        let c = EstimateConfig {
            fixture: "euclid-slab".into(),
            ..EstimateConfig::new(2, 10.0, 1.0, 0.0, 0.0)
        };
        report(estimates::main_estimate_euclid(&c)?)
    }));
    out.push(Check::new(Suite::Estimates, "main-estimate-euclid-log-graph", |_| {
        report(estimates::log_graph_estimate(6f64.exp(), 20.0)?)
    }));
    out.push(Check::new(Suite::Estimates, "main-estimate-euclid-probe", |_| {
        let c = EstimateConfig {
            probe: true,
            ..EstimateConfig::new(2, 100.0, 1.0, 1.0, 1.0)
        };
        report(estimates::main_estimate_euclid(&c)?)
    }));
    let equidistant: Vec<(f64, usize)> = match cfg.fixture.as_ref().map(|f| &f.spec) {
        Some(FixtureSpec::HyperbolicEquidistant { a, dim }) => vec![(*a, *dim)],
        Some(FixtureSpec::PoincareCircles { a }) => vec![(*a, 2)],
        _ => vec![(0.5, 3), (1.0, 3), (2.0, 3)],
    };
    for (a, dim) in equidistant {
        let n = dim - 1;
        let (d, h) = estimates::equidistant_closed_form(a, n);
        for (form, label, radius) in [
            (ConstantForm::Statement, "", 100.0),
            (ConstantForm::QuarterRadius, "-quarter", 400.0),
        ] {
            out.push(Check::new(
                Suite::Estimates,
                format!("main-estimate-hyperbolic-a{a}-d{dim}{label}"),
                move |_| {
                    let c = EstimateConfig {
                        fixture: "hyperbolic-equidistant".into(),
                        kappa: 1.0,
                        form,
                        ..EstimateConfig::new(n, radius, d, h, h)
                    };
                    report(estimates::main_estimate_hyperbolic(&c)?)
                },
            ));
        }
        out.push(Check::new(Suite::Estimates, format!("sharp-equidistant-a{a}-d{dim}"), move |_| {
            report(estimates::sharpness_scan(a, dim, &estimates::log_grid(20.0, 2000.0, 7))?)
        }));
    }
    out.push(Check::new(Suite::Estimates, "main-estimate-hyperbolic-probe", |_| {
        let c = EstimateConfig {
            kappa: 1.0,
            probe: true,
            ..EstimateConfig::new(2, 100.0, 1.0, 6.0, 6.0)
        };
        report(estimates::main_estimate_hyperbolic(&c)?)
    }));
}

fn envelope_for(spec: &FixtureSpec) -> Envelope {
    match spec {
        FixtureSpec::RevolutionR4 => Envelope::Quadratic,
        FixtureSpec::PoincareCircles { .. } | FixtureSpec::HyperbolicEquidistant { .. } => {
            Envelope::Hyperbolic { kappa: 1.0 }
        }
        _ => Envelope::Linear,
    }
}

fn scan(cfg: &RunConfig, out: &mut Vec<Check>) {
    if let (Some(f), Some(radii)) = (&cfg.fixture, &cfg.scan.radii) {
        let spec = f.spec.clone();
        let radii = radii.clone();
        let envelope = envelope_for(&spec);
        out.push(Check::new(Suite::Scan, format!("{}-{}", envelope.check_id(), tag(&spec)), move |_| {
            if radii.is_empty() {
                log::warn!("empty radius grid for {}", spec.name());
            }
            scan_outcome(&estimates::decay_scan(&spec.build()?, &radii, envelope)?)
        }));
        return;
    }
    let points = cfg.scan.points;
    let log_radii = estimates::log_grid(4f64.exp(), 10f64.exp(), points);
    let defaults: Vec<(FixtureSpec, Vec<f64>)> = vec![
        (fixture("log-graph", &[]), log_radii.clone()),
        (fixture("euclid-slab", &[]), estimates::log_grid(10.0, 1000.0, points)),
        (fixture("revolution-r4", &[]), estimates::log_grid(30.0, 3000.0, points)),
        (
            fixture("hyperbolic-equidistant", &[("a", 1.0), ("dim", 3.0)]),
            estimates::log_grid(2.0, 20.0, points),
        ),
    ];
    for (spec, radii) in defaults {
        if cfg.fixture.as_ref().is_some_and(|f| f.spec.name() != spec.name()) {
            continue;
        }
        let envelope = envelope_for(&spec);
        let t = tag(&spec);
        out.push(Check::new(Suite::Scan, format!("{}-{t}", envelope.check_id()), move |_| {
            scan_outcome(&estimates::decay_scan(&spec.build()?, &radii, envelope)?)
        }));
    }
    if cfg.fixture.as_ref().is_none_or(|f| f.spec.name() == "log-graph") {
        out.push(Check::new(Suite::Scan, "decay-rate-log-graph", move |_| {
            let scan = estimates::decay_scan(&fixture("log-graph", &[]).build()?, &log_radii, Envelope::Linear)?;
            report(estimates::log_rate_band(&scan, 0.8, 1.2))
        }));
    }
}
