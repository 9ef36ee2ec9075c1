//! Run configuration: a TOML file merged with command-line and environment
//! overrides, validated before anything is written.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use meanconvex::hypersurface::FixtureSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Conformal,
    Lemmas,
    Examples,
    Geodesic,
    Estimates,
    Scan,
    All,
}

impl Suite {
    pub const CONCRETE: [Suite; 6] = [
        Suite::Conformal,
        Suite::Lemmas,
        Suite::Examples,
        Suite::Geodesic,
        Suite::Estimates,
        Suite::Scan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Conformal => "conformal",
            Suite::Lemmas => "lemmas",
            Suite::Examples => "examples",
            Suite::Geodesic => "geodesic",
            Suite::Estimates => "estimates",
            Suite::Scan => "scan",
            Suite::All => "all",
        }
    }

    pub fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// File layout. Every table rejects unknown keys.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub suite: Option<Suite>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub fixture: Option<FixtureConfig>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub scan: ScanConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Profile radius for geodesic runs.
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    pub law_samples: usize,
    pub radial_points: usize,
    pub tangent_points: usize,
    pub segments: usize,
    pub phi_lengths: usize,
    pub inequality_points: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            law_samples: 50,
            radial_points: 2000,
            tangent_points: 200,
            segments: 256,
            phi_lengths: 25,
            inequality_points: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub law: f64,
    pub geodesic_identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            law: 1e-4,
            geodesic_identity: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub points: usize,
    /// Explicit radius grid for the configured fixture.
    pub radii: Option<Vec<f64>>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { points: 13, radii: None }
    }
}

/// Command-line and environment values, which win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub suite: Option<Suite>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct FixtureChoice {
    pub spec: FixtureSpec,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub suite: Suite,
    pub out: PathBuf,
    pub seed: u64,
    pub workers: usize,
    pub fixture: Option<FixtureChoice>,
    pub grids: Grids,
    pub tolerances: Tolerances,
    pub scan: ScanConfig,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<Self, ConfigError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::parse(&text)?
            }
            None => FileConfig::default(),
        };
        Self::resolve(file, overrides)
    }

    pub fn parse(text: &str) -> Result<FileConfig, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn resolve(file: FileConfig, o: Overrides) -> Result<Self, ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let workers = o
            .workers
            .or(file.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return invalid("workers must be at least 1".into());
        }
        for (key, v) in [
            ("tolerances.law", file.tolerances.law),
            ("tolerances.geodesic_identity", file.tolerances.geodesic_identity),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return invalid(format!("{key} must be a positive number, got {v}"));
            }
        }
        let g = &file.grids;
        if g.law_samples == 0 || g.phi_lengths == 0 || g.inequality_points == 0 {
            return invalid("grid sizes must be positive".into());
        }
        if g.radial_points < 2 || g.tangent_points < 2 {
            return invalid("the (r, r_T) grid needs at least 2 points per axis".into());
        }
        if g.segments < 8 {
            return invalid(format!("segments = {} is below the minimum of 8", g.segments));
        }
        if file.scan.points == 0 {
            return invalid("scan.points must be positive".into());
        }
        if let Some(radii) = &file.scan.radii {
            if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
                return invalid("scan radii must be positive".into());
            }
            if radii.windows(2).any(|w| !(w[1] > w[0])) {
                return invalid("scan radii must be strictly increasing".into());
            }
        }
        let fixture = match file.fixture {
            Some(f) => {
                let spec = FixtureSpec::from_name(&f.name, &f.params).map_err(|e| ConfigError::Invalid(e.to_string()))?;
                let radius = f.radius.unwrap_or(10.0);
                if !(radius > 0.0) || !radius.is_finite() {
                    return invalid(format!("fixture.radius must be positive, got {radius}"));
                }
                Some(FixtureChoice { spec, radius })
            }
            None => None,
        };
        if file.scan.radii.is_some() && fixture.is_none() {
            return invalid("scan.radii needs a [fixture] table".into());
        }
        Ok(Self {
            suite: o.suite.or(file.suite).unwrap_or(Suite::All),
            out: o.out.or(file.out).unwrap_or_else(|| PathBuf::from("mclab-out")),
            seed: o.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            workers,
            fixture,
            grids: file.grids,
            tolerances: file.tolerances,
            scan: file.scan,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::resolve(RunConfig::parse(text)?, Overrides::default())
    }

    #[test]
    fn defaults() {
        let c = resolve("").unwrap();
        assert_eq!(c.suite, Suite::All);
        assert_eq!(c.grids.radial_points, 2000);
        assert_eq!(c.seed, DEFAULT_SEED);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(resolve("colour = 1"), Err(ConfigError::Parse(_))));
        assert!(matches!(resolve("[grids]\nradial = 3"), Err(ConfigError::Parse(_))));
        assert!(matches!(
            resolve("[fixture]\nname = \"log-graph\"\nparams = { a = 1.0 }"),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(matches!(resolve("[tolerances]\nlaw = 0.0"), Err(ConfigError::Invalid(_))));
        assert!(matches!(resolve("[tolerances]\nlaw = -1e-3"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn overrides_win() {
        let file = RunConfig::parse("suite = \"lemmas\"\nseed = 3").unwrap();
        let c = RunConfig::resolve(
            file,
            Overrides {
                seed: Some(9),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((c.suite, c.seed), (Suite::Lemmas, 9));
    }

    #[test]
    fn fixture_table() {
        let c = resolve("suite = \"examples\"\n[fixture]\nname = \"poincare-circles\"\nparams = { a = 1.0 }").unwrap();
        assert_eq!(c.fixture.unwrap().spec, FixtureSpec::PoincareCircles { a: 1.0 });
        assert!(resolve("[fixture]\nname = \"torus\"").is_err());
    }
}
