//! Run configuration, read from TOML.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use carleson_core::io::{read_atoms, read_grid};
use carleson_core::measure::Atom;
use carleson_core::qns::QnsCandidate;
use carleson_core::{Complex64, ConformalMap, Domain, EmbeddingParams, MapCatalogEntry, PlanarMeasure};
use serde::{Deserialize, Serialize};

/// Configuration problem, with the dotted path of the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Square,
    Whitney,
    Boundary,
    Embed,
    Stopping,
    Qns,
    Equivalence,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Square,
        Check::Whitney,
        Check::Boundary,
        Check::Embed,
        Check::Stopping,
        Check::Qns,
        Check::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Square => "square",
            Check::Whitney => "whitney",
            Check::Boundary => "boundary",
            Check::Embed => "embed",
            Check::Stopping => "stopping",
            Check::Qns => "qns",
            Check::Equivalence => "equivalence",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub map: MapCatalogEntry,
    #[serde(default = "default_boundary_samples")]
    pub boundary_samples: usize,
}

fn default_boundary_samples() -> usize {
    1024
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            map: MapCatalogEntry::Identity,
            boundary_samples: default_boundary_samples(),
        }
    }
}

/// Measure on the image domain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    #[default]
    Empty,
    /// Rows of `[x, y, weight]`.
    Atoms { atoms: Vec<[f64; 3]> },
    /// CSV with header `x,y,weight`, relative to the config file.
    Csv { path: PathBuf },
    /// Cartesian grid density CSV, relative to the config file.
    GridCsv { path: PathBuf },
    /// Area measure of the disc on a polar grid.
    Area {
        #[serde(default = "default_levels")]
        levels: u32,
        #[serde(default = "default_sub")]
        sub: usize,
        #[serde(default = "default_bits")]
        angular_bits: u32,
    },
    /// Density `(1 - |z|)^s` on the disc.
    RadialPower {
        s: f64,
        #[serde(default = "default_levels")]
        levels: u32,
        #[serde(default = "default_sub")]
        sub: usize,
        #[serde(default = "default_bits")]
        angular_bits: u32,
    },
}

fn default_levels() -> u32 {
    10
}
fn default_sub() -> usize {
    2
}
fn default_bits() -> u32 {
    9
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub alpha: f64,
}

impl Default for ParamsSpec {
    fn default() -> Self {
        Self {
            p: 1.0,
            q: 1.0,
            alpha: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    /// Dyadic depth of box scans and Whitney-ball levels.
    pub depth: usize,
    /// Exponent for square and Whitney checks; `q/p` when absent.
    pub beta: Option<f64>,
    pub equivalence_beta: f64,
    pub boundary_beta: f64,
    pub family_levels: u32,
    pub family_bits: u32,
    pub max_degree: u32,
    /// Stopping threshold; `exp(1 + BMO)` when absent.
    pub m: Option<f64>,
    pub stopping_depth: usize,
    pub top_samples: usize,
    /// Root arc of the stopping tree: centre angle and length in radians.
    pub root_center: f64,
    pub root_length: f64,
    pub qns_balls: usize,
    pub inversion_tol: f64,
}

impl Default for Knobs {
    fn default() -> Self {
        Self {
            depth: 10,
            beta: None,
            equivalence_beta: 1.5,
            boundary_beta: 1.0,
            family_levels: 5,
            family_bits: 2,
            max_degree: 8,
            m: None,
            stopping_depth: 10,
            top_samples: 32,
            root_center: std::f64::consts::PI,
            root_length: std::f64::consts::FRAC_PI_2,
            qns_balls: 200,
            inversion_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub measure: MeasureSpec,
    #[serde(default)]
    pub params: ParamsSpec,
    #[serde(default = "all_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub knobs: Knobs,
    /// Declared `[lo, hi]` brackets for the headline value of a check.
    #[serde(default)]
    pub brackets: BTreeMap<String, [f64; 2]>,
    /// QNS candidate; the constant 1 when absent.
    #[serde(default)]
    pub qns: Option<QnsCandidate>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn all_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            domain: DomainSpec::default(),
            measure: MeasureSpec::default(),
            params: ParamsSpec::default(),
            checks: all_checks(),
            knobs: Knobs::default(),
            brackets: BTreeMap::new(),
            qns: None,
            base_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let span = e
                .span()
                .map(|s| format!(" (bytes {}..{})", s.start, s.end))
                .unwrap_or_default();
            ConfigError::new("config", format!("{}{span}", e.message()))
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        ConformalMap::new(self.domain.map.clone()).map_err(|e| ConfigError::new("domain.map", e))?;
        if self.domain.boundary_samples < 16 {
            return Err(ConfigError::new(
                "domain.boundary_samples",
                "at least 16 samples are needed",
            ));
        }
        self.params().map_err(|e| ConfigError::new("params", e))?;
        match &self.measure {
            MeasureSpec::Csv { path } | MeasureSpec::GridCsv { path } => {
                let full = self.base_dir.join(path);
                if !full.is_file() {
                    return Err(ConfigError::new(
                        "measure.path",
                        format!("{} does not exist", full.display()),
                    ));
                }
            }
            MeasureSpec::Atoms { atoms } => {
                if let Some(i) = atoms
                    .iter()
                    .position(|a| !(a.iter().all(|v| v.is_finite()) && a[2] >= 0.0))
                {
                    return Err(ConfigError::new(
                        format!("measure.atoms[{i}]"),
                        "coordinates must be finite and the weight non-negative",
                    ));
                }
            }
            _ => {}
        }
        let k = &self.knobs;
        if k.depth > 20 {
            return Err(ConfigError::new("knobs.depth", "must be at most 20"));
        }
        if k.stopping_depth > carleson_core::stopping::MAX_STOPPING_DEPTH {
            return Err(ConfigError::new("knobs.stopping_depth", "must be at most 16"));
        }
        if let Some(m) = k.m {
            if !(m > 1.0) {
                return Err(ConfigError::new("knobs.m", "must exceed 1"));
            }
        }
        if !(k.root_length > 0.0 && k.root_length <= std::f64::consts::TAU) {
            return Err(ConfigError::new("knobs.root_length", "must lie in (0, 2π]"));
        }
        for (name, [lo, hi]) in &self.brackets {
            if !(lo <= hi) {
                return Err(ConfigError::new(
                    format!("brackets.{name}"),
                    "lower end exceeds upper end",
                ));
            }
            if !Check::ALL.iter().any(|c| c.name() == name) && name != "suite" {
                return Err(ConfigError::new(format!("brackets.{name}"), "not a known check"));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> carleson_core::Result<EmbeddingParams> {
        EmbeddingParams::new(self.params.p, self.params.q, self.params.alpha)
    }

    pub fn map(&self) -> ConformalMap {
        ConformalMap::new(self.domain.map.clone()).expect("validated map")
    }

    pub fn domain(&self) -> carleson_core::Result<Domain> {
        Domain::from_map(&self.map(), self.domain.boundary_samples)
    }

    /// Measure on the image domain.
    pub fn measure(&self) -> Result<PlanarMeasure, ConfigError> {
        let open = |path: &Path| {
            let full = self.base_dir.join(path);
            File::open(&full).map_err(|e| ConfigError::new("measure.path", format!("{}: {e}", full.display())))
        };
        let built = match &self.measure {
            MeasureSpec::Empty => Ok(PlanarMeasure::empty()),
            MeasureSpec::Atoms { atoms } => PlanarMeasure::atomic(
                atoms
                    .iter()
                    .map(|a| Atom::new(Complex64::new(a[0], a[1]), a[2]))
                    .collect(),
            ),
            MeasureSpec::Csv { path } => read_atoms(open(path)?),
            MeasureSpec::GridCsv { path } => read_grid(open(path)?).map(PlanarMeasure::GridDensity),
            MeasureSpec::Area {
                levels,
                sub,
                angular_bits,
            } => PlanarMeasure::disc_area(*levels, *sub, *angular_bits),
            MeasureSpec::RadialPower {
                s,
                levels,
                sub,
                angular_bits,
            } => carleson_core::measure::GridDensity::radial_power(*s, *levels, *sub, *angular_bits)
                .map(PlanarMeasure::GridDensity),
        };
        built.map_err(|e| ConfigError::new("measure", e))
    }
}
