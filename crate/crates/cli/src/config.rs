use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable naming the default configuration directory.
pub const CONFIG_DIR_ENV: &str = "MASSGEOM_CONFIG_DIR";

/// File looked up in the configuration directory when `--config` is absent.
pub const DEFAULT_CONFIG_FILE: &str = "massgeom.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    Adm,
    LamIdentity,
    ConformalMass,
    GraphMass,
    PenroseGraph,
    Afi,
    Zas,
    Quasilocal,
    Geodesic,
    Embedding,
    Inversion,
    All,
}

impl SuiteId {
    pub const CONCRETE: [SuiteId; 11] = [
        SuiteId::Adm,
        SuiteId::LamIdentity,
        SuiteId::ConformalMass,
        SuiteId::GraphMass,
        SuiteId::PenroseGraph,
        SuiteId::Afi,
        SuiteId::Zas,
        SuiteId::Quasilocal,
        SuiteId::Geodesic,
        SuiteId::Embedding,
        SuiteId::Inversion,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteId::Adm => "adm",
            SuiteId::LamIdentity => "lam-identity",
            SuiteId::ConformalMass => "conformal-mass",
            SuiteId::GraphMass => "graph-mass",
            SuiteId::PenroseGraph => "penrose-graph",
            SuiteId::Afi => "afi",
            SuiteId::Zas => "zas",
            SuiteId::Quasilocal => "quasilocal",
            SuiteId::Geodesic => "geodesic",
            SuiteId::Embedding => "embedding",
            SuiteId::Inversion => "inversion",
            SuiteId::All => "all",
        }
    }

    /// The suites this id runs, in report order.
    pub fn expand(self) -> Vec<SuiteId> {
        match self {
            SuiteId::All => Self::CONCRETE.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteId {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        SuiteId::CONCRETE
            .into_iter()
            .chain([SuiteId::All])
            .find(|id| id.as_str() == s)
            .ok_or_else(|| CliError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

/// Radii `r0 · ratio^k`, `k < count`, for flux extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderConfig {
    /// First radius; chosen per instance when absent.
    pub r0: Option<f64>,
    pub ratio: f64,
    pub count: usize,
    pub max_order: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            r0: None,
            ratio: 2.0,
            count: 7,
            max_order: 4,
        }
    }
}

/// Everything that determines a report. Equal configs give byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub suite: SuiteId,
    /// Dimensions for instance-driven suites.
    pub dims: Vec<usize>,
    /// Dimensions of the random fields in `lam-identity`.
    pub lam_dims: Vec<usize>,
    /// Replaces every built-in tolerance.
    pub tolerance: Option<f64>,
    /// Per-check tolerances by check kind; wins over `tolerance`.
    pub tolerances: BTreeMap<String, f64>,
    pub sphere_degree: usize,
    pub radial_order: usize,
    /// Angular degree for the boundary inequality.
    pub afi_degree: usize,
    pub ladder: LadderConfig,
    pub fit_radii: Vec<f64>,
    pub seed: u64,
    pub lam_fields: usize,
    pub lam_points: usize,
    pub lam_fd_points: usize,
    pub inversion_points: usize,
    pub afi_ellipsoids: usize,
    pub two_center_separations: Vec<f64>,
    #[serde(skip_serializing)]
    pub format: Format,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    /// Extra directories of instance files.
    #[serde(skip_serializing)]
    pub instance_dirs: Vec<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suite: SuiteId::All,
            dims: vec![3, 4, 5],
            lam_dims: vec![3, 4],
            tolerance: None,
            tolerances: BTreeMap::new(),
            sphere_degree: 20,
            radial_order: 24,
            afi_degree: 80,
            ladder: LadderConfig::default(),
            fit_radii: vec![50.0, 100.0],
            seed: 0,
            lam_fields: 200,
            lam_points: 50,
            lam_fd_points: 50,
            inversion_points: 100,
            afi_ellipsoids: 16,
            two_center_separations: vec![8.0, 16.0, 32.0],
            format: Format::Json,
            out: None,
            instance_dirs: Vec::new(),
        }
    }
}

impl SuiteConfig {
    /// Reads a TOML file, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: SuiteConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        let mut cfg = cfg;
        if let Some(dir) = path.parent() {
            for d in &mut cfg.instance_dirs {
                if d.is_relative() {
                    *d = dir.join(&*d);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The config file named by `--config`, else the one in the config directory, else defaults.
    pub fn load(explicit: Option<&Path>) -> CliResult<Self> {
        if let Some(p) = explicit {
            return Self::from_file(p);
        }
        if let Some(dir) = config_dir() {
            let p = dir.join(DEFAULT_CONFIG_FILE);
            if p.is_file() {
                return Self::from_file(&p);
            }
        }
        Ok(Self::default())
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if let Some(n) = self.dims.iter().chain(&self.lam_dims).find(|n| !(3..=8).contains(*n)) {
            return bad(format!("dimension {n} outside 3..=8"));
        }
        if self.sphere_degree == 0 || self.afi_degree == 0 || self.radial_order == 0 {
            return bad("quadrature orders must be positive".into());
        }
        if self.ladder.count < 2 || !(self.ladder.ratio > 1.0) || self.ladder.r0.is_some_and(|r| !(r > 0.0)) {
            return bad("ladder needs count >= 2, ratio > 1 and r0 > 0".into());
        }
        if self.fit_radii.len() < 2 || self.fit_radii.iter().any(|r| !(*r > 0.0)) {
            return bad("fit_radii needs at least two positive radii".into());
        }
        if let Some((k, t)) = self
            .tolerance
            .map(|t| ("tolerance", t))
            .into_iter()
            .chain(self.tolerances.iter().map(|(k, t)| (k.as_str(), *t)))
            .find(|(_, t)| !(*t >= 0.0))
        {
            return bad(format!("{k}: tolerance must be >= 0, got {t}"));
        }
        if self.two_center_separations.iter().any(|d| !(*d >= 4.0)) {
            return bad("two-center separations must be >= 4".into());
        }
        Ok(())
    }

    /// Tolerance for a check kind: per-kind override, then the global one, then `default`.
    pub fn tol(&self, kind: &str, default: f64) -> f64 {
        self.tolerances
            .get(kind)
            .copied()
            .or(self.tolerance)
            .unwrap_or(default)
    }
}

pub fn config_dir() -> Option<PathBuf> {
    std::env::var_os(CONFIG_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}
