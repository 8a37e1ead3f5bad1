use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cloud::CloudParams;
use crate::error::{Error, Result};
use crate::fem::MaterialParams;
use crate::geometry::{parse_fractures, DirichletSide, FracturePolylines};
use crate::trajectory::Scheme;

use super::assets;

/// Where the fracture polylines come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractureSource {
    /// One of the geometries compiled into the crate (`test1`, `test2`).
    Bundled(String),
    File(PathBuf),
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub extent: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub dirichlet_side: DirichletSide,
    pub fractures: FractureSource,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            extent: [80.0, 80.0],
            nx: 160,
            ny: 160,
            dirichlet_side: DirichletSide::Left,
            fractures: FractureSource::Bundled("test1".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisConfig {
    /// Local eigenfunctions per node.
    pub m: usize,
    /// Relative threshold below which a coarse function counts as linearly
    /// dependent on the others and is dropped. Zero keeps every function.
    pub dependence_tol: f64,
    /// Replace node functions on Dirichlet vertices by nodal hat functions.
    pub boundary_hats: bool,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig { m: 6, dependence_tol: 1e-6, boundary_hats: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schemes: Vec<Scheme>,
    /// Times at which pressure fields are written. Empty means the final time.
    pub snapshot_times: Vec<f64>,
    /// Checked against `tau * n_steps` when given.
    pub t_max: Option<f64>,
    /// Classify every node implicit (degenerate split).
    pub all_implicit: bool,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schemes: vec![Scheme::Fine, Scheme::MsImplicit, Scheme::MsPartial],
            snapshot_times: Vec::new(),
            t_max: None,
            all_implicit: false,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Everything an experiment needs. All fields default to the reference
/// setup, so a config file only has to name what differs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    pub material: MaterialParams,
    pub cloud: CloudParams,
    pub basis: BasisConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. Relative fracture paths are resolved against
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            e => e,
        })?;
        if let FractureSource::File(f) = &cfg.domain.fractures {
            if f.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.domain.fractures = FractureSource::File(base.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if !(d.extent[0] > 0.0 && d.extent[1] > 0.0) || d.nx == 0 || d.ny == 0 {
            return Err(Error::Config("domain extent and cell counts must be positive".into()));
        }
        self.material.validate()?;
        self.cloud.validate()?;
        if self.basis.m == 0 {
            return Err(Error::Config("at least one eigenfunction per node is needed".into()));
        }
        if !(self.basis.dependence_tol >= 0.0 && self.basis.dependence_tol < 1.0) {
            return Err(Error::Config(format!("dependence_tol must lie in [0, 1), got {}", self.basis.dependence_tol)));
        }
        if let Some(t_max) = self.run.t_max {
            let implied = self.material.t_max();
            if (t_max - implied).abs() > 1e-9 * t_max.abs().max(1.0) {
                return Err(Error::Config(format!(
                    "t_max = {t_max} disagrees with tau * n_steps = {} * {} = {implied}",
                    self.material.tau, self.material.n_steps
                )));
            }
        }
        if self.run.schemes.is_empty() {
            return Err(Error::Config("no schemes requested".into()));
        }
        Ok(())
    }

    /// Snapshot times, defaulting to the final time.
    pub fn resolved_snapshot_times(&self) -> Vec<f64> {
        if self.run.snapshot_times.is_empty() {
            vec![self.material.t_max()]
        } else {
            self.run.snapshot_times.clone()
        }
    }

    /// Loads the configured fracture polylines (empty when none).
    pub fn fractures(&self) -> Result<FracturePolylines> {
        let polylines = match &self.domain.fractures {
            FractureSource::None => FracturePolylines::default(),
            FractureSource::Bundled(name) => {
                let text = assets::bundled_fractures(name)
                    .ok_or_else(|| Error::Config(format!("no bundled fracture set named `{name}`")))?;
                parse_fractures(text, Path::new(name))?
            }
            FractureSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_fractures(&text, path)?
            }
        };
        polylines.validate(self.domain.extent)?;
        Ok(polylines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_reference_setup() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.material.k_f, 1e3);
        assert_eq!(cfg.cloud.n_points, 225);
        assert_eq!(cfg.basis.m, 6);
        cfg.validate().unwrap();
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            "[domain]\nnx = 20\nfractures = { file = \"f.csv\" }\n[material]\nk_f = 1e5\n[run]\nschemes = [\"fine\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.domain.nx, 20);
        assert_eq!(cfg.domain.ny, 160);
        assert_eq!(cfg.domain.fractures, FractureSource::File("f.csv".into()));
        assert_eq!(cfg.material.k_f, 1e5);
        assert_eq!(cfg.run.schemes, vec![Scheme::Fine]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("[material]\nkf = 1.0\n").is_err());
    }

    #[test]
    fn inconsistent_t_max() {
        let mut cfg = ExperimentConfig::default();
        cfg.run.t_max = Some(900.0);
        cfg.validate().unwrap();
        cfg.run.t_max = Some(901.0);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
