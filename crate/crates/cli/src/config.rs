//! Effective run configuration: TOML file, then flag overrides, then
//! per-suite defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rising_spectrum::internal_algebra::MultiplierMode;
use rising_spectrum::{ModelParams, SpinMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::format::{f64_17, f64_17_array, opt_f64_17};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Tower,
    Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    So3,
    RotationInvariance,
    FwEquivalence,
    SpinProject,
    DiracReduce,
    K13,
    Laplacian,
    Sixdim,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::So3,
        Suite::RotationInvariance,
        Suite::FwEquivalence,
        Suite::SpinProject,
        Suite::DiracReduce,
        Suite::K13,
        Suite::Laplacian,
        Suite::Sixdim,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::So3 => "so3",
            Suite::RotationInvariance => "rotation-invariance",
            Suite::FwEquivalence => "fw-equivalence",
            Suite::SpinProject => "spin-project",
            Suite::DiracReduce => "dirac-reduce",
            Suite::K13 => "k13",
            Suite::Laplacian => "laplacian",
            Suite::Sixdim => "sixdim",
        }
    }

    fn default_tolerance(self) -> f64 {
        match self {
            Suite::So3 | Suite::Sixdim => 1e-12,
            Suite::K13 | Suite::Laplacian => 1e-6,
            _ => 1e-10,
        }
    }

    fn default_l_max(self) -> u32 {
        match self {
            Suite::So3 => 6,
            _ => 3,
        }
    }

    fn default_spin_dim(self) -> usize {
        match self {
            Suite::SpinProject | Suite::DiracReduce => 2,
            _ => 1,
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Suite::RotationInvariance => 10,
            _ => 5,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Suite::ALL.iter().map(|x| x.as_str()).collect();
                CliError::Config(format!("unknown suite '{s}' (known: {})", known.join(", ")))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parametrisation {
    MassRadius,
    Ab,
}

/// Fully resolved configuration. Serialised verbatim into every report so a
/// report can be replayed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub suite: Option<Suite>,
    pub model: ModelConfig,
    pub basis: BasisConfig,
    pub grid: GridConfig,
    pub check: CheckConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Which pair was given; the other is derived.
    pub parametrisation: Parametrisation,
    #[serde(serialize_with = "f64_17")]
    pub m: f64,
    /// `None` when `b = 0`.
    #[serde(serialize_with = "opt_f64_17")]
    pub r0: Option<f64>,
    #[serde(serialize_with = "f64_17")]
    pub a: f64,
    #[serde(serialize_with = "f64_17")]
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub l_max: u32,
    pub spin_dim: usize,
    pub spin_mode: String,
    #[serde(serialize_with = "f64_17_array")]
    pub p: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(serialize_with = "f64_17")]
    pub k_max: f64,
    pub multiplier: String,
    /// Also run the `k13` suite at `2n` and require every family to improve.
    pub convergence: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(serialize_with = "f64_17")]
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<String>,
    pub json: Option<String>,
    pub timing: bool,
}

impl RunConfig {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let p = match self.model.parametrisation {
            Parametrisation::MassRadius => {
                let r0 = self
                    .model
                    .r0
                    .ok_or_else(|| CliError::Config("r0 is required with the mass-radius pair".into()))?;
                ModelParams::from_mass_radius(self.model.m, r0)?
            }
            Parametrisation::Ab => ModelParams::from_ab(self.model.a, self.model.b)?,
        };
        Ok(p)
    }

    pub fn spin_mode(&self) -> Result<SpinMode, CliError> {
        self.basis
            .spin_mode
            .parse()
            .map_err(|_| CliError::Config(format!("unknown spin_mode '{}'", self.basis.spin_mode)))
    }

    pub fn multiplier(&self) -> Result<MultiplierMode, CliError> {
        self.grid
            .multiplier
            .parse()
            .map_err(|_| CliError::Config(format!("unknown multiplier '{}'", self.grid.multiplier)))
    }

    /// Checks everything that does not need the numerical core.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.command == Command::Check && self.suite.is_none() {
            return Err(CliError::Config("check needs a suite".into()));
        }
        let tol = self.check.tolerance;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("tolerance must be positive, got {tol}")));
        }
        if self.check.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        if self.basis.p.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config("p must be finite".into()));
        }
        self.spin_mode()?;
        self.multiplier()?;
        self.params()?;
        Ok(())
    }
}

/// Sections of the TOML file; every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelFile,
    #[serde(default)]
    pub basis: BasisFile,
    #[serde(default)]
    pub grid: GridFile,
    #[serde(default)]
    pub check: CheckFile,
    #[serde(default)]
    pub output: OutputFile,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub m: Option<f64>,
    pub r0: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

impl ModelFile {
    fn is_empty(&self) -> bool {
        self.m.is_none() && self.r0.is_none() && self.a.is_none() && self.b.is_none()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFile {
    pub l_max: Option<u32>,
    pub spin_dim: Option<usize>,
    pub spin_mode: Option<String>,
    pub p: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub n: Option<usize>,
    pub k_max: Option<f64>,
    pub multiplier: Option<String>,
    pub convergence: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckFile {
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFile {
    pub csv: Option<String>,
    pub json: Option<String>,
    pub timing: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub const DEFAULT_P: [f64; 3] = [0.3, -0.4, 0.5];
pub const DEFAULT_SEED: u64 = 1975;

/// Merges `flags` over `file` and fills defaults. Model keys are taken as a
/// group: if any model flag is given the file's model section is ignored.
pub fn resolve(command: Command, suite: Option<Suite>, file: FileConfig, flags: FileConfig) -> Result<RunConfig, CliError> {
    let model = if flags.model.is_empty() { file.model } else { flags.model };
    let model = resolve_model(&model)?;

    let with_suite = |f: fn(Suite) -> f64, tower: f64| suite.map_or(tower, f);
    let tolerance = flags
        .check
        .tolerance
        .or(file.check.tolerance)
        .unwrap_or_else(|| with_suite(Suite::default_tolerance, 1e-10));
    let l_max = flags
        .basis
        .l_max
        .or(file.basis.l_max)
        .unwrap_or_else(|| suite.map_or(3, Suite::default_l_max));
    let spin_dim = flags
        .basis
        .spin_dim
        .or(file.basis.spin_dim)
        .unwrap_or_else(|| suite.map_or(1, Suite::default_spin_dim));
    let samples = flags
        .check
        .samples
        .or(file.check.samples)
        .unwrap_or_else(|| suite.map_or(5, Suite::default_samples));

    let cfg = RunConfig {
        command,
        suite,
        model,
        basis: BasisConfig {
            l_max,
            spin_dim,
            spin_mode: flags
                .basis
                .spin_mode
                .or(file.basis.spin_mode)
                .unwrap_or_else(|| SpinMode::OrbitalOnly.as_str().into()),
            p: flags.basis.p.or(file.basis.p).unwrap_or(DEFAULT_P),
        },
        grid: GridConfig {
            n: flags.grid.n.or(file.grid.n).unwrap_or(32),
            k_max: flags.grid.k_max.or(file.grid.k_max).unwrap_or(8.0),
            multiplier: flags
                .grid
                .multiplier
                .or(file.grid.multiplier)
                .unwrap_or_else(|| MultiplierMode::Pointwise.as_str().into()),
            convergence: flags.grid.convergence.or(file.grid.convergence).unwrap_or(false),
        },
        check: CheckConfig {
            tolerance,
            samples,
            seed: flags.check.seed.or(file.check.seed).unwrap_or(DEFAULT_SEED),
        },
        output: OutputConfig {
            csv: flags.output.csv.or(file.output.csv),
            json: flags.output.json.or(file.output.json),
            timing: flags.output.timing.or(file.output.timing).unwrap_or(false),
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_model(model: &ModelFile) -> Result<ModelConfig, CliError> {
    let mass_radius = model.m.is_some() || model.r0.is_some();
    let ab = model.a.is_some() || model.b.is_some();
    if mass_radius && ab {
        return Err(CliError::Config(
            "give either (m, r0) or (a, b), not both; the other pair is derived".into(),
        ));
    }
    if ab {
        let a = model.a.unwrap_or(2.0);
        let b = model.b.unwrap_or(2.0);
        let params = ModelParams::from_ab(a, b)?;
        Ok(ModelConfig {
            parametrisation: Parametrisation::Ab,
            m: params.m(),
            r0: (b > 0.0).then(|| params.r0()),
            a,
            b,
        })
    } else {
        let m = model.m.unwrap_or(1.0);
        let r0 = model.r0.unwrap_or(1.0);
        let params = ModelParams::from_mass_radius(m, r0)?;
        Ok(ModelConfig {
            parametrisation: Parametrisation::MassRadius,
            m,
            r0: Some(r0),
            a: params.a(),
            b: params.b(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags_model(m: ModelFile) -> FileConfig {
        FileConfig {
            model: m,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_follow_suite() {
        let c = resolve(Command::Check, Some(Suite::So3), FileConfig::default(), FileConfig::default()).unwrap();
        assert_eq!(c.basis.l_max, 6);
        assert_eq!(c.check.tolerance, 1e-12);
        assert_eq!(c.model.a, 2.0);
        assert_eq!(c.model.b, 2.0);
        let c = resolve(Command::Check, Some(Suite::K13), FileConfig::default(), FileConfig::default()).unwrap();
        assert_eq!(c.check.tolerance, 1e-6);
        assert_eq!(c.grid.n, 32);
    }

    #[test]
    fn mixed_pairs_rejected() {
        let m = ModelFile {
            m: Some(1.0),
            b: Some(1.0),
            ..Default::default()
        };
        let err = resolve(Command::Tower, None, FileConfig::default(), flags_model(m)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn model_flags_replace_file_section() {
        let file = flags_model(ModelFile {
            m: Some(3.0),
            r0: Some(2.0),
            ..Default::default()
        });
        let flags = flags_model(ModelFile {
            a: Some(1.0),
            b: Some(0.0),
            ..Default::default()
        });
        let c = resolve(Command::Tower, None, file, flags).unwrap();
        assert_eq!(c.model.parametrisation, Parametrisation::Ab);
        assert_eq!(c.model.m, 0.5);
        assert_eq!(c.model.r0, None);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut flags = FileConfig::default();
        flags.check.tolerance = Some(0.0);
        assert!(resolve(Command::Tower, None, FileConfig::default(), flags).is_err());
        let mut flags = FileConfig::default();
        flags.basis.spin_mode = Some("weyl".into());
        assert!(resolve(Command::Tower, None, FileConfig::default(), flags).is_err());
        assert!("k14".parse::<Suite>().is_err());
    }

    #[test]
    fn toml_sections_parse() {
        let text = r#"
            [model]
            r0 = 2.0
            [basis]
            l_max = 4
            p = [0.0, 0.0, 1.0]
            [check]
            seed = 7
        "#;
        let file: FileConfig = toml::from_str(text).unwrap();
        let c = resolve(Command::Tower, None, file, FileConfig::default()).unwrap();
        assert_eq!(c.model.m, 1.0);
        assert_eq!(c.model.b, 1.0);
        assert_eq!(c.basis.l_max, 4);
        assert_eq!(c.check.seed, 7);
        assert!(toml::from_str::<FileConfig>("[model]\nmass = 1.0").is_err());
    }
}
