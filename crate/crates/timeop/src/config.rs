//! Declarative run configuration: observable mode, grid family, suites,
//! test functions, and output location. Loaded from TOML; every field has a
//! default matching the standard desk-scale setup.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TestFunction;
use crate::report::SymbolTable;

/// Physical reading of the half-line construction. Pure relabeling: the same
/// operators verify the time observable, the half-line momentum, or the
/// radial momentum, with E traded for the corresponding variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableMode {
    Time,
    HalflineMomentum,
    RadialMomentum,
}

impl ObservableMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(ObservableMode::Time),
            "halfline-momentum" | "halfline_momentum" => Ok(ObservableMode::HalflineMomentum),
            "radial-momentum" | "radial_momentum" => Ok(ObservableMode::RadialMomentum),
            other => Err(Error::Config(format!("unknown observable mode `{other}`"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ObservableMode::Time => "time",
            ObservableMode::HalflineMomentum => "halfline_momentum",
            ObservableMode::RadialMomentum => "radial_momentum",
        }
    }

    /// Symbol table used by reports in this mode.
    pub fn symbols(&self) -> SymbolTable {
        match self {
            ObservableMode::Time => SymbolTable {
                variable: "E".into(),
                conjugate: "t".into(),
                multiplication_operator: "H".into(),
                derivative_operator: "T".into(),
                sqrt_operator: "T_sqrt".into(),
            },
            ObservableMode::HalflineMomentum => SymbolTable {
                variable: "x".into(),
                conjugate: "p".into(),
                multiplication_operator: "X".into(),
                derivative_operator: "P".into(),
                sqrt_operator: "P_sqrt".into(),
            },
            ObservableMode::RadialMomentum => SymbolTable {
                variable: "r".into(),
                conjugate: "p_r".into(),
                multiplication_operator: "R".into(),
                derivative_operator: "P_r".into(),
                sqrt_operator: "P_r_sqrt".into(),
            },
        }
    }
}

/// Named verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Domains,
    Deficiency,
    Spectra,
    TimeRep,
    Hft,
    Algebra,
    Distribution,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 7] = [
        SuiteKind::Domains,
        SuiteKind::Deficiency,
        SuiteKind::Spectra,
        SuiteKind::TimeRep,
        SuiteKind::Hft,
        SuiteKind::Algebra,
        SuiteKind::Distribution,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteKind::Domains => "domains",
            SuiteKind::Deficiency => "deficiency",
            SuiteKind::Spectra => "spectra",
            SuiteKind::TimeRep => "time_rep",
            SuiteKind::Hft => "hft",
            SuiteKind::Algebra => "algebra",
            SuiteKind::Distribution => "distribution",
        }
    }

    /// True when the suite needs the eigendecomposition-backed operators.
    pub fn needs_spectral(&self) -> bool {
        matches!(
            self,
            SuiteKind::Spectra | SuiteKind::TimeRep | SuiteKind::Algebra | SuiteKind::Distribution
        )
    }
}

/// Output format for report files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

/// A named analytic test function with positional parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl FunctionSpec {
    pub fn resolve(&self, hbar: f64) -> Result<TestFunction> {
        TestFunction::by_name(&self.name, &self.params, hbar)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("reports"),
            format: OutputFormat::Json,
        }
    }
}

/// Full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_mode")]
    pub mode: ObservableMode,
    #[serde(default = "default_e_max")]
    pub e_max: f64,
    /// Interior node counts, ascending.
    #[serde(default = "default_n_list")]
    pub n: Vec<usize>,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default = "default_suites")]
    pub suites: Vec<SuiteKind>,
    #[serde(default = "default_test_functions")]
    pub test_functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Reserved for future stochastic checks; all current computations are
    /// deterministic and ignore it.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_mode() -> ObservableMode {
    ObservableMode::Time
}

fn default_e_max() -> f64 {
    50.0
}

fn default_n_list() -> Vec<usize> {
    vec![499, 999, 1999]
}

fn default_hbar() -> f64 {
    1.0
}

fn default_suites() -> Vec<SuiteKind> {
    SuiteKind::ALL.to_vec()
}

fn default_test_functions() -> Vec<FunctionSpec> {
    vec![
        FunctionSpec {
            name: "poly_exp".into(),
            params: vec![1.0, 1.0],
        },
        FunctionSpec {
            name: "poly_exp".into(),
            params: vec![2.0, 1.0],
        },
        FunctionSpec {
            name: "gaussian_bump".into(),
            params: vec![5.0, 1.0],
        },
    ]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: default_mode(),
            e_max: default_e_max(),
            n: default_n_list(),
            hbar: default_hbar(),
            suites: default_suites(),
            test_functions: default_test_functions(),
            output: OutputConfig::default(),
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(s).map_err(|e| Error::Config(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return Err(Error::Config("at least one suite must be selected".into()));
        }
        if self.n.is_empty() {
            return Err(Error::Config("at least one grid size is required".into()));
        }
        if self.n.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("grid sizes must be strictly ascending".into()));
        }
        if !(self.e_max > 0.0) {
            return Err(Error::Config(format!(
                "e_max must be positive, got {}",
                self.e_max
            )));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::Config(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        for f in &self.test_functions {
            f.resolve(self.hbar)?;
        }
        Ok(())
    }
}
