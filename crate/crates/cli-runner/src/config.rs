//! Run configuration: one TOML file, every section optional, unknown keys rejected.

use crate::error::CliError;
use henon_lab::{Case, TaylorCoeffs};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "ELORENZ_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    VerifyClosedForms,
    Butterfly,
    Separatrix,
    Cones,
    Quotient,
    HenonNf,
    HenonScan,
    Lyapunov,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::VerifyClosedForms => "verify-closed-forms",
            Self::Butterfly => "butterfly",
            Self::Separatrix => "separatrix",
            Self::Cones => "cones",
            Self::Quotient => "quotient",
            Self::HenonNf => "henon-nf",
            Self::HenonScan => "henon-scan",
            Self::Lyapunov => "lyapunov",
        }
    }

    /// What `--tol` controls, and its default.
    pub fn default_tol(self) -> f64 {
        match self {
            // quadrature tolerance
            Self::VerifyClosedForms => 1e-12,
            // root tolerance of the splitting function
            Self::Butterfly => 1e-11,
            // plateau tolerance of the area solution
            Self::Separatrix => 1e-10,
            // relative tolerance of the return-map integration
            Self::Cones | Self::Quotient => 1e-13,
            // tolerance of the algebraic checks
            Self::HenonNf => 1e-12,
            // Lyapunov sum rule
            Self::HenonScan | Self::Lyapunov => 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Option<CommandName>,
    pub out_dir: Option<PathBuf>,
    pub tol: Option<f64>,
    /// Worker threads; 0 lets the pool decide. Never changes results.
    pub threads: usize,
    pub closed_forms: ClosedFormsParams,
    pub butterfly: ButterflyParams,
    pub separatrix: SeparatrixParams,
    pub cones: ConesParams,
    pub quotient: QuotientParams,
    pub henon_nf: HenonNfParams,
    pub henon_scan: HenonScanParams,
    pub lyapunov: LyapunovParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            command: None,
            out_dir: None,
            tol: None,
            threads: 0,
            closed_forms: Default::default(),
            butterfly: Default::default(),
            separatrix: Default::default(),
            cones: Default::default(),
            quotient: Default::default(),
            henon_nf: Default::default(),
            henon_scan: Default::default(),
            lyapunov: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosedFormsParams {
    pub grid_n: usize,
    pub lambda_range: [f64; 2],
    pub beta_range: [f64; 2],
    pub melnikov_tol: f64,
    pub span: f64,
    pub points: usize,
    pub wronskian_tol: f64,
    pub v4_tol: f64,
    pub slope_rel_tol: f64,
    /// Test hook: name of a check whose computed value gets shifted by 1e-3.
    pub perturb: Option<String>,
}

impl Default for ClosedFormsParams {
    fn default() -> Self {
        Self {
            grid_n: 5,
            lambda_range: [-0.1, 0.1],
            beta_range: [-0.1, 0.1],
            melnikov_tol: 1e-8,
            span: 15.0,
            points: 3001,
            wronskian_tol: 1e-10,
            v4_tol: 1e-9,
            slope_rel_tol: 1e-6,
            perturb: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ButterflyParams {
    pub betas: Vec<f64>,
    /// Bound on `|λ − 2ε|` and `|α − (1 − ε)|` in units of `ε²`.
    pub second_order_factor: f64,
    /// Bound on the profile deviation in units of `ε²`.
    pub profile_factor: f64,
    pub profile_span: f64,
}

impl Default for ButterflyParams {
    fn default() -> Self {
        Self { betas: vec![0.02, 0.01, 0.005], second_order_factor: 5.0, profile_factor: 20.0, profile_span: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeparatrixParams {
    pub betas: Vec<f64>,
    /// Accepted range of successive deviation ratios under halving of `β`.
    pub ratio_range: [f64; 2],
    pub a_max: f64,
}

impl Default for SeparatrixParams {
    fn default() -> Self {
        Self { betas: vec![0.02, 0.01, 0.005], ratio_range: [0.4, 0.6], a_max: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConesParams {
    pub beta: f64,
    pub eps: f64,
    pub grid_n: usize,
    /// Splitting value; the wedge midpoint when absent.
    pub mu: Option<f64>,
    pub ladder_top: f64,
    pub ladder_rungs: usize,
    pub slope_tol: f64,
}

impl Default for ConesParams {
    fn default() -> Self {
        Self { beta: 0.01, eps: 0.4, grid_n: 64, mu: None, ladder_top: 1e-9, ladder_rungs: 12, slope_tol: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuotientParams {
    pub beta: f64,
    pub eps: f64,
    pub samples: usize,
    pub mu: Option<f64>,
}

impl Default for QuotientParams {
    fn default() -> Self {
        Self { beta: 0.01, eps: 0.4, samples: 48, mu: None }
    }
}

/// Taylor coefficients of the Hénon-like map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: [f64; 4],
}

impl Default for Table {
    fn default() -> Self {
        Self { a: 0.5, b: 0.0, c: -0.5, d: [0.1, 0.2, 0.3, 0.4] }
    }
}

impl Table {
    pub fn coeffs(&self) -> TaylorCoeffs {
        TaylorCoeffs::new(self.a, self.b, self.c, self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HenonNfParams {
    pub table: Table,
    pub case: Case,
    pub s_ladder: Vec<f64>,
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub samples: usize,
    pub ratio_range: [f64; 2],
    /// Points per axis of the Vieta grid on `[-3, 3]³`.
    pub vieta_n: usize,
    pub linear_tol: f64,
}

impl Default for HenonNfParams {
    fn default() -> Self {
        Self {
            table: Table::default(),
            case: Case::I,
            s_ladder: vec![0.2, 0.1, 0.05],
            alpha: 0.45,
            lambda: 0.5,
            beta: 1.0,
            samples: 48,
            ratio_range: [1.5, 3.0],
            vieta_n: 9,
            linear_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HenonScanParams {
    pub table: Table,
    pub s: f64,
    pub beta: f64,
    pub alpha: [f64; 2],
    pub lambda: [f64; 2],
    pub grid: [usize; 2],
    pub start: [f64; 3],
    pub n_transient: usize,
    pub n_iter: usize,
    pub renorm_every: usize,
    pub bound: f64,
    pub lambda1_floor: f64,
    pub lambda12_floor: f64,
    pub approach_ratio: f64,
}

impl Default for HenonScanParams {
    fn default() -> Self {
        let d = henon_lab::ScanConfig::default();
        Self {
            table: Table::default(),
            s: d.s,
            beta: d.beta,
            alpha: d.alpha,
            lambda: d.lambda,
            grid: d.grid,
            start: d.start,
            n_transient: d.lyapunov.n_transient,
            n_iter: d.lyapunov.n_iter,
            renorm_every: d.lyapunov.renorm_every,
            bound: d.lyapunov.bound,
            lambda1_floor: d.lambda1_floor,
            lambda12_floor: d.lambda12_floor,
            approach_ratio: d.approach_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovParams {
    pub table: Table,
    pub case: Case,
    pub s: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub start: [f64; 3],
    pub n_transient: usize,
    pub n_iter: usize,
    pub renorm_every: usize,
    pub bound: f64,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        let d = henon_lab::LyapunovConfig::default();
        Self {
            table: Table::default(),
            case: Case::I,
            s: 0.1,
            alpha: 0.45,
            lambda: 0.5,
            beta: 1.0,
            start: [0.1, 0.0, 0.0],
            n_transient: d.n_transient,
            n_iter: d.n_iter,
            renorm_every: d.renorm_every,
            bound: d.bound,
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub perturb: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config, or the config snapshot of a JSON manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|x| x == "json") {
            let m: crate::manifest::RunManifest = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("manifest: {e}")))?;
            m.config.validate()?;
            return Ok(m.config);
        }
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Usage(format!("config schema_version {} is not {CONFIG_SCHEMA_VERSION}", self.schema_version)));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("tol must be positive, got {t}")));
            }
        }
        let guard = |name: &str, bs: &[f64]| {
            if bs.is_empty() || bs.iter().any(|b| !(*b > 0.0 && *b <= 0.05)) {
                return Err(CliError::Usage(format!("{name}.betas must be nonempty and within (0, 0.05]")));
            }
            Ok(())
        };
        guard("butterfly", &self.butterfly.betas)?;
        guard("separatrix", &self.separatrix.betas)?;
        if self.closed_forms.grid_n < 1 || self.closed_forms.points < 2 {
            return Err(CliError::Usage("closed_forms grid too small".into()));
        }
        if self.henon_nf.s_ladder.len() < 2 {
            return Err(CliError::Usage("henon_nf.s_ladder needs at least two rungs".into()));
        }
        Ok(())
    }

    /// Applies flags and fills every default, so the snapshot alone reproduces the run.
    pub fn materialize(mut self, cmd: CommandName, ov: &Overrides) -> Result<Self, CliError> {
        if let Some(c) = self.command {
            if c != cmd {
                return Err(CliError::Usage(format!("config is for '{}', not '{}'", c.as_str(), cmd.as_str())));
            }
        }
        self.command = Some(cmd);
        if ov.tol.is_some() {
            self.tol = ov.tol;
        }
        self.tol = Some(self.tol.unwrap_or(cmd.default_tol()));
        if let Some(t) = ov.threads {
            self.threads = t;
        }
        if ov.perturb.is_some() {
            self.closed_forms.perturb = ov.perturb.clone();
        }
        if let Some(o) = &ov.out {
            self.out_dir = Some(o.clone());
        }
        if self.out_dir.is_none() {
            let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
            self.out_dir = Some(root.join(cmd.as_str()));
        }
        self.validate()?;
        Ok(self)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or_else(|| self.command.map_or(1e-12, CommandName::default_tol))
    }
}
