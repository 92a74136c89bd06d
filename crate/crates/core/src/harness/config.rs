//! JSON config schemas for the CLI. All floats are 64-bit; unknown fields
//! are rejected so typos surface as validation errors with a field path.

use crate::basis::{BasisSpec, TrueFunction};
use crate::diffusion::SigmaSpec;
use crate::prior::{PriorSpec, ScalePrior, TruncationPrior};
use crate::{Error, Result};
use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Parse a JSON config with field-path diagnostics.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let body = std::fs::read_to_string(path)?;
    parse_config(&body)
}

pub fn parse_config<T: DeserializeOwned>(body: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(body);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TruncationConfig {
    Geometric { theta: f64 },
    Poisson { lambda: f64 },
    Table { pmf: Vec<f64>, tail_ratio: f64 },
}

impl TruncationConfig {
    pub fn build(&self) -> Result<TruncationPrior> {
        match self {
            TruncationConfig::Geometric { theta } => TruncationPrior::geometric(*theta),
            TruncationConfig::Poisson { lambda } => TruncationPrior::poisson(*lambda),
            TruncationConfig::Table { pmf, tail_ratio } => {
                TruncationPrior::table(pmf.clone(), *tail_ratio)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleConfig {
    InverseGamma {
        shape: f64,
        rate: f64,
    },
    Table {
        grid: Vec<f64>,
        values: Vec<f64>,
        tail_exponent: f64,
    },
}

impl ScaleConfig {
    pub fn build(&self) -> Result<ScalePrior> {
        match self {
            ScaleConfig::InverseGamma { shape, rate } => ScalePrior::inverse_gamma(*shape, *rate),
            ScaleConfig::Table {
                grid,
                values,
                tail_exponent,
            } => ScalePrior::table(grid.clone(), values.clone(), *tail_exponent),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub alpha: f64,
    pub truncation: TruncationConfig,
    pub scale: ScaleConfig,
    /// Largest basis index the prior's support may use.
    pub basis_j_max: usize,
}

impl PriorConfig {
    pub fn build(&self) -> Result<PriorSpec> {
        PriorSpec::new(
            self.alpha,
            self.truncation.build()?,
            self.scale.build()?,
            BasisSpec::fourier(self.basis_j_max)?,
        )
    }
}

/// Ground-truth function, described by a coefficient rule.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum F0Config {
    /// `f_j = (−1)^j · j^{-exponent}` (sign optional) up to `j_max`,
    /// optionally rescaled to a target L² norm.
    PowerLaw {
        exponent: f64,
        #[serde(default = "default_true")]
        alternating: bool,
        j_max: usize,
        beta: f64,
        #[serde(default)]
        normalize_l2: Option<f64>,
    },
    /// Explicit coefficients.
    Coeffs { coeffs: Vec<f64>, beta: f64 },
}

fn default_true() -> bool {
    true
}

impl F0Config {
    pub fn build(&self) -> Result<TrueFunction> {
        match self {
            F0Config::PowerLaw {
                exponent,
                alternating,
                j_max,
                beta,
                normalize_l2,
            } => TrueFunction::power_law(*exponent, *alternating, *j_max, *beta, *normalize_l2),
            F0Config::Coeffs { coeffs, beta } => TrueFunction::new(coeffs.clone(), *beta),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaConfig {
    Constant { value: f64 },
    Grid { xs: Vec<f64>, values: Vec<f64> },
}

impl SigmaConfig {
    pub fn build(&self) -> Result<SigmaSpec> {
        match self {
            SigmaConfig::Constant { value } => SigmaSpec::constant(*value),
            SigmaConfig::Grid { xs, values } => SigmaSpec::grid(xs.clone(), values.clone()),
        }
    }
}

fn default_sigma() -> SigmaConfig {
    SigmaConfig::Constant { value: 1.0 }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SamplePriorConfig {
    pub prior: PriorConfig,
    pub draws: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SimulateWnConfig {
    pub f0: F0Config,
    pub n: u64,
    pub j_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Gibbs,
    Grid,
    Both,
}

fn default_fit_method() -> FitMethod {
    FitMethod::Gibbs
}

fn default_s2_grid_size() -> usize {
    400
}

fn default_quantile_draws() -> usize {
    4096
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FitWnConfig {
    /// Path to a `wn_data.json` produced by `simulate wn`.
    pub data: String,
    pub prior: PriorConfig,
    pub iters: usize,
    pub burn_in: usize,
    #[serde(default = "default_fit_method")]
    pub method: FitMethod,
    /// Level cap; defaults to `4·⌈n^{1/(1+2α)}⌉ ∧ j_max`.
    #[serde(default)]
    pub j_max: Option<usize>,
    #[serde(default = "default_s2_grid_size")]
    pub s2_grid_size: usize,
    /// Draws used to summarize the grid posterior's error quantiles.
    #[serde(default = "default_quantile_draws")]
    pub quantile_draws: usize,
    /// Known truth, for error reporting.
    #[serde(default)]
    pub f0: Option<F0Config>,
}

fn default_kappa() -> f64 {
    5.0
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SimulateSdeConfig {
    /// Drift on [0,1] as a coefficient rule.
    pub drift: F0Config,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_sigma")]
    pub sigma: SigmaConfig,
    pub t_horizon: f64,
    pub dt: f64,
    /// Also write the path as CSV next to the binary artifact.
    #[serde(default)]
    pub write_csv: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FitSdeConfig {
    /// Path to a binary path file produced by `simulate sde`.
    pub path: String,
    #[serde(default = "default_sigma")]
    pub sigma: SigmaConfig,
    pub prior: PriorConfig,
    pub j_max: usize,
    pub iters: usize,
    pub burn_in: usize,
    #[serde(default = "default_drift_grid")]
    pub drift_grid_size: usize,
    #[serde(default)]
    pub f0: Option<F0Config>,
}

fn default_drift_grid() -> usize {
    101
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    WhiteNoise,
    Diffusion,
}

fn default_threshold() -> f64 {
    4.0
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GewekeCliConfig {
    pub model: ModelKind,
    pub prior: PriorConfig,
    /// Level cap for the sweep under test.
    pub j_max: usize,
    pub n_samples: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// White noise: noise level and data resolution.
    #[serde(default)]
    pub wn: Option<GewekeWnParams>,
    /// Diffusion: surrogate path horizon and step.
    #[serde(default)]
    pub sde: Option<GewekeSdeParams>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GewekeWnParams {
    pub n: u64,
    pub j_max_data: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GewekeSdeParams {
    pub t_gen: f64,
    pub dt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum TheoryRegime {
    /// Rate `(n/log n)^{-β/(1+2β)}`, sieve dimension with log factor.
    LogFactor,
    /// Rate `n^{-β/(1+2β)}`; needs `β ≤ α + ½` and an exponential-lower-tail
    /// truncation prior (Poisson excluded).
    NoLog,
}

fn default_c() -> f64 {
    1.0
}

fn default_k() -> f64 {
    2.0
}

fn default_entropy_a() -> Vec<f64> {
    vec![0.1, 0.5, 0.9]
}

fn default_mc_draws() -> u64 {
    1_000_000
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    pub regime: TheoryRegime,
    pub beta: f64,
    pub prior: PriorConfig,
    pub f0: F0Config,
    /// Constant in ε_n.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Remaining-mass exponent constant, K > 1.
    #[serde(default = "default_k")]
    pub k: f64,
    /// Sieve-dimension constant; auto-selected when absent.
    #[serde(default)]
    pub k1: Option<f64>,
    pub n_grid: Vec<u64>,
    #[serde(default = "default_mc_draws")]
    pub mc_draws: u64,
    #[serde(default = "default_entropy_a")]
    pub entropy_a: Vec<f64>,
}

impl TheoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.regime == TheoryRegime::NoLog {
            let trunc = self.prior.truncation.build()?;
            if !trunc.has_exponential_lower_bound() {
                return Err(Error::Config {
                    path: "prior.truncation".into(),
                    message: "no_log regime requires an exponential-lower-tail truncation prior \
                              (Poisson is excluded)"
                        .into(),
                });
            }
            if self.beta > self.prior.alpha + 0.5 {
                return Err(Error::Config {
                    path: "beta".into(),
                    message: format!(
                        "no_log regime requires beta <= alpha + 1/2, got beta = {}, alpha = {}",
                        self.beta, self.prior.alpha
                    ),
                });
            }
        }
        if self.k.is_nan() || self.k <= 1.0 {
            return Err(Error::Config {
                path: "k".into(),
                message: "K must exceed 1".into(),
            });
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config {
                path: "n_grid".into(),
                message: "must be nonempty and strictly increasing".into(),
            });
        }
        Ok(())
    }
}

fn default_preflight() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub model: ModelKind,
    /// Noise levels n (white noise) or horizons T (diffusion), strictly
    /// increasing, at least 4 values for the slope fit.
    pub grid: Vec<f64>,
    pub f0: F0Config,
    pub prior: PriorConfig,
    pub replications: usize,
    pub iters: usize,
    pub burn_in: usize,
    /// Run a reduced Geweke check before spending the budget.
    #[serde(default = "default_preflight")]
    pub preflight: bool,
    #[serde(default)]
    pub wn: Option<RateWnParams>,
    #[serde(default)]
    pub sde: Option<RateSdeParams>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RateWnParams {
    pub j_max_data: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RateSdeParams {
    pub dt: f64,
    pub j_max: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

impl RateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.len() < 4 {
            return Err(Error::Config {
                path: "grid".into(),
                message: "need at least 4 grid points for a slope fit".into(),
            });
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config {
                path: "grid".into(),
                message: "must be strictly increasing".into(),
            });
        }
        if self.replications == 0 {
            return Err(Error::Config {
                path: "replications".into(),
                message: "must be >= 1".into(),
            });
        }
        if self.iters <= self.burn_in {
            return Err(Error::Config {
                path: "iters".into(),
                message: "must exceed burn_in".into(),
            });
        }
        match self.model {
            ModelKind::WhiteNoise if self.wn.is_none() => Err(Error::Config {
                path: "wn".into(),
                message: "white_noise model requires the wn parameter block".into(),
            }),
            ModelKind::Diffusion if self.sde.is_none() => Err(Error::Config {
                path: "sde".into(),
                message: "diffusion model requires the sde parameter block".into(),
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CheckBasisConfig {
    pub j_max: usize,
    pub tol: f64,
}

/// JSON Schemas for every CLI config document, keyed by the schema file
/// name. The copies under `docs/schema/` are pinned by a test.
pub fn config_schemas() -> Vec<(&'static str, schemars::Schema)> {
    vec![
        ("sample_prior", schemars::schema_for!(SamplePriorConfig)),
        ("simulate_wn", schemars::schema_for!(SimulateWnConfig)),
        ("fit_wn", schemars::schema_for!(FitWnConfig)),
        ("simulate_sde", schemars::schema_for!(SimulateSdeConfig)),
        ("fit_sde", schemars::schema_for!(FitSdeConfig)),
        ("geweke", schemars::schema_for!(GewekeCliConfig)),
        ("verify_theory", schemars::schema_for!(TheoryConfig)),
        ("rate_experiment", schemars::schema_for!(RateConfig)),
        ("check_basis", schemars::schema_for!(CheckBasisConfig)),
    ]
}
