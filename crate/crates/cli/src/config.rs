//! Run configuration: a single TOML file mirroring the empirical study's
//! defaults (five-year weekly window, six-month roll, m = N^(2/3), r = 5%).

use renyirisk::optim::{CovChoice, MRule, Strategy, StrategyKind};
use renyirisk::risk::ShrinkageIntensity;
use serde::{Deserialize, Serialize};

fn default_date_column() -> String {
    "date".into()
}
fn default_out_dir() -> String {
    "out".into()
}
fn default_seed() -> u64 {
    42
}
fn default_estimation_window() -> usize {
    260
}
fn default_roll() -> usize {
    26
}
fn default_periods_per_year() -> f64 {
    52.0
}
fn default_confidence() -> f64 {
    0.05
}
fn default_resamples() -> usize {
    5000
}
fn default_block() -> usize {
    5
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: String,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    /// Asset columns to use; empty means every non-date column.
    #[serde(default)]
    pub columns: Vec<String>,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_estimation_window")]
    pub estimation_window: usize,
    #[serde(default = "default_roll")]
    pub roll: usize,
    #[serde(default = "default_periods_per_year")]
    pub periods_per_year: f64,
    /// Tail level for the historical VaR/CVaR report columns.
    #[serde(default = "default_confidence")]
    pub confidence_level: f64,
    #[serde(default = "default_resamples")]
    pub sharpe_resamples: usize,
    #[serde(default = "default_block")]
    pub sharpe_block_size: usize,
    #[serde(rename = "strategy")]
    pub strategies: Vec<StrategyConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    /// Report label; defaults to a kind-derived name.
    pub name: Option<String>,
    /// One of: renyi, min_variance, min_var, min_cvar, max_sharpe,
    /// equal_weight, sixty_forty.
    pub kind: String,
    pub alpha: Option<f64>,
    /// Spacing rule: `pow:<p>` for ceil(N^p) or `fixed:<m>`; defaults to
    /// `pow:2/3`.
    pub m: Option<String>,
    /// Shrinkage intensity for min_variance: "auto" or a number in [0, 1];
    /// omitted means the plain sample estimator.
    pub delta: Option<String>,
    /// Tail level for min_var / min_cvar; defaults to confidence_level.
    pub r: Option<f64>,
    /// Column names for sixty_forty.
    pub equity: Option<String>,
    pub bond: Option<String>,
    pub turnover_cap: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("strategy {index}: {message}")]
    Strategy { index: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

pub fn load(path: &str) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let cfg: RunConfig = toml::from_str(&text)?;
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    if cfg.strategies.is_empty() {
        return Err(ConfigError::Invalid("at least one [[strategy]] is required".into()));
    }
    if cfg.roll == 0 {
        return Err(ConfigError::Invalid("roll must be at least 1".into()));
    }
    if !(cfg.periods_per_year > 0.0) {
        return Err(ConfigError::Invalid("periods_per_year must be positive".into()));
    }
    if !(cfg.confidence_level > 0.0 && cfg.confidence_level <= 0.5) {
        return Err(ConfigError::Invalid("confidence_level must lie in (0, 0.5]".into()));
    }
    for (i, s) in cfg.strategies.iter().enumerate() {
        build_strategy(cfg, s, i, &|name| Some(name.len()))?;
    }
    Ok(())
}

fn parse_m_rule(spec: &str) -> Result<MRule, String> {
    if let Some(v) = spec.strip_prefix("pow:") {
        let p: f64 = v.parse().map_err(|_| format!("bad m power {v:?}"))?;
        if !(p > 0.0 && p < 1.0) {
            return Err(format!("m power {p} outside (0, 1)"));
        }
        Ok(MRule::Power(p))
    } else if let Some(v) = spec.strip_prefix("fixed:") {
        let m: usize = v.parse().map_err(|_| format!("bad fixed m {v:?}"))?;
        Ok(MRule::Fixed(m))
    } else {
        Err(format!("m rule {spec:?} must be pow:<p> or fixed:<m>"))
    }
}

/// Builds the core strategy from one config block. `resolve_column` maps an
/// asset name to its index (validation passes a dummy).
pub fn build_strategy(
    cfg: &RunConfig,
    s: &StrategyConfig,
    index: usize,
    resolve_column: &dyn Fn(&str) -> Option<usize>,
) -> Result<(String, Strategy), ConfigError> {
    let err = |message: String| ConfigError::Strategy { index, message };
    let r = s.r.unwrap_or(cfg.confidence_level);
    let kind = match s.kind.as_str() {
        "renyi" => {
            let alpha = s.alpha.ok_or_else(|| err("renyi requires alpha".into()))?;
            if alpha < 0.0 {
                return Err(err(format!("alpha {alpha} must be non-negative")));
            }
            let m_rule = match &s.m {
                Some(spec) => parse_m_rule(spec).map_err(err)?,
                None => MRule::default_power(),
            };
            StrategyKind::RenyiOptimal { alpha, m_rule }
        }
        "min_variance" => {
            let cov = match s.delta.as_deref() {
                None => CovChoice::Sample,
                Some("auto") => CovChoice::Shrinkage(ShrinkageIntensity::Auto),
                Some(v) => {
                    let d: f64 =
                        v.parse().map_err(|_| err(format!("bad delta {v:?}")))?;
                    if !(0.0..=1.0).contains(&d) {
                        return Err(err(format!("delta {d} outside [0, 1]")));
                    }
                    CovChoice::Shrinkage(ShrinkageIntensity::Fixed(d))
                }
            };
            StrategyKind::MinVariance { cov }
        }
        "min_var" => StrategyKind::MinVar { r },
        "min_cvar" => StrategyKind::MinCVar { r },
        "max_sharpe" => StrategyKind::MaxSharpe,
        "equal_weight" => StrategyKind::EqualWeight,
        "sixty_forty" => {
            let equity = s.equity.as_ref().ok_or_else(|| err("sixty_forty requires equity".into()))?;
            let bond = s.bond.as_ref().ok_or_else(|| err("sixty_forty requires bond".into()))?;
            let ei = resolve_column(equity)
                .ok_or_else(|| err(format!("unknown equity column {equity:?}")))?;
            let bi = resolve_column(bond)
                .ok_or_else(|| err(format!("unknown bond column {bond:?}")))?;
            StrategyKind::SixtyForty { equity: ei, bond: bi }
        }
        other => return Err(err(format!("unknown strategy kind {other:?}"))),
    };
    if let Some(cap) = s.turnover_cap {
        if !(cap > 0.0) {
            return Err(err(format!("turnover_cap {cap} must be positive")));
        }
    }
    let name = s.name.clone().unwrap_or_else(|| default_name(&s.kind, s));
    let strategy = Strategy { kind, turnover_cap: s.turnover_cap };
    Ok((name, strategy))
}

fn default_name(kind: &str, s: &StrategyConfig) -> String {
    match kind {
        "renyi" => format!("ropt_{}", s.alpha.unwrap_or(1.0)),
        "min_variance" => match s.delta.as_deref() {
            None => "mv_sample".into(),
            Some("auto") => "mv_shrink_auto".into(),
            Some(d) => format!("mv_shrink_{d}"),
        },
        "min_var" => "mvar".into(),
        "min_cvar" => "mcvar".into(),
        "max_sharpe" => "msr".into(),
        "equal_weight" => "ew".into(),
        "sixty_forty" => "sixty_forty".into(),
        other => other.into(),
    }
}
