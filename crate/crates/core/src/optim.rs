//! Simplex-constrained minimization of a risk objective and the portfolio
//! strategy definitions, including the per-rebalance turnover cap.
//!
//! The solver is a Nelder-Mead direct search run in an unconstrained space
//! through the squared-normalized map w_i = v_i^2 / sum v_j^2; the redundant
//! degree of freedom is harmless for a direct search, and every probe is
//! feasible by construction. Restarts guard against the flatter objectives
//! seen at high entropy orders.

use ndarray::{Array1, Array2, ArrayView2};
use thiserror::Error;

use crate::entropy::{m_spacings_estimate, RenyiParams};
use crate::risk::{
    cornish_fisher_var, modified_cvar, sample_covariance, sample_moments, shrinkage_covariance,
    RiskError, ShrinkageIntensity,
};

#[derive(Debug, Clone, Error)]
pub enum OptimError {
    #[error("weights must have at least two assets, got {0}")]
    TooFewAssets(usize),
    #[error("weight vector violates the simplex: {0}")]
    NotOnSimplex(&'static str),
    #[error("objective evaluated non-finite at every probe")]
    ObjectiveNonFinite,
    #[error("no feasible point under the given constraints")]
    Infeasible,
    #[error("estimation window too short: {got} rows, need {need}")]
    WindowTooShort { got: usize, need: usize },
    #[error("asset index {index} out of range for {n} assets")]
    AssetIndexOutOfRange { index: usize, n: usize },
    #[error("turnover cap requires previous weights")]
    MissingPreviousWeights,
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("objective error: {0}")]
    Objective(String),
}

/// Point on the standard simplex: non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(w: Vec<f64>) -> Result<Self, OptimError> {
        if w.len() < 2 {
            return Err(OptimError::TooFewAssets(w.len()));
        }
        if w.iter().any(|v| !v.is_finite() || *v < -1e-12) {
            return Err(OptimError::NotOnSimplex("negative or non-finite component"));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(OptimError::NotOnSimplex("components do not sum to one"));
        }
        Ok(Self(w.into_iter().map(|v| v.max(0.0)).collect()))
    }

    pub fn equal(n: usize) -> Result<Self, OptimError> {
        if n < 2 {
            return Err(OptimError::TooFewAssets(n));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// Exit-normalization: clamp negatives from round-off and rescale.
    fn renormalized(mut w: Vec<f64>) -> Self {
        for v in &mut w {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if sum > 0.0 {
            for v in &mut w {
                *v /= sum;
            }
        } else {
            let n = w.len();
            w = vec![1.0 / n as f64; n];
        }
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn n_assets(&self) -> usize {
        self.0.len()
    }

    /// L1 distance to another weight vector.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }
}

impl std::ops::Index<usize> for Weights {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Spacing-width rule for the entropy objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MRule {
    /// m = ceil(N^p), clamped to [1, N-1].
    Power(f64),
    Fixed(usize),
}

impl MRule {
    /// Default rule ceil(N^{2/3}), the empirical backtest choice.
    pub fn default_power() -> Self {
        MRule::Power(2.0 / 3.0)
    }

    pub fn resolve(&self, n: usize) -> usize {
        let cap = n.saturating_sub(1).max(1);
        match *self {
            MRule::Power(p) => ((n as f64).powf(p).ceil() as usize).clamp(1, cap),
            MRule::Fixed(m) => m.clamp(1, cap),
        }
    }
}

/// Covariance estimator backing a minimum-variance strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovChoice {
    Sample,
    Shrinkage(ShrinkageIntensity),
}

/// Strategy family.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    /// Minimize the m-spacings exponential Rényi entropy of portfolio returns.
    RenyiOptimal { alpha: f64, m_rule: MRule },
    /// Minimize w' Sigma w.
    MinVariance { cov: CovChoice },
    /// Minimize the Cornish-Fisher VaR of the window's portfolio series.
    MinVar { r: f64 },
    /// Minimize the modified expected shortfall of the portfolio series.
    MinCVar { r: f64 },
    /// Maximize annualized geometric return over annualized volatility.
    MaxSharpe,
    EqualWeight,
    /// 60% in the equity column, 40% in the bond column.
    SixtyForty { equity: usize, bond: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub kind: StrategyKind,
    /// Maximum L1 weight change per rebalance, enforced from the second
    /// window on.
    pub turnover_cap: Option<f64>,
}

impl Strategy {
    pub fn new(kind: StrategyKind) -> Self {
        Self { kind, turnover_cap: None }
    }

    pub fn with_turnover_cap(kind: StrategyKind, cap: f64) -> Self {
        Self { kind, turnover_cap: Some(cap) }
    }
}

/// Direct-search configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Start points in weight space; equal weights when empty.
    pub starts: Vec<Vec<f64>>,
    /// Iteration budget; 0 means 500 * n.
    pub max_iters: usize,
    /// Stop when the simplex diameter in weight space falls below this.
    pub diam_tol: f64,
    /// Initial vertex step in the unconstrained space.
    pub init_step: f64,
    /// Exact-penalty weight for extra constraints.
    pub penalty: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { starts: Vec::new(), max_iters: 0, diam_tol: 1e-6, init_step: 0.25, penalty: 1e6 }
    }
}

fn to_weights(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().map(|x| x * x).sum();
    if s < 1e-300 {
        return vec![1.0 / v.len() as f64; v.len()];
    }
    v.iter().map(|x| x * x / s).collect()
}

struct Vertex {
    v: Vec<f64>,
    value: f64,
}

/// Nelder-Mead in the squared-normalized space from one start point.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    penalized: &F,
    start_w: &[f64],
    cfg: &SolverConfig,
) -> (Vec<f64>, f64) {
    let n = start_w.len();
    let max_iters = if cfg.max_iters == 0 { 500 * n } else { cfg.max_iters };
    let eval = |v: &[f64]| {
        let val = penalized(&to_weights(v));
        if val.is_finite() {
            val
        } else {
            f64::MAX
        }
    };

    let v0: Vec<f64> = start_w.iter().map(|w| w.max(0.0).sqrt()).collect();
    let mut simplex: Vec<Vertex> = Vec::with_capacity(n + 1);
    simplex.push(Vertex { value: eval(&v0), v: v0.clone() });
    for i in 0..n {
        let mut vi = v0.clone();
        vi[i] += cfg.init_step;
        simplex.push(Vertex { value: eval(&vi), v: vi });
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.value.total_cmp(&b.value));

        // Diameter in weight space.
        let best_w = to_weights(&simplex[0].v);
        let mut diam: f64 = 0.0;
        for vert in &simplex[1..] {
            let w = to_weights(&vert.v);
            let d = w.iter().zip(&best_w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            diam = diam.max(d);
        }
        if diam < cfg.diam_tol {
            break;
        }

        let worst = simplex.len() - 1;
        let mut centroid = vec![0.0; n];
        for vert in &simplex[..worst] {
            for (c, &x) in centroid.iter_mut().zip(&vert.v) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= worst as f64;
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst].v)
            .map(|(&c, &w)| c + alpha * (c - w))
            .collect();
        let f_reflect = eval(&reflect);

        if f_reflect < simplex[0].value {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(&c, &r)| c + gamma * (r - c))
                .collect();
            let f_expand = eval(&expand);
            simplex[worst] = if f_expand < f_reflect {
                Vertex { v: expand, value: f_expand }
            } else {
                Vertex { v: reflect, value: f_reflect }
            };
            continue;
        }
        if f_reflect < simplex[worst - 1].value {
            simplex[worst] = Vertex { v: reflect, value: f_reflect };
            continue;
        }
        let contract: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst].v)
            .map(|(&c, &w)| c + rho * (w - c))
            .collect();
        let f_contract = eval(&contract);
        if f_contract < simplex[worst].value {
            simplex[worst] = Vertex { v: contract, value: f_contract };
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].v.clone();
        for vert in simplex.iter_mut().skip(1) {
            for (x, &b) in vert.v.iter_mut().zip(&best) {
                *x = b + sigma * (*x - b);
            }
            vert.value = eval(&vert.v);
        }
    }
    simplex.sort_by(|a, b| a.value.total_cmp(&b.value));
    (to_weights(&simplex[0].v), simplex[0].value)
}

/// Derivative-free minimization over the standard simplex, best of the
/// configured restarts. `extra_constraints` return a violation magnitude
/// (zero when satisfied) and enter as exact penalties with a feasibility
/// post-check by the caller.
pub fn minimize_on_simplex<F>(
    objective: F,
    n: usize,
    cfg: &SolverConfig,
    extra_constraints: &[&(dyn Fn(&[f64]) -> f64 + Sync)],
) -> Result<Weights, OptimError>
where
    F: Fn(&[f64]) -> f64,
{
    if n < 2 {
        return Err(OptimError::TooFewAssets(n));
    }
    let penalized = |w: &[f64]| {
        let base = objective(w);
        let viol: f64 = extra_constraints.iter().map(|c| c(w).max(0.0)).sum();
        base + cfg.penalty * viol
    };

    let mut starts = cfg.starts.clone();
    if starts.is_empty() {
        starts.push(vec![1.0 / n as f64; n]);
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in &starts {
        if s.len() != n {
            continue;
        }
        let (w, val) = nelder_mead(&penalized, s, cfg);
        if val == f64::MAX {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| val < *b) {
            best = Some((w, val));
        }
    }
    match best {
        Some((w, _)) => Ok(Weights::renormalized(w)),
        None => Err(OptimError::ObjectiveNonFinite),
    }
}

/// Enforces the per-rebalance turnover cap: returns `proposed` when its L1
/// displacement from `prev` is within `cap`, otherwise the point on the
/// segment [prev, proposed] with displacement exactly `cap` (feasible by
/// convexity of the simplex). A non-positive cap returns `prev`.
pub fn apply_turnover_cap(prev: &Weights, proposed: &Weights, cap: f64) -> Weights {
    if cap <= 0.0 {
        return prev.clone();
    }
    let d = prev.l1_distance(proposed);
    if d <= cap {
        return proposed.clone();
    }
    let t = cap / d;
    let blended: Vec<f64> = prev
        .as_slice()
        .iter()
        .zip(proposed.as_slice())
        .map(|(&p, &q)| p + t * (q - p))
        .collect();
    Weights::renormalized(blended)
}

/// Context shared by strategy solves.
#[derive(Debug, Clone)]
pub struct SolveContext {
    pub periods_per_year: f64,
    pub solver: SolverConfig,
}

impl Default for SolveContext {
    fn default() -> Self {
        Self { periods_per_year: 52.0, solver: SolverConfig::default() }
    }
}

fn portfolio_series(window: &ArrayView2<f64>, w: &[f64]) -> Vec<f64> {
    window
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(w).map(|(&x, &wi)| x * wi).sum())
        .collect()
}

fn quadratic_form(cov: &Array2<f64>, w: &[f64]) -> f64 {
    let wv = Array1::from_vec(w.to_vec());
    wv.dot(&cov.dot(&wv))
}

/// Annualized geometric return over annualized volatility; the MaxSharpe
/// objective (negated for the minimizer).
fn sharpe_objective(series: &[f64], periods_per_year: f64) -> f64 {
    let n = series.len() as f64;
    let log_growth: f64 = series.iter().map(|&p| (1.0 + p).ln()).sum();
    let annual_ret = (log_growth * periods_per_year / n).exp() - 1.0;
    let moments = match sample_moments(series) {
        Ok(m) => m,
        Err(_) => return f64::MAX,
    };
    let vol = moments.sd * periods_per_year.sqrt();
    if vol <= 0.0 {
        return f64::MAX;
    }
    -(annual_ret / vol)
}

/// Restart points per the default policy: equal weights, the previous
/// window's weights when present, and the vertex of the lowest-variance
/// asset.
fn default_starts(window: &ArrayView2<f64>, prev: Option<&Weights>) -> Vec<Vec<f64>> {
    let n = window.ncols();
    let mut starts = vec![vec![1.0 / n as f64; n]];
    if let Some(p) = prev {
        starts.push(p.as_slice().to_vec());
    }
    if let Ok(cov) = sample_covariance(window) {
        let mut min_i = 0;
        for i in 1..n {
            if cov.matrix[[i, i]] < cov.matrix[[min_i, min_i]] {
                min_i = i;
            }
        }
        let mut vertex = vec![0.0; n];
        vertex[min_i] = 1.0;
        starts.push(vertex);
    }
    starts
}

/// Fits one strategy on an estimation window. `prev` carries the previous
/// rebalance target for restart seeding and the turnover constraint.
pub fn solve_strategy(
    strategy: &Strategy,
    window: &ArrayView2<f64>,
    prev: Option<&Weights>,
    ctx: &SolveContext,
) -> Result<Weights, OptimError> {
    let (rows, n) = window.dim();
    if n < 2 {
        return Err(OptimError::TooFewAssets(n));
    }
    if rows < 30 {
        return Err(OptimError::WindowTooShort { got: rows, need: 30 });
    }

    // Constant strategies never need the solver.
    match &strategy.kind {
        StrategyKind::EqualWeight => return Weights::equal(n),
        StrategyKind::SixtyForty { equity, bond } => {
            for &idx in [equity, bond] {
                if idx >= n {
                    return Err(OptimError::AssetIndexOutOfRange { index: idx, n });
                }
            }
            let mut w = vec![0.0; n];
            w[*equity] += 0.6;
            w[*bond] += 0.4;
            return Weights::new(w);
        }
        _ => {}
    }

    let objective: Box<dyn Fn(&[f64]) -> f64> = match &strategy.kind {
        StrategyKind::RenyiOptimal { alpha, m_rule } => {
            let params = RenyiParams::new(*alpha, m_rule.resolve(rows));
            Box::new(move |w: &[f64]| {
                let series = portfolio_series(window, w);
                m_spacings_estimate(&series, &params).unwrap_or(f64::MAX)
            })
        }
        StrategyKind::MinVariance { cov } => {
            let est = match cov {
                CovChoice::Sample => sample_covariance(window)?,
                CovChoice::Shrinkage(intensity) => shrinkage_covariance(window, *intensity)?,
            };
            let matrix = est.matrix;
            Box::new(move |w: &[f64]| quadratic_form(&matrix, w))
        }
        StrategyKind::MinVar { r } => {
            let r = *r;
            Box::new(move |w: &[f64]| {
                let series = portfolio_series(window, w);
                match sample_moments(&series) {
                    Ok(m) if m.sd > 0.0 => {
                        cornish_fisher_var(m.mean, m.sd, m.skew, m.excess_kurtosis, r)
                            .unwrap_or(f64::MAX)
                    }
                    _ => f64::MAX,
                }
            })
        }
        StrategyKind::MinCVar { r } => {
            let r = *r;
            Box::new(move |w: &[f64]| {
                let series = portfolio_series(window, w);
                match sample_moments(&series) {
                    Ok(m) if m.sd > 0.0 => {
                        modified_cvar(m.mean, m.sd, m.skew, m.excess_kurtosis, r)
                            .unwrap_or(f64::MAX)
                    }
                    _ => f64::MAX,
                }
            })
        }
        StrategyKind::MaxSharpe => {
            let ppy = ctx.periods_per_year;
            Box::new(move |w: &[f64]| sharpe_objective(&portfolio_series(window, w), ppy))
        }
        StrategyKind::EqualWeight | StrategyKind::SixtyForty { .. } => unreachable!(),
    };

    let mut cfg = ctx.solver.clone();
    if cfg.starts.is_empty() {
        cfg.starts = default_starts(window, prev);
    }

    let cap_constraint;
    let mut constraints: Vec<&(dyn Fn(&[f64]) -> f64 + Sync)> = Vec::new();
    if let (Some(cap), Some(p)) = (strategy.turnover_cap, prev) {
        let prev_w = p.as_slice().to_vec();
        cap_constraint = move |w: &[f64]| {
            let d: f64 = w.iter().zip(&prev_w).map(|(a, b)| (a - b).abs()).sum();
            (d - cap).max(0.0)
        };
        constraints.push(&cap_constraint);
    }

    let solved = minimize_on_simplex(|w| objective(w), n, &cfg, &constraints)?;

    // Feasibility backstop: the exact penalty leaves at most a hair of
    // violation, which the segment projection removes.
    if let (Some(cap), Some(p)) = (strategy.turnover_cap, prev) {
        return Ok(apply_turnover_cap(p, &solved, cap));
    }
    Ok(solved)
}
