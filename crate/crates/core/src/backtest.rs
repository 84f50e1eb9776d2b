//! Rolling-window rebalancing engine: estimation windows, out-of-sample
//! accounting, and per-strategy weight trajectories.
//!
//! Window k fits on rows [k*roll, k*roll + estimation_window) and holds the
//! fitted weights over the next `roll` rows; the held-out portfolio return is
//! the plain dot product of target weights and asset returns (weights are
//! re-trued to target within a holding window, which is what makes the
//! constant benchmarks report zero turnover). Trailing rows short of a full
//! holding window are dropped.

use chrono::NaiveDate;
use ndarray::{Array2, ArrayView2, Axis};
use thiserror::Error;

use crate::exec;
use crate::optim::{solve_strategy, SolveContext, Strategy, Weights};

#[derive(Debug, Clone, Error)]
pub enum BacktestError {
    #[error("dates must be strictly increasing (violation at row {0})")]
    NonMonotoneDates(usize),
    #[error("panel shape mismatch: {dates} dates, {rows} return rows")]
    ShapeMismatch { dates: usize, rows: usize },
    #[error("asset name count {names} does not match {cols} columns")]
    NameMismatch { names: usize, cols: usize },
    #[error("returns must be finite and greater than -1 (violation at row {row}, column {col})")]
    InvalidReturn { row: usize, col: usize },
    #[error("panel too short: {rows} rows, need at least {need}")]
    TooShort { rows: usize, need: usize },
    #[error("roll must be at least 1")]
    ZeroRoll,
    #[error("no strategies configured")]
    NoStrategies,
}

/// Dated T x n panel of arithmetic per-period returns.
#[derive(Debug, Clone)]
pub struct ReturnMatrix {
    dates: Vec<NaiveDate>,
    returns: Array2<f64>,
    asset_names: Vec<String>,
}

impl ReturnMatrix {
    pub fn new(
        dates: Vec<NaiveDate>,
        returns: Array2<f64>,
        asset_names: Vec<String>,
    ) -> Result<Self, BacktestError> {
        let (rows, cols) = returns.dim();
        if dates.len() != rows {
            return Err(BacktestError::ShapeMismatch { dates: dates.len(), rows });
        }
        if asset_names.len() != cols {
            return Err(BacktestError::NameMismatch { names: asset_names.len(), cols });
        }
        for i in 1..dates.len() {
            if dates[i] <= dates[i - 1] {
                return Err(BacktestError::NonMonotoneDates(i));
            }
        }
        for ((row, col), &v) in returns.indexed_iter() {
            if !v.is_finite() || v <= -1.0 {
                return Err(BacktestError::InvalidReturn { row, col });
            }
        }
        Ok(Self { dates, returns, asset_names })
    }

    pub fn n_periods(&self) -> usize {
        self.returns.nrows()
    }

    pub fn n_assets(&self) -> usize {
        self.returns.ncols()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    pub fn returns(&self) -> ArrayView2<'_, f64> {
        self.returns.view()
    }

    pub fn window(&self, start: usize, end: usize) -> ArrayView2<'_, f64> {
        self.returns.slice(ndarray::s![start..end, ..])
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.asset_names.iter().position(|n| n == name)
    }
}

/// Engine configuration. Defaults mirror a weekly five-year estimation
/// window rolled every six months.
#[derive(Debug, Clone)]
pub struct BacktestConfig {
    pub estimation_window: usize,
    pub roll: usize,
    pub strategies: Vec<(String, Strategy)>,
    pub solve: SolveContext,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            estimation_window: 260,
            roll: 26,
            strategies: Vec::new(),
            solve: SolveContext::default(),
        }
    }
}

/// Fit/hold boundaries of one window: rows [fit_start, fit_end) estimate,
/// rows [fit_end, hold_end) are held out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowBounds {
    pub fit_start: usize,
    pub fit_end: usize,
    pub hold_end: usize,
}

/// One strategy's trajectory. A window failure aborts the track at that
/// window but leaves the other strategies untouched.
#[derive(Debug, Clone)]
pub struct StrategyTrack {
    pub label: String,
    pub weights: Vec<Weights>,
    pub oos_returns: Vec<f64>,
    pub error: Option<(usize, String)>,
}

#[derive(Debug, Clone)]
pub struct BacktestResult {
    pub windows: Vec<WindowBounds>,
    pub tracks: Vec<StrategyTrack>,
}

/// Number of whole windows available.
pub fn window_count(t: usize, estimation_window: usize, roll: usize) -> usize {
    if t < estimation_window + roll {
        0
    } else {
        (t - estimation_window) / roll
    }
}

/// Runs every configured strategy over the rolling windows. Strategies
/// evaluate independently (in parallel when the `parallel` feature is on);
/// windows run in order within a strategy because each solve seeds the next
/// through the previous target weights and the turnover constraint.
pub fn run_backtest(data: &ReturnMatrix, cfg: &BacktestConfig) -> Result<BacktestResult, BacktestError> {
    if cfg.roll == 0 {
        return Err(BacktestError::ZeroRoll);
    }
    if cfg.strategies.is_empty() {
        return Err(BacktestError::NoStrategies);
    }
    let t = data.n_periods();
    let need = cfg.estimation_window + cfg.roll;
    let k = window_count(t, cfg.estimation_window, cfg.roll);
    if k == 0 {
        return Err(BacktestError::TooShort { rows: t, need });
    }
    let windows: Vec<WindowBounds> = (0..k)
        .map(|i| WindowBounds {
            fit_start: i * cfg.roll,
            fit_end: i * cfg.roll + cfg.estimation_window,
            hold_end: i * cfg.roll + cfg.estimation_window + cfg.roll,
        })
        .collect();

    let tracks = exec::map_indexed(cfg.strategies.len(), |s| {
        let (label, strategy) = &cfg.strategies[s];
        let mut track = StrategyTrack {
            label: label.clone(),
            weights: Vec::with_capacity(k),
            oos_returns: Vec::with_capacity(k * cfg.roll),
            error: None,
        };
        let mut prev: Option<Weights> = None;
        for (wi, wb) in windows.iter().enumerate() {
            let fit = data.window(wb.fit_start, wb.fit_end);
            match solve_strategy(strategy, &fit, prev.as_ref(), &cfg.solve) {
                Ok(w) => {
                    for row in data.window(wb.fit_end, wb.hold_end).axis_iter(Axis(0)) {
                        let p: f64 =
                            row.iter().zip(w.as_slice()).map(|(&x, &wi)| x * wi).sum();
                        track.oos_returns.push(p);
                    }
                    prev = Some(w.clone());
                    track.weights.push(w);
                }
                Err(e) => {
                    track.error = Some((wi, e.to_string()));
                    break;
                }
            }
        }
        track
    });

    Ok(BacktestResult { windows, tracks })
}

/// Consecutive rebalance weight pairs, the turnover inputs: the
/// pre-rebalance weight is the previous target (no intra-window drift).
pub fn rebalance_pairs(weights: &[Weights]) -> Vec<(&Weights, &Weights)> {
    weights.windows(2).map(|w| (&w[0], &w[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dists::Marginal;
    use crate::optim::{CovChoice, StrategyKind};
    use approx::assert_abs_diff_eq;

    fn synthetic_panel(t: usize, n: usize, seed: u64) -> ReturnMatrix {
        let g = Marginal::gaussian(0.001, 0.02).unwrap();
        let mut returns = Array2::zeros((t, n));
        for j in 0..n {
            let col = g.sample(t, seed + j as u64);
            for i in 0..t {
                returns[[i, j]] = col[i];
            }
        }
        let start = NaiveDate::from_ymd_opt(1990, 1, 5).unwrap();
        let dates: Vec<NaiveDate> =
            (0..t).map(|i| start + chrono::Duration::weeks(i as i64)).collect();
        let names = (0..n).map(|j| format!("A{j}")).collect();
        ReturnMatrix::new(dates, returns, names).unwrap()
    }

    fn ew_config(estimation: usize, roll: usize) -> BacktestConfig {
        BacktestConfig {
            estimation_window: estimation,
            roll,
            strategies: vec![(
                "ew".into(),
                Strategy::new(StrategyKind::EqualWeight),
            )],
            solve: SolveContext::default(),
        }
    }

    #[test]
    fn equal_weight_track_is_row_means() {
        let data = synthetic_panel(120, 3, 5);
        let cfg = ew_config(60, 10);
        let res = run_backtest(&data, &cfg).unwrap();
        let track = &res.tracks[0];
        assert!(track.error.is_none());
        let mut idx = 0;
        for wb in &res.windows {
            for row in wb.fit_end..wb.hold_end {
                let mean =
                    data.returns().row(row).iter().sum::<f64>() / data.n_assets() as f64;
                assert_abs_diff_eq!(track.oos_returns[idx], mean, epsilon = 1e-15);
                idx += 1;
            }
        }
        assert_eq!(idx, track.oos_returns.len());
    }

    #[test]
    fn boundary_case_is_exactly_one_window() {
        let data = synthetic_panel(70, 2, 1);
        let cfg = ew_config(60, 10);
        let res = run_backtest(&data, &cfg).unwrap();
        assert_eq!(res.windows.len(), 1);
        assert_eq!(res.tracks[0].oos_returns.len(), 10);
    }

    #[test]
    fn window_arithmetic() {
        assert_eq!(window_count(1409, 260, 26), 44);
        assert_eq!(window_count(1400, 260, 26), 43);
        assert_eq!(window_count(286, 260, 26), 1);
        assert_eq!(window_count(285, 260, 26), 0);
    }

    #[test]
    fn portfolio_accounting_identity() {
        let data = synthetic_panel(120, 3, 9);
        let cfg = BacktestConfig {
            estimation_window: 60,
            roll: 15,
            strategies: vec![(
                "mv".into(),
                Strategy::new(StrategyKind::MinVariance { cov: CovChoice::Sample }),
            )],
            solve: SolveContext::default(),
        };
        let res = run_backtest(&data, &cfg).unwrap();
        let track = &res.tracks[0];
        let mut idx = 0;
        for (k, wb) in res.windows.iter().enumerate() {
            let w = &track.weights[k];
            for row in wb.fit_end..wb.hold_end {
                let dot: f64 = data
                    .returns()
                    .row(row)
                    .iter()
                    .zip(w.as_slice())
                    .map(|(&x, &wi)| x * wi)
                    .sum();
                assert_eq!(track.oos_returns[idx], dot);
                idx += 1;
            }
        }
    }

    #[test]
    fn no_look_ahead_under_future_mutation() {
        let t = 120;
        let data = synthetic_panel(t, 3, 33);
        let cfg = BacktestConfig {
            estimation_window: 60,
            roll: 20,
            strategies: vec![(
                "mv".into(),
                Strategy::new(StrategyKind::MinVariance { cov: CovChoice::Sample }),
            )],
            solve: SolveContext::default(),
        };
        let base = run_backtest(&data, &cfg).unwrap();

        // Corrupt everything strictly after the first window's fit range.
        let mut mutated = data.returns.clone();
        for row in 60..t {
            for col in 0..3 {
                mutated[[row, col]] = if (row + col) % 2 == 0 { 0.5 } else { -0.5 };
            }
        }
        let corrupted =
            ReturnMatrix::new(data.dates.clone(), mutated, data.asset_names.clone()).unwrap();
        let res = run_backtest(&corrupted, &cfg).unwrap();
        assert_eq!(
            base.tracks[0].weights[0].as_slice(),
            res.tracks[0].weights[0].as_slice()
        );
    }

    #[test]
    fn rebalance_pair_bookkeeping() {
        let w1 = Weights::new(vec![1.0, 0.0]).unwrap();
        let w2 = Weights::new(vec![0.0, 1.0]).unwrap();
        let trajectory = [w1.clone(), w2.clone()];
        let pairs = rebalance_pairs(&trajectory);
        assert_eq!(pairs.len(), 1);
        assert_abs_diff_eq!(pairs[0].0.l1_distance(pairs[0].1), 2.0, epsilon = 1e-15);
        assert!(rebalance_pairs(&[w1]).is_empty());
    }

    #[test]
    fn invalid_panels_are_rejected() {
        let start = NaiveDate::from_ymd_opt(2000, 1, 7).unwrap();
        let dates: Vec<NaiveDate> = vec![start, start];
        let returns = Array2::zeros((2, 2));
        assert!(matches!(
            ReturnMatrix::new(dates, returns, vec!["a".into(), "b".into()]),
            Err(BacktestError::NonMonotoneDates(1))
        ));

        let dates2: Vec<NaiveDate> =
            (0..2).map(|i| start + chrono::Duration::weeks(i)).collect();
        let mut bad = Array2::zeros((2, 2));
        bad[[1, 1]] = -1.5;
        assert!(matches!(
            ReturnMatrix::new(dates2, bad, vec!["a".into(), "b".into()]),
            Err(BacktestError::InvalidReturn { row: 1, col: 1 })
        ));
    }

    #[test]
    fn short_panel_is_rejected_at_launch() {
        let data = synthetic_panel(50, 2, 2);
        let cfg = ew_config(60, 10);
        assert!(matches!(run_backtest(&data, &cfg), Err(BacktestError::TooShort { .. })));
    }

    #[test]
    fn bad_configs_are_rejected() {
        let data = synthetic_panel(120, 2, 4);
        let mut cfg = ew_config(60, 10);
        cfg.roll = 0;
        assert!(matches!(run_backtest(&data, &cfg), Err(BacktestError::ZeroRoll)));
        let mut cfg = ew_config(60, 10);
        cfg.strategies.clear();
        assert!(matches!(run_backtest(&data, &cfg), Err(BacktestError::NoStrategies)));
    }

    #[test]
    fn failing_strategy_aborts_only_its_own_track() {
        let data = synthetic_panel(120, 3, 5);
        let cfg = BacktestConfig {
            estimation_window: 60,
            roll: 20,
            strategies: vec![
                (
                    "bad".into(),
                    Strategy::new(StrategyKind::SixtyForty { equity: 0, bond: 9 }),
                ),
                ("ew".into(), Strategy::new(StrategyKind::EqualWeight)),
            ],
            solve: SolveContext::default(),
        };
        let res = run_backtest(&data, &cfg).unwrap();
        assert!(res.tracks[0].error.is_some());
        assert_eq!(res.tracks[0].error.as_ref().unwrap().0, 0);
        assert!(res.tracks[1].error.is_none());
        assert_eq!(res.tracks[1].weights.len(), res.windows.len());
    }
}
