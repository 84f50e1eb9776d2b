//! Backtest orchestration: data ingestion, strategy solving, indicator
//! tables, the pairwise Sharpe test matrix, and artifact emission.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use renyirisk::backtest::{run_backtest, BacktestConfig};
use renyirisk::metrics::{performance_report, sharpe_test, PerformanceReport};
use renyirisk::optim::SolveContext;
use renyirisk::risk::sample_covariance;

use crate::config::{build_strategy, RunConfig};
use crate::ingest::ingest_csv;
use crate::output::{fmt, write_table};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Backtest(#[from] renyirisk::backtest::BacktestError),
    #[error(transparent)]
    Metrics(#[from] renyirisk::metrics::MetricsError),
    #[error(transparent)]
    Risk(#[from] renyirisk::risk::RiskError),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Experiment(#[from] renyirisk::experiments::ExperimentError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.display().to_string(), source }
}

pub const REPORT_COLUMNS: [&str; 14] = [
    "strategy",
    "annual_geometric_return",
    "annual_volatility",
    "sharpe",
    "skewness",
    "excess_kurtosis",
    "hist_var",
    "hist_cvar",
    "max_drawdown",
    "entropy_of_weights",
    "volatility_concentration",
    "diversification_ratio",
    "turnover",
    "error",
];

fn report_row(label: &str, report: Option<&PerformanceReport>, error: Option<&str>) -> Vec<String> {
    let mut row = vec![label.to_string()];
    match report {
        Some(r) => {
            for v in [
                r.annual_geometric_return,
                r.annual_volatility,
                r.sharpe,
                r.skewness,
                r.excess_kurtosis,
                r.hist_var,
                r.hist_cvar,
                r.max_drawdown,
                r.entropy_of_weights,
                r.volatility_concentration,
                r.diversification_ratio,
                r.turnover,
            ] {
                row.push(fmt(v));
            }
        }
        None => row.extend(std::iter::repeat_n(String::new(), 12)),
    }
    row.push(error.unwrap_or_default().to_string());
    row
}

/// Runs the configured backtest and writes every artifact into
/// `cfg.out_dir` (overridable). Returns the paths written.
pub fn run_backtest_command(
    cfg: &RunConfig,
    out_dir_override: Option<&str>,
) -> Result<Vec<PathBuf>, RunError> {
    let data = ingest_csv(&cfg.data, &cfg.date_column, &cfg.columns)?;
    let resolve = |name: &str| data.column_index(name);
    let strategies = cfg
        .strategies
        .iter()
        .enumerate()
        .map(|(i, s)| build_strategy(cfg, s, i, &resolve))
        .collect::<Result<Vec<_>, _>>()?;

    let bt_cfg = BacktestConfig {
        estimation_window: cfg.estimation_window,
        roll: cfg.roll,
        strategies,
        solve: SolveContext { periods_per_year: cfg.periods_per_year, ..Default::default() },
    };
    let result = run_backtest(&data, &bt_cfg)?;

    // Per-window sample covariances feed the diversification measures.
    let window_covs: Vec<Array2<f64>> = result
        .windows
        .iter()
        .map(|wb| Ok(sample_covariance(&data.window(wb.fit_start, wb.fit_end))?.matrix))
        .collect::<Result<_, RunError>>()?;

    let out_dir = Path::new(out_dir_override.unwrap_or(&cfg.out_dir)).to_path_buf();
    std::fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
    let mut written = Vec::new();

    // Indicator battery, one row per strategy.
    let mut report_rows = Vec::new();
    for track in &result.tracks {
        match &track.error {
            None => {
                let report = performance_report(
                    &track.oos_returns,
                    &track.weights,
                    &window_covs,
                    cfg.confidence_level,
                    cfg.periods_per_year,
                )?;
                report_rows.push(report_row(&track.label, Some(&report), None));
            }
            Some((window, message)) => {
                let note = format!("window {window}: {message}");
                report_rows.push(report_row(&track.label, None, Some(&note)));
            }
        }
    }
    let report_path = out_dir.join("report.csv");
    write_table(&report_path, "report", &REPORT_COLUMNS, &report_rows)
        .map_err(io_err(&report_path))?;
    written.push(report_path);

    // Weight trajectories, one file per strategy.
    for track in &result.tracks {
        let mut columns = vec!["window", "fit_start", "hold_start"];
        let names: Vec<&str> = data.asset_names().iter().map(String::as_str).collect();
        columns.extend(names);
        let mut rows = Vec::new();
        for (k, w) in track.weights.iter().enumerate() {
            let wb = result.windows[k];
            let mut row = vec![
                k.to_string(),
                data.dates()[wb.fit_start].to_string(),
                data.dates()[wb.fit_end].to_string(),
            ];
            row.extend(w.as_slice().iter().map(|&v| fmt(v)));
            rows.push(row);
        }
        let path = out_dir.join(format!("weights_{}.csv", track.label));
        write_table(&path, "weights", &columns, &rows).map_err(io_err(&path))?;
        written.push(path);
    }

    // Out-of-sample return series for complete tracks.
    let complete: Vec<&renyirisk::backtest::StrategyTrack> =
        result.tracks.iter().filter(|t| t.error.is_none()).collect();
    if !complete.is_empty() {
        let mut columns = vec!["date"];
        columns.extend(complete.iter().map(|t| t.label.as_str()));
        let oos_len = complete[0].oos_returns.len();
        let mut rows = Vec::with_capacity(oos_len);
        for i in 0..oos_len {
            let date = data.dates()[cfg.estimation_window + i];
            let mut row = vec![date.to_string()];
            row.extend(complete.iter().map(|t| fmt(t.oos_returns[i])));
            rows.push(row);
        }
        let path = out_dir.join("returns.csv");
        write_table(&path, "returns", &columns, &rows).map_err(io_err(&path))?;
        written.push(path);

        // Pairwise two-sided p-values for equal Sharpe ratios.
        let mut columns = vec!["strategy"];
        columns.extend(complete.iter().map(|t| t.label.as_str()));
        let mut rows = Vec::new();
        for a in &complete {
            let mut row = vec![a.label.clone()];
            for b in &complete {
                if std::ptr::eq(*a, *b) {
                    row.push(fmt(1.0));
                } else {
                    let res = sharpe_test(
                        &a.oos_returns,
                        &b.oos_returns,
                        cfg.sharpe_resamples,
                        cfg.sharpe_block_size,
                        cfg.seed,
                    )?;
                    row.push(fmt(res.two_sided_p));
                }
            }
            rows.push(row);
        }
        let path = out_dir.join("sharpe_pvalues.csv");
        write_table(&path, "sharpe_pvalues", &columns, &rows).map_err(io_err(&path))?;
        written.push(path);
    }

    // Effective config echo; re-running from it reproduces the artifacts.
    let mut echoed = cfg.clone();
    echoed.out_dir = out_dir.display().to_string();
    let config_path = out_dir.join("config.toml");
    std::fs::write(&config_path, toml::to_string_pretty(&echoed).expect("serializable config"))
        .map_err(io_err(&config_path))?;
    written.push(config_path);

    Ok(written)
}

/// Loads a return column and estimates its exponential Rényi entropy.
pub fn run_estimate(
    data_path: &str,
    date_column: &str,
    column: &str,
    alpha: f64,
    m_spec: Option<&str>,
    bias_correct: bool,
) -> Result<(usize, usize, f64), RunError> {
    let matrix = ingest_csv(data_path, date_column, &[column.to_string()])?;
    let series: Vec<f64> = matrix.returns().column(0).to_vec();
    let n = series.len();
    let m = match m_spec {
        Some(spec) => spec.parse::<usize>().map_err(|_| {
            crate::config::ConfigError::Invalid(format!("bad m {spec:?}: need an integer"))
        })?,
        None => renyirisk::entropy::default_m(n),
    };
    let params = renyirisk::entropy::RenyiParams { alpha, m, bias_correct };
    let value = renyirisk::entropy::m_spacings_estimate(&series, &params)
        .map_err(|e| crate::config::ConfigError::Invalid(e.to_string()))?;
    Ok((n, m, value))
}

/// Validates a config and its referenced data without running anything.
/// Returns a human-readable summary.
pub fn run_validate(cfg: &RunConfig) -> Result<String, RunError> {
    let data = ingest_csv(&cfg.data, &cfg.date_column, &cfg.columns)?;
    let resolve = |name: &str| data.column_index(name);
    for (i, s) in cfg.strategies.iter().enumerate() {
        build_strategy(cfg, s, i, &resolve)?;
    }
    let windows = renyirisk::backtest::window_count(
        data.n_periods(),
        cfg.estimation_window,
        cfg.roll,
    );
    if windows == 0 {
        return Err(renyirisk::backtest::BacktestError::TooShort {
            rows: data.n_periods(),
            need: cfg.estimation_window + cfg.roll,
        }
        .into());
    }
    Ok(format!(
        "ok: {} rows x {} assets, {} strategies, {} windows",
        data.n_periods(),
        data.n_assets(),
        cfg.strategies.len(),
        windows
    ))
}

/// Runs one synthetic study and writes its table to `<out_dir>/<name>.csv`.
pub fn run_study_command(
    study: renyirisk::experiments::Study,
    seed: u64,
    desk_scale: bool,
    out_dir: &str,
) -> Result<PathBuf, RunError> {
    let spec = renyirisk::experiments::StudySpec { study, seed, desk_scale };
    let table = renyirisk::experiments::run_study(&spec)?;
    let dir = Path::new(out_dir);
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(format!("{}.csv", table.name));
    write_table(&path, table.name, &table.columns, &table.rows).map_err(io_err(&path))?;
    Ok(path)
}
