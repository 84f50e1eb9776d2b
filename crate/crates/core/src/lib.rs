//! Portfolio risk through the exponential Rényi entropy lens: analytic
//! oracles, the m-spacings estimator family, risk-optimal portfolio
//! construction, and a rolling-window backtest engine.

pub mod backtest;
pub mod dists;
pub mod entropy;
pub mod exec;
pub mod experiments;
pub mod metrics;
pub mod optim;
pub mod risk;
