//! Command-line surface: `backtest`, `study <name>`, `estimate`, and
//! `validate`. Exit codes: 0 success, 1 runtime failure (with a JSON error
//! record on stderr), 2 usage error. The only environment variable read is
//! `RENYIRISK_THREADS`, capping the worker pool.

use clap::{Parser, Subcommand};

mod config;
mod ingest;
mod output;
mod runner;

#[derive(Parser)]
#[command(name = "renyirisk", version, about = "Rényi-entropy risk-optimal portfolios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a rolling-window backtest from a TOML config.
    Backtest {
        /// Path to the run configuration.
        #[arg(long)]
        config: String,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run one synthetic study and emit its table.
    Study {
        /// Study name; `list` prints the valid names.
        name: String,
        /// Output directory for the table.
        #[arg(long, default_value = "out")]
        out: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Cut Monte Carlo repetition counts tenfold.
        #[arg(long)]
        desk_scale: bool,
    },
    /// One-shot entropy estimate of a return column.
    Estimate {
        #[arg(long)]
        data: String,
        #[arg(long)]
        column: String,
        #[arg(long, default_value = "date")]
        date_column: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Spacing width; defaults to ceil(N^(2/3)).
        #[arg(long)]
        m: Option<String>,
        /// Remove the order-1 asymptotic bias.
        #[arg(long)]
        bias_correct: bool,
    },
    /// Lint a config and its referenced data without running.
    Validate {
        #[arg(long)]
        config: String,
    },
}

fn fail(err: impl std::fmt::Display) -> ! {
    eprintln!("{}", serde_json::json!({ "error": err.to_string() }));
    std::process::exit(1);
}

fn usage_fail(msg: &str) -> ! {
    eprintln!("{}", serde_json::json!({ "error": msg, "kind": "usage" }));
    std::process::exit(2);
}

fn main() {
    let threads = std::env::var("RENYIRISK_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    renyirisk::exec::configure_threads(threads);

    let cli = Cli::parse();
    match cli.command {
        Command::Backtest { config, out } => {
            let cfg = config::load(&config).unwrap_or_else(|e| fail(e));
            match runner::run_backtest_command(&cfg, out.as_deref()) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Study { name, out, seed, desk_scale } => {
            if name == "list" {
                for s in renyirisk::experiments::Study::ALL {
                    println!("{}", s.name());
                }
                return;
            }
            let study = match renyirisk::experiments::Study::from_name(&name) {
                Some(s) => s,
                None => usage_fail(&format!(
                    "unknown study {name:?}; valid names: {}",
                    renyirisk::experiments::Study::ALL
                        .iter()
                        .map(|s| s.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                )),
            };
            match runner::run_study_command(study, seed, desk_scale, &out) {
                Ok(path) => println!("{}", path.display()),
                Err(e) => fail(e),
            }
        }
        Command::Estimate { data, column, date_column, alpha, m, bias_correct } => {
            match runner::run_estimate(&data, &date_column, &column, alpha, m.as_deref(), bias_correct)
            {
                Ok((n, m, value)) => {
                    println!("column={column} n={n} alpha={alpha} m={m} estimate={value}");
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { config } => {
            let cfg = config::load(&config).unwrap_or_else(|e| fail(e));
            match runner::run_validate(&cfg) {
                Ok(summary) => println!("{summary}"),
                Err(e) => fail(e),
            }
        }
    }
}
