//! `lpkit`: runs square-function, multiplier and Sobolev experiments from
//! the command line. Reports are JSON, data tables are CSV.
//!
//! Exit codes: 0 on success or a passing experiment, 1 when an experiment
//! fails its bound, 2 on usage, configuration or I/O errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::{SymbolArgs, Verdict};
use config::{Config, OperatorKind, SymbolMode};

#[derive(Debug, Parser)]
#[command(name = "lpkit", version, about = "Littlewood-Paley and Sobolev experiments on sampled fields")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted (required by `symbol`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the test family.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Samples per axis.
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    /// Half-length of the periodic box.
    #[arg(long = "grid-l", global = true)]
    grid_l: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kernel metadata and hypothesis checks at default parameters.
    KernelInfo { kernel: String },
    /// Hypothesis checks with configured parameters; exit 1 if any fails.
    Conditions { kernel: String },
    /// Tabulate the continuous or dyadic symbol of a kernel.
    Symbol {
        kernel: String,
        #[arg(long, value_enum)]
        mode: Option<SymbolMode>,
        #[arg(long, allow_hyphen_values = true)]
        k_min: Option<i32>,
        #[arg(long, allow_hyphen_values = true)]
        k_max: Option<i32>,
    },
    /// Evaluate g_psi (or Delta_psi with --dyadic) on a field.
    Gfun {
        kernel: String,
        #[arg(long)]
        dyadic: bool,
        /// Field file (`.csv` or binary); a Gaussian derivative when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Ratio spread of g_psi or Delta_psi over the test family.
    Equivalence {
        #[arg(long, value_enum)]
        operator: Option<OperatorKind>,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Sobolev-chain ratio spread over the test family.
    Sobolev {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        weight: Option<String>,
    },
    /// Scan of the regularity ratio for the generalized Marcinkiewicz kernel.
    MarScan {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        density: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<Verdict> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.grid_n {
        cfg.grid.n = Some(n);
    }
    if let Some(l) = cli.grid_l {
        cfg.grid.half_length = Some(l);
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::KernelInfo { kernel } => commands::kernel_info(&kernel, out),
        Command::Conditions { kernel } => commands::conditions(&kernel, &cfg, out),
        Command::Symbol { kernel, mode, k_min, k_max } => {
            commands::symbol(&SymbolArgs { kernel: &kernel, mode, k_min, k_max }, &cfg, out)
        }
        Command::Gfun { kernel, dyadic, input } => commands::gfun(&kernel, dyadic, input.as_deref(), &cfg, out),
        Command::Equivalence { operator, kernel, p, weight, bound } => {
            let e = &mut cfg.equivalence;
            e.operator = operator.unwrap_or(e.operator);
            e.kernel = kernel.unwrap_or(std::mem::take(&mut e.kernel));
            e.p = p.unwrap_or(e.p);
            e.weight = weight.unwrap_or(std::mem::take(&mut e.weight));
            e.bound = bound.unwrap_or(e.bound);
            commands::equivalence(&cfg, out)
        }
        Command::Sobolev { alpha, p, weight } => {
            let s = &mut cfg.sobolev;
            s.alpha = alpha.unwrap_or(s.alpha);
            s.p = p.unwrap_or(s.p);
            s.weight = weight.unwrap_or(std::mem::take(&mut s.weight));
            commands::sobolev(&cfg, out)
        }
        Command::MarScan { alpha, density } => {
            let m = &mut cfg.mar_scan;
            m.alpha = alpha.unwrap_or(m.alpha);
            m.density = density.unwrap_or(m.density);
            commands::mar_scan_cmd(&cfg, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
