//! Command-line front end for the `minindex` library.
//!
//! Every subcommand returns a JSON document tagged with the schema
//! [`report::SCHEMA`], or its indented text rendering. DOT export is the only
//! command producing a different format.

pub mod input;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minindex::calculus;
use minindex::oracle::{self, OracleConfig};
use minindex::spectral;
use minindex::ValidationOptions;
use serde::Serialize;
use serde_json::Value;

use report::Tolerances;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Validation(minindex::Error),
    #[error(transparent)]
    Numerical(minindex::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<minindex::Error> for CliError {
    fn from(e: minindex::Error) -> Self {
        match e {
            minindex::Error::NoConvergence(_) | minindex::Error::OracleNoConvergence(_) => CliError::Numerical(e),
            other => CliError::Validation(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "minindex", version, about = "Minimal index of inclusions with finite-dimensional centers")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Accept entries strictly between 0 and 1.
    #[arg(long, global = true)]
    pub no_quantization_floor: bool,
    /// Default for every tolerance below, and the oracle KKT tolerance.
    #[arg(long, env = "MININDEX_TOL", global = true)]
    pub tol: Option<f64>,
    /// Power-iteration residual bound.
    #[arg(long, global = true)]
    pub pf_tol: Option<f64>,
    /// Distance to the Jones discrete series.
    #[arg(long, global = true)]
    pub classify_tol: Option<f64>,
    /// Super-extremality and trace comparisons.
    #[arg(long, global = true)]
    pub extremal_tol: Option<f64>,
    /// Perron-Frobenius vector matching in compositions.
    #[arg(long, global = true)]
    pub eigvec_tol: Option<f64>,
}

impl GlobalArgs {
    pub fn tolerances(&self) -> Tolerances {
        let base = self.tol.map(Tolerances::uniform).unwrap_or_default();
        Tolerances {
            pf: self.pf_tol.unwrap_or(base.pf),
            classify: self.classify_tol.unwrap_or(base.classify),
            extremal: self.extremal_tol.unwrap_or(base.extremal),
            eigvec: self.eigvec_tol.unwrap_or(base.eigvec),
        }
    }

    pub fn validation(&self) -> ValidationOptions {
        ValidationOptions {
            quantization_floor: !self.no_quantization_floor,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full report for a matrix dimension or Bratteli diagram (`-` reads stdin).
    Analyze {
        #[arg(default_value = "-")]
        path: PathBuf,
    },
    /// Compose two inclusions: the first is the upper one.
    Compose { upper: PathBuf, lower: PathBuf },
    /// Indices along the Jones tower.
    Tower {
        path: PathBuf,
        #[arg(long, default_value_t = 2)]
        levels: usize,
    },
    /// Residual of `D − Σ parts` and the factor-case formula.
    Additivity { path: PathBuf },
    /// Minimise the index functional numerically.
    Oracle {
        path: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Include per-restart trajectories.
        #[arg(long)]
        verbose: bool,
    },
    /// Graphviz rendering of a Bratteli diagram.
    ExportDot { path: PathBuf },
}

#[derive(Debug, Serialize)]
struct OracleCheck {
    closed_form: f64,
    gap: f64,
    argmin_distance: f64,
    /// `max_i` spread of the row sums at the closed-form weights.
    closed_form_row_spread: f64,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    result: oracle::OracleResult,
    check: OracleCheck,
}

#[derive(Debug, Serialize)]
struct AdditivityReport {
    residual: minindex::matrix::Matrix,
    max_abs_residual: f64,
    weighted_additivity_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    factor_case: Option<calculus::FactorCaseAdditivity>,
}

fn finish(value: Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Text => report::to_text(&value),
    }
}

/// Runs a parsed command and returns what should go to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let g = &cli.global;
    let tol = g.tolerances();
    let opts = g.validation();
    match &cli.command {
        Command::Analyze { path } => {
            let inc = input::load_inclusion(path, opts)?;
            let rep = report::analyze(&inc, &tol)?;
            Ok(finish(report::envelope("analysis", &rep), g.format))
        }
        Command::Compose { upper, lower } => {
            let d1 = input::load_inclusion(upper, opts)?.matrix;
            let d2 = input::load_inclusion(lower, opts)?.matrix;
            let rep = calculus::compose(&d1, &d2, tol.eigvec)?;
            Ok(finish(report::envelope("composition", &rep), g.format))
        }
        Command::Tower { path, levels } => {
            let d = input::load_inclusion(path, opts)?.matrix;
            let rep = calculus::jones_tower(&d, *levels)?;
            Ok(finish(report::envelope("tower", &rep), g.format))
        }
        Command::Additivity { path } => {
            let text = input::read_source(path)?;
            let spec: input::AdditivitySpec = input::parse_json(&text, &path.display().to_string())?;
            let d = minindex::validate_dimension_matrix(&spec.d, opts)?;
            let parts = input::parts_to_matrices(&spec.parts)?;
            let residual = calculus::additivity_check(&d, &parts)?;
            let pf = spectral::pf_data(&d, &tol.pf_config())?;
            let rep = AdditivityReport {
                max_abs_residual: residual.max_abs(),
                residual,
                weighted_additivity_residual: spectral::weighted_additivity_check(&d, &pf),
                factor_case: calculus::factor_case_additivity(&d).ok(),
            };
            Ok(finish(report::envelope("additivity", &rep), g.format))
        }
        Command::Oracle {
            path,
            seed,
            restarts,
            jobs,
            verbose,
        } => {
            let d = input::load_inclusion(path, opts)?.matrix;
            let cfg = OracleConfig {
                tol: g.tol.unwrap_or(OracleConfig::default().tol),
                seed: *seed,
                restarts: *restarts,
                jobs: *jobs,
                record_trajectory: *verbose,
                ..OracleConfig::default()
            };
            let result = oracle::minimize_index(&d, &cfg)?;
            let pf = spectral::pf_data(&d, &tol.pf_config())?;
            let closed = spectral::minimal_expectation(&d, &pf)?;
            let sums = oracle::index_row_sums(&d, &closed.lambda)?;
            let spread = sums.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                - sums.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let check = OracleCheck {
                closed_form: pf.index(),
                gap: (result.min_value - pf.index()).abs(),
                argmin_distance: result.argmin.max_abs_diff(&closed.lambda),
                closed_form_row_spread: spread,
            };
            if *verbose {
                eprintln!(
                    "oracle: best restart {} of {}, kkt {:.3e}, dual bound {}",
                    result.best_restart, result.restarts, result.kkt_residual, result.dual_bound
                );
            }
            Ok(finish(report::envelope("oracle", &OracleReport { result, check }), g.format))
        }
        Command::ExportDot { path } => {
            let inc = input::load_inclusion(path, opts)?;
            let diag = inc.bratteli.ok_or_else(|| {
                CliError::Input("export-dot needs a Bratteli diagram: supply \"beta\" and \"alpha\"".into())
            })?;
            Ok(diag.to_dot())
        }
    }
}
