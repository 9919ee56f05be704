//! Command-line driver: single simulations, switching-time sweeps,
//! entanglement checks and fringe fits, all emitting CSV.

// `!(x >= y)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{error::ErrorKind, Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{cmd_entangle_check, cmd_fit, cmd_simulate, cmd_sweep, Report};
pub use config::{LambdaSetting, RunConfig};
pub use format::format_number;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] bimodal_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        source: bimodal_core::Error,
    },
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Model(_) => 1,
            CliError::Mismatch(_) => 2,
            CliError::Io { .. } | CliError::Input { .. } => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bimodal",
    version,
    about = "Atom-cavity switching simulations and fringe fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probe excitation probability P(T) over delay intervals.
    Simulate(CommonArgs),
    /// Fitted relative frequency and phase as a function of switching time.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Switching times in μs: `a,b,c` or `lo:hi:n`.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Two-mode state left behind by the source atom.
    EntangleCheck(CommonArgs),
    /// Fit fringes in a two-column (T_us, P) trace.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// `plain` or `damped`.
        #[arg(long)]
        fit_model: Option<String>,
        /// Damping rate α, 1/μs.
        #[arg(long)]
        alpha: Option<String>,
        /// Damping rate β, 1/μs.
        #[arg(long)]
        beta: Option<String>,
        /// Origin of the damping clock, μs.
        #[arg(long)]
        xi_origin_us: Option<String>,
        data: PathBuf,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// stepwise, smooth or channel.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    t_switch_us: Option<String>,
    #[arg(long)]
    omega_khz: Option<String>,
    #[arg(long)]
    delta_khz: Option<String>,
    /// `auto` or a value in rad/μs.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// linear or raised-cosine.
    #[arg(long)]
    profile: Option<String>,
    /// step or raised-cosine.
    #[arg(long)]
    switch_shape: Option<String>,
    /// exact or reduced.
    #[arg(long)]
    window_frame: Option<String>,
    /// Delay interval `lo:hi` or `LABEL=lo:hi` in μs; repeatable.
    #[arg(long)]
    interval: Vec<String>,
    /// Samples per interval.
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    ode_step_us: Option<String>,
    /// `key=value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let single = [
            ("model", &self.model),
            ("t_switch_us", &self.t_switch_us),
            ("omega_khz", &self.omega_khz),
            ("delta_khz", &self.delta_khz),
            ("lambda", &self.lambda),
            ("profile", &self.profile),
            ("switch_shape", &self.switch_shape),
            ("window_frame", &self.window_frame),
            ("points", &self.points),
            ("ode_step_us", &self.ode_step_us),
        ];
        single
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .chain(self.interval.iter().map(|v| ("interval", v.as_str())))
            .collect()
    }
}

fn build_config(
    common: &CommonArgs,
    extra: &[(&'static str, &Option<String>)],
) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        cfg.apply_file(&text)?;
    }
    if !common.interval.is_empty() {
        cfg.intervals.clear();
    }
    let extra = extra
        .iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (*k, v)));
    for (key, value) in common.pairs().into_iter().chain(extra) {
        cfg.apply(key, value)?;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(Report, Option<PathBuf>), CliError> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = build_config(&common, &[])?;
            Ok((cmd_simulate(&cfg)?, common.out))
        }
        Command::Sweep { common, grid } => {
            let cfg = build_config(&common, &[("grid", &grid)])?;
            Ok((cmd_sweep(&cfg)?, common.out))
        }
        Command::EntangleCheck(common) => {
            let cfg = build_config(&common, &[])?;
            Ok((cmd_entangle_check(&cfg)?, common.out))
        }
        Command::Fit {
            common,
            fit_model,
            alpha,
            beta,
            xi_origin_us,
            data,
        } => {
            let cfg = build_config(
                &common,
                &[
                    ("fit_model", &fit_model),
                    ("alpha", &alpha),
                    ("beta", &beta),
                    ("xi_origin_us", &xi_origin_us),
                ],
            )?;
            let text = std::fs::read_to_string(&data).map_err(|source| CliError::Io {
                path: data.clone(),
                source,
            })?;
            let report = cmd_fit(&cfg, &text).map_err(|e| match e {
                CliError::Model(
                    source @ (bimodal_core::Error::Trace { .. } | bimodal_core::Error::EmptyTrace),
                ) => CliError::Input { path: data, source },
                other => other,
            })?;
            Ok((report, common.out))
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code. Output is written only after the command has
/// finished, so a failing run leaves no partial output behind.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(shown.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(shown.as_bytes());
                    1
                }
            };
        }
    };
    let result = dispatch(cli).and_then(|(report, out)| {
        match out {
            Some(path) => std::fs::write(&path, &report.output)
                .map_err(|source| CliError::Io { path, source })?,
            None => stdout
                .write_all(report.output.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?,
        }
        let _ = stderr.write_all(report.notes.as_bytes());
        match report.failure {
            Some(msg) => Err(CliError::Mismatch(msg)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
