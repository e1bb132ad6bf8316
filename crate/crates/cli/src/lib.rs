//! Command-line driver for `alpha_channel`: configuration, subcommands, CSV
//! output and the verification suite.

// `!(a <= b)` is used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod verify;

use crate::config::Model;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "alpha-channel", version, about = "Averaged channel-flow kernels, bounds and roughness closure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// JSON config file; every key is optional.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one config key by dotted path, e.g. `kernel.tail_tol=1e-12`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel values, time integrals and heat-equation residuals.
    Kernel(Common),
    /// Duhamel mean velocity against a time-stepping oracle.
    Evolve(Common),
    /// Steady profile under a constant drop against the closed form.
    Poiseuille(Common),
    /// Reynolds number of the time-averaged profile against its bound.
    Bound(Common),
    /// Generation matching and multipliers of the roughness cascade.
    Roughness(Common),
    /// Mean velocity before and after the roughness update.
    Alpha(Common),
    /// Stationary NSE and NS-alpha profiles.
    Profiles(Common),
    /// Runs the invariant suite.
    Verify(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Kernel(c) => ("kernel", c),
            Command::Evolve(c) => ("evolve", c),
            Command::Poiseuille(c) => ("poiseuille", c),
            Command::Bound(c) => ("bound", c),
            Command::Roughness(c) => ("roughness", c),
            Command::Alpha(c) => ("alpha", c),
            Command::Profiles(c) => ("profiles", c),
            Command::Verify(c) => ("verify", c),
        }
    }
}

/// Colours verdicts when stdout is a terminal and `NO_COLOR` is unset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Style {
    pub color: bool,
}

impl Style {
    pub fn detect() -> Self {
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Self { color: !no_color && std::io::stdout().is_terminal() }
    }

    pub fn verdict(&self, ok: bool, text: &str) -> String {
        if !self.color {
            return text.to_string();
        }
        let code = if ok { 32 } else { 31 };
        format!("\x1b[{code}m{text}\x1b[0m")
    }
}

fn write_csv(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.csv"));
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn execute(name: &str, model: &Model, style: Style) -> Result<commands::Outcome, CliError> {
    match name {
        "kernel" => commands::kernel(model),
        "evolve" => commands::evolve(model),
        "poiseuille" => commands::poiseuille(model),
        "bound" => commands::bound(model, style),
        "roughness" => commands::roughness(model, style),
        "alpha" => commands::alpha(model),
        "profiles" => commands::profiles(model),
        "verify" => {
            let checks = verify::run_checks(model)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
            let breach = (!failed.is_empty()).then(|| format!("{} checks failed: {}", failed.len(), failed.join(", ")));
            Ok(commands::Outcome { table: verify::table(&checks), report: verify::render(&checks, style), breach })
        }
        other => unreachable!("unknown command {other}"),
    }
}

fn dispatch(cli: Cli, style: Style) -> Result<(), CliError> {
    let (name, common) = cli.command.parts();
    let model = config::load(common.config.as_deref(), &common.set)?;
    let dir = common.out.clone().unwrap_or_else(|| model.config.output.directory.clone());
    let outcome = execute(name, &model, style)?;
    let csv = outcome.table.render(name, &model.hash, model.config.output.precision);
    let path = write_csv(&dir, name, &csv)?;
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(outcome.report.as_bytes())?;
    writeln!(stdout, "wrote {}", path.display())?;
    match outcome.breach {
        Some(reason) => Err(CliError::Tolerance(reason)),
        None => Ok(()),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli, Style::detect()) {
        Ok(()) => 0,
        Err(e) => {
            let label = match e {
                CliError::Tolerance(_) => "tolerance breach",
                CliError::Validation(_) => "invalid input",
                CliError::Io(_) => "error",
            };
            eprintln!("alpha-channel: {label}: {e}");
            e.exit_code()
        }
    }
}
