//! `crn-noma` command-line front end.
//!
//! Exit status: 0 success, 1 invalid invocation / configuration / failed
//! verification, 2 solver non-convergence or numeric failure, 3 output I/O
//! failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::error::Error;
use crate::experiments::{self, ExperimentRecord, SweepSpec};
use crate::game::{self, EquilibriumResult, Scheme, UpdateMode};
use crate::model::{build_channel_gains, validate_config, NetworkConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// Power caps visited by `sweep-power`.
pub const SWEEP_POWER_CAPS: std::ops::RangeInclusive<u32> = 1..=20;

#[derive(Debug, Parser)]
#[command(
    name = "crn-noma",
    version,
    about = "Power-control game for cognitive-radio NOMA networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (JSON).
    #[arg(long, global = true, env = "CRN_GAME_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output file (JSON for solve/verify, CSV for sweeps).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Override a config field by dotted path, e.g. `solver.epsilon=1e-8`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Best-response update order, shorthand for `--set solver.update_mode=...`
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,

    /// Convergence tolerance on the per-sweep power change
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,

    /// Iteration cap before giving up with exit status 2
    #[arg(long = "max-iters", global = true)]
    pub max_iters: Option<usize>,

    /// Suppress the stdout summary
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the equilibrium and write it as JSON.
    Solve,
    /// Sum SU utility against the number of SUs, per PU SINR threshold.
    SweepK,
    /// Sum SU utility against the SU power cap.
    SweepPower,
    /// Paired NOMA and OMA sweeps over the number of SUs.
    CompareOma,
    /// Re-check a result file written by `solve`.
    Verify {
        /// Result JSON produced by `solve --out`.
        result: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Sequential,
    Simultaneous,
}

struct Failure {
    status: u8,
    message: String,
}

impl Failure {
    fn new(status: u8, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

fn status_for(err: &Error) -> u8 {
    match err {
        Error::NumericFailure { .. } | Error::Precondition(_) => EXIT_NOT_CONVERGED,
        Error::Io { .. } | Error::Csv(_) => EXIT_IO,
        Error::SweepPoint { source, .. } => status_for(source),
        _ => EXIT_INVALID,
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::new(status_for(&err), err.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_INVALID
                }
            };
            return status;
        }
    };
    match execute(&cli, out) {
        Ok(status) => status,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.status
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<u8, Failure> {
    let config = load_config(cli)?;
    let mut say = |line: String| {
        if !cli.quiet {
            let _ = writeln!(out, "{line}");
        }
    };
    match &cli.command {
        Command::Solve => {
            let gains = build_channel_gains(&config)?;
            let result = game::solve_equilibrium(&config, &gains)?;
            if let Some(path) = &cli.out {
                write_json(path, &result)?;
            }
            say(format!(
                "sum_su_utility = {}",
                experiments::format_real(result.sum_su_utility)
            ));
            say(format!(
                "admitted = {} / {}, iterations = {}, converged = {}",
                result.admitted_sus.len(),
                config.num_sus,
                result.iterations_used,
                result.converged
            ));
            Ok(convergence_status(result.converged))
        }
        Command::SweepK => {
            let path = required_out(cli)?;
            let spec = SweepSpec::num_sus(config).with_output(path);
            let records = experiments::sweep_num_sus(&spec)?;
            let rows = experiments::emit_csv(&records, path)?;
            say(format!("wrote {rows} rows to {}", path.display()));
            Ok(sweep_status(&records))
        }
        Command::SweepPower => {
            let path = required_out(cli)?;
            let caps = SWEEP_POWER_CAPS.map(f64::from).collect();
            let spec = SweepSpec::max_power(config, caps).with_output(path);
            let records = experiments::sweep_max_power(&spec)?;
            let rows = experiments::emit_csv(&records, path)?;
            say(format!("wrote {rows} rows to {}", path.display()));
            if let Some(best) = records
                .iter()
                .max_by(|a, b| a.sum_su_utility.total_cmp(&b.sum_su_utility))
            {
                say(format!(
                    "largest sum_su_utility {} at su_max_power = {}",
                    experiments::format_real(best.sum_su_utility),
                    best.variable_value
                ));
            }
            Ok(sweep_status(&records))
        }
        Command::CompareOma => {
            let path = required_out(cli)?;
            let spec = SweepSpec::comparison(config).with_output(path);
            let cmp = experiments::compare_noma_oma(&spec)?;
            let rows = experiments::emit_csv(&cmp.records, path)?;
            say(format!("wrote {rows} rows to {}", path.display()));
            if let Some(best) = cmp.max_improvement {
                say(format!(
                    "max NOMA improvement over OMA: {:.4}% at num_sus = {}",
                    100.0 * best.ratio,
                    best.variable_value
                ));
            }
            for scheme in [Scheme::Noma, Scheme::Oma] {
                if let Some(last) = cmp.records.iter().rev().find(|r| r.scheme == scheme) {
                    say(format!(
                        "{}: admitted {} SUs at num_sus = {}",
                        scheme.name(),
                        last.admitted_count,
                        last.variable_value
                    ));
                }
            }
            Ok(sweep_status(&cmp.records))
        }
        Command::Verify { result } => {
            let text = std::fs::read_to_string(result).map_err(|source| Error::Io {
                path: result.clone(),
                source,
            })?;
            let result: EquilibriumResult = serde_json::from_str(&text)
                .map_err(|e| Failure::new(EXIT_INVALID, format!("malformed result file: {e}")))?;
            let gains = build_channel_gains(&config)?;
            let report = game::verify_fixed_point(&result, &config, &gains)?;
            if let Some(path) = &cli.out {
                write_json(path, &report)?;
            }
            say(format!(
                "max_residual = {:e} (epsilon {:e}), worst = {:?}",
                report.max_residual, report.epsilon, report.worst_player
            ));
            say(format!(
                "flagged PUs {:?}, flagged SUs {:?}, PU grid scan {}",
                report.flagged_pus,
                report.flagged_sus,
                if report.grid_ok {
                    "ok"
                } else {
                    "found improving deviation"
                }
            ));
            say(format!("passed = {}", report.passed));
            Ok(if report.passed { EXIT_OK } else { EXIT_INVALID })
        }
    }
}

fn convergence_status(converged: bool) -> u8 {
    if converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn sweep_status(records: &[ExperimentRecord]) -> u8 {
    convergence_status(records.iter().all(|r| r.converged))
}

fn required_out(cli: &Cli) -> Result<&Path, Failure> {
    cli.out
        .as_deref()
        .ok_or_else(|| Failure::new(EXIT_INVALID, "this command needs --out <path>"))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::new(EXIT_IO, format!("serializing output: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| {
        Failure::from(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn load_config(cli: &Cli) -> Result<NetworkConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| {
        Failure::new(
            EXIT_INVALID,
            "no config given: pass --config <path> or set CRN_GAME_CONFIG",
        )
    })?;
    let invalid = |msg: String| Failure::new(EXIT_INVALID, msg);
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    let parsed: NetworkConfig = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("malformed config {}: {e}", path.display())))?;

    let mut overrides = cli.overrides.clone();
    if let Some(mode) = cli.mode {
        let mode = match mode {
            ModeArg::Sequential => UpdateMode::Sequential,
            ModeArg::Simultaneous => UpdateMode::Simultaneous,
        };
        let name = serde_json::to_value(mode).expect("mode serializes");
        overrides.push(format!("solver.update_mode={name}"));
    }
    if let Some(eps) = cli.epsilon {
        overrides.push(format!("solver.epsilon={eps:e}"));
    }
    if let Some(max) = cli.max_iters {
        overrides.push(format!("solver.max_iterations={max}"));
    }

    let mut value = serde_json::to_value(&parsed).expect("config serializes");
    for item in &overrides {
        apply_override(&mut value, item).map_err(invalid)?;
    }
    let config: NetworkConfig = serde_json::from_value(value)
        .map_err(|e| invalid(format!("override produced an invalid config: {e}")))?;
    let violations = validate_config(&config);
    if !violations.is_empty() {
        return Err(Error::Config(violations).into());
    }
    Ok(config)
}

/// Applies one `dotted.path=value` override. The value is read as JSON when
/// it parses, otherwise as a string. The path must already exist.
pub fn apply_override(root: &mut Value, item: &str) -> Result<(), String> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| format!("override `{item}` is not KEY=VALUE"))?;
    let new_value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut slot = root;
    for segment in key.split('.') {
        slot = match slot {
            Value::Object(map) => map.get_mut(segment),
            Value::Array(items) => segment.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| format!("unknown config key `{key}`"))?;
    }
    *slot = new_value;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_paths() {
        let mut v = serde_json::to_value(NetworkConfig::table1()).unwrap();
        apply_override(&mut v, "solver.epsilon=1e-8").unwrap();
        apply_override(&mut v, "su_max_power.3=5").unwrap();
        apply_override(&mut v, "solver.update_mode=simultaneous").unwrap();
        apply_override(&mut v, "solver.initial_pu_power=1.5").unwrap();
        let c: NetworkConfig = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(c.solver.epsilon, 1e-8);
        assert_eq!(c.su_max_power[3], 5.0);
        assert_eq!(c.solver.update_mode, UpdateMode::Simultaneous);
        assert_eq!(c.solver.initial_pu_power, Some(1.5));

        assert!(apply_override(&mut v, "solver.epsilonn=1").is_err());
        assert!(apply_override(&mut v, "su_max_power.26=1").is_err());
        assert!(apply_override(&mut v, "no_equals_sign").is_err());
    }

    #[test]
    fn unknown_subcommand_is_status_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["crn-noma", "bogus"], &mut out, &mut err), EXIT_INVALID);
        assert_eq!(
            run(["crn-noma", "solve", "--frobnicate"], &mut out, &mut err),
            EXIT_INVALID
        );
    }
}
