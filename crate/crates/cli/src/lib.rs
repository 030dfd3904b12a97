//! Experiment runner behind the `decay-focus` binary.
//!
//! [`ExperimentSpec::from_cli`] validates flags and config into a spec and
//! [`run_command`] executes it. Data goes to `--output` or standard output;
//! progress and the one-line summary go to standard error unless the data
//! went to a file, in which case the summary is printed on standard output.

use std::io::Write;

use decay_focus::verify::{cusum_oracle_suite, focus_oracle_suite};
use decay_focus::{CalibrationResult, ChangePoint, MonteCarlo, TrialConfig};
use thiserror::Error;

pub mod args;
pub mod config;
pub mod output;
pub mod spec;

pub use args::{Cli, Format};
pub use output::{render, Report, Row, CSV_HEADER};
pub use spec::{ExperimentSpec, Level, Task};

/// Crate version plus `git describe` of the build tree.
pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (",
    env!("DECAY_FOCUS_GIT_DESCRIBE"),
    ")"
);

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Estimation(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Verification(_) | CliError::Io(_) | CliError::Internal(_) => 1,
        }
    }
}

impl From<decay_focus::Error> for CliError {
    fn from(e: decay_focus::Error) -> Self {
        use decay_focus::Error as E;
        match e {
            E::Domain(m) => CliError::Usage(m),
            E::Estimation(m) => CliError::Estimation(m),
            E::Numerical(m) | E::Range(m) => CliError::Numerical(m),
            E::Contract(m) => CliError::Internal(m),
        }
    }
}

/// Runs `spec`, writing data to `spec.output` or `out` and diagnostics to `err`.
pub fn run_command(
    spec: &ExperimentSpec,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let pool = MonteCarlo::new(spec.workers);
    let (report, summary, failure) = execute(&spec.task, &pool, err)?;
    let text = render(&spec.task, &report, spec.format, VERSION);
    match &spec.output {
        Some(path) => {
            output::write_atomic(path, text.as_bytes()).map_err(|e| {
                std::io::Error::new(e.kind(), format!("writing {}: {e}", path.display()))
            })?;
            writeln!(out, "{summary} -> {}", path.display())?;
        }
        None => {
            out.write_all(text.as_bytes())?;
            out.flush()?;
            writeln!(err, "{summary}")?;
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Result of a command: its report, a summary line, and an error to return
/// after the report has been written.
type Executed = (Report, String, Option<CliError>);

fn resolve_level(
    level: Level,
    n_streams: usize,
) -> Result<(f64, Option<CalibrationResult>), CliError> {
    match level {
        Level::Threshold(t) => Ok((t, None)),
        Level::Gamma(g) => {
            let cal = CalibrationResult::for_target(g, n_streams)?;
            Ok((cal.threshold, Some(cal)))
        }
    }
}

fn execute(task: &Task, pool: &MonteCarlo, err: &mut dyn Write) -> Result<Executed, CliError> {
    let workers = pool.workers.map_or("all".into(), |w| w.to_string());
    match *task {
        Task::Edd {
            streams,
            nu,
            mu1,
            level,
            horizon,
            trials,
            seed,
        } => {
            let (lambda, calibration) = resolve_level(level, streams)?;
            writeln!(err, "edd: {trials} trials, M={streams}, mu1={mu1}, nu={nu}, lambda={} on {workers} workers", output::sig6(lambda))?;
            let cfg = TrialConfig::new(streams, ChangePoint::At(nu), mu1, lambda, horizon, seed);
            let s = pool.estimate_edd(&cfg, trials)?;
            let line = format!(
                "edd M={streams} mu1={mu1} nu={nu} lambda={}: {} ± {} ({} censored, {} false alarms)",
                output::sig6(lambda),
                output::sig6(s.mean),
                output::sig6(s.std_error),
                s.n_censored,
                s.n_false_alarms
            );
            let row = Row {
                param_set: "edd".into(),
                lambda,
                nu: Some(nu),
                mu1: Some(mu1),
                n_streams: streams,
                trials,
                horizon,
                summary: Ok(s),
            };
            Ok((
                Report {
                    rows: vec![row],
                    calibration,
                    checks: vec![],
                },
                line,
                None,
            ))
        }
        Task::Arl {
            streams,
            level,
            horizon,
            trials,
            seed,
        } => {
            let (lambda, calibration) = resolve_level(level, streams)?;
            let horizon = horizon.unwrap_or_else(|| spec::default_arl_horizon(lambda));
            writeln!(err, "arl: {trials} trials, M={streams}, lambda={}, horizon={horizon} on {workers} workers", output::sig6(lambda))?;
            let cfg = TrialConfig::new(streams, ChangePoint::Never, 0.0, lambda, horizon, seed);
            let s = pool.estimate_arl(&cfg, trials)?;
            if let Some(w) = s.warning {
                writeln!(err, "warning: {}", output::warning_text(w))?;
            }
            let line = format!(
                "arl M={streams} lambda={}: {} ± {} ({} censored)",
                output::sig6(lambda),
                output::sig6(s.mean),
                output::sig6(s.std_error),
                s.n_censored
            );
            let row = Row {
                param_set: "arl".into(),
                lambda,
                nu: None,
                mu1: None,
                n_streams: streams,
                trials,
                horizon,
                summary: Ok(s),
            };
            Ok((
                Report {
                    rows: vec![row],
                    calibration,
                    checks: vec![],
                },
                line,
                None,
            ))
        }
        Task::Sweep {
            ref mu1_grid,
            ref m_grid,
            nu,
            threshold,
            horizon,
            trials,
            seed,
        } => {
            let cells = mu1_grid.len() * m_grid.len();
            writeln!(
                err,
                "sweep: {cells} cells x {trials} trials, lambda={threshold} on {workers} workers"
            )?;
            let base = TrialConfig::new(1, ChangePoint::At(nu), 1.0, threshold, horizon, seed);
            let all = pool.sweep_edd(&base, mu1_grid, m_grid, trials)?;
            let mut rows = Vec::with_capacity(all.len());
            let mut failed = 0;
            for (i, cell) in all.into_iter().enumerate() {
                let summary = cell.summary.map_err(|e| e.to_string());
                match &summary {
                    Ok(s) => writeln!(
                        err,
                        "  cell {}/{cells}: M={} mu1={} -> {}",
                        i + 1,
                        cell.n_streams,
                        cell.mu1,
                        output::sig6(s.mean)
                    )?,
                    Err(e) => {
                        failed += 1;
                        writeln!(
                            err,
                            "  cell {}/{cells}: M={} mu1={} failed: {e}",
                            i + 1,
                            cell.n_streams,
                            cell.mu1
                        )?
                    }
                }
                rows.push(Row {
                    param_set: format!("sweep-{i}"),
                    lambda: threshold,
                    nu: Some(nu),
                    mu1: Some(cell.mu1),
                    n_streams: cell.n_streams,
                    trials,
                    horizon,
                    summary,
                });
            }
            let line = format!("sweep: {} of {cells} cells estimated", cells - failed);
            let failure = (failed > 0).then(|| {
                CliError::Estimation(format!(
                    "{failed} of {cells} sweep cells produced no estimate"
                ))
            });
            Ok((
                Report {
                    rows,
                    calibration: None,
                    checks: vec![],
                },
                line,
                failure,
            ))
        }
        Task::Calibrate { gamma, streams } => {
            let cal = CalibrationResult::for_target(gamma, streams)?;
            let line = format!(
                "C = {} (quadrature error {:.1e}), lambda = log(C·{streams}·{gamma}) = {}",
                output::sig6(cal.c_constant),
                cal.quadrature_error_estimate,
                output::sig6(cal.threshold)
            );
            Ok((
                Report {
                    rows: vec![],
                    calibration: Some(cal),
                    checks: vec![],
                },
                line,
                None,
            ))
        }
        Task::Verify {
            cases,
            max_len,
            seed,
        } => {
            let checks = vec![
                focus_oracle_suite(cases, max_len, seed)?,
                cusum_oracle_suite(cases, max_len, seed)?,
            ];
            let line = checks
                .iter()
                .map(|r| {
                    format!(
                        "{}: {} ({} cases, {} prefixes, max |Δ| = {:.1e})",
                        r.name,
                        if r.passed() { "PASS" } else { "FAIL" },
                        r.cases,
                        r.prefixes_checked,
                        r.max_abs_error
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let failing: Vec<_> = checks
                .iter()
                .filter(|r| !r.passed())
                .map(|r| r.name)
                .collect();
            let failure = (!failing.is_empty()).then(|| CliError::Verification(failing.join(", ")));
            Ok((
                Report {
                    rows: vec![],
                    calibration: None,
                    checks,
                },
                line,
                failure,
            ))
        }
    }
}
