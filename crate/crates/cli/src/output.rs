//! Result rows, CSV/JSON rendering and atomic file output.

use std::io::{self, Write};
use std::path::Path;

use decay_focus::verify::SuiteReport;
use decay_focus::{CalibrationResult, MonteCarloSummary, SummaryWarning};
use serde::Serialize;
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::args::Format;
use crate::spec::Task;

pub const CSV_HEADER: &str =
    "param_set,lambda,nu,mu1,M,trials,mean,std_error,censored,false_alarms";

/// `x` rounded to 6 significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Plain decimal with 6 significant digits; `nan`/`inf` for non-finite.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let r = round_sig6(x);
    let exponent = r.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    format!("{r:.decimals$}")
}

fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(round_sig6(x))
    } else {
        Value::Null
    }
}

/// One line of an EDD/ARL table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub param_set: String,
    pub lambda: f64,
    /// `None` for runs without a change.
    pub nu: Option<u64>,
    pub mu1: Option<f64>,
    pub n_streams: usize,
    pub trials: usize,
    pub horizon: u64,
    /// `Err` carries the failure message of a cell that produced no estimate.
    pub summary: Result<MonteCarloSummary, String>,
}

impl Row {
    fn csv(&self) -> String {
        let (mean, se, censored, false_alarms) = match &self.summary {
            Ok(s) => (
                sig6(s.mean),
                sig6(s.std_error),
                s.n_censored.to_string(),
                s.n_false_alarms.to_string(),
            ),
            Err(_) => ("nan".into(), "nan".into(), String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.param_set,
            sig6(self.lambda),
            self.nu.map_or("inf".into(), |nu| nu.to_string()),
            self.mu1.map_or(String::new(), sig6),
            self.n_streams,
            self.trials,
            mean,
            se,
            censored,
            false_alarms,
        )
    }

    fn json(&self) -> Value {
        let mut v = json!({
            "param_set": self.param_set,
            "lambda": json_num(self.lambda),
            "nu": self.nu,
            "mu1": self.mu1.map(json_num),
            "M": self.n_streams,
            "trials": self.trials,
            "horizon": self.horizon,
        });
        let extra = match &self.summary {
            Ok(s) => json!({
                "mean": json_num(s.mean),
                "std_error": json_num(s.std_error),
                "censored": s.n_censored,
                "false_alarms": s.n_false_alarms,
                "warning": s.warning.map(warning_text),
            }),
            Err(e) => json!({ "error": e }),
        };
        if let (Value::Object(map), Value::Object(more)) = (&mut v, extra) {
            map.extend(more);
        }
        v
    }
}

pub fn warning_text(w: SummaryWarning) -> String {
    match w {
        SummaryWarning::HeavyCensoring { fraction } => format!(
            "{}% of runs censored at the horizon; mean is biased low",
            sig6(100.0 * fraction)
        ),
    }
}

/// Everything a command produced.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub rows: Vec<Row>,
    pub calibration: Option<CalibrationResult>,
    pub checks: Vec<SuiteReport>,
}

#[derive(Serialize)]
struct Document<'a> {
    version: &'a str,
    config: &'a Task,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    results: Vec<Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    checks: Vec<Value>,
}

fn calibration_json(c: &CalibrationResult) -> Value {
    json!({
        "c_constant": json_num(c.c_constant),
        "quadrature_error_estimate": json_num(c.quadrature_error_estimate),
        "target_arl": json_num(c.target_arl),
        "M": c.n_streams,
        "threshold": json_num(c.threshold),
    })
}

fn check_json(r: &SuiteReport) -> Value {
    json!({
        "name": r.name,
        "cases": r.cases,
        "prefixes_checked": r.prefixes_checked,
        "max_abs_error": json_num(r.max_abs_error),
        "failures": r.failures,
        "passed": r.passed(),
    })
}

/// Renders `report` for `task`. Output depends only on its arguments.
pub fn render(task: &Task, report: &Report, format: Format, version: &str) -> String {
    match format {
        Format::Json => {
            let doc = Document {
                version,
                config: task,
                calibration: report.calibration.as_ref().map(calibration_json),
                results: report.rows.iter().map(Row::json).collect(),
                checks: report.checks.iter().map(check_json).collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => match task {
            Task::Calibrate { .. } => {
                let c = report
                    .calibration
                    .as_ref()
                    .expect("calibrate produces a calibration");
                format!(
                    "c_constant,quadrature_error_estimate,gamma,M,lambda\n{},{},{},{},{}\n",
                    sig6(c.c_constant),
                    sig6(c.quadrature_error_estimate),
                    sig6(c.target_arl),
                    c.n_streams,
                    sig6(c.threshold),
                )
            }
            Task::Verify { .. } => {
                let mut s =
                    String::from("suite,cases,prefixes_checked,max_abs_error,failures,result\n");
                for r in &report.checks {
                    s.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        r.name,
                        r.cases,
                        r.prefixes_checked,
                        sig6(r.max_abs_error),
                        r.failures,
                        if r.passed() { "PASS" } else { "FAIL" },
                    ));
                }
                s
            }
            _ => {
                let mut s = format!("{CSV_HEADER}\n");
                for row in &report.rows {
                    s.push_str(&row.csv());
                    s.push('\n');
                }
                s
            }
        },
    }
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
