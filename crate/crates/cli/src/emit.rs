use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use shiftspec::verify::Verdict;
use shiftspec::ExtReal;

use crate::config::{ExperimentConfig, Task};
use crate::run::{fmt_complex, verdict_name, Check, GapClass, TaskResult};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub task: Task,
    /// Effective configuration, including any seed given on the command line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    pub result: TaskResult,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub timing_ms: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn to_json(report: &Report) -> Result<String, CliError> {
    serde_json::to_string_pretty(report)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn table(rows: &[(usize, ExtReal)]) -> Result<String, CliError> {
    csv_text(&["N", "value"], rows.iter().map(|(n, v)| vec![n.to_string(), v.to_string()]))
}

fn points(pts: &[num_complex::Complex64]) -> Result<String, CliError> {
    csv_text(&["re", "im"], pts.iter().map(|p| vec![p.re.to_string(), p.im.to_string()]))
}

/// CSV extracts of a report as `(file name, contents)`, in a fixed order.
pub fn csv_extracts(report: &Report) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    match &report.result {
        TaskResult::Radius(r) => {
            let rows = [("forward", r.forward), ("backward", r.backward)]
                .into_iter()
                .map(|(d, b)| vec![d.to_string(), b.lower.to_string(), b.upper.to_string()]);
            out.push(("radius.csv".into(), csv_text(&["direction", "lower", "upper"], rows)?));
        }
        TaskResult::Predict(p) => {
            if let Some(cloud) = p.region.cloud() {
                out.push(("cloud.csv".into(), points(&cloud.points)?));
            }
        }
        TaskResult::Verify(v) => {
            let summary = v.certificates.iter().map(|c| {
                vec![
                    c.lambda.re.to_string(),
                    c.lambda.im.to_string(),
                    format!("{:?}", c.method).to_lowercase(),
                    verdict_name(&c.verdict).to_string(),
                ]
            });
            out.push((
                "certificates.csv".into(),
                csv_text(&["re", "im", "method", "verdict"], summary)?,
            ));
            for (i, c) in v.certificates.iter().enumerate() {
                match &c.verdict {
                    Verdict::BlowupWitness { growth } => {
                        out.push((format!("growth_{i}.csv"), table(growth)?));
                    }
                    Verdict::InsideWitness { residuals, .. } => {
                        let rows: Vec<(usize, ExtReal)> =
                            residuals.iter().map(|&(n, r)| (n, ExtReal::Finite(r))).collect();
                        out.push((format!("residuals_{i}.csv"), table(&rows)?));
                    }
                    _ => {}
                }
            }
        }
        TaskResult::Joint(j) => {
            out.push(("cloud.csv".into(), points(&j.cloud.points)?));
            let rows = j.residuals.iter().enumerate().map(|(i, s)| {
                let z: Vec<String> = s.z.iter().map(|&x| fmt_complex(x)).collect();
                vec![i.to_string(), z.join(" "), s.residual.to_string()]
            });
            out.push(("residuals.csv".into(), csv_text(&["sample", "z", "value"], rows)?));
        }
        TaskResult::ConjectureGap(g) => {
            let band: Vec<_> = g
                .points
                .iter()
                .filter(|p| p.class == GapClass::Uncertified)
                .map(|p| p.lambda)
                .collect();
            out.push(("band.csv".into(), points(&band)?));
            let rows = g.points.iter().map(|p| {
                vec![
                    p.lambda.re.to_string(),
                    p.lambda.im.to_string(),
                    serde_json::to_value(p.class).unwrap().as_str().unwrap().to_string(),
                ]
            });
            out.push(("classification.csv".into(), csv_text(&["re", "im", "class"], rows)?));
        }
        TaskResult::Selftest => {}
    }
    let rows = report
        .checks
        .iter()
        .map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]);
    out.push(("checks.csv".into(), csv_text(&["name", "passed", "detail"], rows)?));
    Ok(out)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Writes the report to `out` (or stdout for JSON without `--out`).
pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    match (format, out) {
        (Format::Json, None) => {
            print!("{}", to_json(report)?);
            Ok(Vec::new())
        }
        (Format::Json, Some(dir)) => Ok(vec![write(dir, "report.json", &to_json(report)?)?]),
        (Format::Csv, None) => Err(CliError::Config("--format csv needs --out <dir>".into())),
        (Format::Csv, Some(dir)) => csv_extracts(report)?
            .iter()
            .map(|(name, text)| write(dir, name, text))
            .collect(),
    }
}
