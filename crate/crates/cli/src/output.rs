//! CSV and manifest persistence.
//!
//! Both CSV files start with a schema comment line followed by a header.
//! Floats are written with 17 significant digits so they parse back to the
//! same `f64`; missing values are empty fields.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};

pub const CURVES_FILE: &str = "curves.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SNAPSHOT_FILE: &str = "frontier.csv";

pub const CURVES_SCHEMA: &str = "# hvscal-curves v1";
pub const SNAPSHOT_SCHEMA: &str = "# hvscal-frontier v1";
pub const MANIFEST_SCHEMA: &str = "hvscal-manifest v1";
pub const CURVES_HEADER: &str = "experiment,method,repeat,trial,hypervolume,regret,elapsed_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRecord {
    pub experiment: Experiment,
    pub method: String,
    pub repeat: usize,
    pub trial: usize,
    pub hypervolume: Option<f64>,
    pub regret: Option<f64>,
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    /// Every point available to the selection rule.
    Candidate,
    /// Pareto front of the candidates.
    TrueFrontier,
    /// Points selected or played by one run, in trial order.
    Selected,
    /// Distinct Pareto-optimal points among one run's selections.
    Discovered,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Candidate => "candidate",
            Self::TrueFrontier => "true_frontier",
            Self::Selected => "selected",
            Self::Discovered => "discovered",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Self::Candidate, Self::TrueFrontier, Self::Selected, Self::Discovered]
            .into_iter()
            .find(|l| l.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRow {
    pub layer: Layer,
    pub method: Option<String>,
    pub repeat: Option<usize>,
    pub trial: Option<usize>,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobManifest {
    pub method: String,
    pub method_index: u64,
    pub repeat: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatManifest {
    pub repeat: usize,
    pub instance_seed: u64,
    /// Hypervolume the regret column is measured against, when known.
    pub total_hypervolume: Option<f64>,
    pub candidate_front_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub jobs: Vec<JobManifest>,
    pub repeats: Vec<RepeatManifest>,
    pub files: Vec<String>,
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn curves_csv(records: &[CurveRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 2));
    out.push_str(CURVES_SCHEMA);
    out.push('\n');
    out.push_str(CURVES_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.experiment,
            r.method,
            r.repeat,
            r.trial,
            opt_float(r.hypervolume),
            opt_float(r.regret),
            opt_float(r.elapsed_ms)
        );
    }
    out
}

pub fn snapshot_csv(k: usize, rows: &[SnapshotRow]) -> String {
    let mut out = String::new();
    out.push_str(SNAPSHOT_SCHEMA);
    out.push('\n');
    out.push_str("layer,method,repeat,trial");
    for i in 1..=k {
        let _ = write!(out, ",y{i}");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{}",
            r.layer.as_str(),
            r.method.as_deref().unwrap_or(""),
            opt_usize(r.repeat),
            opt_usize(r.trial)
        );
        for v in &r.point {
            let _ = write!(out, ",{}", format_float(*v));
        }
        out.push('\n');
    }
    out
}

fn parse_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}:{line}: {msg}", path.display()))
}

fn parse_opt<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| format!("cannot parse '{s}'"))
}

/// Reads a file written by [`curves_csv`].
pub fn read_curves(path: &Path) -> Result<Vec<CurveRecord>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, CURVES_SCHEMA)) => {}
        _ => return Err(parse_err(path, 1, format!("expected schema line '{CURVES_SCHEMA}'"))),
    }
    match lines.next() {
        Some((_, CURVES_HEADER)) => {}
        _ => return Err(parse_err(path, 2, format!("expected header '{CURVES_HEADER}'"))),
    }
    lines
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(parse_err(path, i + 1, "expected 7 fields"));
            }
            let e = |m: String| parse_err(path, i + 1, m);
            Ok(CurveRecord {
                experiment: f[0].parse().map_err(e)?,
                method: f[1].to_string(),
                repeat: f[2].parse().map_err(|_| e(format!("bad repeat '{}'", f[2])))?,
                trial: f[3].parse().map_err(|_| e(format!("bad trial '{}'", f[3])))?,
                hypervolume: parse_opt(f[4]).map_err(e)?,
                regret: parse_opt(f[5]).map_err(e)?,
                elapsed_ms: parse_opt(f[6]).map_err(e)?,
            })
        })
        .collect()
}

/// Reads a file written by [`snapshot_csv`].
pub fn read_snapshot(path: &Path) -> Result<Vec<SnapshotRow>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, l)| l) != Some(SNAPSHOT_SCHEMA) {
        return Err(parse_err(path, 1, format!("expected schema line '{SNAPSHOT_SCHEMA}'")));
    }
    if !lines.next().is_some_and(|(_, l)| l.starts_with("layer,method,repeat,trial")) {
        return Err(parse_err(path, 2, "missing header"));
    }
    lines
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let e = |m: String| parse_err(path, i + 1, m);
            if f.len() < 5 {
                return Err(e("too few fields".into()));
            }
            Ok(SnapshotRow {
                layer: Layer::parse(f[0]).ok_or_else(|| e(format!("unknown layer '{}'", f[0])))?,
                method: (!f[1].is_empty()).then(|| f[1].to_string()),
                repeat: parse_opt(f[2]).map_err(e)?,
                trial: parse_opt(f[3]).map_err(e)?,
                point: f[4..]
                    .iter()
                    .map(|v| v.parse::<f64>().map_err(|_| e(format!("bad coordinate '{v}'"))))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// Writes `files` into `dir` all-or-nothing: each file goes to a temporary
/// sibling first and is renamed into place only after every write
/// succeeded. On failure, temporaries and already renamed files are
/// removed.
pub fn write_atomically(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let staged: Vec<(PathBuf, PathBuf)> = files
        .iter()
        .map(|(name, _)| (dir.join(format!(".{name}.tmp")), dir.join(name)))
        .collect();
    let cleanup = |upto: usize, renamed: usize| {
        for (tmp, _) in &staged[..upto] {
            let _ = fs::remove_file(tmp);
        }
        for (_, dst) in &staged[..renamed] {
            let _ = fs::remove_file(dst);
        }
    };
    for (i, ((tmp, _), (_, contents))) in staged.iter().zip(files).enumerate() {
        if let Err(e) = fs::write(tmp, contents) {
            cleanup(i + 1, 0);
            return Err(CliError::io(tmp, e));
        }
    }
    for (i, (tmp, dst)) in staged.iter().enumerate() {
        if let Err(e) = fs::rename(tmp, dst) {
            cleanup(staged.len(), i);
            return Err(CliError::io(dst, e));
        }
    }
    Ok(staged.into_iter().map(|(_, dst)| dst).collect())
}
