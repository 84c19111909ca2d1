//! Report output: JSON, per-task CSV tables and long-format plot series.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::Value;

use crate::error::EmitError;
use crate::report::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Plotdata,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "plotdata" => Ok(Format::Plotdata),
            other => Err(format!("unknown format `{other}` (expected json, csv or plotdata)")),
        }
    }
}

/// Writes `bytes` to `path` through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), EmitError> {
    let io = |source| EmitError::Io { path: path.display().to_string(), source };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self, EmitError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Table { writer })
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) -> Result<(), EmitError> {
        self.writer.write_record(cells.into_iter().collect::<Vec<_>>())?;
        Ok(())
    }

    fn save(self, dir: &Path, name: &str) -> Result<PathBuf, EmitError> {
        let bytes = self.writer.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn items<'a>(v: &'a Value, key: &str) -> impl Iterator<Item = &'a Value> {
    v.get(key).and_then(Value::as_array).into_iter().flatten()
}

/// Writes the report into `dir` in the requested format; returns the files written.
pub fn emit(report: &RunReport, format: Format, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
    fs::create_dir_all(dir).map_err(|source| EmitError::Io { path: dir.display().to_string(), source })?;
    match format {
        Format::Json => {
            let path = dir.join("report.json");
            write_atomic(&path, report.to_json().as_bytes())?;
            Ok(vec![path])
        }
        Format::Csv => emit_csv(report, dir),
        Format::Plotdata => emit_plotdata(report, dir),
    }
}

fn emit_csv(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
    let mut out = Vec::new();
    let r = &report.results;

    let mut t = Table::new(&["task", "name", "property", "lhs", "rhs", "slack", "hard", "pass", "skipped"])?;
    for c in &report.ledger {
        t.row([
            c.task.clone(),
            c.name.clone(),
            c.property.clone(),
            c.lhs.to_string(),
            c.rhs.to_string(),
            c.slack.to_string(),
            c.hard.to_string(),
            c.pass.to_string(),
            c.skipped.to_string(),
        ])?;
    }
    out.push(t.save(dir, "ledger.csv")?);

    if let Some(v) = r.get("constants") {
        let mut t = Table::new(&["kind", "p_or_q", "value", "capped", "num_starts", "residual"])?;
        for e in items(v, "estimates") {
            t.row(["kind", "p_or_q", "value", "capped", "num_starts", "residual"].map(|k| cell(&e[k])))?;
        }
        out.push(t.save(dir, "constants.csv")?);
        let ledger = serde_json::to_string_pretty(&v["ledger"]).expect("json value");
        let path = dir.join("constants_ledger.json");
        write_atomic(&path, ledger.as_bytes())?;
        out.push(path);
    }

    if let Some(v) = r.get("decay") {
        let mut t = Table::new(&["p", "t", "F_p", "bound"])?;
        for s in items(v, "series") {
            for pt in items(s, "points") {
                t.row([cell(&s["p"]), cell(&pt["t"]), cell(&pt["f"]), cell(&pt["bound"])])?;
            }
        }
        out.push(t.save(dir, "decay.csv")?);
    }

    if let Some(v) = r.get("mixing") {
        let mut t = Table::new(&["eps", "empirical", "bound"])?;
        for row in items(v, "rows") {
            t.row(["eps", "empirical", "bound"].map(|k| cell(&row[k])))?;
        }
        out.push(t.save(dir, "mixing.csv")?);
    }

    if let Some(v) = r.get("transport") {
        let mut t = Table::new(&["pair", "k", "action_k"])?;
        for (i, pair) in items(v, "pairs").enumerate() {
            for (k, a) in items(pair, "step_actions").enumerate() {
                t.row([i.to_string(), k.to_string(), cell(a)])?;
            }
        }
        out.push(t.save(dir, "transport.csv")?);
        let path = dir.join("transport_paths.json");
        write_atomic(&path, serde_json::to_string_pretty(v).expect("json value").as_bytes())?;
        out.push(path);
    }

    if let Some(v) = r.get("ricci") {
        let mut t = Table::new(&["p", "kappa_estimate", "kappa_used", "samples"])?;
        for e in items(v, "estimates") {
            t.row(["p", "kappa_estimate", "kappa_used", "samples"].map(|k| cell(&e[k])))?;
        }
        out.push(t.save(dir, "ricci.csv")?);
    }

    Ok(out)
}

fn emit_plotdata(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
    let mut t = Table::new(&["series", "x", "y"])?;
    let r = &report.results;
    if let Some(v) = r.get("decay") {
        for s in items(v, "series") {
            let p = cell(&s["p"]);
            for pt in items(s, "points") {
                t.row([format!("F[p={p}]"), cell(&pt["t"]), cell(&pt["f"])])?;
                t.row([format!("bound[p={p}]"), cell(&pt["t"]), cell(&pt["bound"])])?;
            }
        }
    }
    if let Some(v) = r.get("constants") {
        for e in items(v, "estimates").filter(|e| !e["p_or_q"].is_null()) {
            t.row([cell(&e["kind"]), cell(&e["p_or_q"]), cell(&e["value"])])?;
        }
    }
    if let Some(v) = r.get("transport") {
        for (i, pair) in items(v, "pairs").enumerate() {
            for (k, a) in items(pair, "step_actions").enumerate() {
                t.row([format!("action[pair={i}]"), k.to_string(), cell(a)])?;
            }
        }
    }
    Ok(vec![t.save(dir, "plotdata.csv")?])
}
