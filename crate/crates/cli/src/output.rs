//! Artifact writing, number formatting and the run manifest.

use crate::error::CliError;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to twelve significant digits; `-0` becomes `0`.
pub fn round_sig(x: f64) -> f64 {
    leadlag::numeric::round_sig(x, SIGNIFICANT_DIGITS) + 0.0
}

/// Decimal rendering of [`round_sig`]; non-finite values print as empty.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        round_sig(x).to_string()
    } else {
        String::new()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Value, CliError> {
    Ok(round_value(serde_json::to_value(value)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Rows of a CSV table, already formatted.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| escape(c)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// One invocation: collects inputs and artifacts, writes the manifest last.
pub struct Run {
    pub subcommand: &'static str,
    pub out: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub dry_run: bool,
    parameters: Value,
    inputs: Mutex<BTreeSet<PathBuf>>,
    artifacts: Vec<PathBuf>,
    notes: Vec<String>,
}

impl Run {
    pub fn new(subcommand: &'static str, out: PathBuf, format: Format, seed: u64, dry_run: bool, parameters: Value) -> Self {
        Self {
            subcommand,
            out,
            format,
            seed,
            dry_run,
            parameters,
            inputs: Mutex::new(BTreeSet::new()),
            artifacts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn input(&self, path: &Path) {
        self.inputs.lock().expect("input set").insert(path.to_path_buf());
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    /// Writes `contents` under the output directory and records it.
    pub fn write(&mut self, rel: impl AsRef<Path>, contents: &str) -> Result<(), CliError> {
        let rel = rel.as_ref();
        let path = self.out.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(&path, contents).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        self.artifacts.push(rel.to_path_buf());
        Ok(())
    }

    /// Records a file some library routine already wrote under the output
    /// directory.
    pub fn record(&mut self, rel: impl AsRef<Path>) {
        self.artifacts.push(rel.as_ref().to_path_buf());
    }

    pub fn write_json<T: Serialize>(&mut self, rel: impl AsRef<Path>, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(&to_json(value)?)?;
        text.push('\n');
        self.write(rel, &text)
    }

    pub fn write_table(&mut self, rel: impl AsRef<Path>, table: &Table) -> Result<(), CliError> {
        self.write(rel, &table.render())
    }

    /// Ends a dry run: prints what would be read, writes nothing.
    pub fn report_dry_run(&self) -> Result<(), CliError> {
        let inputs: Vec<String> = self
            .inputs
            .lock()
            .expect("input set")
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        let v = json!({
            "subcommand": self.subcommand,
            "dry_run": true,
            "inputs": inputs,
            "parameters": self.parameters,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        let mut inputs = Vec::new();
        for p in self.inputs.lock().expect("input set").iter() {
            inputs.push(json!({ "path": p.display().to_string(), "sha256": sha256_file(p)? }));
        }
        let mut artifacts = Vec::new();
        self.artifacts.sort();
        self.artifacts.dedup();
        for rel in &self.artifacts {
            artifacts.push(json!({
                "path": rel.display().to_string(),
                "sha256": sha256_file(&self.out.join(rel))?,
            }));
        }
        let mut m = Map::new();
        m.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("subcommand".into(), json!(self.subcommand));
        m.insert("seed".into(), json!(self.seed));
        m.insert("format".into(), serde_json::to_value(self.format)?);
        m.insert("parameters".into(), round_value(self.parameters.clone()));
        m.insert("inputs".into(), Value::Array(inputs));
        m.insert("artifacts".into(), Value::Array(artifacts));
        m.insert("notes".into(), json!(self.notes));
        let mut text = serde_json::to_string_pretty(&Value::Object(m))?;
        text.push('\n');
        let path = self.out.join("manifest.json");
        std::fs::create_dir_all(&self.out)?;
        std::fs::write(&path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(-2.0 / 10f64.sqrt()), "-0.632455532034");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(1.0 / 3.0 * 1e-20), "0.00000000000000000000333333333333");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(f64::NAN), "");
    }

    #[test]
    fn json_rounding_is_recursive() {
        let v = to_json(&json!({"a": [0.1 + 0.2, 1], "b": {"c": 2.0f64.sqrt()}})).unwrap();
        assert_eq!(v.to_string(), r#"{"a":[0.3,1],"b":{"c":1.41421356237}}"#);
    }

    #[test]
    fn csv_cells_are_quoted_when_needed() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(t.render(), "a,b\n\"x,y\",1\n");
    }
}
