//! Profile files and output destinations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hopf_core::DiscreteProfile;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::format::{g17, Table};

/// Two-column CSV `s,alpha`.
pub fn profile_table(profile: &DiscreteProfile) -> Table {
    let mut t = Table::new(&["s", "alpha"]);
    for (&s, &a) in profile.nodes().iter().zip(profile.values()) {
        t.rows.push(vec![g17(s), g17(a)]);
    }
    t
}

/// Reads a profile written by [`profile_table`]. Errors carry the line number.
pub fn read_profile(path: &Path) -> Result<DiscreteProfile> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let bad = |line: u64, msg: String| CliError::Format {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?;
    if header.len() != 2 || &header[0] != "s" || &header[1] != "alpha" {
        return Err(bad(1, "expected header `s,alpha`".into()));
    }
    let (mut nodes, mut values) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            bad(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(bad(line, format!("expected 2 fields, found {}", record.len())));
        }
        let num = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| bad(line, format!("`{}`: {e}", &record[i])))
        };
        nodes.push(num(0)?);
        values.push(num(1)?);
    }
    if nodes.is_empty() {
        return Err(bad(2, "no data rows".into()));
    }
    DiscreteProfile::new(nodes, values).map_err(|e| bad(0, e.to_string()))
}

/// Where results go: files under an optional directory, and a summary on standard output.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub dir: Option<PathBuf>,
    pub json: bool,
    pub quiet: bool,
}

impl Output {
    fn write_file(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(path, e))
    }

    pub fn csv(&self, name: &str, table: &Table) -> Result<()> {
        self.write_file(name, &table.to_bytes())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_file(name, &bytes)
    }

    /// Prints the report as JSON with `--json`, otherwise as `key: value` lines.
    pub fn summary<T: Serialize>(&self, report: &T) -> Result<()> {
        if self.quiet {
            return Ok(());
        }
        let text = if self.json {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s
        } else {
            let mut s = String::new();
            flatten("", &serde_json::to_value(report)?, &mut s);
            s
        };
        print_stdout(text.as_bytes())
    }

    /// Prints a table on standard output unless quiet.
    pub fn table(&self, table: &Table) -> Result<()> {
        if self.quiet {
            return Ok(());
        }
        print_stdout(&table.to_bytes())
    }
}

fn print_stdout(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::io("<stdout>", e))
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut String) {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => out.push_str(&format!("{prefix}: [{} values]\n", items.len())),
        Value::Null => out.push_str(&format!("{prefix}: -\n")),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => out.push_str(&format!("{prefix}: {}\n", g17(x))),
            _ => out.push_str(&format!("{prefix}: {n}\n")),
        },
        Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
        Value::Bool(b) => out.push_str(&format!("{prefix}: {b}\n")),
    }
}
