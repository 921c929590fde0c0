use std::fs;
use std::path::{Path, PathBuf};

use pqc_core::verify::{json_hash, VERSION};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::Format;

/// Provenance block embedded in every output file.
#[derive(Debug, Clone)]
pub struct Stamp {
    pub p: u64,
    pub level: u32,
    pub seed: u64,
    pub config_hash: String,
}

impl Stamp {
    pub fn new(p: u64, level: u32, seed: u64, config: &Value) -> Self {
        Stamp { p, level, seed, config_hash: json_hash(config) }
    }

    pub fn json(&self) -> Value {
        json!({
            "tool_version": VERSION,
            "p": self.p,
            "level": self.level,
            "seed": self.seed,
            "config_hash": self.config_hash,
        })
    }

    /// `#`-prefixed header lines for CSV files.
    pub fn csv_comment(&self) -> String {
        format!(
            "# tool_version={} p={} level={} seed={} config_hash={}\n",
            VERSION, self.p, self.level, self.seed, self.config_hash
        )
    }

    /// Markdown preamble line.
    pub fn md_line(&self) -> String {
        format!(
            "p = {}, level = {}, seed = {}, config hash `{}`, tool version {}\n",
            self.p, self.level, self.seed, self.config_hash, VERSION
        )
    }
}

/// Prepends the stamp to a JSON object.
pub fn stamped(stamp: &Stamp, body: Value) -> Value {
    let mut map = Map::new();
    map.insert("stamp".into(), stamp.json());
    match body {
        Value::Object(m) => map.extend(m),
        other => {
            map.insert("data".into(), other);
        }
    }
    Value::Object(map)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

pub fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}

pub fn write_json(dir: &Path, name: &str, v: &Value) -> Result<PathBuf, CliError> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    write_file(dir, name, s)
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Renders rows in the requested format; JSON gives an array of objects.
pub fn render_table(format: Format, headers: &[&str], rows: &[Vec<Value>]) -> String {
    match format {
        Format::Json => {
            let objs: Vec<Value> = rows
                .iter()
                .map(|r| Value::Object(headers.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect()))
                .collect();
            let mut s = serde_json::to_string_pretty(&objs).expect("json value serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = headers.join(",");
            s.push('\n');
            for r in rows {
                s.push_str(&r.iter().map(cell_text).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            s
        }
        Format::Md => {
            let mut s = format!("| {} |\n|{}\n", headers.join(" | "), "---|".repeat(headers.len()));
            for r in rows {
                s.push_str(&format!("| {} |\n", r.iter().map(cell_text).collect::<Vec<_>>().join(" | ")));
            }
            s
        }
    }
}
