//! CSV tables, manifest and atomic file writes.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Bumped whenever a table's column set changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Round-trip representation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self { name: name.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> std::io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, Default)]
pub struct Outputs {
    pub tables: Vec<Table>,
    /// Extra plain-text files `(name, contents)`.
    pub texts: Vec<(String, String)>,
    pub results: Map<String, Value>,
    /// Set by `certify` when the verdict is inconclusive.
    pub inconclusive: bool,
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

pub struct ManifestHeader<'a> {
    pub command: &'a str,
    pub input_sha256: &'a str,
    pub status: &'a str,
    pub exit_code: i32,
    pub tolerances: Value,
    pub discretization: Value,
}

/// Writes every table and text, then `manifest.json` listing them.
pub fn write_outputs(dir: &Path, header: &ManifestHeader<'_>, out: &Outputs) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for t in &out.tables {
        let bytes = t.to_bytes()?;
        write_atomic(dir, &t.name, &bytes)?;
        files.push(json!({
            "name": t.name,
            "columns": t.columns,
            "rows": t.rows.len(),
            "sha256": hex::encode(Sha256::digest(&bytes)),
        }));
    }
    for (name, text) in &out.texts {
        write_atomic(dir, name, text.as_bytes())?;
        files.push(json!({ "name": name, "sha256": hex::encode(Sha256::digest(text.as_bytes())) }));
    }
    let manifest = json!({
        "tool": "pillar",
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
        "command": header.command,
        "input_sha256": header.input_sha256,
        "status": header.status,
        "exit_code": header.exit_code,
        "tolerances": header.tolerances,
        "discretization": header.discretization,
        "files": files,
        "results": out.results,
    });
    let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    text.push('\n');
    write_atomic(dir, "manifest.json", text.as_bytes())
}

/// Machine-readable failure record `error.json`.
pub fn write_error(dir: &Path, command: &str, exit_code: i32, kind: &str, messages: &[String]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let record = json!({
        "tool": "pillar",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "exit_code": exit_code,
        "kind": kind,
        "messages": messages,
    });
    let mut text = serde_json::to_string_pretty(&record).map_err(std::io::Error::other)?;
    text.push('\n');
    write_atomic(dir, "error.json", text.as_bytes())
}
