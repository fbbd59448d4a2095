use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Header plus rows, written as CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(CliError::io)?;
        for r in &self.rows {
            w.write_record(r).map_err(CliError::io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(e.to_string()))?;
        String::from_utf8(bytes).map_err(CliError::io)
    }
}

/// Everything a command hands back for writing.
pub struct Outcome {
    pub command: &'static str,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub tolerances: Value,
    pub summary: Value,
    pub report: Value,
    pub table: Table,
    /// Additional files written next to the report when `--out` is given.
    pub extra_files: Vec<(String, String)>,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub parameters: &'a Value,
    pub seed: Option<u64>,
    pub tolerances: &'a Value,
    pub input_hash: String,
    pub summary: &'a Value,
}

pub fn input_hash(command: &str, parameters: &Value, seed: Option<u64>, tolerances: &Value) -> String {
    let canonical = json!({
        "command": command,
        "parameters": parameters,
        "seed": seed,
        "tolerances": tolerances,
    });
    let digest = Sha256::digest(serde_json::to_vec(&canonical).expect("json values serialize"));
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn document(out: &Outcome) -> Value {
    let manifest = RunManifest {
        command: out.command,
        parameters: &out.parameters,
        seed: out.seed,
        tolerances: &out.tolerances,
        input_hash: input_hash(out.command, &out.parameters, out.seed, &out.tolerances),
        summary: &out.summary,
    };
    json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest,
        "passed": out.passed,
        "report": out.report,
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Writes the report to `dir` (or stdout) in the requested format.
pub fn emit(out: &Outcome, dir: Option<&Path>, format: Format) -> Result<(), CliError> {
    let doc = document(out);
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(CliError::io)?;
            let write = |name: &str, body: &str| fs::write(dir.join(name), body).map_err(CliError::io);
            match format {
                Format::Json => write(&format!("{}.json", out.command), &pretty(&doc))?,
                Format::Csv => {
                    write(&format!("{}.csv", out.command), &out.table.to_csv()?)?;
                    write(&format!("{}.manifest.json", out.command), &pretty(&doc["manifest"]))?;
                }
            }
            for (name, body) in &out.extra_files {
                write(name, body)?;
            }
        }
        None => {
            let body = match format {
                Format::Json => pretty(&doc),
                Format::Csv => out.table.to_csv()?,
            };
            std::io::stdout().write_all(body.as_bytes()).map_err(CliError::io)?;
        }
    }
    Ok(())
}

pub fn fmt_f(x: f64) -> String {
    format!("{x:.6e}")
}
