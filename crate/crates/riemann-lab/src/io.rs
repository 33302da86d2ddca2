//! CSV and JSON output with a config hash in every file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    /// Header comment carrying the hash, then a plain CSV body with LF endings.
    pub fn to_csv(&self, hash: &str) -> Result<String> {
        let mut out = format!("# config_sha256={hash}\n").into_bytes();
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
            w.write_record(&self.header).map_err(|e| Error::Io(e.to_string()))?;
            for r in &self.rows {
                w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        String::from_utf8(out).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Reads a CSV written by [`Table::to_csv`], returning the hash and the table.
pub fn read_csv(text: &str) -> Result<(String, Table)> {
    let (first, body) = text.split_once('\n').ok_or_else(|| Error::Io("empty csv".into()))?;
    let hash =
        first.strip_prefix("# config_sha256=").ok_or_else(|| Error::Io("missing config hash line".into()))?.to_string();
    let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec.map_err(|e| Error::Io(e.to_string()))?.iter().map(String::from).collect());
    }
    Ok((hash, Table { header, rows }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl Finding {
    pub fn from_error(kind: &str, e: &Error) -> Self {
        Finding { kind: kind.to_string(), message: e.to_string(), exit_code: e.exit_code() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub command: String,
    pub config_sha256: String,
    pub version: String,
    pub started_unix_s: f64,
    pub elapsed_s: f64,
    pub files: Vec<String>,
    pub findings: Vec<Finding>,
}

/// Everything a command produced; written to a run directory by [`ResultBundle::write_to`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub command: String,
    pub config: RunConfig,
    pub hash: String,
    pub tables: BTreeMap<String, Table>,
    pub json: BTreeMap<String, serde_json::Value>,
    pub plot: Option<String>,
    pub findings: Vec<Finding>,
    pub summary: String,
    pub started_unix_s: f64,
    pub elapsed_s: f64,
}

impl ResultBundle {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        ResultBundle {
            command: command.to_string(),
            config: config.clone(),
            hash: config_hash(config),
            tables: BTreeMap::new(),
            json: BTreeMap::new(),
            plot: None,
            findings: Vec::new(),
            summary: String::new(),
            started_unix_s: 0.0,
            elapsed_s: 0.0,
        }
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        self.json.insert(name.to_string(), serde_json::to_value(value).expect("serializable"));
    }

    /// Exit code of the first finding, 0 when there is none.
    pub fn exit_code(&self) -> i32 {
        self.findings.first().map(|f| f.exit_code).unwrap_or(0)
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written: Vec<PathBuf> = Vec::new();
        let put = |written: &mut Vec<PathBuf>, name: &str, text: &str| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, text)?;
            written.push(path);
            Ok(())
        };
        put(&mut written, "config.json", &format!("{}\n", self.config.to_json()))?;
        for (name, t) in &self.tables {
            put(&mut written, &format!("{name}.csv"), &t.to_csv(&self.hash)?)?;
        }
        for (name, v) in &self.json {
            let wrapped = serde_json::json!({ "config_sha256": self.hash, "data": v });
            put(
                &mut written,
                &format!("{name}.json"),
                &format!("{}\n", serde_json::to_string_pretty(&wrapped).expect("json")),
            )?;
        }
        if let Some(p) = &self.plot {
            put(&mut written, "plot.gp", &format!("# config_sha256={}\n{p}", self.hash))?;
        }
        let meta = Meta {
            command: self.command.clone(),
            config_sha256: self.hash.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_s: self.started_unix_s,
            elapsed_s: self.elapsed_s,
            files: written.iter().map(|p| p.file_name().expect("file").to_string_lossy().into_owned()).collect(),
            findings: self.findings.clone(),
        };
        put(&mut written, "meta.json", &format!("{}\n", serde_json::to_string_pretty(&meta).expect("json")))?;
        Ok(written)
    }
}
