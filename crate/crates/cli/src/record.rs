//! Run manifest written next to every set of CSV outputs.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub tool_version: String,
    pub config_sha256: String,
    pub config: String,
    pub started_utc: String,
    pub finished_utc: String,
    pub threads: Option<usize>,
    pub seed: u64,
    pub files: Vec<FileEntry>,
    pub warnings: Vec<String>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunRecord {
    pub fn new(command: &str, config: &str, threads: Option<usize>, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config.as_bytes()),
            config: config.to_string(),
            started_utc: timestamp(),
            finished_utc: String::new(),
            threads,
            seed,
            files: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Write `name` under `dir` and list it in the manifest.
    pub fn write_file(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents)?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: contents.len(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    pub fn finish(mut self, dir: &Path) -> Result<(), CliError> {
        self.finished_utc = timestamp();
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(dir.join(format!("{}.manifest.json", self.command)), json + "\n")?;
        Ok(())
    }
}

/// CSV text with a header row; numbers in scientific notation.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub enum Cell<'a> {
    Int(usize),
    Num(f64),
    Text(&'a str),
}

impl Cell<'_> {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:.14e}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.to_string(),
        }
    }
}
