//! Report rendering and table persistence.
//!
//! Reports are plain text with one `key: value` pair per line, grouped into
//! titled sections. All floating-point values are rendered with a fixed
//! `{:.12e}` format so identical runs produce byte-identical output; the
//! wall-clock line is the single sanctioned exception.

use num_complex::Complex64;
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::Result;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn fmt_complex(z: Complex64) -> String {
    format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug)]
pub struct Section {
    pub title: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn new(title: &str) -> Self {
        Self {
            title: title.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }
}

/// A tab-delimited table destined for `<out>/<name>.tsv`.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut text = self.header.join("\t");
        text.push('\n');
        for row in &self.rows {
            text.push_str(&row.join("\t"));
            text.push('\n');
        }
        text
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: String,
    pub scenario_name: String,
    pub scenario_hash: String,
    pub tool_version: String,
    pub wall_ms: u128,
    pub config_lines: Vec<(String, String)>,
    pub sections: Vec<Section>,
    pub tables: Vec<Table>,
}

impl RunReport {
    pub fn new(command: &str, scenario_name: &str, scenario_hash: &str) -> Self {
        Self {
            command: command.to_string(),
            scenario_name: scenario_name.to_string(),
            scenario_hash: scenario_hash.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_ms: 0,
            config_lines: Vec::new(),
            sections: Vec::new(),
            tables: Vec::new(),
        }
    }

    /// Deterministic except for the `wall_ms` line.
    pub fn render(&self) -> String {
        let mut text = String::new();
        text.push_str("wander-lab report\n");
        text.push_str(&format!("scenario: {}\n", self.scenario_name));
        text.push_str(&format!("sha256: {}\n", self.scenario_hash));
        text.push_str(&format!("command: {}\n", self.command));
        text.push_str(&format!("version: {}\n", self.tool_version));
        text.push_str(&format!("wall_ms: {}\n", self.wall_ms));
        text.push_str("config:\n");
        for (k, v) in &self.config_lines {
            text.push_str(&format!("  {k}: {v}\n"));
        }
        for section in &self.sections {
            text.push_str(&format!("\n[{}]\n", section.title));
            for (k, v) in &section.entries {
                text.push_str(&format!("{k}: {v}\n"));
            }
        }
        text
    }

    /// Writes `report.txt` and every table into `dir` (created on demand).
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.txt"), self.render())?;
        for table in &self.tables {
            std::fs::write(dir.join(format!("{}.tsv", table.name)), table.render())?;
        }
        Ok(())
    }
}
