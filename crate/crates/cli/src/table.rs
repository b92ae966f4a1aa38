//! Column-oriented result table and the run manifest.
//!
//! CSV cells are written with 17 significant digits (`{:.16e}`), enough to
//! round-trip any f64, so byte-identical files certify bit-identical
//! estimates. The manifest echoes every row as JSON together with the
//! replication and failure counts backing it.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(&'static str),
    /// Rendered as an empty CSV field and JSON null.
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(x) => x.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => (*s).to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(x) => serde_json::json!(x),
            // NaN and infinities have no JSON representation; stringify.
            Cell::Float(x) if x.is_finite() => serde_json::json!(x),
            Cell::Float(x) => serde_json::json!(x.to_string()),
            Cell::Text(s) => serde_json::json!(s),
            Cell::Missing => serde_json::Value::Null,
        }
    }
}

/// One result row plus the provenance counters behind its estimates.
#[derive(Debug, Clone)]
pub struct Row {
    pub cells: Vec<Cell>,
    pub replications: u64,
    pub failures: u64,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, cells: Vec<Cell>, replications: u64, failures: u64) {
        assert_eq!(cells.len(), self.columns.len(), "row width mismatch");
        self.rows.push(Row { cells, replications, failures });
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.cells.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn total_replications(&self) -> u64 {
        self.rows.iter().map(|r| r.replications).sum()
    }

    pub fn total_failures(&self) -> u64 {
        self.rows.iter().map(|r| r.failures).sum()
    }

    fn rows_json(&self) -> Vec<serde_json::Value> {
        self.rows
            .iter()
            .map(|row| {
                let mut map = serde_json::Map::new();
                for (name, cell) in self.columns.iter().zip(&row.cells) {
                    map.insert((*name).to_string(), cell.json());
                }
                map.insert("replications".into(), serde_json::json!(row.replications));
                map.insert("failures".into(), serde_json::json!(row.failures));
                serde_json::Value::Object(map)
            })
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Everything needed to audit a run: the hashed resolved config, the full
/// result rows, and the strict-mode verdicts.
#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Manifest {
    pub toolkit_version: &'static str,
    pub mode: String,
    pub config_sha256: String,
    pub seed: u64,
    pub workers: Option<usize>,
    pub strict: bool,
    pub resolved_config: serde_json::Value,
    pub columns: Vec<String>,
    pub rows: Vec<serde_json::Value>,
    pub total_replications: u64,
    pub total_failures: u64,
    pub strict_violations: Vec<String>,
    pub notes: Vec<String>,
    pub csv_sha256: String,
    pub wall_clock_seconds: f64,
}

impl Manifest {
    pub fn build(
        mode: &str,
        resolved_json: &str,
        seed: u64,
        workers: Option<usize>,
        strict: bool,
        table: &Table,
        violations: Vec<String>,
        notes: Vec<String>,
        csv: &str,
        wall_clock_seconds: f64,
    ) -> Manifest {
        Manifest {
            toolkit_version: env!("CARGO_PKG_VERSION"),
            mode: mode.to_string(),
            config_sha256: sha256_hex(resolved_json.as_bytes()),
            seed,
            workers,
            strict,
            resolved_config: serde_json::from_str(resolved_json)
                .expect("resolved config round-trips"),
            columns: table.columns.iter().map(|c| c.to_string()).collect(),
            rows: table.rows_json(),
            total_replications: table.total_replications(),
            total_failures: table.total_failures(),
            strict_violations: violations,
            notes,
            csv_sha256: sha256_hex(csv.as_bytes()),
            wall_clock_seconds,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
