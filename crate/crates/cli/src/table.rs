//! Result tables and their CSV form.

use std::io::Write;

use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, GridChoice};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Float(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            // Shortest representation that parses back to the same value.
            Cell::Float(x) => format!("{x:?}"),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// Named columns, rows in sweep order, and `key: value` provenance lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), provenance: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Attach the provenance block of a scenario run.
    pub fn stamp(&mut self, scenario: &str, cfg: &ExperimentConfig) {
        let canonical = serde_json::to_string(cfg).expect("config serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        let grid = match cfg.grid {
            GridChoice::Fixed { nx, ny } => format!("{nx}x{ny}"),
            GridChoice::Isotropic { points } => format!("isotropic {points}"),
        };
        self.provenance = vec![
            ("tool".into(), format!("cris {}", env!("CARGO_PKG_VERSION"))),
            ("scenario".into(), scenario.into()),
            ("config_sha256".into(), format!("{hash:x}")),
            ("seed".into(), cfg.seed.to_string()),
            ("replicates".into(), cfg.replicates.to_string()),
            ("grid".into(), grid),
            ("config".into(), canonical),
        ];
    }

    /// CSV with `#` provenance lines ahead of the header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        for (key, value) in &self.provenance {
            writeln!(out, "# {key}: {value}")?;
        }
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        writer.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::render)).map_err(csv_error)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

/// Write `table` to `path`, or to stdout without a path.
pub fn emit(table: &ResultTable, path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p)?;
            table.write_csv(std::io::BufWriter::new(file))
        }
        None => table.write_csv(std::io::stdout().lock()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_and_provenance() {
        let mut table = ResultTable::new(&["kappa", "seb"]);
        table.stamp("table1", &ExperimentConfig::default());
        let text = table.to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), table.provenance.len() + 1);
        assert!(lines[..lines.len() - 1].iter().all(|l| l.starts_with("# ")));
        assert_eq!(*lines.last().unwrap(), "kappa,seb");
    }

    #[test]
    fn floats_round_trip() {
        let mut table = ResultTable::new(&["x", "label"]);
        let values = [0.1, 1e-300, 123456789.12345679, -2.5e17, 1.0 / 3.0];
        for &v in &values {
            table.push(vec![v.into(), "a,b".into()]);
        }
        let text = table.to_csv_string();
        let parsed: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(parsed, values);
        assert!(text.contains("\"a,b\""));
    }

    #[test]
    fn hash_tracks_the_config() {
        let mut a = ResultTable::new(&["x"]);
        let mut b = ResultTable::new(&["x"]);
        let cfg = ExperimentConfig::default();
        a.stamp("fig2", &cfg);
        b.stamp("fig2", &ExperimentConfig { seed: 2, ..cfg.clone() });
        assert_ne!(a.provenance[2], b.provenance[2]);
        b.stamp("fig2", &cfg);
        assert_eq!(a, b);
    }
}
