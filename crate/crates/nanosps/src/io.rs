//! Output tables, metadata files and spectrum input.
//!
//! Tables are comma-separated. Every line before the data starts with `#`;
//! the `# columns:` line names each column with its unit in brackets, e.g.
//! `# columns: time [s], n_gen [1]`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nanosps_core::{Channel, SpectrumSamples};

use crate::error::{CliError, Result};

pub const COLUMNS_PREFIX: &str = "# columns: ";

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self { name: name.into(), unit: unit.into() }
    }
}

/// A rectangular table of numbers with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    /// Free-form `#` lines written above the column header.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { columns, rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        writeln!(buf, "# nanosps {}", env!("CARGO_PKG_VERSION")).expect("in-memory write");
        for note in &self.notes {
            writeln!(buf, "# {note}").expect("in-memory write");
        }
        let header: Vec<String> = self.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect();
        writeln!(buf, "{COLUMNS_PREFIX}{}", header.join(", ")).expect("in-memory write");
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(buf);
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(|e| CliError::io(path, e))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(path, e))?;
        fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let parse_err = |line: u64, message: String| CliError::Parse { path: path.to_path_buf(), line, message };
        let mut table = Table::default();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            if let Some(cols) = line.strip_prefix(COLUMNS_PREFIX) {
                for c in cols.split(", ") {
                    let (name, unit) = c
                        .strip_suffix(']')
                        .and_then(|c| c.split_once(" ["))
                        .ok_or_else(|| parse_err(1, format!("malformed column `{c}`")))?;
                    table.columns.push(Column::new(name, unit));
                }
            } else if !line.starts_with("# nanosps ") {
                table.notes.push(line.trim_start_matches('#').trim_start().to_string());
            }
        }
        if table.columns.is_empty() {
            return Err(parse_err(1, "missing `# columns:` header".into()));
        }
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).from_reader(text.as_bytes());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != table.columns.len() {
                return Err(parse_err(line, format!("expected {} fields, found {}", table.columns.len(), rec.len())));
            }
            let row = rec
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|e| parse_err(line, format!("`{f}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn output_path(dir: &Path, stem: &str, ext: &str) -> PathBuf {
    dir.join(format!("{stem}.{ext}"))
}

/// Reads a spectrum file: a header row naming `omega` (or `frequency`, in
/// rad/s), `power` and `channel` columns, then one sample per row. `#` lines
/// are comments. Errors carry the 1-based line number.
pub fn read_spectrum(path: &Path) -> Result<SpectrumSamples> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parse_err = |line: u64, message: String| CliError::Parse { path: path.to_path_buf(), line, message };
    let header_line =
        text.lines().position(|l| !l.trim().is_empty() && !l.starts_with('#')).map_or(1, |k| k as u64 + 1);
    let mut rdr =
        csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| parse_err(header_line, e.to_string()))?.clone();
    let find = |names: &[&str]| headers.iter().position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)));
    let col =
        |names: &[&str]| find(names).ok_or_else(|| parse_err(header_line, format!("missing column `{}`", names[0])));
    let (iw, ip, ic) = (col(&["omega", "frequency"])?, col(&["power"])?, col(&["channel"])?);

    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |k: usize, what: &str| {
            rec.get(k).filter(|f| !f.is_empty()).ok_or_else(|| parse_err(line, format!("missing {what} value")))
        };
        let num = |k: usize, what: &str| {
            let f = field(k, what)?;
            f.parse::<f64>().map_err(|e| parse_err(line, format!("{what} `{f}`: {e}")))
        };
        let channel = Channel::from_label(field(ic, "channel")?).map_err(|e| parse_err(line, e.to_string()))?;
        points.push((num(iw, "omega")?, num(ip, "power")?, channel));
    }
    SpectrumSamples::new(path.display().to_string(), points).map_err(|e| parse_err(header_line, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(vec![Column::new("time", "s"), Column::new("g2", "1")]);
        t.notes.push("a note".into());
        t.push_row(vec![0.0, f64::NAN]);
        t.push_row(vec![1e-9 / 3.0, -2.5e-300]);
        t.write(&path).unwrap();
        let back = Table::read(&path).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.notes, t.notes);
        assert!(back.rows[0][1].is_nan());
        assert_eq!(back.rows[1], t.rows[1]);
    }

    #[test]
    fn spectrum_row_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        fs::write(&path, "# c\nomega,power,channel\n1.0,0.5,scattered\n2.0,oops,absorbed\n").unwrap();
        match read_spectrum(&path) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        fs::write(&path, "frequency,power,channel\n1.0,0.5,emitted\n").unwrap();
        match read_spectrum(&path) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
