//! Report formatting shared by every subcommand.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;

use crate::commands::CmdError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Aligned human-readable tables.
    Text,
    /// Comma-separated values with a header row.
    Csv,
    /// Pretty-printed JSON.
    Structured,
}

/// Write a finished report to `--out` or standard output.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CmdError> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| CmdError::Io(format!("cannot write report: {e}"))),
    }
}

/// Render rows as a space-aligned table. Columns listed in `left` are
/// left-aligned; the rest are right-aligned, which suits counts.
pub fn render_table(headers: &[&str], rows: &[Vec<String>], left: &[usize]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let header_cells: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    let mut out = String::new();
    for row in std::iter::once(&header_cells).chain(rows.iter()) {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if left.contains(&i) {
                line.push_str(&format!("{cell:<w$}", w = widths[i]));
            } else {
                line.push_str(&format!("{cell:>w$}", w = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Serialize rows to CSV with the given header.
pub fn render_csv(headers: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CmdError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CmdError::Io(format!("cannot serialize csv: {e}"));
    w.write_record(headers).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CmdError::Io(format!("cannot serialize csv: {e}")))
}

/// Pretty-print a JSON value with a trailing newline.
pub fn render_json(value: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_align_and_trim() {
        let rows = vec![
            vec!["alpha".to_string(), "1".to_string()],
            vec!["b".to_string(), "20".to_string()],
        ];
        let table = render_table(&["Name", "Count"], &rows, &[0]);
        assert_eq!(table, "Name   Count\nalpha      1\nb         20\n");
    }

    #[test]
    fn csv_quotes_embedded_commas() {
        let rows = vec![vec!["a,b".to_string(), "2".to_string()]];
        let bytes = render_csv(&["x", "y"], &rows).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "x,y\n\"a,b\",2\n");
    }
}
