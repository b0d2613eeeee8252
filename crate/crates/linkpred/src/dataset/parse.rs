//! Edge list parsing.
//!
//! Input is line oriented: one edge record per line, fields separated by a
//! declared delimiter, with `#` and `%` comment lines and blank lines
//! skipped. Column roles (endpoints and optional timestamp) are declared up
//! front rather than guessed, so the same file always parses the same way.

use std::io::BufRead;
use std::path::Path;

use super::{EdgeRecord, FormatSpec};
use crate::{Error, Result};

/// Parse outcome: records in file order plus discard accounting.
#[derive(Debug, Clone)]
pub struct ParsedEdges {
    pub records: Vec<EdgeRecord>,
    /// Records whose endpoints were equal; they are dropped, not errors.
    pub self_loops_discarded: usize,
    /// Comment and blank lines.
    pub lines_skipped: usize,
}

/// Parses an edge list from a reader. The first malformed line aborts with
/// an error naming the line number.
pub fn parse_edge_list(reader: impl BufRead, format: &FormatSpec) -> Result<ParsedEdges> {
    let mut records = Vec::new();
    let mut self_loops = 0usize;
    let mut skipped = 0usize;
    let needed = 1 + format
        .u_column
        .max(format.v_column)
        .max(format.timestamp_column.unwrap_or(0));
    for (idx, line) in reader.lines().enumerate() {
        let number = idx + 1;
        let line = line.map_err(|e| Error::input(format!("line {number}: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            skipped += 1;
            continue;
        }
        let fields: Vec<&str> = match format.delimiter {
            super::Delimiter::Whitespace => trimmed.split_whitespace().collect(),
            super::Delimiter::Char(c) => trimmed.split(c).map(str::trim).collect(),
        };
        if fields.len() < needed {
            return Err(Error::input(format!(
                "line {number}: expected at least {needed} fields, found {}",
                fields.len()
            )));
        }
        let u = fields[format.u_column];
        let v = fields[format.v_column];
        if u.is_empty() || v.is_empty() {
            return Err(Error::input(format!("line {number}: empty vertex label")));
        }
        let timestamp = match format.timestamp_column {
            None => None,
            Some(col) => Some(fields[col].parse::<i64>().map_err(|_| {
                Error::input(format!(
                    "line {number}: timestamp '{}' is not an integer",
                    fields[col]
                ))
            })?),
        };
        if u == v {
            self_loops += 1;
            continue;
        }
        records.push(EdgeRecord {
            u: u.to_string(),
            v: v.to_string(),
            timestamp,
        });
    }
    Ok(ParsedEdges {
        records,
        self_loops_discarded: self_loops,
        lines_skipped: skipped,
    })
}

/// [`parse_edge_list`] over a file.
pub fn parse_edge_list_path(path: &Path, format: &FormatSpec) -> Result<ParsedEdges> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(std::io::BufReader::new(file), format)
}
