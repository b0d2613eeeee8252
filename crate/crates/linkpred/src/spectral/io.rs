//! Embedding persistence in two formats: a human-readable text table and a
//! compact little-endian binary layout. Binary round-trips are bit exact;
//! text uses the shortest decimal representation that parses back to the
//! same double, so text round-trips are bit exact as well.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::SpectralEmbedding;
use crate::{Error, Result};

const BINARY_MAGIC: &[u8; 8] = b"LPEMB001";

/// Text layout: `n d` on the first line, eigenvalues on the second (or a
/// bare `-` when the embedding carries none), then one row of `d`
/// coordinates per vertex.
pub fn write_text(path: &Path, emb: &SpectralEmbedding) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{} {}", emb.vertex_count(), emb.dim()).map_err(io_err)?;
    if emb.eigenvalues().is_empty() {
        writeln!(w, "-").map_err(io_err)?;
    } else {
        writeln!(w, "{}", join_floats(emb.eigenvalues())).map_err(io_err)?;
    }
    for x in 0..emb.vertex_count() {
        writeln!(w, "{}", join_floats(emb.row(x as u32))).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_text(path: &Path) -> Result<SpectralEmbedding> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();
    let mut next_line = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::input(format!("{}: unexpected end of file", path.display())))?
            .map_err(|e| Error::io(path, e))
    };
    let header = next_line()?;
    let mut parts = header.split_whitespace();
    let n: usize = parse_field(&mut parts, path, "vertex count")?;
    let d: usize = parse_field(&mut parts, path, "dimension")?;
    let value_line = next_line()?;
    let eigenvalues = if value_line.trim() == "-" {
        Vec::new()
    } else {
        parse_floats(&value_line, d, path, "eigenvalue line")?
    };
    let mut coords = Vec::with_capacity(n * d);
    for row in 0..n {
        let line = next_line()?;
        coords.extend(parse_floats(&line, d, path, &format!("row {row}"))?);
    }
    SpectralEmbedding::new(d, eigenvalues, coords)
}

/// Binary layout: magic, `n` and `d` as little-endian u64, then eigenvalue
/// count, eigenvalues, and row-major coordinates as little-endian f64.
pub fn write_binary(path: &Path, emb: &SpectralEmbedding) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    w.write_all(BINARY_MAGIC).map_err(io_err)?;
    w.write_all(&(emb.vertex_count() as u64).to_le_bytes()).map_err(io_err)?;
    w.write_all(&(emb.dim() as u64).to_le_bytes()).map_err(io_err)?;
    w.write_all(&(emb.eigenvalues().len() as u64).to_le_bytes()).map_err(io_err)?;
    for &v in emb.eigenvalues() {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    for &c in emb.coords() {
        w.write_all(&c.to_le_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_binary(path: &Path) -> Result<SpectralEmbedding> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
    if &magic != BINARY_MAGIC {
        return Err(Error::input(format!(
            "{}: not an embedding file (bad magic)",
            path.display()
        )));
    }
    let n = read_u64(&mut r, path)? as usize;
    let d = read_u64(&mut r, path)? as usize;
    let value_count = read_u64(&mut r, path)? as usize;
    if value_count != 0 && value_count != d {
        return Err(Error::input(format!(
            "{}: eigenvalue count {value_count} does not match dimension {d}",
            path.display()
        )));
    }
    let mut eigenvalues = Vec::with_capacity(value_count);
    for _ in 0..value_count {
        eigenvalues.push(read_f64(&mut r, path)?);
    }
    let total = n
        .checked_mul(d)
        .ok_or_else(|| Error::input(format!("{}: size overflow", path.display())))?;
    let mut coords = Vec::with_capacity(total);
    for _ in 0..total {
        coords.push(read_f64(&mut r, path)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::input(format!(
            "{}: trailing bytes after coordinate block",
            path.display()
        )));
    }
    SpectralEmbedding::new(d, eigenvalues, coords)
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_field<'a, T: std::str::FromStr>(
    parts: &mut impl Iterator<Item = &'a str>,
    path: &Path,
    what: &str,
) -> Result<T> {
    parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::input(format!("{}: missing or invalid {what}", path.display())))
}

fn parse_floats(line: &str, expected: usize, path: &Path, what: &str) -> Result<Vec<f64>> {
    let values: std::result::Result<Vec<f64>, _> =
        line.split_whitespace().map(|s| s.parse::<f64>()).collect();
    let values =
        values.map_err(|_| Error::input(format!("{}: invalid number in {what}", path.display())))?;
    if values.len() != expected {
        return Err(Error::input(format!(
            "{}: expected {expected} values in {what}, found {}",
            path.display(),
            values.len()
        )));
    }
    Ok(values)
}

fn read_u64(r: &mut impl Read, path: &Path) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read, path: &Path) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(f64::from_le_bytes(buf))
}
