//! Matrix file formats.
//!
//! CSV: comma separated, one matrix row per line, row-major. An optional
//! first line is treated as a header when any of its fields fails to parse
//! as a number. Values are written with Rust's shortest round-trip
//! formatting, so a write/read cycle is lossless for `f64`.
//!
//! Binary (`.bcur`): the four bytes `BCUR`, then `m` and `n` as `u64`
//! little-endian, then `m·n` `f64` little-endian entries in row-major order.
//! Nothing follows the last entry.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::matcore::DenseMatrix;
use crate::{Error, Result, Scalar};

pub const MAGIC: &[u8; 4] = b"BCUR";

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<DenseMatrix<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut data: Vec<T> = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0usize;
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(idx as u64 + 1, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if rows == 0 && cols.is_none() => {
                // header line
                cols = Some(record.len());
                continue;
            }
            Err(e) => {
                let field = record.iter().find(|f| f.parse::<f64>().is_err()).unwrap_or_default();
                return Err(parse_err(line, format!("cannot parse {field:?} as a number: {e}")));
            }
        };
        match cols {
            Some(c) if c != values.len() => {
                return Err(parse_err(line, format!("expected {c} fields, found {}", values.len())));
            }
            _ => cols = Some(values.len()),
        }
        for (j, v) in values.into_iter().enumerate() {
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value in column {}", j + 1)));
            }
            data.push(T::of(v));
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    if rows == 0 {
        return Err(parse_err(1, "no data rows"));
    }
    DenseMatrix::new(rows, cols, data)
}

pub fn write_csv<T: Scalar, W: Write>(m: &DenseMatrix<T>, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|x| x.f64().to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<T: Scalar, R: Read>(reader: R) -> Result<DenseMatrix<T>> {
    let mut r = BufReader::new(reader);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::invalid("missing BCUR magic"));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let m = u64::from_le_bytes(word);
    r.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word);
    let len = m
        .checked_mul(n)
        .and_then(|l| usize::try_from(l).ok())
        .ok_or_else(|| Error::invalid("binary matrix dimensions overflow"))?;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut word)?;
        data.push(T::of(f64::from_le_bytes(word)));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::invalid("trailing bytes after binary matrix"));
    }
    DenseMatrix::new(m as usize, n as usize, data)
}

pub fn write_binary<T: Scalar, W: Write>(m: &DenseMatrix<T>, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for x in m.as_slice() {
        w.write_all(&x.f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn is_binary_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bcur") || e.eq_ignore_ascii_case("bin"))
}

/// Reads by extension: `.bcur`/`.bin` as binary, anything else as CSV.
pub fn load<T: Scalar>(path: &Path) -> Result<DenseMatrix<T>> {
    let file = File::open(path)?;
    if is_binary_path(path) {
        read_binary(file)
    } else {
        read_csv(file)
    }
}

pub fn save<T: Scalar>(m: &DenseMatrix<T>, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    if is_binary_path(path) {
        write_binary(m, file)
    } else {
        write_csv(m, file)
    }
}
