//! Matrix files.
//!
//! * CSV: one row per line, comma-separated, `.` as decimal point, no header.
//!   Values are written in shortest round-trip form, so CSV round trips are exact.
//! * Binary: the 4 magic bytes `RADM`, little-endian `u64` rows and `u64`
//!   cols, then `rows · cols` little-endian `f64` entries in row-major order.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 4] = b"RADM";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::Binary => "radm",
        }
    }
}

pub fn write_csv(path: &Path, m: &Matrix) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv_to(&mut w, m).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to(w: &mut impl Write, m: &Matrix) -> std::io::Result<()> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{:e}", m[(i, j)])?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Matrix> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(BufReader::new(file), path)
}

pub fn read_csv_from(r: impl BufRead, path: &Path) -> Result<Matrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("'{}' is not a number", field.trim()),
            })?;
            data.push(v);
        }
        let n = data.len() - before;
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("expected {c} fields, found {n}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    Matrix::from_row_major(rows, cols.unwrap_or(0), data)
}

pub fn write_binary(path: &Path, m: &Matrix) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_binary_to(&mut w, m).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_binary_to(w: &mut impl Write, m: &Matrix) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<Matrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_binary(&bytes, path)
}

pub fn decode_binary(bytes: &[u8], path: &Path) -> Result<Matrix> {
    let bad = |message: String| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message,
    };
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(bad("missing RADM header".into()));
    }
    let rows = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = &bytes[20..];
    let expected = rows.checked_mul(cols).and_then(|n| n.checked_mul(8));
    if expected != Some(body.len()) {
        return Err(bad(format!(
            "{rows}x{cols} header does not match {} payload bytes",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Matrix::from_row_major(rows, cols, data)
}

/// Reads either format; binary files are recognized by their magic bytes.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let mut head = [0u8; 4];
    let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let n = f.read(&mut head).map_err(|e| Error::io(path, e))?;
    if n == 4 && &head == MAGIC {
        read_binary(path)
    } else {
        read_csv(path)
    }
}

pub fn write_matrix(path: &Path, m: &Matrix, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Csv => write_csv(path, m),
        MatrixFormat::Binary => write_binary(path, m),
    }
}
