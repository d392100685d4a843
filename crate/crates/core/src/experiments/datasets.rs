use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const ELECTRICITY_ROWS: usize = 140_256;
/// Numeric fields per line; the timestamp makes one more.
pub const ELECTRICITY_COLS: usize = 370;
pub const MOTION_SHAPE: (usize, usize) = (1_743, 50);

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads the LD2011_2014 export: a header line, then semicolon-separated
/// lines of a timestamp followed by 370 decimal-comma readings.
pub fn load_electricity(path: &Path) -> Result<Matrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let m = parse_electricity(BufReader::new(file), path, ELECTRICITY_COLS)?;
    if m.rows() != ELECTRICITY_ROWS {
        return Err(Error::Shape(format!(
            "expected {ELECTRICITY_ROWS} × {ELECTRICITY_COLS} electricity matrix, got {} × {}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m)
}

/// Parser behind [`load_electricity`] with a configurable number of numeric
/// fields per line.
pub fn parse_electricity<R: BufRead>(reader: R, path: &Path, numeric_fields: usize) -> Result<Matrix> {
    let mut data: Vec<f64> = Vec::new();
    let mut rows = 0;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if idx == 0 {
            continue;
        }
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(';').collect();
        if fields.len() != numeric_fields + 1 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {} fields, found {}", numeric_fields + 1, fields.len()),
            ));
        }
        for (k, field) in fields[1..].iter().enumerate() {
            let text = field.trim().trim_matches('"').replace(',', ".");
            let v: f64 = text.parse().map_err(|_| {
                parse_err(path, lineno, format!("field {}: cannot parse {field:?}", k + 2))
            })?;
            if !v.is_finite() {
                return Err(parse_err(path, lineno, format!("field {}: non-finite value", k + 2)));
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(path, 1, "no data lines"));
    }
    Matrix::from_row_major(rows, numeric_fields, data)
}

/// Concatenates the rows of the given gesture-phase files and checks the
/// result is 1743 × 50.
pub fn load_motion(paths: &[PathBuf]) -> Result<Matrix> {
    load_motion_with_shape(paths, Some(MOTION_SHAPE))
}

/// Comma-separated rows; fields that do not parse as numbers (labels,
/// header names) are dropped, and lines with no numeric field are skipped.
pub fn load_motion_with_shape(paths: &[PathBuf], expected: Option<(usize, usize)>) -> Result<Matrix> {
    if paths.is_empty() {
        return Err(Error::contract("motion loader needs at least one file"));
    }
    let mut data: Vec<f64> = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;
    for path in paths {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let values: Vec<f64> = line
                .split(',')
                .filter_map(|f| f.trim().trim_matches('"').parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .collect();
            if values.is_empty() {
                continue;
            }
            match width {
                None => width = Some(values.len()),
                Some(w) if w != values.len() => {
                    return Err(parse_err(
                        path,
                        idx + 1,
                        format!("expected {w} numeric fields, found {}", values.len()),
                    ))
                }
                _ => {}
            }
            data.extend(values);
            rows += 1;
        }
    }
    let cols = width.unwrap_or(0);
    if let Some((er, ec)) = expected {
        if (rows, cols) != (er, ec) {
            return Err(Error::Shape(format!(
                "expected {er} × {ec} motion matrix, got {rows} × {cols}"
            )));
        }
    }
    if rows == 0 {
        return Err(Error::Shape("motion files contain no numeric rows".into()));
    }
    Matrix::from_row_major(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn electricity_fixture() {
        let text = "\"\";\"MT_001\";\"MT_002\"\n\"2011-01-01 00:15:00\";1,5;2,0\nts;0;3,25\n";
        let m = parse_electricity(text.as_bytes(), Path::new("fixture"), 2).unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m[(0, 0)], 1.5);
        assert_eq!(m[(0, 1)], 2.0);
        assert_eq!(m[(1, 1)], 3.25);
    }

    #[test]
    fn electricity_errors_name_lines() {
        let text = "h\nts;1,5;2,0\nts;1,0\n";
        let err = parse_electricity(text.as_bytes(), Path::new("f"), 2).unwrap_err();
        assert_eq!(err.to_string(), "f:3: expected 3 fields, found 2");
        let text = "h\nts;1,5;x\n";
        let err = parse_electricity(text.as_bytes(), Path::new("f"), 2).unwrap_err();
        assert!(err.to_string().starts_with("f:2:"), "{err}");
        let err = parse_electricity("h\nts;1\n".as_bytes(), Path::new("f"), ELECTRICITY_COLS).unwrap_err();
        assert!(err.to_string().contains("expected 371 fields"));
    }

    #[test]
    fn motion_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let mut f = File::create(&path).unwrap();
        let header: Vec<String> = (0..50).map(|j| format!("f{j}")).collect();
        writeln!(f, "{},Phase", header.join(",")).unwrap();
        for r in 0..2 {
            let row: Vec<String> = (0..50).map(|j| format!("{}", r as f64 + j as f64 * 0.5)).collect();
            writeln!(f, "{},Rest", row.join(",")).unwrap();
        }
        drop(f);
        let m = load_motion_with_shape(&[path.clone()], Some((2, 50))).unwrap();
        assert_eq!(m.shape(), (2, 50));
        assert_eq!(m[(1, 3)], 2.5);
        let err = load_motion(&[path]).unwrap_err();
        assert!(err.to_string().contains("got 2 × 50"), "{err}");
    }
}
