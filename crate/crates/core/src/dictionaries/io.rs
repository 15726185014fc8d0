//! Plain-text matrix files.
//!
//! ```text
//! # optional comment lines
//! <rows> <cols> real|complex
//! <row 0 entries>
//! ...
//! ```
//! Rows are written one per line. Complex entries are written as `re im` pairs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

pub fn write_matrix<S: Scalar, W: Write>(m: &DMatrix<S>, mut out: W) -> Result<()> {
    let kind = if S::IS_COMPLEX { "complex" } else { "real" };
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), kind)?;
    for i in 0..m.nrows() {
        let mut line = String::new();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(' ');
            }
            let v = m[(i, j)];
            line.push_str(&format!("{:e}", to_f64(v.real())));
            if S::IS_COMPLEX {
                line.push_str(&format!(" {:e}", to_f64(v.imaginary())));
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_matrix_file<S: Scalar>(m: &DMatrix<S>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(m, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a matrix file. A complex file can only be read into a complex scalar type.
pub fn read_matrix<S: Scalar, R: BufRead>(input: R) -> Result<DMatrix<S>> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            l.as_ref()
                .map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
                .unwrap_or(true)
        });
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse(hline, "header must be `<rows> <cols> real|complex`"));
    }
    let rows: usize = fields[0].parse().map_err(|_| parse(hline, "bad row count"))?;
    let cols: usize = fields[1].parse().map_err(|_| parse(hline, "bad column count"))?;
    let complex = match fields[2] {
        "real" => false,
        "complex" => true,
        other => return Err(parse(hline, &format!("unknown element type `{other}`"))),
    };
    if complex && !S::IS_COMPLEX {
        return Err(Error::ComplexRequired);
    }
    let per_entry = if complex { 2 } else { 1 };
    let mut m = DMatrix::<S>::zeros(rows, cols);
    for i in 0..rows {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| parse(hline, &format!("expected {rows} rows, found {i}")))?;
        let line = line?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse(lno, &e.to_string()))?;
        if values.len() != cols * per_entry {
            return Err(parse(
                lno,
                &format!("expected {} numbers, found {}", cols * per_entry, values.len()),
            ));
        }
        for j in 0..cols {
            let re = lit(values[j * per_entry]);
            let im = if complex {
                lit(values[j * per_entry + 1])
            } else {
                lit(0.0)
            };
            m[(i, j)] = S::from_parts(re, im).ok_or(Error::ComplexRequired)?;
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(parse(lno, "trailing data after the last row"));
    }
    Ok(m)
}

pub fn read_matrix_file<S: Scalar>(path: impl AsRef<Path>) -> Result<DMatrix<S>> {
    read_matrix(BufReader::new(File::open(path)?))
}

fn parse(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}
