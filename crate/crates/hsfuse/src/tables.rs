//! Plain-decimal CSV matrices (one matrix row per line) and the
//! coefficient-pair file: a `s=..,r=..,S=..` header line, then the rows of A
//! followed by the rows of B.

use std::fs;
use std::path::Path;

use hsfuse_core::{CoefficientPair, Matrix};

use crate::error::{Error, Result, WithPath};

fn parse_rows<'a>(
    path: &Path,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (line_no, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(line.as_bytes());
        let record = reader
            .records()
            .next()
            .transpose()
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?
            .unwrap_or_default();
        let row = record
            .iter()
            .map(|field| {
                field.trim().parse::<f64>().map_err(|_| {
                    Error::parse(path, line_no, format!("`{}` is not a number", field.trim()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = parse_rows(path, text.lines().enumerate().map(|(i, l)| (i + 1, l)))?;
    if rows.is_empty() {
        return Err(Error::format(path, "matrix file has no rows"));
    }
    Matrix::from_rows(&rows).at(path)
}

fn render_rows(m: &Matrix, out: &mut String) {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
}

/// Shortest round-trip decimal formatting keeps the file lossless.
pub fn write_matrix_csv(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    render_rows(m, &mut out);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn render_coefficients(coeff: &CoefficientPair) -> String {
    let mut out = format!(
        "s={},r={},S={}\n",
        coeff.ms_bands(),
        coeff.rank(),
        coeff.hs_bands()
    );
    render_rows(coeff.a(), &mut out);
    render_rows(coeff.b(), &mut out);
    out
}

pub fn write_coefficients(coeff: &CoefficientPair, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_coefficients(coeff)).map_err(|e| Error::io(path, e))
}

pub fn read_coefficients(path: impl AsRef<Path>) -> Result<CoefficientPair> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty coefficient file"))?;
    let mut dims = [None; 3];
    for part in header.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(path, 1, format!("expected `key=value`, got `{part}`")))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, 1, format!("`{}` is not an integer", value.trim())))?;
        match key.trim() {
            "s" => dims[0] = Some(value),
            "r" => dims[1] = Some(value),
            "S" => dims[2] = Some(value),
            other => {
                return Err(Error::parse(
                    path,
                    1,
                    format!("unknown header key `{other}`"),
                ))
            }
        }
    }
    let [Some(s), Some(r), Some(big_s)] = dims else {
        return Err(Error::parse(path, 1, "header must give s, r and S"));
    };
    let rows = parse_rows(path, lines)?;
    if rows.len() != r || s >= r {
        return Err(Error::format(
            path,
            format!(
                "expected {r} coefficient rows with s < r, found {} rows and s = {s}",
                rows.len()
            ),
        ));
    }
    if let Some(bad) = rows.iter().position(|row| row.len() != big_s) {
        return Err(Error::parse(
            path,
            bad + 2,
            format!("expected {big_s} values"),
        ));
    }
    let a = Matrix::from_rows(&rows[..s]).at(path)?;
    let b = Matrix::from_rows(&rows[s..]).at(path)?;
    CoefficientPair::new(a, b).at(path)
}
