use grassgeo::CMat;
use serde::Serialize;

use crate::CliError;

/// Complex matrix as nested rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_json(a: &CMat) -> MatrixJson {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re + 0.0, a[(i, j)].im + 0.0]).collect())
        .collect()
}

pub fn parse_matrix(text: &str, rows: usize, cols: usize) -> Result<CMat, CliError> {
    let nested: MatrixJson =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("matrix: {e}")))?;
    if nested.len() != rows || nested.iter().any(|r| r.len() != cols) {
        return Err(CliError::Parse(format!("matrix must be {rows}x{cols}")));
    }
    let flat: Vec<grassgeo::Complex64> = nested
        .iter()
        .flatten()
        .map(|&[re, im]| grassgeo::Complex64::new(re, im))
        .collect();
    if flat.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(CliError::Parse("matrix entries must be finite".into()));
    }
    Ok(CMat::from_row_slice(rows, cols, &flat))
}

pub fn parse_reals(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{what}: {e}")))?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Parse(format!("{what} entries must be finite")));
    }
    Ok(values)
}

pub fn json<T: Serialize>(report: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| CliError::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    writer.write_record(header).map_err(to_io)?;
    for row in rows {
        writer.write_record(row).map_err(to_io)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(std::io::Error::other(e)))
}

/// Shortest round-trip decimal, switching to exponent form for very large
/// or small magnitudes (the JSON number syntax).
pub fn real(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_default()
}

/// [`real`], empty for missing values.
pub fn num(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}
