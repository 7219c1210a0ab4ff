//! Margins, weights and matrices from flags or files.

use std::path::Path;

use serde::Deserialize;
use tablecount::{Error, Margins, Result, WeightMatrix};

pub fn parse_list(text: &str, what: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u32>()
                .map_err(|_| Error::InvalidMargins(format!("bad {what} entry `{s}`")))
        })
        .collect()
}

/// `0,1,2;1,3;0,2`: one comma list per column, separated by semicolons.
pub fn parse_sets(text: &str) -> Result<Vec<Vec<u32>>> {
    text.split(';').map(|s| parse_list(s, "column set")).collect()
}

#[derive(Deserialize)]
struct MarginsFile {
    rows: Vec<u32>,
    cols: Vec<u32>,
    #[serde(default)]
    weights: Option<Vec<Vec<f64>>>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}

fn is_json(text: &str) -> bool {
    matches!(text.trim_start().chars().next(), Some('{') | Some('['))
}

fn csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::InvalidParameter(format!("bad CSV: {e}")))?;
        let row = record
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad number `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if !row.is_empty() {
            out.push(row);
        }
    }
    Ok(out)
}

fn as_counts(row: &[f64]) -> Result<Vec<u32>> {
    row.iter()
        .map(|&v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
                Ok(v as u32)
            } else {
                Err(Error::InvalidMargins(format!("margin {v} is not a count")))
            }
        })
        .collect()
}

/// Margins file: JSON `{"rows", "cols", "weights"?}` or CSV with the row
/// sums on the first line and the column sums on the second.
pub fn margins_file(path: &Path) -> Result<(Margins, Option<WeightMatrix>)> {
    let text = read(path)?;
    if is_json(&text) {
        let raw: MarginsFile = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidMargins(format!("bad margins file: {e}")))?;
        let margins = Margins::new(raw.rows, raw.cols)?;
        let weights = raw.weights.map(WeightMatrix::new).transpose()?;
        return Ok((margins, weights));
    }
    let rows = csv_rows(&text)?;
    if rows.len() != 2 {
        return Err(Error::InvalidMargins(
            "CSV margins need exactly two lines: row sums, column sums".into(),
        ));
    }
    Ok((Margins::new(as_counts(&rows[0])?, as_counts(&rows[1])?)?, None))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Bare(Vec<Vec<f64>>),
    Weights { weights: Vec<Vec<f64>> },
    Matrix { matrix: Vec<Vec<f64>> },
}

/// Rectangular matrix from JSON (bare array or `{"weights"}`/`{"matrix"}`) or CSV.
pub fn matrix_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read(path)?;
    if is_json(&text) {
        let raw: MatrixFile = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("bad matrix file: {e}")))?;
        return Ok(match raw {
            MatrixFile::Bare(m) | MatrixFile::Weights { weights: m } | MatrixFile::Matrix { matrix: m } => m,
        });
    }
    csv_rows(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_sets() {
        assert_eq!(parse_list("2, 2,3", "row").unwrap(), vec![2, 2, 3]);
        assert!(parse_list("2,x", "row").is_err());
        assert_eq!(parse_sets("0,1;2").unwrap(), vec![vec![0, 1], vec![2]]);
        assert_eq!(parse_sets("1;").unwrap(), vec![vec![1], vec![]]);
    }
}
