//! CSV ingestion and emission of censored datasets.
//!
//! Format: a header row; required columns `y1` and `y2`; an optional
//! `delta` column (0 = exact, 1 = censored), inferred as `y1 == y2` when
//! absent; every other named column is a covariate unless an explicit
//! covariate list restricts that. `inf`, `Inf`, or an empty `y2` cell
//! denote right censoring. Decimal point, comma separator, UTF-8.

use anyhow::{anyhow, bail, Context, Result};
use mable_aft_core::{Dataset, Observation};
use std::io::Read;
use std::path::Path;

/// A dataset together with the covariate column names that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedDataset {
    pub dataset: Dataset,
    pub covariates: Vec<String>,
}

/// Read a dataset from a CSV file.
pub fn parse_csv_file(path: &Path, covariate_columns: Option<&[String]>) -> Result<NamedDataset> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    parse_csv(file, covariate_columns)
}

/// Read a dataset from any CSV source.
pub fn parse_csv<R: Read>(reader: R, covariate_columns: Option<&[String]>) -> Result<NamedDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().context("missing header row")?.clone();

    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let y1_col = find("y1").ok_or_else(|| anyhow!("missing required column `y1`"))?;
    let y2_col = find("y2").ok_or_else(|| anyhow!("missing required column `y2`"))?;
    let delta_col = find("delta");

    let covariate_cols: Vec<(usize, String)> = match covariate_columns {
        Some(names) => names
            .iter()
            .map(|n| {
                find(n)
                    .map(|i| (i, n.clone()))
                    .ok_or_else(|| anyhow!("covariate column `{n}` not found"))
            })
            .collect::<Result<_>>()?,
        None => headers
            .iter()
            .enumerate()
            .filter(|(i, h)| {
                *i != y1_col && *i != y2_col && Some(*i) != delta_col && !h.trim().is_empty()
            })
            .map(|(i, h)| (i, h.trim().to_string()))
            .collect(),
    };

    let mut observations = Vec::new();
    for (row_index, record) in rdr.records().enumerate() {
        let record = record.with_context(|| format!("malformed CSV at data row {}", row_index + 1))?;
        let line = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| format!("data row {}", row_index + 1));

        let y1 = parse_time(record.get(y1_col), false)
            .map_err(|e| anyhow!("line {line}, column y1: {e}"))?;
        let y2 = parse_time(record.get(y2_col), true)
            .map_err(|e| anyhow!("line {line}, column y2: {e}"))?;
        let censored = match delta_col {
            Some(c) => match record.get(c).map(str::trim) {
                Some("0") => false,
                Some("1") => true,
                other => bail!("line {line}: delta must be 0 or 1, got {other:?}"),
            },
            None => y1 != y2,
        };
        let x = covariate_cols
            .iter()
            .map(|(i, name)| {
                record
                    .get(*i)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| anyhow!("line {line}: empty covariate `{name}`"))?
                    .parse::<f64>()
                    .map_err(|_| anyhow!("line {line}: covariate `{name}` is not a number"))
            })
            .collect::<Result<Vec<f64>>>()?;

        let obs = Observation { censored, x, y1, y2 };
        if let Err(reason) = obs.validate() {
            bail!("line {line}: {reason}");
        }
        observations.push(obs);
    }
    if observations.is_empty() {
        bail!("no observations");
    }

    let dataset = Dataset::new(observations).map_err(|e| anyhow!("{e}"))?;
    Ok(NamedDataset { dataset, covariates: covariate_cols.into_iter().map(|(_, n)| n).collect() })
}

fn parse_time(field: Option<&str>, allow_infinite: bool) -> Result<f64> {
    let s = field.map(str::trim).unwrap_or("");
    if s.is_empty() || s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        if allow_infinite {
            return Ok(f64::INFINITY);
        }
        bail!("expected a finite time, got {s:?}");
    }
    s.parse::<f64>().map_err(|_| anyhow!("not a number: {s:?}"))
}

/// Write a dataset back out: `y1,y2,delta` then the covariate columns.
/// Right-censored upper endpoints are written as `inf`.
pub fn write_csv<W: std::io::Write>(
    data: &Dataset,
    covariates: &[String],
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["y1".to_string(), "y2".to_string(), "delta".to_string()];
    header.extend(covariates.iter().cloned());
    wtr.write_record(&header)?;
    for obs in data.observations() {
        let mut row = vec![
            format!("{}", obs.y1),
            if obs.y2.is_finite() { format!("{}", obs.y2) } else { "inf".to_string() },
            if obs.censored { "1" } else { "0" }.to_string(),
        ];
        row.extend(obs.x.iter().map(|v| format!("{v}")));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
