//! Delimited-text dataset ingestion: a header row, one nonnegative-integer
//! response column, optional covariate columns, and an optional 0/1 censoring
//! flag column paired with a global threshold. Malformed values are hard
//! errors — silent coercion would corrupt the likelihood.

use std::path::Path;

use crate::error::{Error, Result};
use crate::estimation::RegressionDesign;

#[derive(Debug, Clone)]
pub struct DatasetOptions {
    /// Name of the response (count) column.
    pub response: String,
    /// Covariate column names, in the order coefficients will be reported.
    pub covariates: Vec<String>,
    /// Name of a 0/1 flag column; rows flagged 1 are right-censored.
    pub censor_column: Option<String>,
    /// Threshold M for censored rows: the count is known only as >= M.
    pub censor_at: Option<u32>,
    /// Field delimiter, comma by default.
    pub delimiter: u8,
}

impl DatasetOptions {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
            covariates: Vec::new(),
            censor_column: None,
            censor_at: None,
            delimiter: b',',
        }
    }

    pub fn with_covariates(mut self, names: Vec<String>) -> Self {
        self.covariates = names;
        self
    }

    pub fn with_censoring(mut self, column: impl Into<String>, at: u32) -> Self {
        self.censor_column = Some(column.into());
        self.censor_at = Some(at);
        self
    }
}

/// Read a delimited file into a regression design.
pub fn read_dataset(path: impl AsRef<Path>, opts: &DatasetOptions) -> Result<RegressionDesign> {
    let file = std::fs::File::open(path.as_ref())?;
    read_dataset_from(file, opts)
}

/// As [`read_dataset`], from any reader (used by tests and stdin pipelines).
pub fn read_dataset_from(reader: impl std::io::Read, opts: &DatasetOptions) -> Result<RegressionDesign> {
    if opts.censor_column.is_some() != opts.censor_at.is_some() {
        return Err(Error::data(
            "censor column and censor threshold must be given together",
        ));
    }
    if let Some(m) = opts.censor_at {
        if m == 0 {
            return Err(Error::data("censoring threshold must be >= 1"));
        }
    }

    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::data(format!("column '{name}' not found in header")))
    };
    let resp_idx = col(&opts.response)?;
    let cov_idx: Vec<usize> = opts
        .covariates
        .iter()
        .map(|c| col(c))
        .collect::<Result<_>>()?;
    let censor_idx = match &opts.censor_column {
        Some(c) => Some(col(c)?),
        None => None,
    };

    let mut counts = Vec::new();
    let mut covariates = Vec::new();
    let mut censor = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let row = line + 2; // 1-based, after the header
        let raw = record.get(resp_idx).ok_or_else(|| {
            Error::data(format!("row {row}: missing response field"))
        })?;
        counts.push(parse_count(raw, row, &opts.response)?);

        let mut xs = Vec::with_capacity(cov_idx.len());
        for (j, &idx) in cov_idx.iter().enumerate() {
            let raw = record.get(idx).ok_or_else(|| {
                Error::data(format!("row {row}: missing covariate field"))
            })?;
            let v: f64 = raw.parse().map_err(|_| {
                Error::data(format!(
                    "row {row}: covariate '{}' value '{raw}' is not numeric",
                    opts.covariates[j]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "row {row}: covariate '{}' is not finite",
                    opts.covariates[j]
                )));
            }
            xs.push(v);
        }
        covariates.push(xs);

        let flag = match censor_idx {
            Some(idx) => {
                let raw = record.get(idx).ok_or_else(|| {
                    Error::data(format!("row {row}: missing censor field"))
                })?;
                match raw {
                    "0" => None,
                    "1" => Some(opts.censor_at.unwrap()),
                    other => {
                        return Err(Error::data(format!(
                            "row {row}: censor flag must be 0 or 1, got '{other}'"
                        )))
                    }
                }
            }
            None => None,
        };
        censor.push(flag);
    }

    RegressionDesign::new(counts, covariates, censor)
}

fn parse_count(raw: &str, row: usize, col: &str) -> Result<u32> {
    // Accept integer-valued floats ("3.0") but reject anything fractional,
    // negative, or non-numeric.
    let v: f64 = raw.parse().map_err(|_| {
        Error::data(format!("row {row}: response '{col}' value '{raw}' is not numeric"))
    })?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(Error::data(format!(
            "row {row}: response '{col}' must be a nonnegative integer, got '{raw}'"
        )));
    }
    Ok(v as u32)
}

/// Write counts (and covariates) produced by the simulator in the same format
/// `read_dataset` accepts.
pub fn write_dataset(
    writer: impl std::io::Write,
    counts: &[u32],
    covariates: &[Vec<f64>],
    covariate_names: &[String],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["count".to_string()];
    header.extend(covariate_names.iter().cloned());
    wtr.write_record(&header)?;
    for (i, &y) in counts.iter().enumerate() {
        let mut rec = vec![y.to_string()];
        if let Some(row) = covariates.get(i) {
            rec.extend(row.iter().map(|v| format!("{v}")));
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
