//! Dense adjacency-matrix ingestion and serialization.
//!
//! CSV: `n` rows of `n` comma-separated reals, optionally preceded by a header
//! row of node labels. JSON: `{"n": .., "labels": [..], "rows": [[..], ..]}`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{strongly_connected_components, ContactMatrix};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Csv,
    Json,
}

impl MatrixFormat {
    /// Infers the format from a `.csv` or `.json` extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(Self::Csv),
            Some("json") => Ok(Self::Json),
            _ => Err(Error::InvalidArgument(format!(
                "cannot infer matrix format from {}; use .csv or .json",
                path.display()
            ))),
        }
    }
}

/// Raw, unnormalized edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RawNetwork<T> {
    pub entries: Matrix<T>,
    pub labels: Option<Vec<String>>,
}

impl<T: Scalar> RawNetwork<T> {
    pub fn new(entries: Matrix<T>, labels: Option<Vec<String>>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::Dimension("matrix is empty".into()));
        }
        if let Some(l) = &labels {
            if l.len() != entries.nrows() {
                return Err(Error::Dimension(format!(
                    "{} labels for {} nodes",
                    l.len(),
                    entries.nrows()
                )));
            }
        }
        for i in 0..entries.nrows() {
            for j in 0..entries.ncols() {
                let v = entries[(i, j)];
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite entry at row {}, column {}", i + 1, j + 1)));
                }
                if v < T::zero() {
                    return Err(Error::NegativeEntry {
                        row: i + 1,
                        col: j + 1,
                        value: v.as_f64(),
                    });
                }
            }
        }
        Ok(Self { entries, labels })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Validates the raw weights as a contact matrix without any transform.
    pub fn into_contact(self) -> Result<ContactMatrix<T>> {
        ContactMatrix::new(self.entries)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct JsonMatrix<T> {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    rows: Vec<Vec<T>>,
}

pub fn load_matrix<T: Scalar>(path: &Path, format: MatrixFormat) -> Result<RawNetwork<T>> {
    let reader = BufReader::new(File::open(path)?);
    match format {
        MatrixFormat::Csv => read_csv(reader),
        MatrixFormat::Json => read_json(reader),
    }
}

pub fn read_json<T: Scalar, R: Read>(reader: R) -> Result<RawNetwork<T>> {
    let m: JsonMatrix<T> = serde_json::from_reader(reader)?;
    if m.rows.len() != m.n {
        return Err(Error::Dimension(format!("\"n\" is {} but {} rows given", m.n, m.rows.len())));
    }
    RawNetwork::new(Matrix::from_rows(m.rows)?, m.labels)
}

pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<RawNetwork<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut labels = None;
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<T>, _> = record.iter().map(str::parse::<T>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => labels = Some(record.iter().map(str::to_owned).collect()),
            Err(_) => {
                let bad = record.iter().position(|f| f.parse::<T>().is_err()).unwrap_or(0);
                return Err(Error::Parse(format!(
                    "line {}: field {} ({:?}) is not a number",
                    line + 1,
                    bad + 1,
                    &record[bad]
                )));
            }
        }
    }
    RawNetwork::new(Matrix::from_rows(rows)?, labels)
}

pub fn save_matrix<T: Scalar>(
    m: &Matrix<T>,
    labels: Option<&[String]>,
    path: &Path,
    format: MatrixFormat,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        MatrixFormat::Csv => write_csv(m, labels, &mut w)?,
        MatrixFormat::Json => write_json(m, labels, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Scalar, W: Write>(m: &Matrix<T>, labels: Option<&[String]>, w: W) -> Result<()> {
    let doc = JsonMatrix {
        n: m.nrows(),
        labels: labels.map(<[String]>::to_vec),
        rows: m.to_rows(),
    };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

/// Values are written with the shortest representation that round-trips.
pub fn write_csv<T: Scalar, W: Write>(m: &Matrix<T>, labels: Option<&[String]>, w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().from_writer(w);
    if let Some(l) = labels {
        wr.write_record(l)?;
    }
    for i in 0..m.nrows() {
        wr.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct NormalizeOptions<T> {
    /// Threshold applied after the first normalization.
    pub kappa: T,
    pub row_sum: T,
    /// Keep self-loops (intra-region mobility) from the raw data.
    pub retain_diagonal: bool,
}

impl<T: Scalar> NormalizeOptions<T> {
    pub fn new(kappa: T, row_sum: T) -> Self {
        Self {
            kappa,
            row_sum,
            retain_diagonal: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct IngestReport<T> {
    pub n: usize,
    pub options: NormalizeOptions<T>,
    /// Positive entries removed by the threshold.
    pub entries_zeroed: usize,
    pub nonzero_entries: usize,
    pub irreducible: bool,
    pub positive: bool,
    /// Strongly connected components of the result.
    pub components: Vec<Vec<usize>>,
}

fn normalize_rows<T: Scalar>(m: &mut Matrix<T>, row_sum: T, stage: &str) -> Result<()> {
    for i in 0..m.nrows() {
        let s: T = m.row(i).iter().copied().sum();
        if !(s > T::zero()) {
            return Err(Error::InvalidArgument(format!("row {i} is zero {stage}")));
        }
        let f = row_sum / s;
        for v in m.row_mut(i) {
            *v = *v * f;
        }
    }
    Ok(())
}

/// Normalizes rows to `row_sum`, zeroes entries below `kappa`, and
/// renormalizes. The result must be irreducible.
pub fn threshold_and_normalize<T: Scalar>(
    raw: &RawNetwork<T>,
    opts: &NormalizeOptions<T>,
) -> Result<(ContactMatrix<T>, IngestReport<T>)> {
    let (m, report) = threshold_and_normalize_unchecked(raw, opts)?;
    if !report.irreducible {
        return Err(Error::Reducible {
            components: report.components,
        });
    }
    Ok((ContactMatrix::new(m)?, report))
}

/// Same transform, returning the report even when the result is reducible.
pub fn threshold_and_normalize_unchecked<T: Scalar>(
    raw: &RawNetwork<T>,
    opts: &NormalizeOptions<T>,
) -> Result<(Matrix<T>, IngestReport<T>)> {
    if !(opts.kappa >= T::zero()) {
        return Err(Error::InvalidArgument(format!("kappa must be nonnegative, got {}", opts.kappa)));
    }
    if !(opts.row_sum > T::zero() && opts.row_sum.is_finite()) {
        return Err(Error::InvalidArgument(format!("row_sum must be positive, got {}", opts.row_sum)));
    }
    let n = raw.n();
    let mut m = raw.entries.clone();
    if !opts.retain_diagonal {
        for i in 0..n {
            m[(i, i)] = T::zero();
        }
    }
    normalize_rows(&mut m, opts.row_sum, "before thresholding")?;
    let mut zeroed = 0;
    for i in 0..n {
        for v in m.row_mut(i) {
            if *v > T::zero() && *v < opts.kappa {
                *v = T::zero();
                zeroed += 1;
            }
        }
    }
    normalize_rows(&mut m, opts.row_sum, "after thresholding")?;
    let components = strongly_connected_components(&m);
    let nonzero_entries = m.as_slice().iter().filter(|&&v| v > T::zero()).count();
    let report = IngestReport {
        n,
        options: *opts,
        entries_zeroed: zeroed,
        nonzero_entries,
        irreducible: components.len() == 1,
        positive: nonzero_entries == n * n,
        components,
    };
    Ok((m, report))
}
