use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use graphvariate::MultivariateSignal;
use ndarray::{Array2, ArrayView2};

use crate::error::{CliError, CliResult};

/// Text form of a float that parses back to the same bits (17 significant digits).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn is_numeric(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

fn read_records(path: &Path) -> CliResult<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(path.display(), e))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::io(path.display(), e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok(rows)
}

/// Reads a numeric table: rows are nodes, columns samples.
///
/// A first column is taken as node labels when any row below the first has
/// a non-numeric first cell. The first row is a header (sample indices,
/// ignored) when one of its payload cells is non-numeric, or when its
/// label-column cell is empty.
pub fn ingest_csv(path: &Path, sample_rate: f64) -> CliResult<MultivariateSignal> {
    let rows = read_records(path)?;
    let bad = |msg: String| CliError::Io(format!("{}: {msg}", path.display()));
    if rows.is_empty() {
        return Err(bad("empty file".into()));
    }
    let labelled = rows.iter().skip(1).any(|r| !is_numeric(&r[0]));
    let skip = usize::from(labelled);
    let header = rows[0].iter().skip(skip).any(|c| !is_numeric(c)) || (labelled && rows[0][0].is_empty());
    let body = &rows[usize::from(header)..];

    let width = body.first().map_or(0, Vec::len);
    let p = width.saturating_sub(skip);
    if body.len() < 2 || p < 2 {
        return Err(bad(format!("need at least 2 rows and 2 sample columns, got {}×{p}", body.len())));
    }
    let mut data = Array2::zeros((body.len(), p));
    let mut labels = Vec::with_capacity(body.len());
    for (i, row) in body.iter().enumerate() {
        let line = i + 1 + usize::from(header);
        if row.len() != width {
            return Err(bad(format!("line {line} has {} fields, expected {width}", row.len())));
        }
        if labelled {
            labels.push(row[0].clone());
        }
        for (t, cell) in row[skip..].iter().enumerate() {
            data[[i, t]] = cell
                .parse()
                .map_err(|_| bad(format!("line {line}, field {}: {cell:?} is not a number", t + skip + 1)))?;
        }
    }
    let signal = MultivariateSignal::new(data, sample_rate).map_err(|e| bad(e.to_string()))?;
    if labelled {
        Ok(signal.with_labels(labels).map_err(|e| bad(e.to_string()))?)
    } else {
        Ok(signal)
    }
}

/// Reads a plain square numeric matrix (no header, no labels).
pub fn read_matrix(path: &Path) -> CliResult<Array2<f64>> {
    let rows = read_records(path)?;
    let n = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut m = Array2::zeros((n, width));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(CliError::Io(format!("{}: line {} has {} fields, expected {width}", path.display(), i + 1, row.len())));
        }
        for (j, cell) in row.iter().enumerate() {
            m[[i, j]] = cell.parse().map_err(|_| {
                CliError::Io(format!("{}: line {}, field {}: {cell:?} is not a number", path.display(), i + 1, j + 1))
            })?;
        }
    }
    Ok(m)
}

/// CSV writer that reports failures as I/O errors against `path`.
pub struct TableWriter {
    inner: csv::Writer<BufWriter<File>>,
    path: String,
}

impl TableWriter {
    pub fn create(path: &Path) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path.display(), e))?;
        Ok(Self { inner: csv::Writer::from_writer(BufWriter::new(file)), path: path.display().to_string() })
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.inner.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// One matrix row per line, optionally prefixed by a label column.
pub fn write_matrix(path: &Path, m: ArrayView2<'_, f64>, labels: Option<&[String]>) -> CliResult<()> {
    let mut w = TableWriter::create(path)?;
    for (i, row) in m.rows().into_iter().enumerate() {
        let mut fields: Vec<String> = labels.map(|l| vec![l[i].clone()]).unwrap_or_default();
        fields.extend(row.iter().map(|&v| format_f64(v)));
        w.row(fields)?;
    }
    w.finish()
}

/// Writes a signal so that [`ingest_csv`] reads back identical values and labels.
pub fn write_signal(path: &Path, signal: &MultivariateSignal) -> CliResult<()> {
    write_matrix(path, signal.data(), signal.labels())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path.display(), e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path.display(), e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path.display(), e))
}
