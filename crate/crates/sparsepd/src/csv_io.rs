//! CSV formats.
//!
//! Matrices: a first line `rows,cols`, then one comma-separated row per
//! line. Logistic datasets use the same layout with the outcome (`+1` or
//! `-1`) in the first column. Result tables have a header row. Numbers
//! are written in the shortest form that reads back to the same value.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sparsepd_core::apps::logistic::LogisticDataset;
use sparsepd_core::linalg::DenseMatrix;

use crate::error::{Error, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), message: message.into() }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io { path: path.to_path_buf(), source },
            other => format_err(path, format!("{other:?}")),
        }
    } else {
        format_err(path, e.to_string())
    }
}

fn parse_f64(path: &Path, line: u64, field: &str) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| format_err(path, format!("line {line}: bad number {field:?}")))?;
    if !v.is_finite() {
        return Err(format_err(path, format!("line {line}: non-finite value {field:?}")));
    }
    Ok(v)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(r)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).flexible(true).terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Reads `rows,cols` followed by `rows` lines of `cols` numbers.
fn read_dense<R: Read>(source: R, path: &Path) -> Result<DenseMatrix> {
    let mut rdr = reader(source);
    let mut records = rdr.records();
    let head = records.next().ok_or_else(|| format_err(path, "empty file"))?.map_err(|e| csv_err(path, e))?;
    if head.len() != 2 {
        return Err(format_err(path, "first line must be `rows,cols`"));
    }
    let dim = |s: &str| s.trim().parse::<usize>().map_err(|_| format_err(path, format!("bad dimension {s:?}")));
    let (rows, cols) = (dim(&head[0])?, dim(&head[1])?);
    let mut m = DenseMatrix::zeros(rows, cols);
    let mut count = 0;
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = i as u64 + 2;
        if i >= rows {
            return Err(format_err(path, format!("line {line}: more than {rows} data rows")));
        }
        if rec.len() != cols {
            return Err(format_err(path, format!("line {line}: expected {cols} fields, found {}", rec.len())));
        }
        for (j, field) in rec.iter().enumerate() {
            m[(i, j)] = parse_f64(path, line, field)?;
        }
        count += 1;
    }
    if count != rows {
        return Err(format_err(path, format!("expected {rows} data rows, found {count}")));
    }
    Ok(m)
}

fn write_dense<W: Write>(sink: W, m: &DenseMatrix, path: &Path) -> Result<()> {
    let mut w = writer(sink);
    w.write_record([m.rows().to_string(), m.cols().to_string()]).map_err(|e| csv_err(path, e))?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string())).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let f = File::open(path).map_err(io_err(path))?;
    read_dense(BufReader::new(f), path)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let f = File::create(path).map_err(io_err(path))?;
    write_dense(BufWriter::new(f), m, path)
}

/// Outcome in column 0, features after it.
pub fn read_logistic(path: &Path) -> Result<LogisticDataset> {
    let m = read_matrix(path)?;
    if m.cols() < 2 {
        return Err(format_err(path, "dataset needs an outcome column and at least one feature"));
    }
    let outcomes = m.col(0).to_vec();
    let features = DenseMatrix::from_fn(m.rows(), m.cols() - 1, |i, j| m[(i, j + 1)]);
    LogisticDataset::new(features, outcomes).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_logistic(path: &Path, data: &LogisticDataset) -> Result<()> {
    let z = data.features();
    let m = DenseMatrix::from_fn(data.n(), data.p() + 1, |i, j| if j == 0 { data.outcomes()[i] } else { z[(i, j - 1)] });
    write_matrix(path, &m)
}

/// A result table with named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// The table without the named columns.
    pub fn without(&self, names: &[&str]) -> Table {
        let keep: Vec<usize> = (0..self.header.len()).filter(|&k| !names.contains(&self.header[k].as_str())).collect();
        Table {
            header: keep.iter().map(|&k| self.header[k].clone()).collect(),
            rows: self.rows.iter().map(|r| keep.iter().map(|&k| r[k]).collect()).collect(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf, Path::new("<memory>")).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    fn write_to<W: Write>(&self, sink: W, path: &Path) -> Result<()> {
        let mut w = writer(sink);
        w.write_record(&self.header).map_err(|e| csv_err(path, e))?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string())).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(io_err(path))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(io_err(path))?;
        self.write_to(BufWriter::new(f), path)
    }

    pub fn read(path: &Path) -> Result<Table> {
        let f = File::open(path).map_err(io_err(path))?;
        let mut rdr = reader(BufReader::new(f));
        let mut records = rdr.records();
        let head = records.next().ok_or_else(|| format_err(path, "empty file"))?.map_err(|e| csv_err(path, e))?;
        let header: Vec<String> = head.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in records.enumerate() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let line = i as u64 + 2;
            if rec.len() != header.len() {
                return Err(format_err(path, format!("line {line}: expected {} fields", header.len())));
            }
            rows.push(rec.iter().map(|f| parse_f64(path, line, f)).collect::<Result<Vec<_>>>()?);
        }
        Ok(Table { header, rows })
    }
}
