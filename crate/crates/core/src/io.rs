//! File formats: single-column series CSV, long-form heatmap and curve
//! CSV, and the JSON grid document.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! reading a file back gives the same bits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Source, TimeSeries};
use crate::sweep::{
    select_spi_optimal, Cell, CellFailure, CurvePoint, Quantity, Selection, SweepGrid, DEFAULT_PLATEAU_FRACTION,
};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Reads one sample per line. A first line that is not a number is taken
/// as a header; blank lines are skipped. Line numbers in errors are
/// 1-based.
pub fn read_timeseries<R: Read>(reader: R, name: &str) -> Result<TimeSeries> {
    let mut values = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => return Err(Error::NonFiniteLine { line: i + 1 }),
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(Error::Parse {
                    line: i + 1,
                    text: text.to_string(),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    TimeSeries::new(values, 1.0, name.to_string(), Source::File)
}

pub fn load_timeseries_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_timeseries(File::open(path)?, &name)
}

/// Header `value`, then one sample per line.
pub fn write_timeseries<W: Write>(ts: &TimeSeries, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "value")?;
    for v in ts.values() {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timeseries_csv(ts: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    write_timeseries(ts, File::create(path)?)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_opt(field: &str, line: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field.parse::<f64>().map(Some).map_err(|_| Error::Parse {
        line,
        text: field.to_string(),
    })
}

fn parse_usize(field: &str, line: usize) -> Result<usize> {
    field.parse().map_err(|_| Error::Parse {
        line,
        text: field.to_string(),
    })
}

fn failure_text(failures: &[&CellFailure]) -> String {
    failures
        .iter()
        .map(|f| {
            let q = match f.quantity {
                Quantity::Spi => "spi",
                Quantity::Mase => "mase",
            };
            format!("{q}: {}", f.error)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Long-form grid: `m,tau,spi,mase` in m-major order, plus an `error`
/// column when any cell failed. Missing values are empty fields.
pub fn write_heatmap<W: Write>(grid: &SweepGrid, writer: W) -> Result<()> {
    let with_errors = !grid.failures.is_empty();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["m", "tau", "spi", "mase"];
    if with_errors {
        header.push("error");
    }
    w.write_record(&header).map_err(csv_err)?;
    for (i, j, m, tau) in grid.cells() {
        let mase = grid.mase.as_ref().and_then(|g| g[i][j]);
        let mut record = vec![m.to_string(), tau.to_string(), fmt_opt(grid.spi[i][j]), fmt_opt(mase)];
        if with_errors {
            let here: Vec<&CellFailure> = grid.failures.iter().filter(|f| f.m == m && f.tau == tau).collect();
            record.push(failure_text(&here));
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_heatmap_csv(grid: &SweepGrid, path: impl AsRef<Path>) -> Result<()> {
    write_heatmap(grid, File::create(path)?)
}

/// Inverse of [`write_heatmap`]. `p` is not stored in the CSV.
pub fn read_heatmap<R: Read>(reader: R, p: usize) -> Result<SweepGrid> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut rows = Vec::new();
    let mut any_mase = false;
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = i + 2;
        let field = |k: usize| record.get(k).unwrap_or("");
        let m = parse_usize(field(0), line)?;
        let tau = parse_usize(field(1), line)?;
        let spi = parse_opt(field(2), line)?;
        let mase = parse_opt(field(3), line)?;
        any_mase |= mase.is_some();
        rows.push((m, tau, spi, mase, field(4).to_string()));
    }
    let mut m_values: Vec<usize> = Vec::new();
    let mut tau_values: Vec<usize> = Vec::new();
    for &(m, tau, ..) in &rows {
        if !m_values.contains(&m) {
            m_values.push(m);
        }
        if !tau_values.contains(&tau) {
            tau_values.push(tau);
        }
    }
    if rows.len() != m_values.len() * tau_values.len() || rows.is_empty() {
        return Err(Error::InvalidParameter("heatmap is not a full m x tau grid".into()));
    }
    let cols = tau_values.len();
    let mut spi = vec![vec![None; cols]; m_values.len()];
    let mut mase = vec![vec![None; cols]; m_values.len()];
    let mut failures = Vec::new();
    for (idx, (m, tau, s, e, error)) in rows.into_iter().enumerate() {
        let (i, j) = (idx / cols, idx % cols);
        spi[i][j] = s;
        mase[i][j] = e;
        for part in error.split("; ").filter(|t| !t.is_empty()) {
            let (quantity, text) = match part.split_once(": ") {
                Some(("mase", t)) => (Quantity::Mase, t),
                Some(("spi", t)) => (Quantity::Spi, t),
                _ => (Quantity::Spi, part),
            };
            failures.push(CellFailure {
                m,
                tau,
                quantity,
                error: text.to_string(),
            });
        }
    }
    let has_mase_failures = failures.iter().any(|f| f.quantity == Quantity::Mase);
    Ok(SweepGrid {
        m_values,
        tau_values,
        p,
        spi,
        mase: (any_mase || has_mase_failures).then_some(mase),
        failures,
    })
}

pub fn read_heatmap_csv(path: impl AsRef<Path>, p: usize) -> Result<SweepGrid> {
    read_heatmap(File::open(path)?, p)
}

/// A grid together with its extremes and the SPI selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDocument {
    #[serde(flatten)]
    pub grid: SweepGrid,
    pub spi_argmax: Option<Cell>,
    pub mase_argmin: Option<Cell>,
    pub selection: Option<Selection>,
    pub plateau_fraction: f64,
}

impl GridDocument {
    pub fn new(grid: SweepGrid, plateau_fraction: f64) -> Self {
        Self {
            spi_argmax: grid.spi_argmax(),
            mase_argmin: grid.mase_argmin(),
            selection: select_spi_optimal(&grid, plateau_fraction).ok(),
            plateau_fraction,
            grid,
        }
    }
}

impl From<SweepGrid> for GridDocument {
    fn from(grid: SweepGrid) -> Self {
        Self::new(grid, DEFAULT_PLATEAU_FRACTION)
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_json_file<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    write_json(value, File::create(path)?)
}

pub fn read_json_file<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let file = BufReader::new(File::open(path)?);
    serde_json::from_reader(file).map_err(|e| Error::Io(e.to_string()))
}

/// Long-form curve rows: `p,m,tau,length,spi,error`.
pub fn write_curve<W: Write>(points: &[CurvePoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["p", "m", "tau", "length", "spi", "error"])
        .map_err(csv_err)?;
    for pt in points {
        w.write_record([
            pt.p.to_string(),
            pt.m.to_string(),
            pt.tau.to_string(),
            pt.length.to_string(),
            fmt_opt(pt.spi),
            pt.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `index,prediction,truth`, with `index` the 0-based sample position.
pub fn write_forecast<W: Write>(first_index: usize, predictions: &[f64], truth: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["index", "prediction", "truth"]).map_err(csv_err)?;
    for (k, (p, t)) in predictions.iter().zip(truth).enumerate() {
        w.write_record([(first_index + k).to_string(), p.to_string(), t.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `(parameter, statistic)` pairs under the given column names.
pub fn write_diagnostic<W: Write>(names: [&str; 2], curve: &[(usize, f64)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(names).map_err(csv_err)?;
    for (param, stat) in curve {
        w.write_record([param.to_string(), stat.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
