//! CSV and JSON emission, and the dataset CSV format.
//!
//! Datasets carry a header `x1,…,xn,f`. Every CSV written here has a header
//! row and uses `.` as decimal separator.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::bench::{BenchmarkReport, PredictionMap};
use crate::error::{Error, Result};
use crate::spectrum::{HarmonicTerm, NumericSpectrum};
use crate::trainer::{Dataset, TrainResult};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Dataset(format!("{}: {e}", path.display()))
}

/// Parses a dataset; errors name the offending row (1-based, header excluded).
pub fn parse_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Dataset(format!("header: {e}")))?.clone();
    let n = header.len().saturating_sub(1);
    let expected: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain(["f".to_string()]).collect();
    if n == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Dataset(format!(
            "header must be x1,…,xn,f; found {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let row = row + 1;
        let record = record.map_err(|e| Error::Dataset(format!("row {row}: {e}")))?;
        let values: Vec<f64> = record
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| Error::Dataset(format!("row {row}: cannot parse {v:?}"))))
            .collect::<Result<_>>()?;
        let x = values[..n].to_vec();
        if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Dataset(format!("row {row}: input {v} outside [0, 1]")));
        }
        if !values[n].is_finite() {
            return Err(Error::Dataset(format!("row {row}: non-finite target")));
        }
        inputs.push(x);
        targets.push(values[n]);
    }
    Dataset::new(inputs, targets)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    parse_dataset(file)
}

/// Header row plus string rows.
pub fn write_rows<W: Write>(writer: W, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn axis_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn write_dataset<W: Write>(writer: W, data: &Dataset) -> std::io::Result<()> {
    let mut header = axis_names("x", data.dim());
    header.push("f".into());
    let rows = data.iter().map(|(x, f)| x.iter().chain([&f]).map(f64::to_string).collect());
    write_rows(writer, &header, rows)
}

/// One row per sign sequence: sequence, frequency vector, coefficient, `|c|`.
pub fn write_harmonics<W: Write>(writer: W, terms: &[HarmonicTerm]) -> std::io::Result<()> {
    let n = terms.first().map_or(0, |t| t.frequency.len());
    let mut header = strings(&["index", "sequence"]);
    header.extend(axis_names("omega", n));
    header.extend(strings(&["re", "im", "abs"]));
    let rows = terms.iter().map(|t| {
        let mut row = vec![t.sequence.index().to_string(), t.sequence.to_string()];
        row.extend(t.frequency.iter().map(f64::to_string));
        row.extend([t.coefficient.re, t.coefficient.im, t.coefficient.norm()].map(|v| v.to_string()));
        row
    });
    write_rows(writer, &header, rows)
}

/// Every DFT bin with its integer frequency and amplitude.
pub fn write_amplitudes<W: Write>(writer: W, spectrum: &NumericSpectrum) -> std::io::Result<()> {
    let mut header = axis_names("k", spectrum.samples.len());
    header.push("amplitude".into());
    let rows = spectrum.amplitudes.iter().map(|(k, a)| {
        let mut row: Vec<String> = k.iter().map(i64::to_string).collect();
        row.push(a.to_string());
        row
    });
    write_rows(writer, &header, rows)
}

/// Cost after every accepted step, one row per (restart, step).
pub fn write_history<W: Write>(writer: W, result: &TrainResult) -> std::io::Result<()> {
    let rows = result.restarts.iter().flat_map(|r| {
        r.history.iter().enumerate().map(move |(i, c)| vec![r.index.to_string(), i.to_string(), c.to_string()])
    });
    write_rows(writer, &strings(&["restart", "step", "cost"]), rows)
}

/// Trial rows followed by one aggregate row per student (`kind` column tells them apart).
pub fn write_benchmark<W: Write>(writer: W, report: &BenchmarkReport) -> std::io::Result<()> {
    let header = strings(&[
        "kind", "student", "label", "realization", "restart", "cost", "mean_cost", "std_cost",
        "all_trials_mean", "all_trials_std", "excluded",
    ]);
    let trials = report.trials.iter().map(|t| {
        vec![
            "trial".into(),
            t.student.to_string(),
            t.label.clone(),
            t.realization.to_string(),
            t.restart.to_string(),
            t.cost.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]
    });
    let aggregates = report.aggregates.iter().map(|a| {
        vec![
            "aggregate".into(),
            a.student.to_string(),
            a.label.clone(),
            String::new(),
            String::new(),
            a.min_cost.to_string(),
            a.mean_cost.to_string(),
            a.std_cost.to_string(),
            a.all_trials_mean.to_string(),
            a.all_trials_std.to_string(),
            a.excluded.to_string(),
        ]
    });
    write_rows(writer, &header, trials.chain(aggregates))
}

/// `L` against `C̄` and `ΔC`, one row per student.
pub fn write_depth_table<W: Write>(writer: W, report: &BenchmarkReport) -> std::io::Result<()> {
    let header = strings(&["label", "layers", "qubits", "entangling", "mean_cost", "std_cost"]);
    let rows = report.aggregates.iter().map(|a| {
        vec![
            a.label.clone(),
            a.layers.to_string(),
            a.qubits.to_string(),
            a.entangling.to_string(),
            a.mean_cost.to_string(),
            a.std_cost.to_string(),
        ]
    });
    write_rows(writer, &header, rows)
}

pub fn write_prediction_map<W: Write>(writer: W, map: &PredictionMap) -> std::io::Result<()> {
    let n = map.points.first().map_or(0, Vec::len);
    let mut header = axis_names("x", n);
    header.push("F".into());
    if map.residual.is_some() {
        header.push("residual".into());
    }
    let rows = map.points.iter().enumerate().map(|(i, p)| {
        let mut row: Vec<String> = p.iter().map(f64::to_string).collect();
        row.push(map.values[i].to_string());
        if let Some(r) = &map.residual {
            row.push(r[i].to_string());
        }
        row
    });
    write_rows(writer, &header, rows)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut writer: W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")
}

/// Runs `emit` against a buffered file at `path`.
pub fn to_file(path: &Path, emit: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> std::io::Result<()> {
    let mut w = create(path)?;
    emit(&mut w)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_round_trip() {
        let data = Dataset::new(vec![vec![0.25, 1.0], vec![0.0, 0.125]], vec![0.5, 1.75]).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &data).unwrap();
        assert!(buf.starts_with(b"x1,x2,f\n"));
        assert_eq!(parse_dataset(buf.as_slice()).unwrap(), data);
    }

    #[test]
    fn dataset_errors_name_rows() {
        let bad = "x1,f\n0.5,1\n0.2,oops\n";
        assert!(parse_dataset(bad.as_bytes()).unwrap_err().to_string().contains("row 2"));
        let short = "x1,x2,f\n0.5,0.1,1\n0.5,1\n";
        assert!(parse_dataset(short.as_bytes()).unwrap_err().to_string().contains("row 2"));
        let range = "x1,f\n1.5,1\n";
        assert!(parse_dataset(range.as_bytes()).unwrap_err().to_string().contains("row 1"));
        assert!(parse_dataset("a,b\n0.1,0.2\n".as_bytes()).is_err());
        assert!(parse_dataset("x1,f\n".as_bytes()).is_err());
    }
}
