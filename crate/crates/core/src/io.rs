//! CSV ingestion with regressor lags, and the fixed-precision CSV writer used for
//! every run-directory table.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::difference;

/// Response, regressors and a record of every transformation applied on the way in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    /// Labels from a `time` column when present, else integer ticks.
    pub time_index: Vec<String>,
    pub y: Vec<f64>,
    /// One column per regressor.
    pub x: Vec<Vec<f64>>,
    pub y_name: String,
    pub x_names: Vec<String>,
    pub transform_log: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Splits off the last `n` rows; returns `(head, tail)`.
    pub fn split_tail(&self, n: usize) -> Result<(Dataset, Dataset)> {
        if n >= self.len() {
            return Err(Error::domain(format!("cannot hold out {n} of {} rows", self.len())));
        }
        let cut = self.len() - n;
        let part = |from: usize, to: usize, note: String| {
            let mut log = self.transform_log.clone();
            log.push(note);
            Dataset {
                time_index: self.time_index[from..to].to_vec(),
                y: self.y[from..to].to_vec(),
                x: self.x.iter().map(|c| c[from..to].to_vec()).collect(),
                y_name: self.y_name.clone(),
                x_names: self.x_names.clone(),
                transform_log: log,
            }
        };
        Ok((
            part(0, cut, format!("rows 1..={cut} kept for estimation")),
            part(cut, self.len(), format!("rows {}..={} held out", cut + 1, self.len())),
        ))
    }

    /// Applies `(1 - B)^d (1 - B^s)^D` to the response and every regressor.
    pub fn difference(&self, d_int: usize, seasonal_d: usize, period: usize) -> Result<Dataset> {
        if d_int == 0 && seasonal_d == 0 {
            return Ok(self.clone());
        }
        let lost = d_int + seasonal_d * period;
        let mut log = self.transform_log.clone();
        log.push(format!("differenced: d={d_int}, D={seasonal_d}, s={period}"));
        Ok(Dataset {
            time_index: self.time_index.get(lost..).unwrap_or_default().to_vec(),
            y: difference(&self.y, d_int, seasonal_d, period)?,
            x: self.x.iter().map(|c| difference(c, d_int, seasonal_d, period)).collect::<Result<_>>()?,
            y_name: self.y_name.clone(),
            x_names: self.x_names.clone(),
            transform_log: log,
        })
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, message: message.into() }
}

/// Reads a headered CSV. Regressor `k` enters as `x_k(t - lags[k])`; the first
/// `max(lags)` rows are dropped so every column stays aligned.
///
/// Row numbers in errors count data rows from 1; the reported line includes the header.
pub fn load_csv(path: &Path, y_column: &str, x_columns: &[String], lags: &BTreeMap<String, usize>) -> Result<Dataset> {
    for name in lags.keys() {
        if !x_columns.contains(name) {
            return Err(Error::Config(format!("lag given for `{name}`, which is not a regressor")));
        }
    }
    let file = File::open(path).map_err(|e| parse_error(path, 0, format!("cannot open: {e}")))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).trim(csv::Trim::All).from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_error(path, 1, format!("missing column `{name}` (have: {})", headers.join(", "))))
    };
    let y_idx = find(y_column)?;
    let x_idx: Vec<usize> = x_columns.iter().map(|c| find(c)).collect::<Result<_>>()?;
    let time_idx = headers.iter().position(|h| h == "time");

    let mut y = Vec::new();
    let mut x: Vec<Vec<f64>> = vec![Vec::new(); x_columns.len()];
    let mut time = Vec::new();
    let mut problems = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| parse_error(path, row + 1, format!("row {row}: {e}")))?;
        let mut cell = |idx: usize, name: &str| -> f64 {
            let raw = &record[idx];
            if raw.is_empty() {
                problems.push(format!("row {row} (line {}): blank cell in `{name}`", row + 1));
                return f64::NAN;
            }
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => {
                    problems.push(format!("row {row} (line {}): `{name}` value {raw:?} is not a finite number", row + 1));
                    f64::NAN
                }
            }
        };
        y.push(cell(y_idx, y_column));
        for (k, &idx) in x_idx.iter().enumerate() {
            let v = cell(idx, &x_columns[k]);
            x[k].push(v);
        }
        time.push(time_idx.map_or_else(|| (row - 1).to_string(), |t| record[t].to_string()));
    }
    if !problems.is_empty() {
        let first_line = problems[0]
            .split("(line ")
            .nth(1)
            .and_then(|s| s.split(')').next())
            .and_then(|s| s.parse().ok())
            .unwrap_or(0);
        let shown: Vec<&str> = problems.iter().take(20).map(String::as_str).collect();
        let more = problems.len().saturating_sub(shown.len());
        let tail = if more > 0 { format!("; and {more} more") } else { String::new() };
        return Err(parse_error(path, first_line, format!("{}{tail}", shown.join("; "))));
    }

    let max_lag = x_columns.iter().map(|c| lags.get(c).copied().unwrap_or(0)).max().unwrap_or(0);
    if y.len() <= max_lag {
        return Err(parse_error(path, 0, format!("{} rows cannot support a lag of {max_lag}", y.len())));
    }
    let n = y.len();
    let mut transform_log = vec![format!("loaded {n} rows from {}", path.display())];
    let x_aligned: Vec<Vec<f64>> = x
        .iter()
        .zip(x_columns)
        .map(|(col, name)| {
            let lag = lags.get(name).copied().unwrap_or(0);
            if lag > 0 {
                transform_log.push(format!("{name} lagged by {lag}"));
            }
            col[max_lag - lag..n - lag].to_vec()
        })
        .collect();
    if max_lag > 0 {
        transform_log.push(format!("first {max_lag} rows dropped to align lags"));
    }
    Ok(Dataset {
        time_index: time[max_lag..].to_vec(),
        y: y[max_lag..].to_vec(),
        x: x_aligned,
        y_name: y_column.to_string(),
        x_names: x_columns.to_vec(),
        transform_log,
    })
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Writes a numeric table; every value is printed with [`fmt_f64`].
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::domain(format!("row of {} values for {} columns", row.len(), header.len())));
        }
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `data.csv`-style output: a `time` column, the response and the regressors.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["time".to_string(), data.y_name.clone()];
    header.extend(data.x_names.iter().cloned());
    w.write_record(&header)?;
    for t in 0..data.len() {
        let mut rec = vec![data.time_index[t].clone(), fmt_f64(data.y[t])];
        rec.extend(data.x.iter().map(|c| fmt_f64(c[t])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every column of a numeric table written by [`write_table`].
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .zip(&header)
            .map(|(v, name)| {
                v.parse::<f64>()
                    .map_err(|_| parse_error(path, i + 2, format!("row {}: `{name}` value {v:?} is not a number", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn cols(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn loads_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "y,x1\n1,10\n2,20\n3,30\n");
        let d = load_csv(&p, "y", &cols(&["x1"]), &BTreeMap::new()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.x[0], vec![10.0, 20.0, 30.0]);
        assert_eq!(d.time_index, cols(&["0", "1", "2"]));
    }

    #[test]
    fn lag_shifts_and_truncates() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "time,y,x1,x2\na,1,10,100\nb,2,20,200\nc,3,30,300\n");
        let lags = BTreeMap::from([("x1".to_string(), 1)]);
        let d = load_csv(&p, "y", &cols(&["x1", "x2"]), &lags).unwrap();
        assert_eq!(d.y, vec![2.0, 3.0]);
        assert_eq!(d.x[0], vec![10.0, 20.0]);
        assert_eq!(d.x[1], vec![200.0, 300.0]);
        assert_eq!(d.time_index, cols(&["b", "c"]));
    }

    #[test]
    fn blank_cell_names_its_row() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("y,x1\n");
        for i in 1..=20 {
            if i == 17 {
                text.push_str("5,\n");
            } else {
                text.push_str(&format!("{i},{i}\n"));
            }
        }
        let p = write(dir.path(), "a.csv", &text);
        let err = load_csv(&p, "y", &cols(&["x1"]), &BTreeMap::new()).unwrap_err().to_string();
        assert!(err.contains("row 17"), "{err}");
        assert!(!err.contains("row 16"), "{err}");
    }

    #[test]
    fn descriptive_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "y,x1\n1,2\n");
        let err = load_csv(&p, "y", &cols(&["x9"]), &BTreeMap::new()).unwrap_err().to_string();
        assert!(err.contains("missing column `x9`"), "{err}");
        let p = write(dir.path(), "b.csv", "y,x1\n1,2\n3\n");
        assert!(load_csv(&p, "y", &cols(&["x1"]), &BTreeMap::new()).is_err());
        let p = write(dir.path(), "c.csv", "y,x1\n1,2\nabc,3\n");
        let err = load_csv(&p, "y", &cols(&["x1"]), &BTreeMap::new()).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("abc"), "{err}");
        let p = write(dir.path(), "d.csv", "y,x1\n1,2\nNaN,3\n");
        assert!(load_csv(&p, "y", &cols(&["x1"]), &BTreeMap::new()).is_err());
    }

    #[test]
    fn written_tables_reload_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let rows = vec![vec![0.1, 1.0 / 3.0], vec![-2.5e-300, std::f64::consts::PI]];
        write_table(&p, &cols(&["a", "b"]), &rows).unwrap();
        let (h, back) = read_table(&p).unwrap();
        assert_eq!(h, cols(&["a", "b"]));
        assert_eq!(back, rows);
        let d = load_csv(&p, "a", &cols(&["b"]), &BTreeMap::new()).unwrap();
        assert_eq!(d.y, vec![0.1, -2.5e-300]);
    }

    #[test]
    fn dataset_round_trip_and_split() {
        let dir = tempfile::tempdir().unwrap();
        let d = Dataset {
            time_index: cols(&["0", "1", "2", "3"]),
            y: vec![1.0, 2.5, 3.0, 4.0],
            x: vec![vec![0.1, 0.2, 0.3, 0.4]],
            y_name: "y".into(),
            x_names: cols(&["x1"]),
            transform_log: vec![],
        };
        let p = dir.path().join("data.csv");
        write_dataset(&p, &d).unwrap();
        let back = load_csv(&p, "y", &cols(&["x1"]), &BTreeMap::new()).unwrap();
        assert_eq!((back.y.clone(), back.x.clone()), (d.y.clone(), d.x.clone()));
        let (head, tail) = d.split_tail(1).unwrap();
        assert_eq!((head.len(), tail.y.clone()), (3, vec![4.0]));
        let diffed = d.difference(1, 0, 1).unwrap();
        assert_eq!(diffed.y, vec![1.5, 0.5, 1.0]);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
