//! Sampled time series and their CSV form.
//!
//! CSV layout: header `t_ps,<name>,…`, comma separated, LF line endings,
//! every value written with 17 significant digits so that reading the file
//! back reproduces the in-memory values bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// ps
    times: Vec<f64>,
    names: Vec<String>,
    /// Column-major values, one vector per name.
    columns: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        let columns = vec![Vec::new(); names.len()];
        TimeSeries {
            times: Vec::new(),
            names,
            columns,
        }
    }

    pub fn push(&mut self, t: f64, row: &[f64]) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::DimensionMismatch(format!(
                "row of {} values for {} columns",
                row.len(),
                self.names.len()
            )));
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidParameter(format!(
                    "times must increase strictly ({t} after {last})"
                )));
            }
        }
        self.times.push(t);
        for (col, &v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.columns.iter().map(Vec::as_slice))
    }

    /// Append the columns of `other`, which must share the time grid.
    pub fn merge(&mut self, other: TimeSeries) -> Result<()> {
        if self.times != other.times {
            return Err(Error::DimensionMismatch("time grids differ".into()));
        }
        for name in &other.names {
            if self.names.contains(name) {
                return Err(Error::InvalidParameter(format!("duplicate column `{name}`")));
            }
        }
        self.names.extend(other.names);
        self.columns.extend(other.columns);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let mut header = vec!["t_ps".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.names.len() + 1);
        for (i, t) in self.times.iter().enumerate() {
            record.clear();
            record.push(format_value(*t));
            record.extend(self.columns.iter().map(|c| format_value(c[i])));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0) != Some("t_ps") {
            return Err(Error::InvalidParameter("first CSV column must be `t_ps`".into()));
        }
        let mut series = TimeSeries::new(header.iter().skip(1).map(str::to_string).collect());
        let mut row = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            row.clear();
            for field in rec.iter() {
                row.push(field.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("line {}: bad number `{field}`", line + 2))
                })?);
            }
            let (t, values) = row.split_first().ok_or_else(|| {
                Error::InvalidParameter(format!("line {}: empty record", line + 2))
            })?;
            series.push(*t, values)?;
        }
        Ok(series)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}
