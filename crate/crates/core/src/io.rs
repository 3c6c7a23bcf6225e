//! CSV and JSON artifacts. Floats are written in shortest round-trip form so
//! that identical runs produce identical bytes and readers recover exact values.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::dark::{ControlSchedule, SystemParams};
use crate::envelope::PulseEnvelope;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Column-oriented numeric table; `None` cells are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| Some(x)).collect());
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    }

    /// All values of a column; empty cells are an error.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r[j].ok_or_else(|| Error::Parse(format!("empty `{name}` in row {}", i + 1))))
            .collect()
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.map(|x| format!("{x}")).unwrap_or_default()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|cell| {
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::Parse(format!("row {}: bad number `{cell}`", i + 1)))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Table { headers, rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write(File::create(path).map_err(Error::file(path))?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(File::open(path).map_err(Error::file(path))?)
    }
}

/// Uniform grid from a time column (relative spacing error ≤ 1e-6).
pub fn grid_from_times(t: &[f64]) -> Result<TimeGrid> {
    if t.len() < TimeGrid::MIN_LEN {
        return Err(Error::Parse(format!("need at least {} samples", TimeGrid::MIN_LEN)));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    for (i, &ti) in t.iter().enumerate() {
        if (ti - (t[0] + i as f64 * dt)).abs() > 1e-6 * dt {
            return Err(Error::Parse(format!("non-uniform time column at row {}", i + 1)));
        }
    }
    TimeGrid::new(t[0], dt, t.len())
}

/// Envelope table `t,re,im`.
pub fn envelope_table(h: &PulseEnvelope) -> Table {
    let mut t = Table::new(&["t", "re", "im"]);
    for (ti, z) in h.grid().times().zip(h.samples()) {
        t.push_values(&[ti, z.re, z.im]);
    }
    t
}

/// Reads `t,re[,im]`; an absent `im` column means a real envelope.
pub fn envelope_from_table(table: &Table) -> Result<PulseEnvelope> {
    let grid = grid_from_times(&table.column("t")?)?;
    let re = table.column("re")?;
    let im = match table.column_index("im") {
        Ok(_) => table.column("im")?,
        Err(_) => vec![0.0; re.len()],
    };
    PulseEnvelope::new(grid, re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
}

pub fn read_envelope(path: &Path) -> Result<PulseEnvelope> {
    envelope_from_table(&Table::load(path)?)
}

/// Schedule table `t,cos_theta,omega`; omega is empty where cos θ = 1.
pub fn schedule_table(s: &ControlSchedule, params: &SystemParams) -> Table {
    let mut t = Table::new(&["t", "cos_theta", "omega"]);
    for ((ti, &c), w) in s.grid().times().zip(s.cos_theta()).zip(s.rabi(params)) {
        t.push(vec![Some(ti), Some(c), w]);
    }
    t
}

pub fn schedule_from_table(table: &Table) -> Result<ControlSchedule> {
    let grid = grid_from_times(&table.column("t")?)?;
    ControlSchedule::new(grid, table.column("cos_theta")?)
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path).map_err(Error::file(path))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}
