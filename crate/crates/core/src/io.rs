//! CSV interchange files.
//!
//! | file     | columns     |
//! |----------|-------------|
//! | signal   | `k,t,y`     |
//! | spikes   | `t,c`       |
//! | solution | `k,t,x_hat` |
//!
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! written and read back reproduces the values bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{SampleGrid, SampledSignal, SpikeTrain};

#[derive(Debug, Serialize, Deserialize)]
struct SignalRow {
    k: i64,
    t: f64,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpikeRow {
    t: f64,
    c: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SolutionRow {
    k: i64,
    t: f64,
    x_hat: f64,
}

pub fn write_signal<W: Write>(out: W, signal: &SampledSignal) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (i, &y) in signal.values.iter().enumerate() {
        w.serialize(SignalRow { k: signal.grid.k(i), t: signal.grid.t(i), y })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a signal and reconstructs its grid. The grid density is taken from
/// the first two rows (`N = (k₁ − k₀)/(t₁ − t₀)`), or from `n_grid` when
/// given; `k` must be consecutive.
pub fn read_signal<R: Read>(input: R, n_grid: Option<u32>) -> Result<SampledSignal> {
    let rows: Vec<SignalRow> = csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(Error::InvalidArgument("signal file has no rows".into()));
    }
    if let Some(i) = rows.windows(2).position(|w| w[1].k != w[0].k + 1) {
        return Err(Error::InvalidArgument(format!("sample indices not consecutive at row {}", i + 2)));
    }
    let n = match n_grid {
        Some(n) => n,
        None if rows.len() >= 2 => {
            let est = 1.0 / (rows[1].t - rows[0].t);
            if !(est.is_finite() && est > 0.0) {
                return Err(Error::InvalidArgument("cannot infer grid density from t column".into()));
            }
            est.round() as u32
        }
        None => return Err(Error::InvalidArgument("single-row signal needs an explicit grid density".into())),
    };
    let (k0, k1) = (rows[0].k, rows[rows.len() - 1].k);
    let grid = SampleGrid::new(n, k0 as f64 / n as f64, k1 as f64 / n as f64)?;
    if grid.len() != rows.len() || grid.k(0) != k0 {
        return Err(Error::InvalidArgument(format!("rows do not match a grid of density {n}")));
    }
    for (i, r) in rows.iter().enumerate() {
        if (grid.t(i) - r.t).abs() > 1e-9 * (1.0 + r.t.abs()) {
            return Err(Error::InvalidArgument(format!("row {}: t = {} but k/N = {}", i + 1, r.t, grid.t(i))));
        }
    }
    SampledSignal::new(grid, rows.into_iter().map(|r| r.y).collect())
}

pub fn write_spikes<W: Write>(out: W, spikes: &SpikeTrain) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (&t, &c) in spikes.positions().iter().zip(spikes.amplitudes()) {
        w.serialize(SpikeRow { t, c })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spikes<R: Read>(input: R) -> Result<SpikeTrain> {
    let rows: Vec<SpikeRow> = csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?;
    SpikeTrain::from_pairs(rows.into_iter().map(|r| (r.t, r.c)).collect())
}

pub fn write_solution<W: Write>(out: W, grid: &SampleGrid, x_hat: &[f64]) -> Result<()> {
    if x_hat.len() != grid.len() {
        return Err(Error::Shape(format!("{} entries for a {}-point grid", x_hat.len(), grid.len())));
    }
    let mut w = csv::Writer::from_writer(out);
    for (i, &x) in x_hat.iter().enumerate() {
        w.serialize(SolutionRow { k: grid.k(i), t: grid.t(i), x_hat: x })?;
    }
    w.flush()?;
    Ok(())
}

/// Integral values print without a fraction; other values use the shortest
/// round-trip form, switching to exponent notation for extreme magnitudes.
fn fmt_cell(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Writes a header row and data rows of floats.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (i, r) in rows.iter().enumerate() {
        if r.len() != header.len() {
            return Err(Error::Shape(format!("row {i} has {} fields, header has {}", r.len(), header.len())));
        }
        w.write_record(r.iter().map(|&v| fmt_cell(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a header and float rows written by [`write_table`].
pub fn read_table<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad number {f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::signal::sample_signal;

    #[test]
    fn signal_round_trip() {
        let grid = SampleGrid::new(100, -1.0, 1.0).unwrap();
        let spikes = SpikeTrain::new(vec![-0.3, 0.41], vec![1.5, -0.7]).unwrap();
        let y = sample_signal(&KernelSpec::gaussian(), 0.1, &spikes, &grid).unwrap();
        let mut buf = Vec::new();
        write_signal(&mut buf, &y).unwrap();
        assert!(buf.starts_with(b"k,t,y\n-100,-1.0,"), "{}", String::from_utf8_lossy(&buf[..40]));
        let back = read_signal(buf.as_slice(), None).unwrap();
        assert_eq!(back, y);
    }

    #[test]
    fn spikes_and_solution() {
        let s = SpikeTrain::new(vec![-0.5, 0.1], vec![-1.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        write_spikes(&mut buf, &s).unwrap();
        assert_eq!(std::str::from_utf8(&buf).unwrap(), "t,c\n-0.5,-1.0\n0.1,2.0\n");
        assert_eq!(read_spikes(buf.as_slice()).unwrap(), s);

        let grid = SampleGrid::new(2, 0.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_solution(&mut buf, &grid, &[0.0, 1.5, -2.0]).unwrap();
        assert_eq!(std::str::from_utf8(&buf).unwrap(), "k,t,x_hat\n0,0.0,0.0\n1,0.5,1.5\n2,1.0,-2.0\n");
        assert!(write_solution(Vec::new(), &grid, &[0.0]).is_err());
    }

    #[test]
    fn rejects_gaps() {
        let text = "k,t,y\n0,0,1\n2,0.02,1\n";
        assert!(read_signal(text.as_bytes(), None).is_err());
        let text = "k,t,y\n0,0,1\n1,0.5,1\n";
        assert!(read_signal(text.as_bytes(), Some(100)).is_err());
    }

    #[test]
    fn table_round_trip() {
        let mut buf = Vec::new();
        write_table(&mut buf, &["a", "b"], &[vec![0.1, 1e-300], vec![f64::INFINITY, -3.0]]).unwrap();
        assert_eq!(std::str::from_utf8(&buf).unwrap(), "a,b\n0.1,1e-300\ninf,-3\n");
        let (h, rows) = read_table(buf.as_slice()).unwrap();
        assert_eq!(h, ["a", "b"]);
        assert_eq!(rows, [vec![0.1, 1e-300], vec![f64::INFINITY, -3.0]]);
    }
}
