//! Binary snapshots and CSV output.
//!
//! Snapshot layout, all little-endian:
//!
//! ```text
//! "PFTG"  version:u16  dim:u16  nx:u32  ny:u32  hx:f64  hy:f64  t:f64  eps:f64
//! phi[nx*ny]:f64  sigma[nx*ny]:f64  mu[nx*ny]:f64      (row-major, x fastest)
//! ```

use crate::diagnostics::DiagnosticsTrace;
use crate::grid::{Field, Grid};
use crate::model::GlobalTimeCheck;
use crate::solver::State;
use crate::sweep::SweepReport;
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"PFTG";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 48;

/// Trace CSV header.
pub const TRACE_COLUMNS: [&str; 14] = [
    "t",
    "E",
    "half_sigma_l2",
    "mass_phi",
    "mass_sigma",
    "mass_sum",
    "diss_mu",
    "diss_sigma",
    "diss_source",
    "eb_residual",
    "disc_pos",
    "mu_avg",
    "mu_bound_rhs",
    "qc_measure",
];

pub const SWEEP_COLUMNS: [&str; 23] = [
    "epsilon",
    "nx",
    "ny",
    "dt",
    "steps",
    "initial_energy",
    "final_energy",
    "w_distance",
    "gibbs_thomson",
    "interface_length",
    "energy_perimeter_ratio",
    "max_disc_ratio",
    "max_eb_residual",
    "mass_drift",
    "max_abs_phi_avg",
    "sigma_min",
    "sigma_max",
    "well_bound_ratio",
    "critical_time",
    "holder_chi",
    "holder_phi",
    "global_time",
    "mass_bound",
];

/// A state together with the interface width it was computed at.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub epsilon: f64,
    pub state: State,
}

pub fn write_snapshot<W: Write>(mut w: W, state: &State, epsilon: f64) -> Result<()> {
    let g = state.phi.grid();
    let mut buf = Vec::with_capacity(HEADER_BYTES + 24 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.dim() as u16).to_le_bytes());
    buf.extend_from_slice(&(g.nx() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.ny() as u32).to_le_bytes());
    for x in [g.hx(), g.hy(), state.t, epsilon] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for f in [&state.phi, &state.sigma, &state.mu] {
        for x in f.values() {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Format(format!("snapshot has {} bytes, header needs {HEADER_BYTES}", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, not a snapshot file".into()));
    }
    let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u16_at(4);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let (dim, nx, ny) = (u16_at(6) as usize, u32_at(8) as usize, u32_at(12) as usize);
    let (hx, hy, t, epsilon) = (f64_at(16), f64_at(24), f64_at(32), f64_at(40));
    let grid = Grid::from_spacing(dim, nx, ny, hx, hy).map_err(|e| Error::Format(format!("bad grid header: {e}")))?;
    let n = grid.len();
    let expected = HEADER_BYTES + 24 * n;
    if bytes.len() != expected {
        return Err(Error::Format(format!("snapshot has {} bytes, expected {expected}", bytes.len())));
    }
    let block = |k: usize| -> Result<Field> {
        let start = HEADER_BYTES + 8 * n * k;
        let v = (0..n).map(|i| f64_at(start + 8 * i)).collect();
        Field::new(grid, v)
    };
    Ok(Snapshot {
        epsilon,
        state: State {
            t,
            phi: block(0)?,
            sigma: block(1)?,
            mu: block(2)?,
        },
    })
}

pub fn save_snapshot(path: impl AsRef<Path>, state: &State, epsilon: f64) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), state, epsilon)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    read_snapshot(BufReader::new(File::open(path)?))
}

/// Formats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn trace_row(tr: &DiagnosticsTrace, i: usize) -> [f64; 14] {
    [
        tr.times[i],
        tr.energy[i],
        tr.sigma_l2_half[i],
        tr.mass_phi[i],
        tr.mass_sigma[i],
        tr.mass_sum[i],
        tr.diss_mu[i],
        tr.diss_sigma[i],
        tr.diss_source[i],
        tr.balance_residual[i],
        tr.discrepancy_pos[i],
        tr.mu_avg[i],
        tr.mu_avg_bound_rhs[i],
        tr.qc_measure[i],
    ]
}

/// Appends trace rows one at a time, flushing after each so an
/// interrupted run leaves a readable prefix.
pub struct TraceCsvWriter<W: Write> {
    out: W,
    written: usize,
}

impl<W: Write> TraceCsvWriter<W> {
    pub fn new(mut out: W) -> Result<Self> {
        writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
        out.flush()?;
        Ok(Self { out, written: 0 })
    }

    /// Writes every row of `trace` not written yet.
    pub fn sync(&mut self, trace: &DiagnosticsTrace) -> Result<()> {
        while self.written < trace.len() {
            let row = trace_row(trace, self.written);
            let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            writeln!(self.out, "{}", line.join(","))?;
            self.written += 1;
        }
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn write_trace_csv<W: Write>(out: W, trace: &DiagnosticsTrace) -> Result<()> {
    TraceCsvWriter::new(out)?.sync(trace)
}

/// Parses a numeric CSV with a header row; a trailing partial line is
/// dropped.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let complete = if text.ends_with('\n') { usize::MAX } else { text.lines().count() - 1 };
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if k + 1 >= complete {
            break;
        }
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| Error::Format(format!("line {}: {e}", k + 2)))?;
        if row.len() != header.len() {
            return Err(Error::Format(format!(
                "line {} has {} fields, header has {}",
                k + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(mut out: W, report: &SweepReport) -> Result<()> {
    writeln!(out, "{}", SWEEP_COLUMNS.join(","))?;
    for r in report.rows() {
        let global = match r.global_time {
            Some(GlobalTimeCheck::Ass1Holds) => "ass1",
            Some(GlobalTimeCheck::Ass2Holds) => "ass2",
            Some(GlobalTimeCheck::NeitherHolds) => "neither",
            None => "",
        };
        let fields = [
            fmt_f64(r.epsilon),
            r.nx.to_string(),
            r.ny.to_string(),
            fmt_f64(r.dt),
            r.steps.to_string(),
            fmt_f64(r.initial_energy),
            fmt_f64(r.final_energy),
            fmt_f64(r.w_distance),
            opt(r.gibbs_thomson),
            opt(r.interface_length),
            opt(r.energy_perimeter_ratio),
            fmt_f64(r.max_discrepancy_ratio),
            fmt_f64(r.max_balance_residual),
            fmt_f64(r.mass_drift),
            fmt_f64(r.max_abs_phi_average),
            fmt_f64(r.sigma_min),
            fmt_f64(r.sigma_max),
            fmt_f64(r.well_bound_ratio),
            fmt_f64(r.critical_time),
            fmt_f64(r.holder_chi),
            fmt_f64(r.holder_phi),
            global.to_owned(),
            opt(r.mass_bound),
        ];
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_state() -> State {
        let g = Grid::new_2d(5, 4, 1.0, 0.7).unwrap();
        State {
            t: 0.123_456_789,
            phi: Field::from_fn(g, |x, y| (7.0 * x + y).sin()),
            sigma: Field::from_fn(g, |x, y| x * y + 1e-300),
            mu: Field::from_fn(g, |x, _| -x / 3.0),
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let st = sample_state();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &st, 0.04).unwrap();
        assert_eq!(buf.len(), HEADER_BYTES + 24 * 20);
        assert_eq!(&buf[..4], b"PFTG");
        let back = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back.epsilon, 0.04);
        assert_eq!(back.state, st);
        let mut again = Vec::new();
        write_snapshot(&mut again, &back.state, back.epsilon).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn snapshot_rejects_corruption() {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &sample_state(), 0.04).unwrap();
        assert!(read_snapshot(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_snapshot(bad.as_slice()), Err(Error::Format(_))));
        let mut v2 = buf;
        v2[4] = 2;
        assert!(read_snapshot(v2.as_slice()).is_err());
    }

    #[test]
    fn trace_csv_round_trip_and_prefix() {
        let mut tr = DiagnosticsTrace::default();
        for i in 0..3 {
            let x = 0.1 + i as f64 / 3.0;
            for col in [
                &mut tr.times,
                &mut tr.energy,
                &mut tr.sigma_l2_half,
                &mut tr.mass_phi,
                &mut tr.mass_sigma,
                &mut tr.mass_sum,
                &mut tr.diss_mu,
                &mut tr.diss_sigma,
                &mut tr.diss_source,
                &mut tr.balance_residual,
                &mut tr.discrepancy_pos,
                &mut tr.mu_avg,
                &mut tr.mu_avg_bound_rhs,
                &mut tr.qc_measure,
            ] {
                col.push(x);
            }
        }
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,E,half_sigma_l2,mass_phi,mass_sigma,mass_sum,diss_mu,diss_sigma,diss_source,eb_residual,disc_pos,mu_avg,mu_bound_rhs,qc_measure\n"));
        let (header, rows) = read_csv(&text).unwrap();
        assert_eq!(header.len(), 14);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2][0], tr.times[2]);
        // a run killed mid-line
        let cut = &text[..text.len() - 10];
        let (_, prefix) = read_csv(cut).unwrap();
        assert_eq!(prefix.len(), 2);
    }

    #[test]
    fn seventeen_digits() {
        let x = 0.1f64 + 0.2;
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(s.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }
}
