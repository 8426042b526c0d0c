//! File formats: numeric CSV with 17 significant digits, pulse-matrix CSV,
//! impulse-response CSV with a JSON sidecar, and a binary wave packet format
//! (one JSON header line followed by little-endian `(re, im)` f64 pairs).

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::json::{matrix_to_json, JsonMatrix};
use crate::lin_sys::{ImpulseResponse, Support};
use crate::linalg::C64;
use crate::tensor_alg::{RaggedPulseMatrix, WavepacketTensor};

/// Round-trip float formatting used in every CSV file.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn format_csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    fs::write(path, format_csv(header, rows))?;
    Ok(())
}

/// Read a numeric CSV with one header line.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header: Vec<String> = match lines.next() {
        Some(h) => h?.split(',').map(|s| s.trim().to_string()).collect(),
        None => return Err(Error::Parse(format!("{}: empty file", path.display()))),
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("{}:{}: {:?}: {}", path.display(), i + 2, s.trim(), e))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!(
                "{}:{}: {} columns, header has {}",
                path.display(),
                i + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

fn check_times(path: &Path, rows: &[Vec<f64>], grid: &TimeGrid) -> Result<()> {
    if rows.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{}: {} rows, grid has {} points",
            path.display(),
            rows.len(),
            grid.len()
        )));
    }
    let tol = 1e-9 * grid.dt();
    for (i, row) in rows.iter().enumerate() {
        if (row[0] - grid.time(i)).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "{}: row {} has t = {}, grid expects {}",
                path.display(),
                i + 2,
                row[0],
                grid.time(i)
            )));
        }
    }
    Ok(())
}

/// Pulse file with columns `t, re, im`.
pub fn read_pulse_csv(path: &Path, grid: &TimeGrid) -> Result<Vec<C64>> {
    let (header, rows) = read_csv(path)?;
    if header.len() != 3 {
        return Err(Error::Parse(format!("{}: expected columns t,re,im", path.display())));
    }
    check_times(path, &rows, grid)?;
    Ok(rows.iter().map(|r| C64::new(r[1], r[2])).collect())
}

pub fn write_pulse_csv(path: &Path, grid: &TimeGrid, pulse: &[C64]) -> Result<()> {
    let header = vec!["t".to_string(), "re".to_string(), "im".to_string()];
    let rows: Vec<Vec<f64>> = pulse
        .iter()
        .enumerate()
        .map(|(i, z)| vec![grid.time(i), z.re, z.im])
        .collect();
    write_csv(path, &header, &rows)
}

/// Pulse matrix as CSV: `t`, then `re_j_k, im_j_k` for every pulse (0-based labels).
pub fn ragged_to_csv(xi: &RaggedPulseMatrix) -> String {
    let mut header = vec!["t".to_string()];
    let mut labels = Vec::new();
    for j in 0..xi.m() {
        for k in 0..xi.ells()[j] {
            header.push(format!("re_{}_{}", j, k));
            header.push(format!("im_{}_{}", j, k));
            labels.push((j, k));
        }
    }
    let grid = xi.grid();
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|t| {
            let mut row = vec![grid.time(t)];
            for &(j, k) in &labels {
                let z = xi.pulse(j, k)[t];
                row.push(z.re);
                row.push(z.im);
            }
            row
        })
        .collect();
    format_csv(&header, &rows)
}

pub fn write_ragged_csv(path: &Path, xi: &RaggedPulseMatrix) -> Result<()> {
    fs::write(path, ragged_to_csv(xi))?;
    Ok(())
}

pub fn read_ragged_csv(path: &Path) -> Result<RaggedPulseMatrix> {
    let (header, rows) = read_csv(path)?;
    if rows.len() < 2 || header.first().map(String::as_str) != Some("t") {
        return Err(Error::Parse(format!("{}: need a t column and at least two rows", path.display())));
    }
    let mut labels = Vec::new();
    for pair in header[1..].chunks(2) {
        let parse = |s: &str, prefix: &str| -> Option<(usize, usize)> {
            let rest = s.strip_prefix(prefix)?;
            let (j, k) = rest.split_once('_')?;
            Some((j.parse().ok()?, k.parse().ok()?))
        };
        let ok = pair.len() == 2
            && parse(&pair[0], "re_").is_some()
            && parse(&pair[0], "re_") == parse(&pair[1], "im_");
        if !ok {
            return Err(Error::Parse(format!("{}: malformed column pair {:?}", path.display(), pair)));
        }
        labels.push(parse(&pair[0], "re_").unwrap());
    }
    let grid = TimeGrid::new(rows[0][0], rows[rows.len() - 1][0], rows.len())?;
    check_times(path, &rows, &grid)?;
    let m = labels.iter().map(|l| l.0 + 1).max().unwrap_or(0);
    let mut channels: Vec<Vec<Vec<C64>>> = vec![Vec::new(); m];
    for (col, &(j, k)) in labels.iter().enumerate() {
        if channels[j].len() != k {
            return Err(Error::Parse(format!("{}: pulse labels must be consecutive per channel", path.display())));
        }
        channels[j].push(rows.iter().map(|r| C64::new(r[1 + 2 * col], r[2 + 2 * col])).collect());
    }
    RaggedPulseMatrix::new(grid, channels)
}

#[derive(Debug, Serialize, Deserialize)]
struct ImpulseSidecar {
    m: usize,
    support: Support,
    dt: f64,
    n_samples: usize,
    tail: f64,
    delta_part: JsonMatrix,
}

/// Impulse response CSV: `t`, then Re/Im of every entry of `smooth_minus`
/// followed by `smooth_plus`, row-major.  Returns the CSV text and the JSON
/// sidecar carrying the delta part.
pub fn impulse_to_csv(ir: &ImpulseResponse) -> (String, String) {
    let m = ir.m;
    let mut header = vec!["t".to_string()];
    for block in ["minus", "plus"] {
        for r in 0..m {
            for c in 0..m {
                header.push(format!("re_{}_{}_{}", block, r, c));
                header.push(format!("im_{}_{}_{}", block, r, c));
            }
        }
    }
    let rows: Vec<Vec<f64>> = ir
        .times()
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut row = vec![t];
            for s in [ir.smooth_minus(k), ir.smooth_plus(k)] {
                for r in 0..m {
                    for c in 0..m {
                        row.push(s[(r, c)].re);
                        row.push(s[(r, c)].im);
                    }
                }
            }
            row
        })
        .collect();
    let sidecar = ImpulseSidecar {
        m,
        support: ir.support(),
        dt: ir.dt(),
        n_samples: ir.len(),
        tail: ir.tail,
        delta_part: matrix_to_json(&ir.delta_part()),
    };
    (
        format_csv(&header, &rows),
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavepacketHeader {
    pub format: String,
    pub channel: usize,
    pub order: usize,
    pub channel_dims: usize,
    pub grid: TimeGrid,
    /// Shape in storage order: `order` channel axes of size `channel_dims`,
    /// then `order` time axes of size `n_points`.
    pub shape: Vec<usize>,
    pub layout: String,
}

const WAVEPACKET_FORMAT: &str = "photonflow-wavepacket-v1";

pub fn write_wavepacket(path: &Path, w: &WavepacketTensor) -> Result<()> {
    let mut shape = vec![w.m(); w.order()];
    shape.extend(std::iter::repeat(w.grid().len()).take(w.order()));
    let header = WavepacketHeader {
        format: WAVEPACKET_FORMAT.to_string(),
        channel: w.channel(),
        order: w.order(),
        channel_dims: w.m(),
        grid: *w.grid(),
        shape,
        layout: "row-major, complex as (re, im) little-endian f64".to_string(),
    };
    let mut out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for z in w.values() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_wavepacket(path: &Path, caps: &Caps) -> Result<WavepacketTensor> {
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let header: WavepacketHeader = serde_json::from_str(line.trim_end())?;
    if header.format != WAVEPACKET_FORMAT {
        return Err(Error::Parse(format!("{}: unknown format {:?}", path.display(), header.format)));
    }
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Parse(format!("{}: truncated payload", path.display())));
    }
    let values: Vec<C64> = bytes
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().unwrap());
            let im = f64::from_le_bytes(b[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect();
    WavepacketTensor::new(header.channel, header.channel_dims, header.grid, header.order, values, caps)
}
