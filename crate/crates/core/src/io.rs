//! File formats for sampled functions and plot data.
//!
//! * CSV with header `x,re,im`, one row per grid node.
//! * JSON envelope `{"grid":{"x_min","x_max","n_points"},"values":[[re,im],...]}`
//!   for lossless round trips.
//!
//! Every file is written through a temporary sibling and renamed into place.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};

#[derive(Serialize, Deserialize)]
struct Envelope {
    grid: Grid,
    values: Vec<[f64; 2]>,
}

pub fn to_json(f: &SampledFunction) -> String {
    let env = Envelope {
        grid: *f.grid(),
        values: f.values().iter().map(|v| [v.re, v.im]).collect(),
    };
    serde_json::to_string(&env).expect("envelope serializes")
}

pub fn from_json(text: &str) -> Result<SampledFunction> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if env.values.len() != env.grid.n_points() {
        return Err(Error::Parse(format!(
            "header declares {} points but {} values follow",
            env.grid.n_points(),
            env.values.len()
        )));
    }
    let values = env.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    SampledFunction::new(env.grid, values)
}

pub fn write_csv<W: Write>(f: &SampledFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "re", "im"]).map_err(csv_err)?;
    for (x, v) in f.grid().points().zip(f.values()) {
        w.write_record(&[x.to_string(), v.re.to_string(), v.im.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `x,re,im` CSV. The grid is recovered from the first and last `x`
/// and the row count; every row must sit on that uniform grid.
pub fn read_csv<R: Read>(input: R) -> Result<SampledFunction> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.len() != 3 || &headers[0] != "x" || &headers[1] != "re" || &headers[2] != "im" {
        return Err(Error::Parse(format!("expected header x,re,im, got {headers:?}")));
    }
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: column {k}: {e}", row + 1)))
        };
        xs.push(field(0)?);
        values.push(Complex64::new(field(1)?, field(2)?));
    }
    if xs.len() < 2 {
        return Err(Error::Parse(format!("{} data rows", xs.len())));
    }
    let grid = Grid::new(xs[0], xs[xs.len() - 1], xs.len())?;
    let tol = 1e-9 * grid.x_max().abs().max(grid.x_min().abs()).max(1.0);
    for (j, &x) in xs.iter().enumerate() {
        if (x - grid.point(j)).abs() > tol {
            return Err(Error::Parse(format!("row {}: x = {x} is off the uniform grid", j + 1)));
        }
    }
    SampledFunction::new(grid, values)
}

/// Load a sampled function, choosing the format from the file extension.
pub fn load(path: &Path) -> Result<SampledFunction> {
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => from_json(&text),
        _ => read_csv(text.as_bytes()),
    }
}

pub fn save_csv(path: &Path, f: &SampledFunction) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(f, &mut buf)?;
    write_atomic(path, &buf)
}

pub fn save_json(path: &Path, f: &SampledFunction) -> Result<()> {
    write_atomic(path, to_json(f).as_bytes())
}

/// Write a CSV of named numeric columns.
pub fn save_columns(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &buf)
}

/// Serialize `value` as pretty JSON with a trailing newline.
pub fn save_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
