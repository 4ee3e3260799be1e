//! File formats.
//!
//! CSV tables carry a single header row naming their columns. Floats are
//! written in Rust's shortest round-trip form, so CSV output is byte-stable
//! for identical inputs.
//!
//! Complex matrix stacks (`K` matrices of `rows x cols`) have two forms:
//!
//! - binary: little-endian `u64` rows, cols, K, then `K * rows * cols`
//!   `(re, im)` pairs of little-endian `f64`, row-major within each matrix;
//! - CSV: header `rows,cols,subbands`, one line with those values, then one
//!   line per matrix row holding `re,im` pairs.

use std::io::{Read, Write};

use crate::eigenbeams::{EigenbeamSet, RankProfile};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::netmap::SinrMap;
use crate::patterns::{BeamPattern, ElementPowerMap};
use crate::simulate::SubframeSchedule;
use crate::{CMatrix, Complex64};

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(false).from_writer(w)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// `index,x,y,z` per element or observation point.
pub fn write_points<W: Write>(out: W, points: &[Point3]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["index", "x", "y", "z"])?;
    for (i, p) in points.iter().enumerate() {
        w.write_record([i.to_string(), p[0].to_string(), p[1].to_string(), p[2].to_string()])?;
    }
    finish(w)
}

/// `index,sigma` (1-based index).
pub fn write_singular_values<W: Write>(out: W, sigma: &[f64]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["index", "sigma"])?;
    for (i, s) in sigma.iter().enumerate() {
        w.write_record([(i + 1).to_string(), s.to_string()])?;
    }
    finish(w)
}

/// `index,fraction` (index = number of singular values kept).
pub fn write_rank_profile<W: Write>(out: W, profile: &RankProfile) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["index", "fraction"])?;
    for (i, f) in profile.cumulative_power.iter().enumerate() {
        w.write_record([(i + 1).to_string(), f.to_string()])?;
    }
    finish(w)
}

/// `beam,element,re,im`, beam-major.
pub fn write_eigenbeams<W: Write>(out: W, beams: &EigenbeamSet) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["beam", "element", "re", "im"])?;
    for b in 0..beams.w.ncols() {
        for n in 0..beams.w.nrows() {
            let z = beams.w[(n, b)];
            w.write_record([b.to_string(), n.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
    }
    finish(w)
}

/// `k,residual` with 1-based subband index.
pub fn write_residuals<W: Write>(out: W, residuals: &[f64]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["k", "residual"])?;
    for (k, r) in residuals.iter().enumerate() {
        w.write_record([(k + 1).to_string(), r.to_string()])?;
    }
    finish(w)
}

/// `subframe,beam`.
pub fn write_schedule<W: Write>(out: W, schedule: &SubframeSchedule) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["subframe", "beam"])?;
    for (s, b) in schedule.pairs() {
        w.write_record([s.to_string(), b.to_string()])?;
    }
    finish(w)
}

/// `azimuth,elevation,gain_db`, elevation-major, clamped at the export floor.
pub fn write_beam_pattern<W: Write>(out: W, pattern: &BeamPattern) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["azimuth", "elevation", "gain_db"])?;
    for (e, el) in pattern.elevation.iter().enumerate() {
        for (a, az) in pattern.azimuth.iter().enumerate() {
            w.write_record([az.to_string(), el.to_string(), pattern.gain_db_clamped(e, a).to_string()])?;
        }
    }
    finish(w)
}

/// Unnormalized element powers, one CSV line per array row (top row first,
/// as the array is seen from the front), header `c0,c1,...`.
pub fn write_element_power<W: Write>(out: W, map: &ElementPowerMap) -> Result<()> {
    let mut w = writer(out);
    let cols = map.raw.ncols();
    w.write_record((0..cols).map(|c| format!("c{c}")))?;
    for r in (0..map.raw.nrows()).rev() {
        w.write_record((0..cols).map(|c| map.raw[(r, c)].to_string()))?;
    }
    finish(w)
}

/// `x,y,serving_sector,sinr_db`.
pub fn write_sinr_map<W: Write>(out: W, map: &SinrMap) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x", "y", "serving_sector", "sinr_db"])?;
    for i in 0..map.len() {
        let p = map.points[i];
        w.write_record([
            p[0].to_string(),
            p[1].to_string(),
            map.serving_sector[i].to_string(),
            map.sinr_db[i].to_string(),
        ])?;
    }
    finish(w)
}

fn stack_dims(stack: &[CMatrix]) -> Result<(usize, usize)> {
    let first = stack.first().ok_or_else(|| Error::Format("empty matrix stack".into()))?;
    let dims = first.shape();
    if stack.iter().any(|m| m.shape() != dims) {
        return Err(Error::Shape("matrices in a stack must share a shape".into()));
    }
    Ok(dims)
}

pub fn write_matrices_binary<W: Write>(mut out: W, stack: &[CMatrix]) -> Result<()> {
    let (rows, cols) = stack_dims(stack)?;
    for v in [rows as u64, cols as u64, stack.len() as u64] {
        out.write_all(&v.to_le_bytes())?;
    }
    for m in stack {
        for i in 0..rows {
            for j in 0..cols {
                out.write_all(&m[(i, j)].re.to_le_bytes())?;
                out.write_all(&m[(i, j)].im.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrices_binary<R: Read>(mut input: R) -> Result<Vec<CMatrix>> {
    let mut word = [0u8; 8];
    let mut next = |input: &mut R| -> Result<[u8; 8]> {
        input.read_exact(&mut word)?;
        Ok(word)
    };
    let rows = u64::from_le_bytes(next(&mut input)?) as usize;
    let cols = u64::from_le_bytes(next(&mut input)?) as usize;
    let count = u64::from_le_bytes(next(&mut input)?) as usize;
    let mut stack = Vec::with_capacity(count);
    for _ in 0..count {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let re = f64::from_le_bytes(next(&mut input)?);
                let im = f64::from_le_bytes(next(&mut input)?);
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        stack.push(m);
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes after matrix stack", rest.len())));
    }
    Ok(stack)
}

pub fn write_matrices_csv<W: Write>(out: W, stack: &[CMatrix]) -> Result<()> {
    let (rows, cols) = stack_dims(stack)?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(["rows", "cols", "subbands"])?;
    w.write_record([rows.to_string(), cols.to_string(), stack.len().to_string()])?;
    for m in stack {
        for i in 0..rows {
            w.write_record((0..cols).flat_map(|j| [m[(i, j)].re.to_string(), m[(i, j)].im.to_string()]))?;
        }
    }
    finish(w)
}

pub fn read_matrices_csv<R: Read>(input: R) -> Result<Vec<CMatrix>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(input);
    let mut records = rdr.records();
    let dims = records.next().ok_or_else(|| Error::Format("missing dimension line".into()))??;
    let parse_usize = |s: &str| s.trim().parse::<usize>().map_err(|e| Error::Format(format!("`{s}`: {e}")));
    if dims.len() != 3 {
        return Err(Error::Format("dimension line needs rows,cols,subbands".into()));
    }
    let (rows, cols, count) = (parse_usize(&dims[0])?, parse_usize(&dims[1])?, parse_usize(&dims[2])?);
    let mut stack = Vec::with_capacity(count);
    for _ in 0..count {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            let rec = records.next().ok_or_else(|| Error::Format("truncated matrix data".into()))??;
            if rec.len() != 2 * cols {
                return Err(Error::Format(format!("row with {} fields, expected {}", rec.len(), 2 * cols)));
            }
            for j in 0..cols {
                let re: f64 = rec[2 * j].trim().parse().map_err(|e| Error::Format(format!("{e}")))?;
                let im: f64 = rec[2 * j + 1].trim().parse().map_err(|e| Error::Format(format!("{e}")))?;
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        stack.push(m);
    }
    if records.next().is_some() {
        return Err(Error::Format("trailing rows after matrix stack".into()));
    }
    Ok(stack)
}
