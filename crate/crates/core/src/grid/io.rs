//! On-disk forms of a [`SampledField`].
//!
//! Binary layout (all little-endian):
//!
//! | bytes | content                     |
//! |-------|-----------------------------|
//! | 4     | magic `LPSF`                |
//! | 4     | `u32` format version (1)    |
//! | 4     | `u32` dim                   |
//! | 4     | `u32` N                     |
//! | 8     | `f64` half-length L         |
//! | 16·Nᵈ | `(re, im)` pairs as `f64`   |
//!
//! CSV: a `# dim=<d>,n=<N>,half_length=<L>` line, then a `index,re,im`
//! header, then one row per sample in linear index order.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::{Geometry, SampledField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LPSF";
const VERSION: u32 = 1;

pub fn write_binary(field: &SampledField, mut w: impl Write) -> Result<()> {
    let g = field.geometry();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.half_length().to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary(mut r: impl Read) -> Result<SampledField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("bad magic, expected LPSF".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let half_length = read_f64(&mut r)?;
    let geom = Geometry::new(dim, n, half_length)?;
    let mut values = Vec::with_capacity(geom.len());
    for _ in 0..geom.len() {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        values.push(Complex64::new(re, im));
    }
    SampledField::new(geom, values)
}

pub fn write_csv(field: &SampledField, mut w: impl Write) -> Result<()> {
    let g = field.geometry();
    writeln!(w, "# dim={},n={},half_length={:?}", g.dim(), g.n(), g.half_length())?;
    writeln!(w, "index,re,im")?;
    for (i, v) in field.values().iter().enumerate() {
        writeln!(w, "{i},{:?},{:?}", v.re, v.im)?;
    }
    Ok(())
}

fn header_value<'a>(header: &'a str, key: &str) -> Result<&'a str> {
    header
        .split(',')
        .filter_map(|kv| kv.trim().split_once('='))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::Parse(format!("missing `{key}` in header")))
}

pub fn read_csv(r: impl BufRead) -> Result<SampledField> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))??;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("first line must be a `#` geometry header".into()))?;
    let parse_err = |what: &str| Error::Parse(format!("bad {what} in header"));
    let dim: usize = header_value(header, "dim")?.parse().map_err(|_| parse_err("dim"))?;
    let n: usize = header_value(header, "n")?.parse().map_err(|_| parse_err("n"))?;
    let half_length: f64 =
        header_value(header, "half_length")?.parse().map_err(|_| parse_err("half_length"))?;
    let geom = Geometry::new(dim, n, half_length)?;

    let mut values = vec![None; geom.len()];
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("index") {
            continue;
        }
        let mut cols = line.split(',');
        let row_err = || Error::Parse(format!("malformed row {}: `{line}`", lineno + 2));
        let idx: usize = cols.next().ok_or_else(row_err)?.trim().parse().map_err(|_| row_err())?;
        let re: f64 = cols.next().ok_or_else(row_err)?.trim().parse().map_err(|_| row_err())?;
        let im: f64 = cols.next().ok_or_else(row_err)?.trim().parse().map_err(|_| row_err())?;
        let slot = values.get_mut(idx).ok_or_else(row_err)?;
        *slot = Some(Complex64::new(re, im));
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Parse(format!("missing row for index {i}"))))
        .collect::<Result<Vec<_>>>()?;
    SampledField::new(geom, values)
}
