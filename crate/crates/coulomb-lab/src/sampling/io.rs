use super::Configuration;
use crate::geometry::Point;
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"CGCF";
const VERSION: u16 = 1;

/// One `x,y` row per point, 17 significant digits.
pub fn write_csv(config: &Configuration, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(["x", "y"]).map_err(csv_err)?;
    for z in &config.points {
        w.write_record([format!("{:.16e}", z.re), format!("{:.16e}", z.im)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Configuration> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Format(format!("short row in {}", path.display())))?
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("{e} in {}", path.display())))
        };
        points.push(Point::new(field(0)?, field(1)?));
    }
    Ok(Configuration::new(points))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Packed binary: `CGCF`, version `u16`, count `u32`, then `(x, y)` as little-endian `f64`.
pub fn write_cgcf(config: &Configuration, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let n = u32::try_from(config.points.len()).map_err(|_| Error::Format("too many points".into()))?;
    w.write_all(&n.to_le_bytes())?;
    for z in &config.points {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cgcf(path: &Path) -> Result<Configuration> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 10];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes([head[6], head[7], head[8], head[9]]) as usize;
    let mut buf = vec![0u8; 16 * n];
    r.read_exact(&mut buf)?;
    let f = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let points = (0..n).map(|i| Point::new(f(2 * i), f(2 * i + 1))).collect();
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Format("trailing bytes".into()));
    }
    Ok(Configuration::new(points))
}
