// SRF v1: `SRF1\n<width> <height>\n` then width*height little-endian binary64
// samples, row-major. Lossless for f64 rasters.

use std::fs;
use std::path::Path;

use super::Raster;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8] = b"SRF1\n";

pub fn read_srf<T: Scalar>(path: impl AsRef<Path>) -> Result<Raster<T>> {
    decode_srf(&fs::read(path)?)
}

pub fn write_srf<T: Scalar>(r: &Raster<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_srf(r))?;
    Ok(())
}

pub fn encode_srf<T: Scalar>(r: &Raster<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 8 * r.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(format!("{} {}\n", r.width(), r.height()).as_bytes());
    for v in r.samples() {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out
}

pub fn decode_srf<T: Scalar>(bytes: &[u8]) -> Result<Raster<T>> {
    if !bytes.starts_with(MAGIC) {
        let shown = String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned();
        return Err(Error::format("magic", format!("expected \"SRF1\", found {shown:?}")));
    }
    let rest = &bytes[MAGIC.len()..];
    let nl = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format("dimensions", "missing newline after dimensions"))?;
    let line = std::str::from_utf8(&rest[..nl])
        .map_err(|_| Error::format("dimensions", "not ASCII"))?;
    let mut parts = line.split(' ');
    let mut dim = |field: &'static str| -> Result<usize> {
        parts
            .next()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::format(field, format!("bad value in {line:?}")))
    };
    let width = dim("width")?;
    let height = dim("height")?;
    if parts.next().is_some() {
        return Err(Error::format("dimensions", format!("trailing fields in {line:?}")));
    }
    let payload = &rest[nl + 1..];
    let expected = width * height * 8;
    if payload.len() < expected {
        return Err(Error::Truncated { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(Error::format(
            "payload",
            format!("{} trailing bytes after {width}x{height} samples", payload.len() - expected),
        ));
    }
    let samples = payload
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("chunk of 8"))))
        .collect();
    Raster::new(width, height, samples)
}
