// Binary PGM ("P5") only. Header is `P5 <width> <height> <maxval>` separated by
// whitespace (comments starting with '#' allowed), followed by exactly one
// whitespace byte and big-endian samples: one byte when maxval <= 255, two
// otherwise. Accepted maxvals are 255 and 65535.

use std::fs;
use std::path::Path;

use super::{round_clamp, DepthTag, Raster};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmDepth {
    Eight,
    Sixteen,
}

impl PgmDepth {
    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            8 => Some(PgmDepth::Eight),
            16 => Some(PgmDepth::Sixteen),
            _ => None,
        }
    }

    fn maxval(self) -> u32 {
        match self {
            PgmDepth::Eight => 255,
            PgmDepth::Sixteen => 65535,
        }
    }
}

pub fn read_pgm<T: Scalar>(path: impl AsRef<Path>) -> Result<Raster<T>> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm<T: Scalar>(r: &Raster<T>, path: impl AsRef<Path>, depth: PgmDepth) -> Result<()> {
    fs::write(path, encode_pgm(r, depth))?;
    Ok(())
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &'static str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(field, "expected a decimal number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(field, "number out of range"))
    }
}

pub fn decode_pgm<T: Scalar>(bytes: &[u8]) -> Result<Raster<T>> {
    match bytes.get(..2) {
        Some(b"P5") => {}
        Some(other) => {
            return Err(Error::format(
                "magic",
                format!("expected \"P5\", found {:?}", String::from_utf8_lossy(other)),
            ))
        }
        None => return Err(Error::format("magic", "file too short")),
    }
    let mut hdr = HeaderReader { bytes, pos: 2 };
    if !hdr.bytes.get(2).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format("magic", "missing whitespace after \"P5\""));
    }
    let width = hdr.number("width")? as usize;
    let height = hdr.number("height")? as usize;
    let maxval = hdr.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::format("width", format!("zero dimension {width}x{height}")));
    }
    let (bytes_per_sample, depth) = match maxval {
        255 => (1, DepthTag::U8),
        65535 => (2, DepthTag::U16),
        v => return Err(Error::format("maxval", format!("unsupported maxval {v} (need 255 or 65535)"))),
    };
    if !hdr.bytes.get(hdr.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format("maxval", "missing whitespace before raster"));
    }
    let payload = &bytes[hdr.pos + 1..];
    let expected = width * height * bytes_per_sample;
    if payload.len() < expected {
        return Err(Error::Truncated { expected, found: payload.len() });
    }
    let samples: Vec<T> = if bytes_per_sample == 1 {
        payload[..expected].iter().map(|&b| T::of(b as f64)).collect()
    } else {
        payload[..expected]
            .chunks_exact(2)
            .map(|c| T::of(u16::from_be_bytes([c[0], c[1]]) as f64 * 255.0 / 65535.0))
            .collect()
    };
    Ok(Raster::new(width, height, samples)?.with_depth(depth))
}

/// Serializes a raster, rounding half away from zero and clamping to the
/// target range. 16-bit output scales `[0, 255]` onto `[0, 65535]`.
pub fn encode_pgm<T: Scalar>(r: &Raster<T>, depth: PgmDepth) -> Vec<u8> {
    let maxval = depth.maxval();
    let mut out = format!("P5\n{} {}\n{}\n", r.width(), r.height(), maxval).into_bytes();
    match depth {
        PgmDepth::Eight => {
            out.extend(r.samples().iter().map(|v| round_clamp(v.as_f64(), 255.0) as u8));
        }
        PgmDepth::Sixteen => {
            for v in r.samples() {
                let q = round_clamp(v.as_f64() * 65535.0 / 255.0, 65535.0) as u16;
                out.extend_from_slice(&q.to_be_bytes());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(bytes: &[u8]) -> Vec<u8> {
        bytes[bytes.len() - 1..].to_vec()
    }

    #[test]
    fn decode_two_by_two() {
        let file = b"P5\n2 2\n255\n\x00\x80\xff\x40";
        let r: Raster<f64> = decode_pgm(file).unwrap();
        assert_eq!(r.samples(), &[0.0, 128.0, 255.0, 64.0]);
        assert_eq!(r.get(1, 0), 255.0);
        assert_eq!(r.depth(), DepthTag::U8);
        assert_eq!(encode_pgm(&r, PgmDepth::Eight), file.to_vec());
    }

    #[test]
    fn header_with_comment() {
        let r: Raster<f64> = decode_pgm(b"P5 # made by hand\n1 1 255\n\x07").unwrap();
        assert_eq!(r.samples(), &[7.0]);
    }

    #[test]
    fn ascii_pgm_rejected() {
        let err = decode_pgm::<f64>(b"P2\n1 1\n255\n7\n").unwrap_err();
        assert!(matches!(err, Error::Format { field: "magic", .. }), "{err}");
    }

    #[test]
    fn bad_maxval_and_truncation() {
        let err = decode_pgm::<f64>(b"P5\n1 1\n100\n\x07").unwrap_err();
        assert!(matches!(err, Error::Format { field: "maxval", .. }), "{err}");
        let err = decode_pgm::<f64>(b"P5\n2 2\n255\n\x07\x07\x07").unwrap_err();
        assert!(matches!(err, Error::Truncated { expected: 4, found: 3 }));
        let err = decode_pgm::<f64>(b"P5\nx 2\n255\n").unwrap_err();
        assert!(matches!(err, Error::Format { field: "width", .. }));
    }

    #[test]
    fn rounding_and_clamping() {
        let one = |v: f64| Raster::new(1, 1, vec![v]).unwrap();
        assert_eq!(px(&encode_pgm(&one(-3.2), PgmDepth::Eight)), vec![0]);
        assert_eq!(px(&encode_pgm(&one(254.5), PgmDepth::Eight)), vec![255]);
        let wide = encode_pgm(&one(100.0), PgmDepth::Sixteen);
        assert_eq!(&wide[wide.len() - 2..], &25700u16.to_be_bytes());
    }

    #[test]
    fn sixteen_bit_round_trip() {
        let r = Raster::new(3, 1, vec![0.0, 100.0, 255.0]).unwrap();
        let back: Raster<f64> = decode_pgm(&encode_pgm(&r, PgmDepth::Sixteen)).unwrap();
        assert_eq!(back.depth(), DepthTag::U16);
        for (a, b) in r.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() <= 255.0 / 65535.0);
        }
    }
}
