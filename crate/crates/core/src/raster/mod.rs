//! Gray-scale rasters, parity sub-sampling and 8-bit quantization.
//!
//! Samples are stored row-major with a nominal range of `[0, 255]` regardless
//! of the container they were loaded from. Documentation uses 1-based
//! `(row, column)` coordinates; the accessors are 0-based.

mod pgm;
mod srf;

pub use pgm::{decode_pgm, encode_pgm, read_pgm, write_pgm, PgmDepth};
pub use srf::{decode_srf, encode_srf, read_srf, write_srf};

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Container a raster was read from (or quantized for).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepthTag {
    Float,
    U8,
    U16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    samples: Vec<T>,
    depth: DepthTag,
}

impl<T: Scalar> Raster<T> {
    pub fn new(width: usize, height: usize, samples: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Precondition(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if samples.len() != width * height {
            return Err(Error::Dimension(format!(
                "{width}x{height} raster needs {} samples, got {}",
                width * height,
                samples.len()
            )));
        }
        Ok(Self { width, height, samples, depth: DepthTag::Float })
    }

    /// Builds a raster from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(width, height, rows.concat())
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// `f(row, col)` with 0-based coordinates.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                samples.push(f(row, col));
            }
        }
        Self::new(width, height, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn depth(&self) -> DepthTag {
        self.depth
    }

    pub fn with_depth(mut self, depth: DepthTag) -> Self {
        self.depth = depth;
        self
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.samples[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: T) {
        self.samples[row * self.width + col] = v;
    }

    pub fn same_dims<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Converts to another scalar type, keeping the depth tag.
    pub fn cast<U: Scalar>(&self) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            samples: self.samples.iter().map(|v| U::of(v.as_f64())).collect(),
            depth: self.depth,
        }
    }

    /// Samples widened to `f64`.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.samples.iter().map(|v| v.as_f64()).collect()
    }

    /// Rounds half away from zero and clamps every sample to `[0, 255]`.
    pub fn quantize_u8(&self) -> Self {
        Raster {
            width: self.width,
            height: self.height,
            samples: self
                .samples
                .iter()
                .map(|v| T::of(round_clamp(v.as_f64(), 255.0)))
                .collect(),
            depth: DepthTag::U8,
        }
    }

    /// Splits the raster into four quarter-size images by pixel parity.
    ///
    /// With 1-based coordinates: `sub[1](n1,n2) = r(2n1-1, 2n2-1)`,
    /// `sub[2] = r(2n1, 2n2-1)`, `sub[3] = r(2n1-1, 2n2)`, `sub[4] = r(2n1, 2n2)`.
    pub fn subsample(&self) -> Result<QuadSample<T>> {
        if !self.width.is_multiple_of(2) || !self.height.is_multiple_of(2) {
            return Err(Error::Precondition(format!(
                "sub-sampling needs even dimensions, got {}x{}",
                self.width, self.height
            )));
        }
        let (w, h) = (self.width / 2, self.height / 2);
        let sub = QUAD_OFFSETS.map(|(dr, dc)| Raster {
            width: w,
            height: h,
            samples: (0..h)
                .flat_map(|i| (0..w).map(move |j| (i, j)))
                .map(|(i, j)| self.get(2 * i + dr, 2 * j + dc))
                .collect(),
            depth: self.depth,
        });
        Ok(QuadSample { sub })
    }

    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        read_pgm(path)
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>, depth: PgmDepth) -> Result<()> {
        write_pgm(self, path, depth)
    }

    pub fn read_srf(path: impl AsRef<Path>) -> Result<Self> {
        read_srf(path)
    }

    pub fn write_srf(&self, path: impl AsRef<Path>) -> Result<()> {
        write_srf(self, path)
    }
}

/// 0-based (row, col) parity offsets of sub-images 1..4.
const QUAD_OFFSETS: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Four parity sub-images of a raster, `sub[0]` being sub-image 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadSample<T> {
    pub sub: [Raster<T>; 4],
}

impl<T: Scalar> QuadSample<T> {
    pub fn new(sub: [Raster<T>; 4]) -> Result<Self> {
        let first = &sub[0];
        if sub.iter().any(|r| !r.same_dims(first)) {
            return Err(Error::Dimension("sub-images must share dimensions".into()));
        }
        Ok(Self { sub })
    }

    /// 1-based accessor matching the sub-image numbering `k = 1..4`.
    pub fn get(&self, k: usize) -> &Raster<T> {
        &self.sub[k - 1]
    }

    /// Interleaves the four sub-images back into one raster.
    pub fn inverse_subsample(&self) -> Result<Raster<T>> {
        let first = &self.sub[0];
        if self.sub.iter().any(|r| !r.same_dims(first)) {
            return Err(Error::Dimension("sub-images must share dimensions".into()));
        }
        let (w, h) = (first.width, first.height);
        let mut out = Raster {
            width: 2 * w,
            height: 2 * h,
            samples: vec![T::zero(); 4 * w * h],
            depth: first.depth,
        };
        for (part, &(dr, dc)) in self.sub.iter().zip(QUAD_OFFSETS.iter()) {
            for i in 0..h {
                for j in 0..w {
                    out.set(2 * i + dr, 2 * j + dc, part.get(i, j));
                }
            }
        }
        Ok(out)
    }
}

/// Round half away from zero, then clamp into `[0, max]`.
pub(crate) fn round_clamp(v: f64, max: f64) -> f64 {
    // NaN maps to 0
    if v.is_nan() {
        return 0.0;
    }
    v.round().clamp(0.0, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(rows: &[&[f64]]) -> Raster<f64> {
        Raster::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn subsample_two_by_two() {
        let q = r(&[&[1.0, 3.0], &[2.0, 4.0]]).subsample().unwrap();
        for k in 1..=4 {
            assert_eq!(q.get(k).samples(), &[k as f64]);
        }
        let back = q.inverse_subsample().unwrap();
        assert_eq!(back, r(&[&[1.0, 3.0], &[2.0, 4.0]]));
    }

    #[test]
    fn subsample_constant() {
        let q = Raster::filled(6, 4, 7.5f64).unwrap().subsample().unwrap();
        for part in &q.sub {
            assert_eq!((part.width(), part.height()), (3, 2));
            assert!(part.samples().iter().all(|&v| v == 7.5));
        }
    }

    #[test]
    fn subsample_rejects_odd() {
        let err = Raster::filled(3, 4, 0.0f64).unwrap().subsample().unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn inverse_rejects_mismatch() {
        let a = Raster::filled(2, 2, 0.0f64).unwrap();
        let b = Raster::filled(2, 3, 0.0f64).unwrap();
        assert!(QuadSample::new([a.clone(), a.clone(), a.clone(), b.clone()]).is_err());
        let q = QuadSample { sub: [a.clone(), b, a.clone(), a] };
        assert!(matches!(q.inverse_subsample(), Err(Error::Dimension(_))));
    }

    #[test]
    fn quantize() {
        assert_eq!(r(&[&[127.4]]).quantize_u8().samples(), &[127.0]);
        assert_eq!(r(&[&[260.0]]).quantize_u8().samples(), &[255.0]);
        assert_eq!(r(&[&[-0.6, 0.5, 2.5]]).quantize_u8().samples(), &[0.0, 1.0, 3.0]);
        let q = r(&[&[1.49, 254.5, -3.0]]).quantize_u8();
        assert_eq!(q.depth(), DepthTag::U8);
        assert_eq!(q.quantize_u8(), q);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(Raster::new(2, 2, vec![0.0f64; 3]).is_err());
        assert!(Raster::<f64>::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let img = Raster::from_fn(4, 4, |i, j| (i * 4 + j) as f32).unwrap();
        let back = img.subsample().unwrap().inverse_subsample().unwrap();
        assert_eq!(back, img);
    }
}
