//! Block partitioning, the 2-D DCT sparsification basis and zig-zag ordering.
//!
//! A `b x b` block is flattened row-major into a vector `x` of length `b²`.
//! The basis `Ψ` is the Kronecker product of two orthonormal 1-D DCT-II
//! matrices, so `Ψᵀ x` is the 2-D DCT coefficient grid flattened row-major
//! (vertical frequency major). The zig-zag order then reads that grid from
//! low to high frequency.

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Scalar;

/// Orthonormal 1-D DCT-II matrix, rows indexed by frequency.
fn dct_1d(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut c = vec![0.0; n * n];
    for k in 0..n {
        let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for i in 0..n {
            let angle = std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf);
            c[k * n + i] = scale * angle.cos();
        }
    }
    c
}

/// The `b² x b²` sparsification matrix `Ψ` for `b x b` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBasis<T> {
    side: usize,
    /// `Ψ` row-major: `matrix[p * b² + q]`, column `q` is the basis image of
    /// coefficient `q`.
    matrix: Vec<T>,
}

impl<T: Scalar> DctBasis<T> {
    pub fn new(side: usize) -> Result<Self> {
        if side < 2 {
            return Err(Error::Precondition(format!("block side must be >= 2, got {side}")));
        }
        let c = dct_1d(side);
        let n = side * side;
        let mut matrix = vec![T::zero(); n * n];
        // Ψ[(r,c), (k,l)] = C[k][r] * C[l][c]
        for r in 0..side {
            for col in 0..side {
                let p = r * side + col;
                for k in 0..side {
                    for l in 0..side {
                        matrix[p * n + k * side + l] = T::of(c[k * side + r] * c[l * side + col]);
                    }
                }
            }
        }
        Ok(Self { side, matrix })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Vector length `b²`.
    pub fn dim(&self) -> usize {
        self.side * self.side
    }

    /// Entry `Ψ[row, col]`, 0-based.
    pub fn entry(&self, row: usize, col: usize) -> T {
        self.matrix[row * self.dim() + col]
    }

    /// `Ψᵀ x`: pixel vector to coefficient grid (row-major frequencies).
    pub fn forward(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        let mut out = vec![T::zero(); n];
        for (p, &xp) in x.iter().enumerate() {
            let row = &self.matrix[p * n..(p + 1) * n];
            for (o, &m) in out.iter_mut().zip(row) {
                *o = *o + m * xp;
            }
        }
        out
    }

    /// `Ψ s`: coefficient grid back to pixels.
    pub fn inverse(&self, s: &[T]) -> Vec<T> {
        let n = self.dim();
        debug_assert_eq!(s.len(), n);
        self.matrix
            .chunks_exact(n)
            .map(|row| row.iter().zip(s).map(|(&m, &v)| m * v).sum())
            .collect()
    }

    /// Largest `|(ΨᵀΨ - I)[i,j]|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|p| self.entry(p, i).as_f64() * self.entry(p, j).as_f64()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Anti-diagonal scan of an `n x n` grid with alternating direction, starting
/// at `(1,1)` then `(1,2)` (standard JPEG order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigZagOrder {
    side: usize,
    /// `perm[i]` is the row-major grid index visited at scan position `i`.
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl ZigZagOrder {
    pub fn new(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::Precondition("zig-zag side must be >= 1".into()));
        }
        let mut perm = Vec::with_capacity(side * side);
        for diag in 0..2 * side - 1 {
            let lo = diag.saturating_sub(side - 1);
            let hi = diag.min(side - 1);
            if diag % 2 == 0 {
                // upward: row decreasing
                perm.extend((lo..=hi).rev().map(|row| row * side + (diag - row)));
            } else {
                perm.extend((lo..=hi).map(|row| row * side + (diag - row)));
            }
        }
        let mut inverse = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        Ok(Self { side, perm, inverse })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Scan positions as 1-based `(row, col)` pairs.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        self.perm.iter().map(|&p| (p / self.side + 1, p % self.side + 1)).collect()
    }

    /// Grid (row-major) to scan order.
    pub fn scan<T: Copy>(&self, grid: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| grid[p]).collect()
    }

    /// Scan order back to the row-major grid.
    pub fn unscan<T: Copy>(&self, scanned: &[T]) -> Vec<T> {
        self.inverse.iter().map(|&i| scanned[i]).collect()
    }
}

/// Zig-zag ordered DCT coefficients of one block, split into a leading
/// `u` part (large coefficients) and a trailing `v` part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    coeffs: Vec<T>,
    split: usize,
}

impl<T: Scalar> Spectrum<T> {
    pub fn new(coeffs: Vec<T>, split: usize) -> Result<Self> {
        if split > coeffs.len() {
            return Err(Error::Dimension(format!(
                "split {split} exceeds spectrum length {}",
                coeffs.len()
            )));
        }
        Ok(Self { coeffs, split })
    }

    pub fn from_parts(u: &[T], v: &[T]) -> Self {
        Self { coeffs: [u, v].concat(), split: u.len() }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn u(&self) -> &[T] {
        &self.coeffs[..self.split]
    }

    pub fn v(&self) -> &[T] {
        &self.coeffs[self.split..]
    }

    pub fn with_split(self, split: usize) -> Result<Self> {
        Self::new(self.coeffs, split)
    }
}

/// Basis and zig-zag table for one block size, built once and shared.
#[derive(Debug, Clone)]
pub struct BlockTransform<T> {
    pub basis: DctBasis<T>,
    pub zigzag: ZigZagOrder,
}

impl<T: Scalar> BlockTransform<T> {
    pub fn new(side: usize) -> Result<Self> {
        Ok(Self { basis: DctBasis::new(side)?, zigzag: ZigZagOrder::new(side)? })
    }

    pub fn side(&self) -> usize {
        self.basis.side()
    }

    /// Zig-zag ordered `Ψᵀ x` (no split; split with [`Spectrum::with_split`]).
    pub fn sparsify(&self, block: &[T]) -> Spectrum<T> {
        sparsify(block, &self.basis, &self.zigzag)
    }

    pub fn desparsify(&self, s: &Spectrum<T>) -> Vec<T> {
        desparsify(s, &self.basis, &self.zigzag)
    }
}

/// `Ψᵀ vec(block)` reordered by zig-zag; `block` is row-major `b x b`.
pub fn sparsify<T: Scalar>(block: &[T], basis: &DctBasis<T>, zz: &ZigZagOrder) -> Spectrum<T> {
    assert_eq!(block.len(), basis.dim(), "block size does not match basis");
    assert_eq!(zz.side(), basis.side(), "zig-zag side does not match basis");
    let coeffs = zz.scan(&basis.forward(block));
    Spectrum { split: coeffs.len(), coeffs }
}

/// Inverse of [`sparsify`].
pub fn desparsify<T: Scalar>(s: &Spectrum<T>, basis: &DctBasis<T>, zz: &ZigZagOrder) -> Vec<T> {
    assert_eq!(s.coeffs().len(), basis.dim(), "spectrum size does not match basis");
    basis.inverse(&zz.unscan(s.coeffs()))
}

/// Splits a raster into `side x side` blocks in row-major block order. Each
/// block is returned row-major.
pub fn partition_blocks<T: Scalar>(r: &Raster<T>, side: usize) -> Result<Vec<Vec<T>>> {
    if side == 0 || !r.width().is_multiple_of(side) || !r.height().is_multiple_of(side) {
        return Err(Error::Precondition(format!(
            "block side {side} must divide raster dimensions {}x{}",
            r.width(),
            r.height()
        )));
    }
    let (bw, bh) = (r.width() / side, r.height() / side);
    let mut blocks = Vec::with_capacity(bw * bh);
    for by in 0..bh {
        for bx in 0..bw {
            let mut block = Vec::with_capacity(side * side);
            for i in 0..side {
                let start = (by * side + i) * r.width() + bx * side;
                block.extend_from_slice(&r.samples()[start..start + side]);
            }
            blocks.push(block);
        }
    }
    Ok(blocks)
}

/// Inverse of [`partition_blocks`].
pub fn assemble_blocks<T: Scalar>(
    blocks: &[Vec<T>],
    width: usize,
    height: usize,
    side: usize,
) -> Result<Raster<T>> {
    if side == 0 || !width.is_multiple_of(side) || !height.is_multiple_of(side) {
        return Err(Error::Precondition(format!(
            "block side {side} must divide raster dimensions {width}x{height}"
        )));
    }
    let bw = width / side;
    if blocks.len() != bw * (height / side) || blocks.iter().any(|b| b.len() != side * side) {
        return Err(Error::Dimension(format!(
            "{} blocks do not tile a {width}x{height} raster with side {side}",
            blocks.len()
        )));
    }
    let mut samples = vec![T::zero(); width * height];
    for (idx, block) in blocks.iter().enumerate() {
        let (by, bx) = (idx / bw, idx % bw);
        for i in 0..side {
            let start = (by * side + i) * width + bx * side;
            samples[start..start + side].copy_from_slice(&block[i * side..(i + 1) * side]);
        }
    }
    Raster::new(width, height, samples)
}
