//! Scheme parameters, the stego key, the keyed measurement matrix `Φ` and the
//! measurement projection `y = [s_u ; Φ s_v]`.

mod keyfile;
mod rng;

pub use keyfile::{read_key, write_key};
pub use rng::{GaussianStream, SplitMix64};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::Spectrum;

/// Every scalar of the embedding scheme.
///
/// Index constraints make the index arithmetic in the codec
/// well-defined: all donor and target positions stay inside `y` and never
/// overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct StegoParams {
    /// Cover side `N` (pixels).
    pub cover_side: usize,
    /// Secret side `M` (pixels).
    pub secret_side: usize,
    /// Cover block side `b`.
    pub cover_block: usize,
    /// Secret block side `l`.
    pub secret_block: usize,
    /// Leading zig-zag coefficients copied verbatim into the measurements.
    pub p1: usize,
    /// Trailing coefficients that are randomly projected.
    pub p2: usize,
    /// Secret coefficients embedded per block.
    pub p3: usize,
    /// Number of random measurements of the `p2` tail.
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Donor offset constant.
    pub c: usize,
    pub num_secrets: usize,
}

impl Default for StegoParams {
    fn default() -> Self {
        Self {
            cover_side: 1024,
            secret_side: 512,
            cover_block: 8,
            secret_block: 8,
            p1: 32,
            p2: 32,
            p3: 32,
            m: 320,
            alpha: 0.01,
            beta: 0.1,
            gamma: 1.0,
            c: 8,
            num_secrets: 4,
        }
    }
}

impl StegoParams {
    /// Checks every parameter invariant, reporting the first violation by
    /// field name.
    pub fn validate(&self) -> Result<()> {
        let inv = |field: &'static str, ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::invariant(field, msg.to_string()))
            }
        };
        let &Self { cover_side: n, secret_side: big_m, cover_block: b, secret_block: l, .. } = self;
        let &Self { p1, p2, p3, m, c, .. } = self;
        inv("N", n >= 2 && n % 2 == 0, "N must be even")?;
        inv("b", b >= 2, "b >= 2 violated")?;
        inv("b", (n / 2) % b == 0, "b must divide N/2")?;
        inv("l", l >= 2, "l >= 2 violated")?;
        inv("M", big_m >= l && big_m % l == 0, "l must divide M")?;
        inv("p1", p1 + p2 == b * b, "p1+p2 != b^2")?;
        inv("m", m > p2, "m > p2 violated")?;
        let secret_blocks = (big_m / l) * (big_m / l);
        let cover_blocks = (n / (2 * b)) * (n / (2 * b));
        inv("M", secret_blocks <= cover_blocks, "M^2/l^2 <= N^2/(4b^2) violated")?;
        inv("c", c >= 2, "c >= 2 violated")?;
        inv("c", p1 > 2 * c, "p1-2c >= 1 violated")?;
        inv("p3", p3 > c, "p3 >= c+1 violated")?;
        inv("p3", 2 * p3 <= m + c, "p1+2p3-c <= p1+m violated")?;
        inv("p3", p3 <= l * l, "p3 <= l^2 violated")?;
        for (field, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            inv(field, v.is_finite() && v != 0.0, "must be finite and nonzero")?;
        }
        inv("num_secrets", (1..=4).contains(&self.num_secrets), "num_secrets must be in 1..=4")?;
        Ok(())
    }

    /// Secret blocks per secret image (`M²/l²`).
    pub fn secret_blocks(&self) -> usize {
        let per_side = self.secret_side / self.secret_block;
        per_side * per_side
    }

    /// Blocks per cover sub-image (`N²/(4b²)`).
    pub fn sub_image_blocks(&self) -> usize {
        let per_side = self.cover_side / (2 * self.cover_block);
        per_side * per_side
    }

    /// Measurement vector length `p1 + m`.
    pub fn measurement_len(&self) -> usize {
        self.p1 + self.m
    }

    /// Payload bits per cover pixel contributed by one 8-bit secret.
    pub fn capacity_bpp_per_secret(&self) -> f64 {
        8.0 * (self.secret_side * self.secret_side) as f64 / (self.cover_side * self.cover_side) as f64
    }
}

/// Defaults of the reference experiments.
pub fn default_params() -> StegoParams {
    StegoParams::default()
}

/// Shared secret between sender and receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct StegoKey {
    pub seed: u64,
    pub params: StegoParams,
    /// Secret `i` (0-based) goes to sub-image `assignment[i]` (1-based).
    pub assignment: Vec<usize>,
}

// Distinguishes the assignment stream from the matrix stream of the same seed.
const ASSIGNMENT_SALT: u64 = 0x5AB_1155;

impl StegoKey {
    /// Validates `params` and draws the sub-image assignment from the seed.
    pub fn new(seed: u64, params: StegoParams) -> Result<Self> {
        params.validate()?;
        let assignment = derive_assignment(seed, params.num_secrets);
        Ok(Self { seed, params, assignment })
    }

    pub fn with_assignment(seed: u64, params: StegoParams, assignment: Vec<usize>) -> Result<Self> {
        let key = Self { seed, params, assignment };
        key.validate()?;
        Ok(key)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.assignment.len() != self.params.num_secrets {
            return Err(Error::invariant(
                "assignment",
                format!("{} entries for num_secrets = {}", self.assignment.len(), self.params.num_secrets),
            ));
        }
        if self.assignment.iter().any(|k| !(1..=4).contains(k)) {
            return Err(Error::invariant("assignment", "entries must be sub-image indices 1..4"));
        }
        for (i, a) in self.assignment.iter().enumerate() {
            if self.assignment[..i].contains(a) {
                return Err(Error::invariant("assignment", format!("duplicate sub-image {a}")));
            }
        }
        Ok(())
    }

    pub fn gen_matrix<T: Scalar>(&self) -> MeasurementMatrix<T> {
        gen_matrix(self)
    }
}

/// `[1, 2, 3, 4]` for four secrets; otherwise the first distinct values of the
/// salted seed stream modulo 4, in order of appearance.
fn derive_assignment(seed: u64, count: usize) -> Vec<usize> {
    if count >= 4 {
        return vec![1, 2, 3, 4];
    }
    let mut rng = SplitMix64::new(seed ^ ASSIGNMENT_SALT);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = (rng.next_u64() % 4) as usize + 1;
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

/// Dense `m x p2` Gaussian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Scalar> MeasurementMatrix<T> {
    pub fn from_rows(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.cols + j]
    }

    /// `Φ x`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        self.entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `Φᵀ y`.
    pub fn apply_transpose(&self, y: &[T]) -> Vec<T> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (row, &yi) in self.entries.chunks_exact(self.cols).zip(y) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o = *o + a * yi;
            }
        }
        out
    }

    /// `ΦᵀΦ`, `cols x cols` row-major.
    pub fn gram(&self) -> Vec<T> {
        let n = self.cols;
        let mut g = vec![T::zero(); n * n];
        for row in self.entries.chunks_exact(n) {
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] = g[i * n + j] + row[i] * row[j];
                }
            }
        }
        g
    }
}

/// Regenerates `Φ` from the key: `m x p2` standard normals from the
/// SplitMix64/Box-Muller stream of `key.seed`, filled row-major.
pub fn gen_matrix<T: Scalar>(key: &StegoKey) -> MeasurementMatrix<T> {
    let (rows, cols) = (key.params.m, key.params.p2);
    let entries = GaussianStream::new(key.seed).take(rows * cols).map(T::of).collect();
    MeasurementMatrix { rows, cols, entries }
}

/// Linear measurements of one block: `u` part (length `p1`) then `v` part
/// (length `m`).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector<T> {
    y: Vec<T>,
    split: usize,
}

impl<T: Scalar> MeasurementVector<T> {
    pub fn new(y: Vec<T>, split: usize) -> Result<Self> {
        if split > y.len() {
            return Err(Error::Dimension(format!("split {split} exceeds length {}", y.len())));
        }
        Ok(Self { y, split })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.y
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.y
    }

    pub fn into_vec(self) -> Vec<T> {
        self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn u(&self) -> &[T] {
        &self.y[..self.split]
    }

    pub fn v(&self) -> &[T] {
        &self.y[self.split..]
    }
}

/// `y = [s_u ; Φ s_v]`.
pub fn measure<T: Scalar>(s: &Spectrum<T>, phi: &MeasurementMatrix<T>) -> Result<MeasurementVector<T>> {
    if s.v().len() != phi.cols() {
        return Err(Error::Dimension(format!(
            "spectrum tail has {} entries, matrix expects {}",
            s.v().len(),
            phi.cols()
        )));
    }
    let mut y = Vec::with_capacity(s.u().len() + phi.rows());
    y.extend_from_slice(s.u());
    y.extend(phi.apply(s.v()));
    Ok(MeasurementVector { y, split: s.split() })
}
