//! Embedding and extraction rules and the end-to-end pipelines.
//!
//! Per block the secret's zig-zag DCT coefficients `t` are written into the
//! cover measurements `y` as offsets from *donor* measurements of the same
//! vector, which makes extraction blind: the receiver only subtracts pairs of
//! its own re-measured values.
//!
//! With 1-based indices the rule is
//!
//! ```text
//! y'(p1)                  = y(p1 - 2c)      + α t(1)
//! y'(j), j = p1-c+1..p1-1 = y(j - c)        + β t(j - p1 + c + 1)
//! y'(k), k = p1+p3+1..p1+2p3-c
//!                         = y(k - p3 + c)   + γ t(k - p1 - p3 + c)
//! ```
//!
//! The first `c` coefficients land in the `u` part, which is copied verbatim
//! into the stego spectrum; the remaining `p3 - c` land in the `v` part, which
//! only survives through the least-squares fit of the `ℓ1` reconstruction.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{gen_matrix, measure, MeasurementMatrix, MeasurementVector, StegoKey, StegoParams};
use crate::raster::{QuadSample, Raster};
use crate::scalar::{norm_inf, Scalar};
use crate::solver::{prepare, CachedFactorization, SolverConfig, SolverResult};
use crate::spectral::{assemble_blocks, partition_blocks, BlockTransform, Spectrum};

/// Reconstruction settings. `λ` is chosen per block as
/// `lambda_scale * ‖Φᵀ y_v‖∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecConfig {
    pub solver: SolverConfig,
    pub lambda_scale: f64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self { solver: SolverConfig::default(), lambda_scale: 1e-3 }
    }
}

fn check_rule_inputs(len: usize, p: &StegoParams) -> Result<()> {
    p.validate()?;
    if len != p.measurement_len() {
        return Err(Error::Precondition(format!(
            "measurement vector has {len} entries, expected p1+m = {}",
            p.measurement_len()
        )));
    }
    Ok(())
}

/// Writes `p3` coefficients of `t` into a copy of `y`.
pub fn embed_rule<T: Scalar>(
    y: &MeasurementVector<T>,
    t: &[T],
    p: &StegoParams,
) -> Result<MeasurementVector<T>> {
    check_rule_inputs(y.len(), p)?;
    if t.len() < p.p3 {
        return Err(Error::Precondition(format!("secret vector has {} < p3 = {} entries", t.len(), p.p3)));
    }
    let (p1, p3, c) = (p.p1, p.p3, p.c);
    let (alpha, beta, gamma) = (T::of(p.alpha), T::of(p.beta), T::of(p.gamma));
    let src = y.as_slice();
    let mut out = y.clone();
    // 1-based views
    let yv = |i: usize| src[i - 1];
    let tv = |i: usize| t[i - 1];
    let dst = out.as_mut_slice();

    dst[p1 - 1] = yv(p1 - 2 * c) + alpha * tv(1);
    for j in p1 - c + 1..=p1 - 1 {
        dst[j - 1] = yv(j - c) + beta * tv(j + c + 1 - p1);
    }
    for k in p1 + p3 + 1..=p1 + 2 * p3 - c {
        dst[k - 1] = yv(k + c - p3) + gamma * tv(k + c - p1 - p3);
    }
    Ok(out)
}

/// Recovers the embedded coefficients; the returned vector has `l²` entries
/// and everything past `p3` is zero.
pub fn extract_rule<T: Scalar>(y2: &MeasurementVector<T>, p: &StegoParams) -> Result<Vec<T>> {
    check_rule_inputs(y2.len(), p)?;
    let (p1, p3, c) = (p.p1, p.p3, p.c);
    let (alpha, beta, gamma) = (T::of(p.alpha), T::of(p.beta), T::of(p.gamma));
    let y = y2.as_slice();
    let yv = |i: usize| y[i - 1];
    let mut t = vec![T::zero(); p.secret_block * p.secret_block];

    t[0] = (yv(p1) - yv(p1 - 2 * c)) / alpha;
    for j in p1 - c + 1..=p1 - 1 {
        t[j + c - p1] = (yv(j) - yv(j - c)) / beta;
    }
    for k in p1 + p3 + 1..=p1 + 2 * p3 - c {
        t[k + c - p1 - p3 - 1] = (yv(k) - yv(k + c - p3)) / gamma;
    }
    Ok(t)
}

/// Which channel of the measurement vector a coefficient travels through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    U,
    V,
}

/// One embedded coefficient: `y'(target) = y(donor) + strength * t(coeff)`,
/// all indices 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub target: usize,
    pub donor: usize,
    pub coeff: usize,
    pub strength: f64,
}

impl Slot {
    pub fn channel(&self, p: &StegoParams) -> Channel {
        if self.target <= p.p1 {
            Channel::U
        } else {
            Channel::V
        }
    }
}

/// The `p3` slots used by [`embed_rule`] / [`extract_rule`], in coefficient order.
pub fn embedding_slots(p: &StegoParams) -> Vec<Slot> {
    let (p1, p3, c) = (p.p1, p.p3, p.c);
    let mut slots = vec![Slot { target: p1, donor: p1 - 2 * c, coeff: 1, strength: p.alpha }];
    slots.extend((p1 - c + 1..p1).map(|j| Slot { target: j, donor: j - c, coeff: j + c + 1 - p1, strength: p.beta }));
    slots.extend(
        (p1 + p3 + 1..=p1 + 2 * p3 - c)
            .map(|k| Slot { target: k, donor: k + c - p3, coeff: k + c - p1 - p3, strength: p.gamma }),
    );
    slots
}

/// Zig-zag DCT spectra of every `l x l` block of a secret image.
#[derive(Debug, Clone, PartialEq)]
pub struct SecretCoeffs<T> {
    pub blocks: Vec<Vec<T>>,
}

impl<T: Scalar> SecretCoeffs<T> {
    pub fn from_raster(secret: &Raster<T>, tf: &BlockTransform<T>) -> Result<Self> {
        let blocks = partition_blocks(secret, tf.side())?
            .par_iter()
            .map(|b| tf.sparsify(b).into_coeffs())
            .collect();
        Ok(Self { blocks })
    }

    /// Inverse zig-zag and block IDCT, then tiles a `side x side` raster.
    pub fn to_raster(&self, side: usize, tf: &BlockTransform<T>) -> Result<Raster<T>> {
        let n = tf.side() * tf.side();
        let blocks: Vec<Vec<T>> = self
            .blocks
            .par_iter()
            .map(|t| {
                let spectrum = Spectrum::new(t.clone(), n)?;
                Ok(tf.desparsify(&spectrum))
            })
            .collect::<Result<_>>()?;
        assemble_blocks(&blocks, side, side, tf.side())
    }
}

/// Outcome of reconstructing one block.
#[derive(Debug, Clone)]
pub struct BlockReconstruction<T> {
    pub block: Vec<T>,
    pub solver: SolverResult<T>,
    /// `‖Φ s'_v − y'_v‖₂`.
    pub residual: T,
}

/// Stego block from modified measurements: the `u` part is copied verbatim,
/// the `v` part is the LASSO solution for `y'(p1+1..p1+m)`.
pub fn reconstruct_block<T: Scalar>(
    y1: &MeasurementVector<T>,
    phi: &MeasurementMatrix<T>,
    fact: &CachedFactorization<T>,
    tf: &BlockTransform<T>,
    cfg: &CodecConfig,
) -> Result<BlockReconstruction<T>> {
    if y1.v().len() != phi.rows() || y1.u().len() + phi.cols() != tf.basis.dim() {
        return Err(Error::Dimension(format!(
            "measurements ({} + {}) do not match Φ {}x{} and block size {}",
            y1.u().len(),
            y1.v().len(),
            phi.rows(),
            phi.cols(),
            tf.basis.dim()
        )));
    }
    if fact.dim() != phi.cols() {
        return Err(Error::Dimension("factorization does not match Φ".into()));
    }
    let yv = y1.v();
    let lambda = T::of(cfg.lambda_scale) * norm_inf(&fact.phi_t_apply(yv));
    let solver = fact.solve(yv, lambda, &cfg.solver);
    let fitted = phi.apply(&solver.s);
    let residual = fitted.iter().zip(yv).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt();
    let block = tf.desparsify(&Spectrum::from_parts(y1.u(), &solver.s));
    Ok(BlockReconstruction { block, solver, residual })
}

/// Per sub-image statistics of one embedding run.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SubImageReport {
    /// 1-based sub-image index.
    pub sub_image: usize,
    /// 0-based index of the secret stored there.
    pub secret: usize,
    pub blocks: usize,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub not_converged: usize,
    pub mean_residual: f64,
    /// RMS error of `u`-channel coefficients as the receiver would see them
    /// on the lossless path.
    pub u_channel_rms_error: f64,
    /// Same for the `v` channel.
    pub v_channel_rms_error: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EmbedReport {
    pub sub_images: Vec<SubImageReport>,
    pub capacity_bpp: f64,
}

struct BlockOutcome<T> {
    block: Vec<T>,
    iterations: usize,
    converged: bool,
    residual: f64,
    u_err2: f64,
    v_err2: f64,
}

/// Shared per-key state: basis tables, `Φ` and its factorization.
struct Pipeline<T> {
    params: StegoParams,
    cover_tf: BlockTransform<T>,
    secret_tf: BlockTransform<T>,
    phi: MeasurementMatrix<T>,
}

impl<T: Scalar> Pipeline<T> {
    fn new(key: &StegoKey) -> Result<Self> {
        key.validate()?;
        let params = key.params.clone();
        Ok(Self {
            cover_tf: BlockTransform::new(params.cover_block)?,
            secret_tf: BlockTransform::new(params.secret_block)?,
            phi: gen_matrix(key),
            params,
        })
    }

    fn check_cover(&self, r: &Raster<T>, what: &str) -> Result<()> {
        let n = self.params.cover_side;
        if r.width() != n || r.height() != n {
            return Err(Error::Dimension(format!(
                "{what} is {}x{}, key expects {n}x{n}",
                r.width(),
                r.height()
            )));
        }
        Ok(())
    }

    fn measure_block(&self, block: &[T]) -> Result<MeasurementVector<T>> {
        let spectrum = self.cover_tf.sparsify(block).with_split(self.params.p1)?;
        measure(&spectrum, &self.phi)
    }
}

/// Hides `secrets` in `cover`. Secret `i` goes to sub-image
/// `key.assignment[i]`; its block `i` pairs with block `i` of that sub-image
/// (row-major). Sub-images without a secret, and sub-image blocks beyond the
/// secret's block count, are passed through untouched.
pub fn embed_images<T: Scalar>(
    cover: &Raster<T>,
    secrets: &[Raster<T>],
    key: &StegoKey,
    cfg: &CodecConfig,
) -> Result<(Raster<T>, EmbedReport)> {
    let pipe = Pipeline::new(key)?;
    let p = &pipe.params;
    pipe.check_cover(cover, "cover")?;
    if secrets.len() != key.assignment.len() {
        return Err(Error::Precondition(format!(
            "{} secrets given, key is for {}",
            secrets.len(),
            key.assignment.len()
        )));
    }
    for (i, s) in secrets.iter().enumerate() {
        if s.width() != p.secret_side || s.height() != p.secret_side {
            return Err(Error::Dimension(format!(
                "secret {} is {}x{}, key expects {m}x{m}",
                i + 1,
                s.width(),
                s.height(),
                m = p.secret_side
            )));
        }
    }
    cfg.solver.validate()?;
    let fact = prepare(&pipe.phi, cfg.solver.rho)?;
    let slots = embedding_slots(p);

    let QuadSample { mut sub } = cover.subsample()?;
    let mut reports = Vec::with_capacity(secrets.len());
    let sub_side = p.cover_side / 2;

    for (secret_idx, (secret, &k)) in secrets.iter().zip(&key.assignment).enumerate() {
        let coeffs = SecretCoeffs::from_raster(secret, &pipe.secret_tf)?;
        let mut blocks = partition_blocks(&sub[k - 1], p.cover_block)?;
        let outcomes: Vec<BlockOutcome<T>> = blocks
            .par_iter()
            .zip(coeffs.blocks.par_iter())
            .map(|(block, t)| -> Result<BlockOutcome<T>> {
                let y = pipe.measure_block(block)?;
                let y1 = embed_rule(&y, t, p)?;
                let rec = reconstruct_block(&y1, &pipe.phi, &fact, &pipe.cover_tf, cfg)?;
                // what the receiver re-measures on the lossless path
                let mut seen = y1.u().to_vec();
                seen.extend(pipe.phi.apply(&rec.solver.s));
                let seen = MeasurementVector::new(seen, p.p1)?;
                let t_seen = extract_rule(&seen, p)?;
                let (mut u_err2, mut v_err2) = (0.0, 0.0);
                for slot in &slots {
                    let e = (t_seen[slot.coeff - 1] - t[slot.coeff - 1]).as_f64();
                    match slot.channel(p) {
                        Channel::U => u_err2 += e * e,
                        Channel::V => v_err2 += e * e,
                    }
                }
                Ok(BlockOutcome {
                    block: rec.block,
                    iterations: rec.solver.iterations,
                    converged: rec.solver.converged,
                    residual: rec.residual.as_f64(),
                    u_err2,
                    v_err2,
                })
            })
            .collect::<Result<_>>()?;

        let count = outcomes.len();
        let mut report = SubImageReport {
            sub_image: k,
            secret: secret_idx,
            blocks: count,
            mean_iterations: 0.0,
            max_iterations: 0,
            not_converged: 0,
            mean_residual: 0.0,
            u_channel_rms_error: 0.0,
            v_channel_rms_error: 0.0,
        };
        let (mut u_err2, mut v_err2) = (0.0, 0.0);
        for (slot, outcome) in blocks.iter_mut().zip(outcomes) {
            report.mean_iterations += outcome.iterations as f64;
            report.max_iterations = report.max_iterations.max(outcome.iterations);
            report.not_converged += usize::from(!outcome.converged);
            report.mean_residual += outcome.residual;
            u_err2 += outcome.u_err2;
            v_err2 += outcome.v_err2;
            *slot = outcome.block;
        }
        if count > 0 {
            let n = count as f64;
            report.mean_iterations /= n;
            report.mean_residual /= n;
            let u_slots = slots.iter().filter(|s| s.channel(p) == Channel::U).count() as f64;
            let v_slots = slots.len() as f64 - u_slots;
            report.u_channel_rms_error = (u_err2 / (n * u_slots)).sqrt();
            report.v_channel_rms_error = if v_slots > 0.0 { (v_err2 / (n * v_slots)).sqrt() } else { 0.0 };
        }
        sub[k - 1] = assemble_blocks(&blocks, sub_side, sub_side, p.cover_block)?;
        reports.push(report);
    }

    let stego = QuadSample { sub }.inverse_subsample()?.with_depth(crate::raster::DepthTag::Float);
    let capacity_bpp = p.capacity_bpp_per_secret() * secrets.len() as f64;
    Ok((stego, EmbedReport { sub_images: reports, capacity_bpp }))
}

/// Blind extraction: only the stego image and the key are needed. Returns the
/// secrets in assignment order.
pub fn extract_images<T: Scalar>(stego: &Raster<T>, key: &StegoKey) -> Result<Vec<Raster<T>>> {
    let pipe = Pipeline::new(key)?;
    let p = &pipe.params;
    pipe.check_cover(stego, "stego image")?;
    if key.assignment.is_empty() {
        return Err(Error::invariant("assignment", "key assigns no sub-images"));
    }
    let quad = stego.subsample()?;
    key.assignment
        .iter()
        .map(|&k| {
            let blocks = partition_blocks(quad.get(k), p.cover_block)?;
            let coeffs = blocks[..p.secret_blocks()]
                .par_iter()
                .map(|block| extract_rule(&pipe.measure_block(block)?, p))
                .collect::<Result<Vec<_>>>()?;
            SecretCoeffs { blocks: coeffs }.to_raster(p.secret_side, &pipe.secret_tf)
        })
        .collect()
}
