//! Blind multi-image steganography in the compressed-sensing domain.
//!
//! A cover of side N is split into four parity sub-images. Each sub-image is
//! cut into b x b blocks whose zig-zag ordered DCT spectrum `s = [s_u; s_v]`
//! is measured as `y = [s_u; Phi s_v]`. Secret DCT coefficients are written
//! into fixed slots of `y` on top of copied donor entries, and the stego
//! block is recovered with an l1-regularized least-squares solve. Extraction
//! needs only the stego image and the key.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below name the common instantiations.

pub mod bench;
pub mod codec;
pub mod error;
pub mod measure;
pub mod metrics;
pub mod raster;
mod scalar;
pub mod solver;
pub mod spectral;

pub use codec::{embed_images, extract_images, CodecConfig, EmbedReport};
pub use error::{Error, Result};
pub use measure::{gen_matrix, measure, read_key, write_key, StegoKey, StegoParams};
pub use metrics::{evaluate, MetricsReport};
pub use raster::{DepthTag, PgmDepth, QuadSample, Raster};
pub use scalar::Scalar;
pub use solver::{prepare, solve_lasso, CachedFactorization, LassoProblem, SolverConfig, SolverResult};
pub use spectral::{BlockTransform, DctBasis, Spectrum, ZigZagOrder};

pub type RasterF64 = Raster<f64>;
pub type RasterF32 = Raster<f32>;
pub type SpectrumF64 = Spectrum<f64>;
pub type SpectrumF32 = Spectrum<f32>;
pub type DctBasisF64 = DctBasis<f64>;
pub type DctBasisF32 = DctBasis<f32>;
pub type MeasurementMatrixF64 = measure::MeasurementMatrix<f64>;
pub type MeasurementMatrixF32 = measure::MeasurementMatrix<f32>;
pub type MeasurementVectorF64 = measure::MeasurementVector<f64>;
pub type MeasurementVectorF32 = measure::MeasurementVector<f32>;
