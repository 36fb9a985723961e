//! Fidelity measures between a reference and a test image: PSNR, mean SSIM,
//! NCC, NAE, entropy and Sobel edge maps.
//!
//! NCC and NAE are asymmetric; the first argument is always the reference.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::raster::{round_clamp, Raster};
use crate::scalar::Scalar;

const PEAK: f64 = 255.0;

fn check_dims<A: Scalar, B: Scalar>(a: &Raster<A>, b: &Raster<B>) -> Result<()> {
    if !a.same_dims(b) {
        return Err(Error::Dimension(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

fn pairs<'a, T: Scalar>(a: &'a Raster<T>, b: &'a Raster<T>) -> impl Iterator<Item = (f64, f64)> + 'a {
    a.samples().iter().zip(b.samples()).map(|(x, y)| (x.as_f64(), y.as_f64()))
}

/// `10 log10(255² / MSE)`; `f64::INFINITY` for identical rasters.
pub fn psnr<T: Scalar>(a: &Raster<T>, b: &Raster<T>) -> Result<f64> {
    check_dims(a, b)?;
    let sse: f64 = pairs(a, b).map(|(x, y)| (x - y) * (x - y)).sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / (sse / a.len() as f64)).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = k.iter().sum();
    k.map(|v| v / total)
}

/// Separable "valid" filtering: output is `(w-10) x (h-10)`.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; ow * h];
    for r in 0..h {
        let row = &src[r * w..(r + 1) * w];
        for c in 0..ow {
            horiz[r * ow + c] = k.iter().zip(&row[c..c + SSIM_WINDOW]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for (i, &kv) in k.iter().enumerate() {
            let src_row = &horiz[(r + i) * ow..(r + i + 1) * ow];
            for (o, &v) in out[r * ow..(r + 1) * ow].iter_mut().zip(src_row) {
                *o += kv * v;
            }
        }
    }
    out
}

/// Mean SSIM over every full 11x11 Gaussian window (σ = 1.5, K1 = 0.01,
/// K2 = 0.03, L = 255).
pub fn mssim<T: Scalar>(a: &Raster<T>, b: &Raster<T>) -> Result<f64> {
    check_dims(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::Precondition(format!("SSIM needs at least 11x11 pixels, got {w}x{h}")));
    }
    let k = gaussian_kernel();
    let x = a.to_f64_vec();
    let y = b.to_f64_vec();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let mu_x = filter_valid(&x, w, h, &k);
    let mu_y = filter_valid(&y, w, h, &k);
    let s_xx = filter_valid(&xx, w, h, &k);
    let s_yy = filter_valid(&yy, w, h, &k);
    let s_xy = filter_valid(&xy, w, h, &k);
    let c1 = (0.01 * PEAK).powi(2);
    let c2 = (0.03 * PEAK).powi(2);
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let var_x = s_xx[i] - mx * mx;
            let var_y = s_yy[i] - my * my;
            let cov = s_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (var_x + var_y + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}

/// `Σ(a·b) / Σ(a²)`.
pub fn ncc<T: Scalar>(a: &Raster<T>, b: &Raster<T>) -> Result<f64> {
    check_dims(a, b)?;
    let (num, den) = pairs(a, b).fold((0.0, 0.0), |(n, d), (x, y)| (n + x * y, d + x * x));
    if den == 0.0 {
        return Err(Error::Precondition("NCC reference image is all zero".into()));
    }
    Ok(num / den)
}

/// `Σ|a − b| / Σ|a|`.
pub fn nae<T: Scalar>(a: &Raster<T>, b: &Raster<T>) -> Result<f64> {
    check_dims(a, b)?;
    let (num, den) = pairs(a, b).fold((0.0, 0.0), |(n, d), (x, y)| (n + (x - y).abs(), d + x.abs()));
    if den == 0.0 {
        return Err(Error::Precondition("NAE reference image is all zero".into()));
    }
    Ok(num / den)
}

/// Shannon entropy (bits) of the 256-bin histogram of the 8-bit quantized
/// image.
pub fn entropy<T: Scalar>(a: &Raster<T>) -> f64 {
    let mut hist = [0usize; 256];
    for v in a.samples() {
        hist[round_clamp(v.as_f64(), 255.0) as usize] += 1;
    }
    let n = a.len() as f64;
    hist.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Binary edge map, 1 where an edge was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub edges: Vec<u8>,
}

impl EdgeMap {
    pub fn count(&self) -> usize {
        self.edges.iter().filter(|&&e| e == 1).count()
    }

    /// Fraction of pixels where the two maps disagree.
    pub fn disagreement(&self, other: &EdgeMap) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::Dimension("edge maps differ in size".into()));
        }
        let diff = self.edges.iter().zip(&other.edges).filter(|(a, b)| a != b).count();
        Ok(diff as f64 / self.edges.len() as f64)
    }

    pub fn to_raster(&self) -> Raster<f64> {
        let samples = self.edges.iter().map(|&e| if e == 1 { 255.0 } else { 0.0 }).collect();
        Raster::new(self.width, self.height, samples).expect("edge map dims are valid")
    }
}

/// Sobel gradient magnitude thresholded at `threshold * max magnitude`.
/// Border pixels are never marked.
pub fn edge_map<T: Scalar>(a: &Raster<T>, threshold: f64) -> Result<EdgeMap> {
    let (w, h) = (a.width(), a.height());
    if w < 3 || h < 3 {
        return Err(Error::Precondition(format!("edge map needs at least 3x3 pixels, got {w}x{h}")));
    }
    let px = |r: usize, c: usize| a.get(r, c).as_f64();
    let mut mag = vec![0.0; w * h];
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let gx = px(r - 1, c + 1) + 2.0 * px(r, c + 1) + px(r + 1, c + 1)
                - px(r - 1, c - 1)
                - 2.0 * px(r, c - 1)
                - px(r + 1, c - 1);
            let gy = px(r + 1, c - 1) + 2.0 * px(r + 1, c) + px(r + 1, c + 1)
                - px(r - 1, c - 1)
                - 2.0 * px(r - 1, c)
                - px(r - 1, c + 1);
            mag[r * w + c] = gx.hypot(gy);
        }
    }
    let max = mag.iter().copied().fold(0.0, f64::max);
    let cut = threshold * max;
    let edges = mag.iter().map(|&m| u8::from(max > 0.0 && m > cut)).collect();
    Ok(EdgeMap { width: w, height: h, edges })
}

// PSNR of identical images is +inf, which JSON cannot hold; it travels as "inf".
pub(crate) fn psnr_json<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

pub(crate) fn psnr_from_json<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Num(f64),
        Text(String),
    }
    match Cell::deserialize(d)? {
        Cell::Num(v) => Ok(v),
        Cell::Text(s) if s == "inf" => Ok(f64::INFINITY),
        Cell::Text(s) => Err(serde::de::Error::custom(format!("bad psnr {s:?}"))),
    }
}

/// The full battery for one image pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(serialize_with = "psnr_json", deserialize_with = "psnr_from_json")]
    pub psnr_db: f64,
    pub mssim: f64,
    pub ncc: f64,
    pub nae: f64,
    pub entropy_ref: f64,
    pub entropy_test: f64,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Quantizes both images to 8 bits, then evaluates every metric.
pub fn evaluate<T: Scalar>(reference: &Raster<T>, test: &Raster<T>) -> Result<MetricsReport> {
    check_dims(reference, test)?;
    let a = reference.quantize_u8();
    let b = test.quantize_u8();
    Ok(MetricsReport {
        psnr_db: psnr(&a, &b)?,
        mssim: mssim(&a, &b)?,
        ncc: ncc(&a, &b)?,
        nae: nae(&a, &b)?,
        entropy_ref: entropy(&a),
        entropy_test: entropy(&b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(v: f64) -> Raster<f64> {
        Raster::new(1, 1, vec![v]).unwrap()
    }

    fn textured(w: usize, h: usize) -> Raster<f64> {
        Raster::from_fn(w, h, |r, c| {
            128.0 + 60.0 * ((r as f64) * 0.3).sin() * ((c as f64) * 0.17).cos() + ((r * 31 + c * 17) % 23) as f64
        })
        .unwrap()
    }

    #[test]
    fn psnr_examples() {
        assert_eq!(psnr(&one(3.0), &one(3.0)).unwrap(), f64::INFINITY);
        assert!((psnr(&one(0.0), &one(255.0)).unwrap() - 0.0).abs() < 1e-12);
        assert!((psnr(&one(0.0), &one(25.5)).unwrap() - 20.0).abs() < 1e-12);
        let a = textured(16, 16);
        let b = a.cast::<f64>().quantize_u8();
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        assert!(psnr(&one(0.0), &Raster::new(2, 1, vec![0.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn mssim_identity_and_inversion() {
        let a = textured(32, 24);
        assert!((mssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let inv = Raster::from_fn(32, 24, |r, c| 255.0 - a.get(r, c)).unwrap();
        assert!(mssim(&a, &inv).unwrap() < 0.5);
        let small = Raster::filled(10, 12, 1.0f64).unwrap();
        assert!(matches!(mssim(&small, &small), Err(Error::Precondition(_))));
    }

    #[test]
    fn ncc_and_nae_examples() {
        let a = textured(8, 8);
        assert!((ncc(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let twice = Raster::from_fn(8, 8, |r, c| 2.0 * a.get(r, c)).unwrap();
        assert!((ncc(&a, &twice).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(nae(&a, &a).unwrap(), 0.0);
        let c128 = Raster::filled(4, 4, 128.0f64).unwrap();
        let c129 = Raster::filled(4, 4, 129.0f64).unwrap();
        assert!((nae(&c128, &c129).unwrap() - 1.0 / 128.0).abs() < 1e-15);
        let zero = Raster::filled(4, 4, 0.0f64).unwrap();
        assert!(ncc(&zero, &c128).is_err());
        assert!(nae(&zero, &c128).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&Raster::filled(5, 5, 17.0f64).unwrap()), 0.0);
        let ramp = Raster::from_fn(16, 32, |r, c| ((r * 16 + c) % 256) as f64).unwrap();
        assert!((entropy(&ramp) - 8.0).abs() < 1e-12);
        let half = Raster::new(2, 1, vec![0.0, 255.0]).unwrap();
        assert!((entropy(&half) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_examples() {
        let flat = Raster::filled(6, 6, 90.0f64).unwrap();
        assert_eq!(edge_map(&flat, 0.2).unwrap().count(), 0);
        let step = Raster::from_fn(8, 6, |_, c| if c < 4 { 0.0 } else { 200.0 }).unwrap();
        let map = edge_map(&step, 0.2).unwrap();
        for r in 1..5 {
            for c in 0..8 {
                let expect = u8::from(c == 3 || c == 4);
                assert_eq!(map.edges[r * 8 + c], expect, "({r},{c})");
            }
        }
        assert!(edge_map(&Raster::filled(2, 5, 0.0f64).unwrap(), 0.2).is_err());
    }

    #[test]
    fn report_json_uses_inf_sentinel() {
        let a = textured(16, 16);
        let report = evaluate(&a, &a).unwrap();
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["psnr_db"], "inf");
        assert_eq!(json["mssim"], 1.0);
        assert_eq!(json["nae"], 0.0);
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 6);
    }
}
