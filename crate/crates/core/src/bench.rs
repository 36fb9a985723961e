//! Corpus benchmark: stego PSNR for 1..=4 embedded secrets (averaged over
//! every choice of secrets), the full metric battery at the maximum count,
//! and extraction quality on both the lossless and the 8-bit path.
//!
//! The report is rewritten after every cover, so an interrupted run leaves a
//! valid JSON file whose `completed` list lets a rerun skip finished covers.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize};

use crate::codec::{embed_images, extract_images, CodecConfig, EmbedReport};
use crate::error::{Error, Result};
use crate::measure::{StegoKey, StegoParams};
use crate::metrics::{evaluate, psnr_from_json, psnr_json, MetricsReport};
use crate::raster::{read_pgm, read_srf, QuadSample, Raster};

/// Named gray-scale image of a corpus.
#[derive(Debug, Clone)]
pub struct NamedImage {
    pub name: String,
    pub image: Raster<f64>,
}

/// Reads an image, choosing the container by extension (`.srf` or PGM).
pub fn load_image(path: &Path) -> Result<Raster<f64>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("srf") => read_srf(path),
        _ => read_pgm(path),
    }
}

fn is_image(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("pgm" | "srf")
    )
}

/// Image files of a directory, sorted by file name.
pub fn list_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image(p))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Loads at most `limit` images of a directory.
pub fn load_corpus(dir: &Path, limit: usize) -> Result<Vec<NamedImage>> {
    list_corpus(dir)?
        .into_iter()
        .take(limit)
        .map(|p| Ok(NamedImage { name: stem(&p), image: load_image(&p)? }))
        .collect()
}

/// PSNR of every secret choice for one secret count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsnrCell {
    pub num_secrets: usize,
    /// 0-based secret indices of each choice, lexicographic.
    pub choices: Vec<Vec<usize>>,
    #[serde(serialize_with = "ser_psnr_vec", deserialize_with = "de_psnr_vec")]
    pub psnr_db: Vec<f64>,
    #[serde(serialize_with = "psnr_json", deserialize_with = "psnr_from_json")]
    pub mean_psnr_db: f64,
}

fn ser_psnr_vec<S: serde::Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    #[derive(Serialize)]
    struct Wrap(#[serde(serialize_with = "psnr_json")] f64);
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &x in v {
        seq.serialize_element(&Wrap(x))?;
    }
    seq.end()
}

fn de_psnr_vec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "psnr_from_json")] f64);
    Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionEntry {
    pub secret: String,
    /// Extracted from the unquantized stego image.
    pub float_path: MetricsReport,
    /// Extracted after quantizing the stego image to 8 bits.
    pub u8_path: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub not_converged: usize,
    pub mean_residual: f64,
    pub u_channel_rms_error: f64,
    pub v_channel_rms_error: f64,
}

impl SolverSummary {
    fn from_reports(reports: &[EmbedReport]) -> Self {
        let subs: Vec<_> = reports.iter().flat_map(|r| &r.sub_images).collect();
        let n = subs.len().max(1) as f64;
        let blocks: f64 = subs.iter().map(|s| s.blocks as f64).sum::<f64>().max(1.0);
        Self {
            mean_iterations: subs.iter().map(|s| s.mean_iterations * s.blocks as f64).sum::<f64>() / blocks,
            max_iterations: subs.iter().map(|s| s.max_iterations).max().unwrap_or(0),
            not_converged: subs.iter().map(|s| s.not_converged).sum(),
            mean_residual: subs.iter().map(|s| s.mean_residual).sum::<f64>() / n,
            u_channel_rms_error: (subs.iter().map(|s| s.u_channel_rms_error.powi(2)).sum::<f64>() / n).sqrt(),
            v_channel_rms_error: (subs.iter().map(|s| s.v_channel_rms_error.powi(2)).sum::<f64>() / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverEntry {
    pub cover: String,
    /// One cell per secret count, ascending.
    pub psnr: Vec<PsnrCell>,
    /// Cover vs stego with every secret embedded.
    pub stego_metrics: MetricsReport,
    pub extraction: Vec<ExtractionEntry>,
    pub solver: SolverSummary,
    pub seconds: f64,
}

impl CoverEntry {
    pub fn mean_psnr_curve(&self) -> Vec<f64> {
        self.psnr.iter().map(|c| c.mean_psnr_db).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub item: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub c: usize,
    pub lambda_scale: f64,
    pub rho: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    pub secrets: Vec<String>,
    /// Names of covers whose entry is final.
    pub completed: Vec<String>,
    pub covers: Vec<CoverEntry>,
    pub failures: Vec<Failure>,
}

impl BenchReport {
    fn new(key: &StegoKey, cfg: &CodecConfig, secrets: &[NamedImage]) -> Self {
        Self {
            seed: key.seed,
            c: key.params.c,
            lambda_scale: cfg.lambda_scale,
            rho: cfg.solver.rho,
            eps_abs: cfg.solver.eps_abs,
            eps_rel: cfg.solver.eps_rel,
            max_iter: cfg.solver.max_iter,
            secrets: secrets.iter().map(|s| s.name.clone()).collect(),
            completed: Vec::new(),
            covers: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// Same configuration, so finished entries can be reused.
    fn compatible(&self, other: &BenchReport) -> bool {
        self.seed == other.seed
            && self.c == other.c
            && self.lambda_scale == other.lambda_scale
            && self.rho == other.rho
            && self.eps_abs == other.eps_abs
            && self.eps_rel == other.eps_rel
            && self.max_iter == other.max_iter
            && self.secrets == other.secrets
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cover,num_secrets,mean_psnr_db\n");
        for entry in &self.covers {
            for cell in &entry.psnr {
                out.push_str(&format!("{},{},{:.4}\n", entry.cover, cell.num_secrets, cell.mean_psnr_db));
            }
        }
        out
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn choices(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Key for embedding secret `j` of `which` into sub-image `j + 1`.
pub fn key_for_choice(base: &StegoKey, which: &[usize]) -> Result<StegoKey> {
    let params = StegoParams { num_secrets: which.len(), ..base.params.clone() };
    StegoKey::with_assignment(base.seed, params, which.iter().map(|j| j + 1).collect())
}

/// Stego image for a choice of secrets, assembled from single-secret runs.
///
/// Sub-images are processed independently, so the result equals a direct
/// [`embed_images`] call with [`key_for_choice`].
fn compose(cover: &QuadSample<f64>, singles: &[QuadSample<f64>], which: &[usize]) -> Result<Raster<f64>> {
    let mut sub = cover.sub.clone();
    for &j in which {
        sub[j] = singles[j].sub[j].clone();
    }
    QuadSample::new(sub)?.inverse_subsample()
}

/// Runs the whole protocol for one cover. At most four secrets are used.
pub fn bench_cover(
    name: &str,
    cover: &Raster<f64>,
    secrets: &[NamedImage],
    key: &StegoKey,
    cfg: &CodecConfig,
) -> Result<CoverEntry> {
    let start = Instant::now();
    let secrets = &secrets[..secrets.len().min(4)];
    if secrets.is_empty() {
        return Err(Error::Precondition("bench needs at least one secret".into()));
    }
    let n = secrets.len();

    let mut singles = Vec::with_capacity(n);
    let mut reports = Vec::with_capacity(n);
    for (j, secret) in secrets.iter().enumerate() {
        let (stego, report) = embed_images(cover, &[secret.image.clone()], &key_for_choice(key, &[j])?, cfg)?;
        singles.push(stego.subsample()?);
        reports.push(report);
    }
    let cover_quad = cover.subsample()?;

    let mut psnr = Vec::with_capacity(n);
    for k in 1..=n {
        let picks = choices(n, k);
        let values = picks
            .iter()
            .map(|which| Ok(evaluate(cover, &compose(&cover_quad, &singles, which)?)?.psnr_db))
            .collect::<Result<Vec<f64>>>()?;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        psnr.push(PsnrCell { num_secrets: k, choices: picks, psnr_db: values, mean_psnr_db: mean });
    }

    let all: Vec<usize> = (0..n).collect();
    let full = compose(&cover_quad, &singles, &all)?;
    let stego_metrics = evaluate(cover, &full)?;
    let full_key = key_for_choice(key, &all)?;
    let from_float = extract_images(&full, &full_key)?;
    let from_u8 = extract_images(&full.quantize_u8(), &full_key)?;
    let extraction = secrets
        .iter()
        .zip(from_float.iter().zip(&from_u8))
        .map(|(s, (f, q))| {
            Ok(ExtractionEntry {
                secret: s.name.clone(),
                float_path: evaluate(&s.image, f)?,
                u8_path: evaluate(&s.image, q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CoverEntry {
        cover: name.to_string(),
        psnr,
        stego_metrics,
        extraction,
        solver: SolverSummary::from_reports(&reports),
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Benchmarks every cover of `covers_dir` against the first four secrets of
/// `secrets_dir`, updating `report_path` after each cover.
pub fn run_bench(
    covers_dir: &Path,
    secrets_dir: &Path,
    key: &StegoKey,
    cfg: &CodecConfig,
    report_path: &Path,
    csv_path: Option<&Path>,
) -> Result<BenchReport> {
    let covers = list_corpus(covers_dir)?;
    if covers.is_empty() {
        return Err(Error::Precondition(format!("no covers in {}", covers_dir.display())));
    }
    let secrets = load_corpus(secrets_dir, 4)?;
    if secrets.is_empty() {
        return Err(Error::Precondition(format!("no secrets in {}", secrets_dir.display())));
    }

    let mut report = BenchReport::new(key, cfg, &secrets);
    if let Ok(text) = fs::read_to_string(report_path) {
        if let Ok(previous) = serde_json::from_str::<BenchReport>(&text) {
            if previous.compatible(&report) {
                report.covers = previous
                    .covers
                    .into_iter()
                    .filter(|c| previous.completed.contains(&c.cover))
                    .collect();
                report.completed = report.covers.iter().map(|c| c.cover.clone()).collect();
            }
        }
    }

    for path in covers {
        let name = stem(&path);
        if report.completed.contains(&name) {
            continue;
        }
        let outcome = load_image(&path).and_then(|cover| bench_cover(&name, &cover, &secrets, key, cfg));
        match outcome {
            Ok(entry) => {
                report.covers.push(entry);
                report.completed.push(name);
            }
            Err(e) => report.failures.push(Failure { item: name, error: e.to_string() }),
        }
        write_atomic(report_path, &report.to_json())?;
    }
    write_atomic(report_path, &report.to_json())?;
    if let Some(csv) = csv_path {
        fs::write(csv, report.to_csv())?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choice_enumeration() {
        assert_eq!(choices(4, 1).len(), 4);
        assert_eq!(choices(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(choices(4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(choices(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn metrics_report_round_trip() {
        let rec = MetricsReport { psnr_db: f64::INFINITY, mssim: 1.0, ncc: 1.0, nae: 0.0, entropy_ref: 7.0, entropy_test: 7.0 };
        let text = serde_json::to_string(&rec).unwrap();
        assert!(text.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<MetricsReport>(&text).unwrap(), rec);

        let cell = PsnrCell { num_secrets: 1, choices: vec![vec![0]], psnr_db: vec![f64::INFINITY], mean_psnr_db: f64::INFINITY };
        let text = serde_json::to_string(&cell).unwrap();
        assert_eq!(serde_json::from_str::<PsnrCell>(&text).unwrap(), cell);
    }
}
