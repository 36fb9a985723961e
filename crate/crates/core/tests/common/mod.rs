//! Reference implementations shared by the integration tests. Nothing here
//! calls into the solver under test.
#![allow(dead_code)]

use sabmis::measure::{GaussianStream, MeasurementMatrix, SplitMix64};
use sabmis::raster::read_pgm;
use sabmis::RasterF64;

// Resolves from the core crate and from sibling crates that include this file.
pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data")
}

pub fn data(rel: &str) -> RasterF64 {
    read_pgm(data_dir().join(rel)).unwrap()
}

pub const COVERS: [&str; 2] = ["camera", "astronaut"];
pub const SECRETS: [&str; 4] = ["1_camera", "2_astronaut", "3_moon", "4_coffee"];

pub fn cover(name: &str) -> RasterF64 {
    data(&format!("covers/{name}.pgm"))
}

pub fn secrets() -> Vec<RasterF64> {
    SECRETS.iter().map(|s| data(&format!("secrets/{s}.pgm"))).collect()
}

/// Random LASSO instance: `(Φ, y, λ)` with `λ` a random fraction of
/// `‖Φᵀy‖∞`, the value above which the solution is zero.
pub struct Instance {
    pub phi: MeasurementMatrix<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut pick = SplitMix64::new(seed);
    let m = 2 + (pick.next_u64() % 19) as usize;
    let n = 1 + (pick.next_u64() % 10) as usize;
    let mut g = GaussianStream::new(seed.wrapping_mul(31).wrapping_add(7));
    let phi = MeasurementMatrix::from_rows(m, n, g.by_ref().take(m * n).collect()).unwrap();
    let y: Vec<f64> = g.by_ref().take(m).map(|v| 3.0 * v).collect();
    let lambda = pick.next_open01() * inf_norm(&phi.apply_transpose(&y));
    Instance { phi, y, lambda }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

pub fn objective(phi: &MeasurementMatrix<f64>, y: &[f64], lambda: f64, s: &[f64]) -> f64 {
    let r: f64 = phi.apply(s).iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    0.5 * r + lambda * s.iter().map(|v| v.abs()).sum::<f64>()
}

fn largest_eigenvalue(phi: &MeasurementMatrix<f64>) -> f64 {
    let mut v = vec![1.0; phi.cols()];
    let mut est = 0.0;
    for _ in 0..500 {
        let w = phi.apply_transpose(&phi.apply(&v));
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        est = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.iter().map(|x| x / norm).collect();
    }
    est
}

/// Accelerated proximal gradient (FISTA) run until successive iterates move
/// less than `tol`.
pub fn fista(phi: &MeasurementMatrix<f64>, y: &[f64], lambda: f64, tol: f64) -> Vec<f64> {
    let n = phi.cols();
    let step = 1.0 / (1.01 * largest_eigenvalue(phi)).max(1e-12);
    let soft = |v: f64, k: f64| v.signum() * (v.abs() - k).max(0.0);
    let (mut x, mut z, mut t) = (vec![0.0; n], vec![0.0; n], 1.0f64);
    for _ in 0..2_000_000 {
        let r: Vec<f64> = phi.apply(&z).iter().zip(y).map(|(a, b)| a - b).collect();
        let g = phi.apply_transpose(&r);
        let next: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| soft(zi - step * gi, step * lambda)).collect();
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let moved = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        z = next.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        x = next;
        t = t_next;
        if moved < tol {
            break;
        }
    }
    x
}

/// Largest violation of the LASSO optimality conditions
/// `Φᵀ(y − Φs) ∈ λ ∂‖s‖₁`.
pub fn kkt_violation(phi: &MeasurementMatrix<f64>, y: &[f64], lambda: f64, s: &[f64]) -> f64 {
    let r: Vec<f64> = y.iter().zip(phi.apply(s)).map(|(a, b)| a - b).collect();
    let g = phi.apply_transpose(&r);
    g.iter()
        .zip(s)
        .map(|(&gi, &si)| if si != 0.0 { (gi - lambda * si.signum()).abs() } else { (gi.abs() - lambda).max(0.0) })
        .fold(0.0, f64::max)
}

/// Least squares via normal equations and Gaussian elimination with partial
/// pivoting.
pub fn least_squares(phi: &MeasurementMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let n = phi.cols();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| (0..phi.rows()).map(|k| phi.get(k, i) * phi.get(k, j)).sum()).collect();
            row.push((0..phi.rows()).map(|k| phi.get(k, i) * y[k]).sum());
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..=n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        x[r] = (a[r][n] - (r + 1..n).map(|c| a[r][c] * x[c]).sum::<f64>()) / a[r][r];
    }
    x
}
