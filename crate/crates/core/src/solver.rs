//! LASSO via ADMM:
//!
//! ```text
//! minimize (1/2)‖Φs − y‖² + λ‖s‖₁
//! ```
//!
//! Every block of an image shares the same `Φ`, so the `(ΦᵀΦ + ρI)` Cholesky
//! factor and `Φᵀ` are computed once ([`prepare`]) and reused for each
//! right-hand side.

use crate::error::{Error, Result};
use crate::measure::MeasurementMatrix;
use crate::scalar::{norm2, Scalar};

/// `sign(v) * max(|v| - kappa, 0)`.
#[inline]
pub fn shrink<T: Scalar>(v: T, kappa: T) -> T {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        T::zero()
    }
}

/// Elementwise proximal operator of `kappa‖·‖₁`.
pub fn soft_threshold<T: Scalar>(v: &[T], kappa: T) -> Vec<T> {
    debug_assert!(kappa >= T::zero());
    v.iter().map(|&x| shrink(x, kappa)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rho: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { rho: 1.0, eps_abs: 1e-6, eps_rel: 1e-4, max_iter: 500 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0) {
            return Err(Error::Config("stopping tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// One LASSO instance.
#[derive(Debug, Clone, Copy)]
pub struct LassoProblem<'a, T> {
    pub phi: &'a MeasurementMatrix<T>,
    pub y: &'a [T],
    pub lambda: T,
}

impl<T: Scalar> LassoProblem<'_, T> {
    pub fn validate(&self) -> Result<()> {
        if self.y.len() != self.phi.rows() {
            return Err(Error::Dimension(format!(
                "y has {} entries, matrix has {} rows",
                self.y.len(),
                self.phi.rows()
            )));
        }
        if !(self.lambda >= T::zero()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }

    /// `(1/2)‖Φs − y‖² + λ‖s‖₁`.
    pub fn objective(&self, s: &[T]) -> T {
        lasso_objective(self.phi, self.y, self.lambda, s)
    }
}

pub(crate) fn lasso_objective<T: Scalar>(phi: &MeasurementMatrix<T>, y: &[T], lambda: T, s: &[T]) -> T {
    let fit: T = phi.apply(s).iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let l1: T = s.iter().map(|v| v.abs()).sum();
    T::of(0.5) * fit + lambda * l1
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult<T> {
    /// The sparse `z` iterate.
    pub s: Vec<T>,
    pub iterations: usize,
    pub primal_residual: T,
    pub dual_residual: T,
    pub objective: T,
    /// False when `max_iter` was reached before the stopping rule fired.
    pub converged: bool,
}

/// Cholesky factor of `ΦᵀΦ + ρI` plus `Φᵀ`, valid for one `(Φ, ρ)` pair.
#[derive(Debug, Clone)]
pub struct CachedFactorization<T> {
    n: usize,
    rho: T,
    /// Lower-triangular factor, row-major `n x n`.
    lower: Vec<T>,
    /// `Φᵀ`, row-major `n x m`.
    phi_t: Vec<T>,
    m: usize,
    fingerprint: u64,
}

/// FNV-1a over the bit patterns of `Φ` (with its shape) and `ρ`.
fn fingerprint<T: Scalar>(phi: &MeasurementMatrix<T>, rho: T) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01B3;
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    let mut feed = |word: u64| {
        for byte in word.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    feed(phi.rows() as u64);
    feed(phi.cols() as u64);
    for v in phi.entries() {
        feed(v.as_f64().to_bits());
    }
    feed(rho.as_f64().to_bits());
    h
}

/// Factorizes `ΦᵀΦ + ρI`.
pub fn prepare<T: Scalar>(phi: &MeasurementMatrix<T>, rho: f64) -> Result<CachedFactorization<T>> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Config(format!("rho must be positive, got {rho}")));
    }
    let n = phi.cols();
    let rho_t = T::of(rho);
    let mut a = phi.gram();
    for i in 0..n {
        a[i * n + i] = a[i * n + i] + rho_t;
    }
    let lower = cholesky(&a, n)?;
    let m = phi.rows();
    let mut phi_t = vec![T::zero(); n * m];
    for i in 0..m {
        for j in 0..n {
            phi_t[j * m + i] = phi.get(i, j);
        }
    }
    Ok(CachedFactorization { n, rho: rho_t, lower, phi_t, m, fingerprint: fingerprint(phi, rho_t) })
}

fn cholesky<T: Scalar>(a: &[T], n: usize) -> Result<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(T::zero(), T::max);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d = d - l[j * n + k] * l[j * n + k];
        }
        if !(d > scale * T::epsilon()) {
            return Err(Error::Numerical(format!(
                "system matrix is not positive definite (pivot {j} = {d})"
            )));
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v = v - l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / d;
        }
    }
    Ok(l)
}

impl<T: Scalar> CachedFactorization<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn matches(&self, phi: &MeasurementMatrix<T>, rho: f64) -> bool {
        self.n == phi.cols() && self.m == phi.rows() && self.fingerprint == fingerprint(phi, T::of(rho))
    }

    /// `L Lᵀ`, i.e. the factorized `ΦᵀΦ + ρI`.
    pub fn system_matrix(&self) -> Vec<T> {
        let n = self.n;
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..=i.min(j)).map(|k| self.lower[i * n + k] * self.lower[j * n + k]).sum();
            }
        }
        out
    }

    /// `Φᵀ y`.
    pub fn phi_t_apply(&self, y: &[T]) -> Vec<T> {
        debug_assert_eq!(y.len(), self.m);
        self.phi_t
            .chunks_exact(self.m)
            .map(|row| row.iter().zip(y).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Solves `(ΦᵀΦ + ρI) x = rhs` in place.
    fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n;
        let l = &self.lower;
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v = v - l[i * n + k] * x[k];
            }
            x[i] = v / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in i + 1..n {
                v = v - l[k * n + i] * x[k];
            }
            x[i] = v / l[i * n + i];
        }
    }

    /// ADMM on the cached system. `y` must have `Φ.rows()` entries.
    pub fn solve(&self, y: &[T], lambda: T, cfg: &SolverConfig) -> SolverResult<T> {
        let q = self.phi_t_apply(y);
        let n = self.n;
        let rho = self.rho;
        let kappa = lambda / rho;
        let sqrt_n = T::of_usize(n).sqrt();
        let (eps_abs, eps_rel) = (T::of(cfg.eps_abs), T::of(cfg.eps_rel));

        let mut s = vec![T::zero(); n];
        let mut z = vec![T::zero(); n];
        let mut u = vec![T::zero(); n];
        let mut z_prev = vec![T::zero(); n];
        let mut primal = T::zero();
        let mut dual = T::zero();
        let mut iterations = 0;
        let mut converged = false;

        while iterations < cfg.max_iter {
            iterations += 1;
            for i in 0..n {
                s[i] = q[i] + rho * (z[i] - u[i]);
            }
            self.solve_in_place(&mut s);
            z_prev.copy_from_slice(&z);
            for i in 0..n {
                z[i] = shrink(s[i] + u[i], kappa);
                u[i] = u[i] + s[i] - z[i];
            }

            let mut r2 = T::zero();
            let mut d2 = T::zero();
            for i in 0..n {
                let r = s[i] - z[i];
                let d = rho * (z[i] - z_prev[i]);
                r2 = r2 + r * r;
                d2 = d2 + d * d;
            }
            primal = r2.sqrt();
            dual = d2.sqrt();
            let eps_pri = sqrt_n * eps_abs + eps_rel * norm2(&s).max(norm2(&z));
            let eps_dual = sqrt_n * eps_abs + eps_rel * rho * norm2(&u);
            if primal <= eps_pri && dual <= eps_dual {
                converged = true;
                break;
            }
        }

        let objective = self.objective(y, lambda, &z);
        SolverResult { s: z, iterations, primal_residual: primal, dual_residual: dual, objective, converged }
    }

    /// `(1/2)‖Φs − y‖² + λ‖s‖₁` evaluated through the stored `Φᵀ`.
    pub fn objective(&self, y: &[T], lambda: T, s: &[T]) -> T {
        let mut fit = T::zero();
        for (i, &yi) in y.iter().enumerate() {
            let mut r = -yi;
            for (j, &sj) in s.iter().enumerate() {
                r = r + self.phi_t[j * self.m + i] * sj;
            }
            fit = fit + r * r;
        }
        let l1: T = s.iter().map(|v| v.abs()).sum();
        T::of(0.5) * fit + lambda * l1
    }
}

/// Solves one LASSO instance, reusing `cache` when it was prepared for the same
/// `(Φ, ρ)`; a mismatched cache is rejected.
pub fn solve_lasso<T: Scalar>(
    p: &LassoProblem<'_, T>,
    cfg: &SolverConfig,
    cache: Option<&CachedFactorization<T>>,
) -> Result<SolverResult<T>> {
    p.validate()?;
    cfg.validate()?;
    let owned;
    let fact = match cache {
        Some(c) if c.matches(p.phi, cfg.rho) => c,
        Some(_) => {
            return Err(Error::Config("cached factorization does not match (phi, rho)".into()));
        }
        None => {
            owned = prepare(p.phi, cfg.rho)?;
            &owned
        }
    };
    Ok(fact.solve(p.y, p.lambda, cfg))
}
