//! Spatial correlation matrices and their spectra.
//!
//! Three Toeplitz families are provided (constant, exponential, tridiagonal),
//! together with the correlation figure `ζ(Φ) = tr(Φ²)/n²`, the Hermitian
//! square root used to colour Gaussian matrices, eigenvalue clustering into
//! distinct values with multiplicities, and majorization predicates.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Relative tolerance used when grouping numerically equal eigenvalues.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

const UNIT_DIAGONAL_TOL: f64 = 1e-12;
const SQRT_EIGEN_FLOOR: f64 = 1e-14;
const SQRT_REJECT_BELOW: f64 = -1e-10;
const MAJORIZATION_SUM_TOL: f64 = 1e-10;

/// Distinct eigenvalues in strictly decreasing order with their multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    distinct: Vec<(f64, usize)>,
    dim: usize,
}

impl Spectrum {
    /// Validates that values strictly decrease and multiplicities are positive.
    pub fn new(distinct: Vec<(f64, usize)>) -> Result<Self> {
        if distinct.is_empty() {
            return domain("spectrum must contain at least one eigenvalue");
        }
        for w in distinct.windows(2) {
            if w[0].0 <= w[1].0 {
                return domain(format!(
                    "eigenvalues must be strictly decreasing, got {} then {}",
                    w[0].0, w[1].0
                ));
            }
        }
        if distinct.iter().any(|&(v, m)| m == 0 || !v.is_finite()) {
            return domain("multiplicities must be positive and eigenvalues finite");
        }
        let dim = distinct.iter().map(|&(_, m)| m).sum();
        Ok(Self { distinct, dim })
    }

    /// Spectrum `{value × dim}` of a scaled identity.
    pub fn scalar(value: f64, dim: usize) -> Self {
        assert!(dim > 0);
        Self { distinct: vec![(value, dim)], dim }
    }

    /// Groups raw eigenvalues: neighbours closer than `tol·(1+|λ|)` share a
    /// group, represented by the group mean.
    pub fn from_eigenvalues(values: &[f64], tol: f64) -> Result<Self> {
        if values.is_empty() {
            return domain("no eigenvalues supplied");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite eigenvalue".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut groups: Vec<(f64, usize)> = Vec::new();
        let mut prev = f64::NAN;
        for v in sorted {
            match groups.last_mut() {
                Some((sum, count)) if (prev - v).abs() < tol * (1.0 + v.abs()) => {
                    *sum += v;
                    *count += 1;
                }
                _ => groups.push((v, 1)),
            }
            prev = v;
        }
        let distinct = groups
            .into_iter()
            .map(|(sum, count)| (sum / count as f64, count))
            .collect();
        Spectrum::new(distinct)
    }

    pub fn distinct(&self) -> &[(f64, usize)] {
        &self.distinct
    }

    /// Number of distinct eigenvalues.
    pub fn num_distinct(&self) -> usize {
        self.distinct.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, k: usize) -> f64 {
        self.distinct[k].0
    }

    pub fn multiplicity(&self, k: usize) -> usize {
        self.distinct[k].1
    }

    /// All eigenvalues, repeated by multiplicity, in decreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.distinct
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m))
            .collect()
    }

    /// `tr(A^k)`.
    pub fn trace_power(&self, k: i32) -> f64 {
        self.distinct
            .iter()
            .map(|&(v, m)| m as f64 * v.powi(k))
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.distinct.len() == 1 && (self.distinct[0].0 - 1.0).abs() < DEFAULT_CLUSTER_TOL
    }
}

/// Hermitian positive-definite matrix with unit diagonal.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    entries: DMatrix<Complex64>,
    // Ascending, as returned by the eigensolver.
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for CorrelationMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl CorrelationMatrix {
    /// Validates the unit diagonal, exact Hermitian symmetry and positive
    /// definiteness of `entries`.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return domain("correlation matrix must be square and non-empty");
        }
        for i in 0..n {
            let d = entries[(i, i)];
            if (d.re - 1.0).abs() > UNIT_DIAGONAL_TOL || d.im.abs() > UNIT_DIAGONAL_TOL {
                return domain(format!("diagonal entry {i} is {d}, expected 1"));
            }
            for j in 0..i {
                if entries[(i, j)] != entries[(j, i)].conj() {
                    return domain(format!("entries ({i},{j}) and ({j},{i}) are not conjugate"));
                }
            }
        }
        let (eigenvalues, eigenvectors) = hermitian_eigen(&entries)?;
        if eigenvalues[0] <= 0.0 {
            return domain(format!(
                "correlation matrix is not positive definite (smallest eigenvalue {})",
                eigenvalues[0]
            ));
        }
        Ok(Self { entries, eigenvalues, eigenvectors, spectrum: OnceLock::new() })
    }

    /// Builds a real symmetric matrix from `f(i, j)` for `i ≠ j`.
    fn real_toeplitz(n: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(f(i.abs_diff(j)), 0.0)
            }
        });
        Self::new(m)
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self::real_toeplitz(n, |_| 0.0).expect("identity is a valid correlation matrix")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().rev().copied().collect()
    }

    /// Spectrum with the default clustering tolerance, computed on first use.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            Spectrum::from_eigenvalues(&self.eigenvalues, DEFAULT_CLUSTER_TOL)
                .expect("eigenvalues of a validated matrix are finite")
        })
    }

    pub fn is_identity(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entries[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    /// `ζ(Φ) = tr(Φ²)/n²`.
    pub fn correlation_figure(&self) -> f64 {
        correlation_figure(self)
    }

    /// Hermitian positive-definite square root.
    pub fn sqrt(&self) -> DMatrix<Complex64> {
        reconstruct(&self.eigenvalues, &self.eigenvectors, |v| v.max(SQRT_EIGEN_FLOOR).sqrt())
    }
}

fn check_rho(rho: f64, upper: f64, what: &str) -> Result<()> {
    if !(0.0..upper).contains(&rho) {
        return domain(format!("{what} correlation coefficient {rho} outside [0, {upper})"));
    }
    Ok(())
}

/// Constant correlation: every off-diagonal entry equals `rho`.
pub fn constant_corr(n: usize, rho: f64) -> Result<CorrelationMatrix> {
    if n == 0 {
        return domain("dimension must be positive");
    }
    check_rho(rho, 1.0, "constant")?;
    CorrelationMatrix::real_toeplitz(n, |_| rho)
}

/// Exponential correlation: entry `(i, j)` equals `rho^|i-j|`.
pub fn exponential_corr(n: usize, rho: f64) -> Result<CorrelationMatrix> {
    if n == 0 {
        return domain("dimension must be positive");
    }
    check_rho(rho, 1.0, "exponential")?;
    CorrelationMatrix::real_toeplitz(n, |d| rho.powi(d as i32))
}

/// Largest admissible tridiagonal coefficient (exclusive): `0.5 / cos(π/(n+1))`.
pub fn tridiagonal_bound(n: usize) -> f64 {
    0.5 / (std::f64::consts::PI / (n as f64 + 1.0)).cos()
}

/// Tridiagonal correlation: `rho` on the first off-diagonals, zero elsewhere.
pub fn tridiagonal_corr(n: usize, rho: f64) -> Result<CorrelationMatrix> {
    if n == 0 {
        return domain("dimension must be positive");
    }
    check_rho(rho, tridiagonal_bound(n), "tridiagonal")?;
    CorrelationMatrix::real_toeplitz(n, |d| if d == 1 { rho } else { 0.0 })
}

/// `ζ(Φ) = tr(Φ²)/n²`, in `[1/n, 1]`.
pub fn correlation_figure(phi: &CorrelationMatrix) -> f64 {
    // tr(Φ²) = Σ |Φ_ij|² for Hermitian Φ.
    let n = phi.dim() as f64;
    phi.entries.iter().map(|z| z.norm_sqr()).sum::<f64>() / (n * n)
}

/// Which majorization order to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Majorization {
    /// Partial sums of the decreasing rearrangement are dominated.
    Weak,
    /// Weak majorization plus equal totals.
    Strict,
}

/// Whether `a ⪯ b`, i.e. `a` is majorized by `b`.
pub fn is_majorized(a: &[f64], b: &[f64], kind: Majorization) -> Result<bool> {
    if a.len() != b.len() {
        return domain(format!("vector lengths differ ({} vs {})", a.len(), b.len()));
    }
    let sorted_desc = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|x, y| y.total_cmp(x));
        s
    };
    let (sa, sb) = (sorted_desc(a), sorted_desc(b));
    let (mut pa, mut pb) = (0.0, 0.0);
    for (x, y) in sa.iter().zip(&sb) {
        pa += x;
        pb += y;
        if pa > pb + MAJORIZATION_SUM_TOL * (1.0 + pb.abs()) {
            return Ok(false);
        }
    }
    Ok(match kind {
        Majorization::Weak => true,
        Majorization::Strict => (pa - pb).abs() <= MAJORIZATION_SUM_TOL * (1.0 + pb.abs()),
    })
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return domain("matrix must be square and non-empty");
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("eigensolver returned non-finite values".into()));
    }
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

fn reconstruct(
    values: &[f64],
    vectors: &DMatrix<Complex64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<Complex64> {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let s = f(v);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    let mut out = &scaled * vectors.adjoint();
    // Restore exact Hermitian symmetry lost to rounding.
    for i in 0..n {
        out[(i, i)].im = 0.0;
        for j in 0..i {
            let avg = 0.5 * (out[(i, j)] + out[(j, i)].conj());
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    out
}

/// Hermitian square root of a positive (semi)definite Hermitian matrix.
///
/// Eigenvalues are floored at `1e-14`; anything below `-1e-10` is rejected.
pub fn hermitian_sqrt(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let (values, vectors) = hermitian_eigen(m)?;
    if values[0] < SQRT_REJECT_BELOW {
        return domain(format!("matrix is not positive semidefinite (eigenvalue {})", values[0]));
    }
    Ok(reconstruct(&values, &vectors, |v| v.max(SQRT_EIGEN_FLOOR).sqrt()))
}

/// Unique Hermitian positive-definite `S` with `S·S = Φ`.
pub fn matrix_sqrt(phi: &CorrelationMatrix) -> DMatrix<Complex64> {
    phi.sqrt()
}

/// Spectrum of a Hermitian matrix with eigenvalues grouped at relative
/// tolerance `cluster_tol`.
pub fn spectrum_of(m: &DMatrix<Complex64>, cluster_tol: f64) -> Result<Spectrum> {
    let (values, _) = hermitian_eigen(m)?;
    Spectrum::from_eigenvalues(&values, cluster_tol)
}
