//! Complex Gaussian matrices and double-scattering channels.
//!
//! Entries are circularly-symmetric with `E|g|² = 1` (real and imaginary parts
//! each `N(0, 1/2)`). Alongside the samplers live the closed-form trace
//! moments and cumulants that feed the kurtosis and low-SNR formulas.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::corrmat::{hermitian_eigen, hermitian_sqrt, CorrelationMatrix, Spectrum};
use crate::error::{domain, Result};
use crate::mc::OstbcCode;
use crate::numeric::ln_factorial;

/// One draw of `CN(0, 1)`.
pub fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows×cols` matrix of i.i.d. `CN(0, 1)` entries, filled column by column.
pub fn standard_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| standard_complex(rng))
}

/// Distribution of `Σ^{1/2} G Ψ^{1/2}` with `G` standard complex Gaussian.
#[derive(Debug, Clone)]
pub struct GaussianMatrixSpec {
    rows: usize,
    cols: usize,
    row_sqrt: DMatrix<Complex64>,
    col_sqrt: DMatrix<Complex64>,
}

fn check_pd(m: &DMatrix<Complex64>, what: &str) -> Result<()> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return domain(format!("{what} must be square and non-empty"));
    }
    for i in 0..n {
        for j in 0..=i {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 * (1.0 + m[(i, j)].norm()) {
                return domain(format!("{what} is not Hermitian"));
            }
        }
    }
    let (values, _) = hermitian_eigen(m)?;
    if values[0] <= 0.0 {
        return domain(format!("{what} is not positive definite"));
    }
    Ok(())
}

impl GaussianMatrixSpec {
    pub fn new(row_cov: &DMatrix<Complex64>, col_cov: &DMatrix<Complex64>) -> Result<Self> {
        check_pd(row_cov, "row covariance")?;
        check_pd(col_cov, "column covariance")?;
        Ok(Self {
            rows: row_cov.nrows(),
            cols: col_cov.nrows(),
            row_sqrt: hermitian_sqrt(row_cov)?,
            col_sqrt: hermitian_sqrt(col_cov)?,
        })
    }

    /// Identity row and column covariances.
    pub fn white(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_sqrt: DMatrix::identity(rows, rows),
            col_sqrt: DMatrix::identity(cols, cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Draws `Σ^{1/2} G Ψ^{1/2}`.
pub fn sample_gaussian<R: Rng + ?Sized>(spec: &GaussianMatrixSpec, rng: &mut R) -> DMatrix<Complex64> {
    let g = standard_complex_matrix(spec.rows, spec.cols, rng);
    &spec.row_sqrt * g * &spec.col_sqrt
}

/// A double-scattering environment `(Φ_T, Φ_S, Φ_R)` together with the
/// space-time code in use.
#[derive(Debug, Clone)]
pub struct Scenario {
    phi_t: CorrelationMatrix,
    phi_s: CorrelationMatrix,
    phi_r: CorrelationMatrix,
    code: OstbcCode,
    no_double_scattering: bool,
    sqrt_t: Option<DMatrix<Complex64>>,
    sqrt_s: Option<DMatrix<Complex64>>,
    sqrt_r: Option<DMatrix<Complex64>>,
}

fn sqrt_unless_identity(phi: &CorrelationMatrix) -> Option<DMatrix<Complex64>> {
    (!phi.is_identity()).then(|| phi.sqrt())
}

impl Scenario {
    /// The transmit dimension is fixed by the code and must match `Φ_T`.
    pub fn new(
        phi_t: CorrelationMatrix,
        phi_s: CorrelationMatrix,
        phi_r: CorrelationMatrix,
        code: OstbcCode,
    ) -> Result<Self> {
        if code.n_t() != phi_t.dim() {
            return domain(format!(
                "code {} uses {} transmit antennas but Φ_T has dimension {}",
                code.name(),
                code.n_t(),
                phi_t.dim()
            ));
        }
        Ok(Self {
            sqrt_t: sqrt_unless_identity(&phi_t),
            sqrt_s: sqrt_unless_identity(&phi_s),
            sqrt_r: sqrt_unless_identity(&phi_r),
            phi_t,
            phi_s,
            phi_r,
            code,
            no_double_scattering: false,
        })
    }

    /// Identity correlations with the shipped code for `n_t` antennas.
    pub fn uncorrelated(n_t: usize, n_s: usize, n_r: usize) -> Result<Self> {
        if n_s == 0 || n_r == 0 {
            return domain("antenna and scatterer counts must be positive");
        }
        let code = OstbcCode::for_antennas(n_t)?;
        Self::new(
            CorrelationMatrix::identity(n_t),
            CorrelationMatrix::identity(n_s),
            CorrelationMatrix::identity(n_r),
            code,
        )
    }

    /// Replaces the double-scattering stage by its `n_S → ∞` limit,
    /// `H = Φ_R^{1/2} G Φ_T^{1/2}`, so that `ζ(Φ_S)` counts as zero.
    pub fn without_double_scattering(mut self) -> Self {
        self.no_double_scattering = true;
        self
    }

    pub fn n_t(&self) -> usize {
        self.phi_t.dim()
    }

    pub fn n_s(&self) -> usize {
        self.phi_s.dim()
    }

    pub fn n_r(&self) -> usize {
        self.phi_r.dim()
    }

    pub fn phi_t(&self) -> &CorrelationMatrix {
        &self.phi_t
    }

    pub fn phi_s(&self) -> &CorrelationMatrix {
        &self.phi_s
    }

    pub fn phi_r(&self) -> &CorrelationMatrix {
        &self.phi_r
    }

    pub fn code(&self) -> &OstbcCode {
        &self.code
    }

    pub fn rate(&self) -> f64 {
        self.code.rate()
    }

    pub fn no_double_scattering(&self) -> bool {
        self.no_double_scattering
    }

    pub fn is_uncorrelated(&self) -> bool {
        self.phi_t.is_identity() && self.phi_s.is_identity() && self.phi_r.is_identity()
    }

    /// `(ζ(Φ_T), ζ(Φ_S), ζ(Φ_R))`, with `ζ(Φ_S) = 0` without double scattering.
    pub fn correlation_figures(&self) -> (f64, f64, f64) {
        let zs = if self.no_double_scattering { 0.0 } else { self.phi_s.correlation_figure() };
        (self.phi_t.correlation_figure(), zs, self.phi_r.correlation_figure())
    }
}

fn left_mul(s: &Option<DMatrix<Complex64>>, m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    match s {
        Some(s) => s * m,
        None => m,
    }
}

fn right_mul(m: DMatrix<Complex64>, s: &Option<DMatrix<Complex64>>) -> DMatrix<Complex64> {
    match s {
        Some(s) => m * s,
        None => m,
    }
}

/// Upper-triangular Bartlett factor `R` with `H₂ = QR` for an `n_s×n_t`
/// standard complex Gaussian `H₂`, `n_s ≥ n_t`.
fn bartlett_factor<R: Rng + ?Sized>(n_s: usize, n_t: usize, rng: &mut R) -> DMatrix<Complex64> {
    let mut r = DMatrix::zeros(n_t, n_t);
    for i in 0..n_t {
        let shape = (n_s - i) as f64;
        let gamma = Gamma::new(shape, 1.0).expect("positive shape");
        let g: f64 = gamma.sample(rng);
        r[(i, i)] = Complex64::new(g.sqrt(), 0.0);
        for j in i + 1..n_t {
            r[(i, j)] = standard_complex(rng);
        }
    }
    r
}

/// Draws `H = (1/√n_S) Φ_R^{1/2} H₁ Φ_S^{1/2} H₂ Φ_T^{1/2}`.
///
/// With white scatterers and `n_S ≥ n_T`, `H₁H₂` is drawn as `G·R` where `G`
/// is `n_R×n_T` standard Gaussian and `R` is the Bartlett factor of `H₂`;
/// this has the same law and costs `O(n_R n_T²)` instead of `O(n_R n_S n_T)`.
pub fn sample_channel<R: Rng + ?Sized>(scn: &Scenario, rng: &mut R) -> DMatrix<Complex64> {
    let (n_t, n_s, n_r) = (scn.n_t(), scn.n_s(), scn.n_r());
    let core = if scn.no_double_scattering {
        standard_complex_matrix(n_r, n_t, rng)
    } else if scn.sqrt_s.is_none() && n_s >= n_t {
        let g = standard_complex_matrix(n_r, n_t, rng);
        let r = bartlett_factor(n_s, n_t, rng);
        (g * r).unscale((n_s as f64).sqrt())
    } else {
        let h1 = standard_complex_matrix(n_r, n_s, rng);
        let h2 = standard_complex_matrix(n_s, n_t, rng);
        (right_mul(h1, &scn.sqrt_s) * h2).unscale((n_s as f64).sqrt())
    };
    right_mul(left_mul(&scn.sqrt_r, core), &scn.sqrt_t)
}

/// Direct product-form draw, without the Bartlett shortcut.
pub fn sample_channel_direct<R: Rng + ?Sized>(scn: &Scenario, rng: &mut R) -> DMatrix<Complex64> {
    let (n_t, n_s, n_r) = (scn.n_t(), scn.n_s(), scn.n_r());
    let core = if scn.no_double_scattering {
        standard_complex_matrix(n_r, n_t, rng)
    } else {
        let h1 = standard_complex_matrix(n_r, n_s, rng);
        let h2 = standard_complex_matrix(n_s, n_t, rng);
        (right_mul(h1, &scn.sqrt_s) * h2).unscale((n_s as f64).sqrt())
    };
    right_mul(left_mul(&scn.sqrt_r, core), &scn.sqrt_t)
}

/// `k`-th cumulant of `tr(AXBX†)`: `(k−1)! tr((AΣ)^k) tr((ΨB)^k)`, from the
/// spectra of `AΣ` and `ΨB`.
pub fn trace_quadratic_cumulant(k: usize, a_sigma: &Spectrum, psi_b: &Spectrum) -> Result<f64> {
    if k == 0 {
        return domain("cumulant order must be positive");
    }
    let kk = k as i32;
    Ok(ln_factorial(k - 1).exp() * a_sigma.trace_power(kk) * psi_b.trace_power(kk))
}

/// `E tr[(AXBX†)²] = tr²(AΣ) tr((ΨB)²) + tr²(ΨB) tr((AΣ)²)`.
pub fn expected_trace_square(a_sigma: &Spectrum, psi_b: &Spectrum) -> f64 {
    let (a1, a2) = (a_sigma.trace_power(1), a_sigma.trace_power(2));
    let (b1, b2) = (psi_b.trace_power(1), psi_b.trace_power(2));
    a1 * a1 * b2 + b1 * b1 * a2
}

/// Second-order moments of `W = X₁X₂X₂†X₁†` for independent
/// `X₁ ~ CN(0, Σ₁, Ψ₁)` and `X₂ ~ CN(0, Σ₂, Ψ₂)`, given the spectra of `Σ₁`,
/// `Ψ₁Σ₂` and `Ψ₂`. Returns `(E tr²(W), E tr(W²))`.
pub fn double_product_moments(sigma1: &Spectrum, psi1_sigma2: &Spectrum, psi2: &Spectrum) -> (f64, f64) {
    let (a, a2) = (sigma1.trace_power(1), sigma1.trace_power(2));
    let (b, b2) = (psi1_sigma2.trace_power(1), psi1_sigma2.trace_power(2));
    let (c, c2) = (psi2.trace_power(1), psi2.trace_power(2));
    let trace_sq = a2 * b * b * c2 + a2 * c * c * b2 + a * a * b2 * c2 + a * a * b * b * c * c;
    let sq_trace = a * a * b * b * c2 + a * a * c * c * b2 + b2 * c2 * a2 + b * b * c * c * a2;
    (trace_sq, sq_trace)
}

/// Kurtosis `E‖H‖⁴ / (E‖H‖²)²` of the channel Frobenius norm:
/// `ζ_T ζ_R + ζ_T ζ_S + ζ_R ζ_S + 1`.
pub fn kurtosis_frobenius(scn: &Scenario) -> f64 {
    let (zt, zs, zr) = scn.correlation_figures();
    zt * zr + zt * zs + zr * zs + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrmat::{constant_corr, exponential_corr};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(v: &[(f64, usize)]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    fn frob2(h: &DMatrix<Complex64>) -> f64 {
        h.iter().map(|z| z.norm_sqr()).sum()
    }

    #[test]
    fn unit_variance_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = standard_complex(&mut rng).norm_sqr();
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn row_covariance_is_reproduced() {
        let sigma = constant_corr(2, 0.6).unwrap();
        let g = GaussianMatrixSpec::new(sigma.entries(), &DMatrix::identity(2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mut acc = DMatrix::<Complex64>::zeros(2, 2);
        for _ in 0..n {
            let x = sample_gaussian(&g, &mut rng);
            acc += &x * x.adjoint();
        }
        acc /= Complex64::new(n as f64, 0.0);
        // E[XX†] = tr(Ψ)·Σ = 2Σ.
        assert!((acc[(0, 1)].re - 1.2).abs() < 0.03, "{}", acc[(0, 1)]);
        assert!((acc[(0, 0)].re - 2.0).abs() < 0.03);
    }

    #[test]
    fn keyhole_channel_has_rank_one() {
        let scn = Scenario::uncorrelated(2, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = sample_channel(&scn, &mut rng);
        let det = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
        assert!(det.norm() < 1e-12 * frob2(&h));
    }

    #[test]
    fn bartlett_and_direct_paths_share_moments() {
        let scn = Scenario::new(
            exponential_corr(2, 0.5).unwrap(),
            CorrelationMatrix::identity(3),
            constant_corr(2, 0.3).unwrap(),
            OstbcCode::alamouti(),
        )
        .unwrap();
        let n = 200_000;
        let moments = |fast: bool, seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut m1, mut m2) = (0.0, 0.0);
            for _ in 0..n {
                let h = if fast { sample_channel(&scn, &mut rng) } else { sample_channel_direct(&scn, &mut rng) };
                let f = frob2(&h);
                m1 += f;
                m2 += f * f;
            }
            (m1 / n as f64, m2 / n as f64)
        };
        let (f1, f2) = moments(true, 4);
        let (d1, d2) = moments(false, 5);
        assert!((f1 - 4.0).abs() < 0.03 && (d1 - 4.0).abs() < 0.03, "{f1} {d1}");
        let k = kurtosis_frobenius(&scn);
        assert!((f2 / (f1 * f1) - k).abs() < 0.02 * k, "{} vs {k}", f2 / (f1 * f1));
        assert!((d2 / (d1 * d1) - k).abs() < 0.02 * k, "{} vs {k}", d2 / (d1 * d1));
    }

    #[test]
    fn cumulant_examples() {
        let i2 = Spectrum::scalar(1.0, 2);
        assert_eq!(trace_quadratic_cumulant(1, &i2, &Spectrum::scalar(1.0, 3)).unwrap(), 6.0);
        assert_eq!(trace_quadratic_cumulant(2, &i2, &spec(&[(2.0, 1), (1.0, 1)])).unwrap(), 10.0);
        assert_eq!(trace_quadratic_cumulant(3, &spec(&[(2.0, 1)]), &spec(&[(3.0, 1)])).unwrap(), 432.0);
    }

    #[test]
    fn trace_square_examples() {
        let one = Spectrum::scalar(1.0, 1);
        assert_eq!(expected_trace_square(&one, &one), 2.0);
        let i2 = Spectrum::scalar(1.0, 2);
        assert_eq!(expected_trace_square(&i2, &i2), 16.0);
        assert_eq!(expected_trace_square(&spec(&[(3.0, 1), (1.0, 1)]), &i2), 72.0);
    }

    #[test]
    fn double_product_examples() {
        let one = Spectrum::scalar(1.0, 1);
        assert_eq!(double_product_moments(&one, &one, &one), (4.0, 4.0));
        let i2 = Spectrum::scalar(1.0, 2);
        assert_eq!(double_product_moments(&i2, &i2, &i2), (112.0, 104.0));
    }

    #[test]
    fn kurtosis_examples() {
        assert_eq!(kurtosis_frobenius(&Scenario::uncorrelated(1, 1, 1).unwrap()), 4.0);
        let k = kurtosis_frobenius(&Scenario::uncorrelated(4, 10, 2).unwrap());
        assert!((k - 1.2).abs() < 1e-12);
        let nds = Scenario::uncorrelated(1, 1, 1).unwrap().without_double_scattering();
        assert_eq!(kurtosis_frobenius(&nds), 2.0);
    }

    #[test]
    fn code_must_match_transmit_dimension() {
        let r = Scenario::new(
            CorrelationMatrix::identity(3),
            CorrelationMatrix::identity(2),
            CorrelationMatrix::identity(2),
            OstbcCode::alamouti(),
        );
        assert!(r.is_err());
    }
}
