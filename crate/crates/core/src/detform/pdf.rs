use crate::corrmat::Spectrum;
use crate::error::{domain, Error, Result};
use crate::numeric::{ln_factorial, log_det, LogDet, LogTerm};

use super::lemma::{block_columns, confluent_entry, signed_power, vandermonde};

fn check_lams(lams: &[f64], n: usize) -> Result<()> {
    if lams.is_empty() || lams.len() > n {
        return domain(format!("need 1 ≤ m ≤ n, got m = {}, n = {n}", lams.len()));
    }
    if lams.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return domain("eigenvalues must be positive and finite");
    }
    if lams.windows(2).any(|w| w[0] < w[1]) {
        return domain("eigenvalues must be in decreasing order");
    }
    Ok(())
}

fn check_positive(spec: &Spectrum, what: &str) -> Result<()> {
    if spec.distinct().iter().any(|&(v, _)| v <= 0.0) {
        return domain(format!("{what} must be positive definite"));
    }
    Ok(())
}

/// `ln K₀₀^{m,n} = Σ_{i=1}^m ln (n−i)!`.
pub(crate) fn ln_k00(m: usize, n: usize) -> f64 {
    (1..=m).map(|i| ln_factorial(n - i)).sum()
}

/// `det[ℬ₁ … ℬ_ϱ]` with `ℬ_{k,ij} = (−1)^{i−j} (i−j+1)_{j−1} σ_k^{n−i+j}`.
pub(crate) fn wishart_b_det(n: usize, sigma: &Spectrum) -> LogDet {
    let m = sigma.dim();
    let cols = block_columns(sigma);
    log_det(m, |r, c| {
        let (_, s, j) = cols[c];
        let i = r + 1;
        vec![confluent_entry(i, j, s, n as i64 - i as i64 + j as i64, true)]
    })
}

fn exp_block_entry(l: f64, j: usize, scale: f64) -> LogTerm {
    let p = signed_power(1.0, l, j as i64 - 1);
    LogTerm::new(p.mant, p.log_scale - l / scale)
}

fn finish(sign: f64, log: f64) -> Result<f64> {
    let v = if sign == 0.0 { 0.0 } else { sign * log.exp() };
    if !v.is_finite() {
        return Err(Error::Numeric("eigenvalue density overflowed".into()));
    }
    // Rounding can leave a tiny negative value where the density vanishes.
    Ok(v.max(0.0))
}

/// Joint density of the ordered eigenvalues of `XX†` for an `m×n` complex
/// Gaussian `X` with row covariance `Σ` (`sigma.dim() == m`) and white columns.
pub fn wishart_eigen_pdf(lams: &[f64], n: usize, sigma: &Spectrum) -> Result<f64> {
    check_lams(lams, n)?;
    let m = lams.len();
    if sigma.dim() != m {
        return domain(format!("Σ has dimension {} but {m} eigenvalues were given", sigma.dim()));
    }
    check_positive(sigma, "Σ")?;
    let cols = block_columns(sigma);
    let g = log_det(m, |r, c| {
        let (_, s, j) = cols[c];
        vec![exp_block_entry(lams[r], j, s)]
    });
    let b = wishart_b_det(n, sigma);
    let (v_sign, v_log) = vandermonde(lams);
    let ln_pow: f64 = (n - m) as f64 * lams.iter().map(|l| l.ln()).sum::<f64>();
    finish(
        g.sign * b.sign * v_sign,
        g.log_abs + v_log + ln_pow - ln_k00(m, n) - b.log_abs,
    )
}

/// Joint density of the ordered eigenvalues of `XAX†` for an `m×n` complex
/// Gaussian `X` with white rows and column covariance `Ψ`, given the spectrum
/// of `A^{1/2} Ψ A^{1/2}` (`beta.dim() == n`).
pub fn quadratic_form_eigen_pdf(lams: &[f64], n: usize, beta: &Spectrum) -> Result<f64> {
    check_lams(lams, n)?;
    let m = lams.len();
    if beta.dim() != n {
        return domain(format!("β spectrum has dimension {} but n = {n}", beta.dim()));
    }
    check_positive(beta, "A^{1/2}ΨA^{1/2}")?;
    let cols = block_columns(beta);
    let v_entry = |r: usize, c: usize| {
        let (_, b, j) = cols[c];
        let i = r + 1;
        confluent_entry(i, j, b, j as i64 - i as i64, true)
    };
    let num = log_det(n, |r, c| {
        if r < n - m {
            vec![v_entry(r, c)]
        } else {
            let (_, b, j) = cols[c];
            vec![exp_block_entry(lams[r - (n - m)], j, b)]
        }
    });
    let den = log_det(n, |r, c| vec![v_entry(r, c)]);
    if den.sign == 0.0 {
        return Err(Error::Numeric("confluent Vandermonde determinant vanished".into()));
    }
    let ln_det_beta: f64 = beta
        .distinct()
        .iter()
        .map(|&(b, t)| t as f64 * b.ln())
        .sum();
    let (v_sign, v_log) = vandermonde(lams);
    finish(
        num.sign * den.sign * v_sign,
        num.log_abs + v_log - ln_k00(m, m) - m as f64 * ln_det_beta - den.log_abs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::GaussLegendre;

    fn spec(v: &[(f64, usize)]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn scalar_wishart_is_gamma() {
        for &l in &[0.1, 1.0, 3.7] {
            let one = wishart_eigen_pdf(&[l], 1, &spec(&[(1.0, 1)])).unwrap();
            assert!((one - (-l as f64).exp()).abs() < 1e-14);
            let two = wishart_eigen_pdf(&[l], 2, &spec(&[(1.0, 1)])).unwrap();
            assert!((two - l * (-l as f64).exp()).abs() < 1e-14);
            let scaled = wishart_eigen_pdf(&[l], 2, &spec(&[(2.0, 1)])).unwrap();
            assert!((scaled - l * (-l / 2.0f64).exp() / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn white_two_by_two_wishart() {
        // m = n = 2, Σ = I: (λ₁ − λ₂)² e^{−λ₁−λ₂}.
        let (a, b) = (2.5, 0.4);
        let v = wishart_eigen_pdf(&[a, b], 2, &spec(&[(1.0, 2)])).unwrap();
        let expect = (a - b) * (a - b) * (-(a + b) as f64).exp();
        assert!((v - expect).abs() < 1e-13);
    }

    #[test]
    fn hypoexponential_quadratic_form() {
        for &l in &[0.2, 1.0, 5.0] {
            let v = quadratic_form_eigen_pdf(&[l], 2, &spec(&[(2.0, 1), (1.0, 1)])).unwrap();
            let expect = (-l / 2.0f64).exp() - (-l as f64).exp();
            assert!((v - expect).abs() < 1e-13, "{v} vs {expect}");
        }
        let v = quadratic_form_eigen_pdf(&[0.8], 1, &spec(&[(1.0, 1)])).unwrap();
        assert!((v - (-0.8f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn rank_one_quadratic_form_with_repeated_beta() {
        // |g₁|² + |g₂|² with unit weights is Gamma(2, 1).
        let v = quadratic_form_eigen_pdf(&[1.3], 2, &spec(&[(1.0, 2)])).unwrap();
        assert!((v - 1.3 * (-1.3f64).exp()).abs() < 1e-13);
    }

    fn integrate_pair(pdf: impl Fn(f64, f64) -> f64) -> f64 {
        // λ = u/(1−u) maps [0,1) to [0,∞).
        let rule = GaussLegendre::cached(160);
        rule.integrate(0.0, 1.0, |u1| {
            let l1 = u1 / (1.0 - u1);
            let j1 = 1.0 / ((1.0 - u1) * (1.0 - u1));
            let inner = rule.integrate(0.0, u1, |u2| {
                let l2 = u2 / (1.0 - u2);
                pdf(l1, l2) / ((1.0 - u2) * (1.0 - u2))
            });
            j1 * inner
        })
    }

    #[test]
    fn densities_integrate_to_one() {
        let w = spec(&[(2.0, 1), (1.0, 1)]);
        let total = integrate_pair(|a, b| {
            if a <= b {
                0.0
            } else {
                wishart_eigen_pdf(&[a, b], 3, &w).unwrap()
            }
        });
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        let q = spec(&[(3.0, 1), (1.0, 1)]);
        let total = integrate_pair(|a, b| {
            if a <= b {
                0.0
            } else {
                quadratic_form_eigen_pdf(&[a, b], 2, &q).unwrap()
            }
        });
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn rejects_bad_eigenvalues() {
        let s = spec(&[(1.0, 2)]);
        assert!(wishart_eigen_pdf(&[1.0, 2.0], 2, &s).is_err());
        assert!(wishart_eigen_pdf(&[1.0, -2.0], 2, &s).is_err());
        assert!(wishart_eigen_pdf(&[1.0], 2, &s).is_err());
    }
}
