use crate::corrmat::Spectrum;
use crate::error::{domain, Error, Result};
use crate::numeric::{ln_factorial, log_det_sensitivity, LogTerm};

use super::charcoef::characteristic_coefficients;
use super::hyp::hyp2f0;
use super::lemma::{block_columns, signed_power};
use super::pdf::{ln_k00, wishart_b_det};

fn check_xi(xi: f64) -> Result<()> {
    if xi.is_nan() || xi < 0.0 {
        return domain(format!("ξ must be non-negative, got {xi}"));
    }
    Ok(())
}

/// Drops zero eigenvalues, which contribute a unit factor to
/// `det(I + ξ·…)`; `None` when nothing remains.
fn nonzero_part(spec: &Spectrum) -> Result<Option<Spectrum>> {
    if spec.distinct().iter().any(|&(v, _)| v < 0.0) {
        return domain("matrix must be positive semidefinite");
    }
    let kept: Vec<_> = spec.distinct().iter().copied().filter(|&(v, _)| v > 0.0).collect();
    if kept.is_empty() {
        Ok(None)
    } else {
        Spectrum::new(kept).map(Some)
    }
}

/// Slack above one tolerated from rounding.
const UNIT_SLACK: f64 = 1e-9;

/// Relative accuracy assumed for each `₂F₀` value and coefficient product.
const ENTRY_REL_ERR: f64 = 1e-13;

/// A closed-form value with an absolute bound on its rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded {
    pub value: f64,
    pub floor: f64,
}

impl Bounded {
    fn exact(value: f64) -> Self {
        Self { value, floor: 0.0 }
    }

    /// The value as a probability, rejected when rounding could dominate it.
    fn probability(self) -> Result<f64> {
        let Bounded { value, floor } = self;
        if !value.is_finite() || !floor.is_finite() {
            return Err(Error::Numeric("expected inverse determinant is not finite".into()));
        }
        if value <= floor || value > 1.0 + UNIT_SLACK {
            return Err(Error::Numeric(format!(
                "expected inverse determinant {value:e} is within its cancellation floor {floor:e}"
            )));
        }
        Ok(value.min(1.0))
    }
}

/// `E[det(I_{mν} + ξ·A⊗XX†)^{−1}]` for an `m×n` complex Gaussian `X` with row
/// covariance `Σ` (`sigma.dim() == m`) and a `ν×ν` positive semidefinite `A`.
pub fn expected_inv_det_kron(
    m: usize,
    n: usize,
    sigma: &Spectrum,
    a: &Spectrum,
    xi: f64,
) -> Result<f64> {
    kron_bounded(m, n, sigma, a, xi)?.probability()
}

/// [`expected_inv_det_kron`] with its rounding floor, without rejecting
/// unresolved values.
pub fn kron_bounded(m: usize, n: usize, sigma: &Spectrum, a: &Spectrum, xi: f64) -> Result<Bounded> {
    check_xi(xi)?;
    if m == 0 || m > n {
        return domain(format!("need 1 ≤ m ≤ n, got m = {m}, n = {n}"));
    }
    if sigma.dim() != m {
        return domain(format!("Σ has dimension {} but m = {m}", sigma.dim()));
    }
    if sigma.distinct().iter().any(|&(s, _)| s <= 0.0) {
        return domain("Σ must be positive definite");
    }
    if xi == 0.0 {
        return Ok(Bounded::exact(1.0));
    }
    let Some(a) = nonzero_part(a)? else {
        return Ok(Bounded::exact(1.0));
    };
    let coeffs = characteristic_coefficients(&a)?;
    let offset = n - m;
    // s_k(e) = Σ_{p,q} X_{p,q} ₂F₀(e, q; −ξ α_p σ_k) for e = offset+1 ..= offset+2m−1,
    // alongside Σ |X_{p,q} ₂F₀(…)|.
    let mut sums = Vec::with_capacity(sigma.num_distinct());
    for &(s, _) in sigma.distinct() {
        let mut row = Vec::with_capacity(2 * m - 1);
        for e in offset + 1..offset + 2 * m {
            let (mut acc, mut mag) = (0.0, 0.0);
            for (alpha, q, x) in coeffs.terms() {
                if x != 0.0 {
                    let t = x * hyp2f0(e, q, xi * alpha * s)?;
                    acc += t;
                    mag += t.abs();
                }
            }
            row.push((acc, mag));
        }
        sums.push(row);
    }
    let cols = block_columns(sigma);
    // n−m+i+j−1 with one-based i = r+1
    let exponent = |r: usize, j: usize| offset + r + j;
    let (omega, rel) = log_det_sensitivity(m, |r, c| {
        let (k, s, j) = cols[c];
        let e = exponent(r, j);
        let (acc, mag) = sums[k][r + j - 1];
        let t = signed_power(acc, s, e as i64);
        let scale = ln_factorial(e - 1);
        let log_err = (ENTRY_REL_ERR * mag).ln() + e as f64 * s.ln() + scale;
        (vec![LogTerm::new(t.mant, t.log_scale + scale)], log_err)
    });
    let b = wishart_b_det(n, sigma);
    if b.sign == 0.0 {
        return Err(Error::Numeric("normalising determinant vanished".into()));
    }
    let norm = ln_k00(m, n) + b.log_abs;
    if omega.sign == 0.0 {
        return Ok(Bounded { value: 0.0, floor: f64::INFINITY });
    }
    let value = omega.sign * b.sign * (omega.log_abs - norm).exp();
    Ok(Bounded { value, floor: rel * value.abs() })
}
/// `E[det(I_m + ξ·XX†)^{−ν}]` for an `m×n` matrix with i.i.d. `CN(0,1)` entries,
/// through the `m×m` Hankel determinant of `₂F₀` values.
pub fn expected_inv_det_uncorr(m: usize, n: usize, nu: usize, xi: f64) -> Result<f64> {
    uncorr_bounded(m, n, nu, xi)?.probability()
}

/// [`expected_inv_det_uncorr`] with its rounding floor.
pub fn uncorr_bounded(m: usize, n: usize, nu: usize, xi: f64) -> Result<Bounded> {
    check_xi(xi)?;
    if m == 0 || m > n {
        return domain(format!("need 1 ≤ m ≤ n, got m = {m}, n = {n}"));
    }
    if nu == 0 {
        return domain("exponent ν must be positive");
    }
    if xi == 0.0 {
        return Ok(Bounded::exact(1.0));
    }
    let offset = n - m;
    let hankel: Vec<f64> = (offset + 1..offset + 2 * m)
        .map(|e| hyp2f0(e, nu, xi))
        .collect::<Result<_>>()?;
    let log_entry = |r: usize, c: usize| hankel[r + c].ln() + ln_factorial(offset + r + c);
    let (omega, rel) = log_det_sensitivity(m, |r, c| {
        let l = log_entry(r, c);
        (vec![LogTerm::new(1.0, l)], l + ENTRY_REL_ERR.ln())
    });
    let norm: f64 = (1..=m).map(|i| ln_factorial(n - i) + ln_factorial(i - 1)).sum();
    if omega.sign == 0.0 {
        return Ok(Bounded { value: 0.0, floor: f64::INFINITY });
    }
    let value = omega.sign * (omega.log_abs - norm).exp();
    Ok(Bounded { value, floor: rel * value.abs() })
}

/// `E[det(I_m + ξ·XX†)^{−1}]` for an `m×n` complex Gaussian `X` with row
/// covariance `Σ` and column covariance `Ψ`, as the quadruple sum
/// `Σ_{p,q,i,j} X_{p,i}(Σ) X_{q,j}(Ψ) ₂F₀(i, j; −ξ σ_p ψ_q)`.
pub fn expected_inv_det_miso(sigma: &Spectrum, psi: &Spectrum, xi: f64) -> Result<f64> {
    miso_bounded(sigma, psi, xi)?.probability()
}

/// [`expected_inv_det_miso`] with its rounding floor.
pub fn miso_bounded(sigma: &Spectrum, psi: &Spectrum, xi: f64) -> Result<Bounded> {
    check_xi(xi)?;
    if xi == 0.0 {
        return Ok(Bounded::exact(1.0));
    }
    let (Some(s), Some(p)) = (nonzero_part(sigma)?, nonzero_part(psi)?) else {
        return Ok(Bounded::exact(1.0));
    };
    let cs = characteristic_coefficients(&s)?;
    let cp = characteristic_coefficients(&p)?;
    let (mut total, mut mag) = (0.0, 0.0);
    for (sv, i, xs) in cs.terms() {
        if xs == 0.0 {
            continue;
        }
        for (pv, j, xp) in cp.terms() {
            if xp != 0.0 {
                let t = xs * xp * hyp2f0(i, j, xi * sv * pv)?;
                total += t;
                mag += t.abs();
            }
        }
    }
    Ok(Bounded { value: total, floor: ENTRY_REL_ERR * mag })
}
