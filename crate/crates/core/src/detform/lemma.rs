use crate::corrmat::Spectrum;
use crate::error::{domain, Error, Result};
use crate::numeric::{ln_factorial, log_det, pochhammer, LogTerm};

use super::hyp::hyp2f0;

/// Scalar kernel of the two-matrix hypergeometric function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypKernelId {
    /// `₀F₀`, kernel `e^x`.
    Exp,
    /// `₂F₀(a, b; ·)` with integer parameters `a, b ≥ n`; the kernel is only
    /// evaluated at non-positive arguments.
    TwoFZero { a: usize, b: usize },
}

/// Columns of a block matrix: each distinct value `σ_k` contributes
/// `τ_k` columns indexed by `j = 1..=τ_k`.
pub(crate) fn block_columns(spec: &Spectrum) -> Vec<(usize, f64, usize)> {
    spec.distinct()
        .iter()
        .enumerate()
        .flat_map(|(k, &(v, t))| (1..=t).map(move |j| (k, v, j)))
        .collect()
}

/// `v · x^e` as a log term, with `x ≠ 0`.
pub(crate) fn signed_power(v: f64, x: f64, e: i64) -> LogTerm {
    if v == 0.0 {
        return LogTerm::value(0.0);
    }
    let sign = if x < 0.0 && e.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    LogTerm::new(v * sign, e as f64 * x.abs().ln())
}

/// Confluent Vandermonde block entry `(±1)^{i−j} (i−j+1)_{j−1} x^{exponent}`,
/// alternating in sign when `alternate` is set.
pub(crate) fn confluent_entry(i: usize, j: usize, x: f64, exponent: i64, alternate: bool) -> LogTerm {
    let poch = pochhammer(i as f64 - j as f64 + 1.0, j - 1);
    let sign = if alternate && (i + j) % 2 == 1 { -1.0 } else { 1.0 };
    signed_power(sign * poch, x, exponent)
}

/// `ln ∏_{i<j} |λ_j − λ_i|` and the sign of the product.
pub(crate) fn vandermonde(lams: &[f64]) -> (f64, f64) {
    let mut sign = 1.0;
    let mut log = 0.0;
    for i in 0..lams.len() {
        for j in i + 1..lams.len() {
            let d = lams[j] - lams[i];
            if d < 0.0 {
                sign = -sign;
            }
            log += d.abs().ln();
        }
    }
    (sign, log)
}

/// `ln (a)_ν` for `a ≥ 1` integer-valued.
fn ln_rising(a: usize, nu: usize) -> f64 {
    ln_factorial(a + nu - 1) - ln_factorial(a - 1)
}

/// Two-matrix hypergeometric function `ₚF̃_q(Λ, Σ)` with `Λ` of size `m`
/// (distinct, nonzero eigenvalues) and `Σ` of size `n ≥ m` (arbitrary
/// multiplicities), through the confluent block-determinant ratio.
pub fn hyp_det_two_matrix(lambda: &Spectrum, sigma: &Spectrum, kernel: HypKernelId) -> Result<f64> {
    let m = lambda.dim();
    let n = sigma.dim();
    if m > n {
        return domain(format!("first argument has size {m} > {n}"));
    }
    if lambda.num_distinct() != m {
        return Err(Error::Degenerate("eigenvalues of the first argument must be distinct".into()));
    }
    let lams = lambda.eigenvalues();
    if lams.iter().any(|&l| l == 0.0) {
        return domain("eigenvalues of the first argument must be nonzero");
    }
    if sigma.distinct().iter().any(|&(s, _)| s == 0.0) {
        return domain("eigenvalues of the second argument must be nonzero");
    }
    // ln χ^{n,ν} and the kernel H^{n,ν}.
    let (ln_chi, kernel_fn): (Box<dyn Fn(usize) -> f64>, Box<dyn Fn(usize, f64) -> Result<LogTerm>>) =
        match kernel {
            HypKernelId::Exp => (Box::new(|_| 0.0), Box::new(|_, x| Ok(LogTerm::new(1.0, x)))),
            HypKernelId::TwoFZero { a, b } => {
                if a < n || b < n {
                    return domain(format!("2F0 parameters ({a}, {b}) must be at least {n}"));
                }
                (
                    Box::new(move |nu| -(ln_rising(a - n + 1, nu) + ln_rising(b - n + 1, nu))),
                    Box::new(move |nu, x| {
                        if x > 0.0 {
                            return domain("2F0 kernel needs a non-positive argument");
                        }
                        Ok(LogTerm::value(hyp2f0(a - n + nu, b - n + nu, -x)?))
                    }),
                )
            }
        };

    let cols = block_columns(sigma);
    let ln_k: f64 = (1..=m).map(|i| ln_chi(n - i) + ln_factorial(n - i)).sum();

    let mut failure = None;
    let num = log_det(n, |r, c| {
        let (_, s, j) = cols[c];
        if r < n - m {
            vec![confluent_entry(r + 1, j, s, r as i64 + 1 - j as i64, false)]
        } else {
            let l = lams[r - (n - m)];
            match kernel_fn(j, l * s) {
                Ok(h) => {
                    let pre = signed_power(1.0, l, j as i64 - 1);
                    vec![LogTerm::new(pre.mant * h.mant, pre.log_scale + h.log_scale - ln_chi(j - 1))]
                }
                Err(e) => {
                    failure = Some(e);
                    vec![LogTerm::value(0.0)]
                }
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let den = log_det(n, |r, c| {
        let (_, s, j) = cols[c];
        vec![confluent_entry(r + 1, j, s, r as i64 + 1 - j as i64, false)]
    });
    if den.sign == 0.0 {
        return Err(Error::Numeric("confluent Vandermonde determinant vanished".into()));
    }
    if num.sign == 0.0 {
        return Ok(0.0);
    }
    let (v_sign, v_log) = vandermonde(&lams);
    let det_lam_sign: f64 = lams.iter().map(|l| l.signum()).product::<f64>().powi((n - m) as i32);
    let det_lam_log: f64 = (n - m) as f64 * lams.iter().map(|l| l.abs().ln()).sum::<f64>();
    let log = ln_k - det_lam_log + num.log_abs - den.log_abs - v_log;
    let value = num.sign * den.sign * v_sign * det_lam_sign * log.exp();
    if !value.is_finite() {
        return Err(Error::Numeric("two-matrix hypergeometric value overflowed".into()));
    }
    Ok(value)
}
