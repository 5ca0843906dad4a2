use crate::corrmat::Spectrum;
use crate::error::{domain, Result};

/// Partial-fraction coefficients `X_{p,j}` of `det(I + ξA)^{−1}` in powers of
/// `(1 + ξα_p)^{−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharCoefficients {
    eigenvalues: Vec<f64>,
    // coeffs[p][j - 1] = X_{p,j}
    coeffs: Vec<Vec<f64>>,
}

impl CharCoefficients {
    pub fn num_distinct(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalue(&self, p: usize) -> f64 {
        self.eigenvalues[p]
    }

    pub fn multiplicity(&self, p: usize) -> usize {
        self.coeffs[p].len()
    }

    /// `X_{p,j}` for the zero-based eigenvalue index `p` and power `j ≥ 1`.
    pub fn coefficient(&self, p: usize, j: usize) -> f64 {
        self.coeffs[p][j - 1]
    }

    /// `(α_p, j, X_{p,j})` for every coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (f64, usize, f64)> + '_ {
        self.eigenvalues
            .iter()
            .zip(&self.coeffs)
            .flat_map(|(&a, cs)| cs.iter().enumerate().map(move |(j, &x)| (a, j + 1, x)))
    }

    /// Sum of all coefficients; equals one.
    pub fn total(&self) -> f64 {
        self.coeffs.iter().flatten().sum()
    }

    /// `Σ_{p,j} X_{p,j} (1 + ξα_p)^{−j}`.
    pub fn evaluate(&self, xi: f64) -> f64 {
        self.terms()
            .map(|(a, j, x)| x * (1.0 + xi * a).powi(-(j as i32)))
            .sum()
    }
}

/// Characteristic coefficients of a matrix with the given spectrum.
///
/// For eigenvalue `α_i` of multiplicity `τ_i`, `X_{i,j}` is the coefficient of
/// `y^{τ_i−j}` in `∏_{l≠i} ((1−α_l/α_i) + (α_l/α_i) y)^{−τ_l}`, which expands
/// the composition sum over `k_l` as a truncated power-series product.
pub fn characteristic_coefficients(spec: &Spectrum) -> Result<CharCoefficients> {
    if spec.distinct().iter().any(|&(v, _)| v == 0.0) {
        return domain("characteristic coefficients need nonzero eigenvalues");
    }
    let d = spec.distinct();
    let mut coeffs = Vec::with_capacity(d.len());
    for (i, &(ai, ti)) in d.iter().enumerate() {
        let mut series = vec![0.0; ti];
        series[0] = 1.0;
        for (l, &(al, tl)) in d.iter().enumerate() {
            if l == i {
                continue;
            }
            let ratio = al / ai;
            let c = 1.0 - ratio;
            let step = -ratio / c;
            // (c + d y)^{−τ} = c^{−τ} Σ_k C(τ+k−1, k) (−d/c)^k y^k
            let mut factor = vec![0.0; ti];
            factor[0] = c.powi(-(tl as i32));
            for k in 1..ti {
                factor[k] = factor[k - 1] * step * (tl + k - 1) as f64 / k as f64;
            }
            let mut next = vec![0.0; ti];
            for (a, &sa) in series.iter().enumerate() {
                for (b, &fb) in factor.iter().enumerate().take(ti - a) {
                    next[a + b] += sa * fb;
                }
            }
            series = next;
        }
        coeffs.push((1..=ti).map(|j| series[ti - j]).collect());
    }
    Ok(CharCoefficients { eigenvalues: d.iter().map(|&(v, _)| v).collect(), coeffs })
}
