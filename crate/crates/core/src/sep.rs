//! Closed-form M-PSK symbol error probability of orthogonal space-time block
//! codes over double-scattering channels.
//!
//! Every closed form is a θ-integral
//! `(1/π) ∫₀^Θ E[det(I + ξ(θ)·…)^{−1}] dθ` with
//! `ξ(θ) = g γ̄ / (n_S n_T ℛ sin²θ)`, evaluated by Gauss-Legendre quadrature
//! (128 nodes unless stated otherwise). Three families are covered:
//! fully uncorrelated, doubly correlated with white scatterers
//! (`n_S ≥ n_T`), and single receive antenna.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::corrmat::Spectrum;
use crate::detform::{kron_bounded, miso_bounded, uncorr_bounded, Bounded};
use crate::error::{domain, Error, Result};
use crate::matstat::Scenario;
use crate::numeric::GaussLegendre;

/// Default node count of the θ-quadrature.
pub const DEFAULT_THETA_NODES: usize = 128;

/// SEP values below this are reported as computed but flagged.
pub const SEP_NUMERIC_FLOOR: f64 = 1e-12;

/// M-PSK constants `g = sin²(π/M)` and `Θ = π − π/M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PskConstellation {
    m: u32,
    g: f64,
    theta_max: f64,
}

impl PskConstellation {
    /// `m` must be one of 2, 4, 8, 16, 32, 64.
    pub fn new(m: u32) -> Result<Self> {
        if !matches!(m, 2 | 4 | 8 | 16 | 32 | 64) {
            return domain(format!("PSK order {m} not in {{2, 4, 8, 16, 32, 64}}"));
        }
        let a = PI / m as f64;
        Ok(Self { m, g: a.sin().powi(2), theta_max: PI - a })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// Largest possible SEP, `1 − 1/M`.
    pub fn max_sep(&self) -> f64 {
        1.0 - 1.0 / self.m as f64
    }
}

/// How a SEP value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepMethod {
    ClosedForm,
    MonteCarlo,
}

/// One point of a SEP curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SepResult {
    pub snr_db: f64,
    pub sep: f64,
    pub method: SepMethod,
    pub scenario: String,
}

impl SepResult {
    pub fn below_numeric_floor(&self) -> bool {
        self.sep < SEP_NUMERIC_FLOOR
    }
}

/// `1/(n_T ℛ)`, mapping `γ̄‖H‖²_F` to the post-combining SNR.
pub fn ostbc_snr_scale(scn: &Scenario) -> f64 {
    1.0 / (scn.n_t() as f64 * scn.rate())
}

/// `n_T n_S n_R / max(n_T, n_S, n_R)`; `n_T n_R` without double scattering.
pub fn diversity_order(scn: &Scenario) -> f64 {
    let (t, s, r) = (scn.n_t(), scn.n_s(), scn.n_r());
    if scn.no_double_scattering() {
        return (t * r) as f64;
    }
    (t * s * r) as f64 / t.max(s).max(r) as f64
}

/// `(1/π) ∫₀^Θ f(θ) dθ` with an `nodes`-point Gauss-Legendre rule.
pub fn sep_theta_integral(integrand: impl FnMut(f64) -> f64, theta_max: f64, nodes: usize) -> f64 {
    GaussLegendre::cached(nodes).integrate(0.0, theta_max, integrand) / PI
}

/// Conditional M-PSK SEP at instantaneous SNR `gamma`:
/// `(1/π) ∫₀^Θ exp(−gγ/sin²θ) dθ`.
pub fn conditional_sep(psk: &PskConstellation, gamma: f64, rule: &GaussLegendre) -> f64 {
    let c = psk.g * gamma;
    rule.integrate(0.0, psk.theta_max, |t| (-c / t.sin().powi(2)).exp()) / PI
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr > 0.0) || !snr.is_finite() {
        return domain(format!("average SNR must be positive and finite, got {snr}"));
    }
    Ok(())
}

/// Largest accumulated rounding floor tolerated, relative to the SEP.
const FLOOR_REL_TOL: f64 = 1e-3;

/// Runs the θ-integral of a fallible integrand in parallel over the nodes.
///
/// Each node reports a rounding floor. Nodes whose value does not clear it
/// count as zero; the SEP is rejected when the floors summed over all nodes
/// are not negligible against it.
fn integrate_theta(
    psk: &PskConstellation,
    nodes: usize,
    f: impl Fn(f64) -> Result<Bounded> + Sync,
) -> Result<f64> {
    let rule = GaussLegendre::cached(nodes);
    let points: Vec<(f64, f64)> = rule.mapped(0.0, psk.theta_max).collect();
    let values: Vec<Bounded> = points.par_iter().map(|&(t, _)| f(t)).collect::<Result<_>>()?;
    let (mut sep, mut floor) = (0.0, 0.0);
    for (v, &(_, w)) in values.iter().zip(&points) {
        if v.value > v.floor {
            sep += w * v.value;
        }
        floor += w * v.floor;
    }
    let (sep, floor) = (sep / PI, floor / PI);
    if !sep.is_finite() || !floor.is_finite() {
        return Err(Error::Numeric("SEP integral is not finite".into()));
    }
    if floor > FLOOR_REL_TOL * sep {
        return Err(Error::Numeric(format!("SEP {sep:e} is not resolved above its rounding floor {floor:e}")));
    }
    Ok(sep)
}

/// `ξ(θ) = g γ̄ / (n_S n_T ℛ sin²θ)`.
fn xi_factor(scn: &Scenario, psk: &PskConstellation, snr: f64) -> f64 {
    psk.g * snr / (scn.n_s() as f64 * scn.n_t() as f64 * scn.rate())
}

/// SEP with `Φ_T`, `Φ_S`, `Φ_R` all identity, through the
/// `min(n_T,n_S)`-square Hankel determinant.
pub fn sep_mpsk_uncorrelated(scn: &Scenario, psk: &PskConstellation, snr: f64) -> Result<f64> {
    sep_mpsk_uncorrelated_with(scn, psk, snr, DEFAULT_THETA_NODES)
}

pub fn sep_mpsk_uncorrelated_with(scn: &Scenario, psk: &PskConstellation, snr: f64, nodes: usize) -> Result<f64> {
    check_snr(snr)?;
    if !scn.is_uncorrelated() {
        return domain("uncorrelated formula needs identity correlation matrices");
    }
    if scn.no_double_scattering() {
        return domain("scenario has no double-scattering stage");
    }
    let (n1, n2) = (scn.n_t().min(scn.n_s()), scn.n_t().max(scn.n_s()));
    let c = xi_factor(scn, psk, snr);
    integrate_theta(psk, nodes, |t| uncorr_bounded(n1, n2, scn.n_r(), c / t.sin().powi(2)))
}

/// SEP with white scatterers (`Φ_S = I`) and `n_S ≥ n_T`, for arbitrary
/// `Φ_T` and `Φ_R`.
pub fn sep_mpsk_doubly_correlated(scn: &Scenario, psk: &PskConstellation, snr: f64) -> Result<f64> {
    sep_mpsk_doubly_correlated_with(scn, psk, snr, DEFAULT_THETA_NODES)
}

pub fn sep_mpsk_doubly_correlated_with(
    scn: &Scenario,
    psk: &PskConstellation,
    snr: f64,
    nodes: usize,
) -> Result<f64> {
    check_snr(snr)?;
    if !scn.phi_s().is_identity() {
        return domain("doubly correlated formula needs Φ_S = I");
    }
    if scn.no_double_scattering() {
        return domain("scenario has no double-scattering stage");
    }
    if scn.n_s() < scn.n_t() {
        return Err(Error::Unsupported(format!(
            "no closed form for n_S = {} < n_T = {} with correlated antennas",
            scn.n_s(),
            scn.n_t()
        )));
    }
    let (n_t, n_s) = (scn.n_t(), scn.n_s());
    let tx = scn.phi_t().spectrum();
    let rx = scn.phi_r().spectrum();
    let c = xi_factor(scn, psk, snr);
    integrate_theta(psk, nodes, |t| kron_bounded(n_t, n_s, tx, rx, c / t.sin().powi(2)))
}

/// SEP with a single receive antenna, arbitrary `Φ_T` and `Φ_S`.
pub fn sep_mpsk_miso(scn: &Scenario, psk: &PskConstellation, snr: f64) -> Result<f64> {
    sep_mpsk_miso_with(scn, psk, snr, DEFAULT_THETA_NODES)
}

pub fn sep_mpsk_miso_with(scn: &Scenario, psk: &PskConstellation, snr: f64, nodes: usize) -> Result<f64> {
    check_snr(snr)?;
    if scn.n_r() != 1 {
        return domain(format!("single-receive-antenna formula needs n_R = 1, got {}", scn.n_r()));
    }
    if scn.no_double_scattering() {
        return domain("scenario has no double-scattering stage");
    }
    let sc = scn.phi_s().spectrum();
    let tx = scn.phi_t().spectrum();
    let c = xi_factor(scn, psk, snr);
    integrate_theta(psk, nodes, |t| miso_bounded(sc, tx, c / t.sin().powi(2)))
}

/// SEP over `H = Φ_R^{1/2} G Φ_T^{1/2}` (no double scattering):
/// `(1/π) ∫ ∏_{i,j} (1 + gγ̄ t_i r_j/(n_T ℛ sin²θ))^{−1} dθ`.
pub fn sep_mpsk_no_double_scattering(
    tx: &Spectrum,
    rx: &Spectrum,
    rate: f64,
    psk: &PskConstellation,
    snr: f64,
) -> Result<f64> {
    check_snr(snr)?;
    let c = psk.g * snr / (tx.dim() as f64 * rate);
    integrate_theta(psk, DEFAULT_THETA_NODES, |t| {
        let x = c / t.sin().powi(2);
        let mut log = 0.0;
        for &(a, ta) in tx.distinct() {
            for &(b, tb) in rx.distinct() {
                log -= (ta * tb) as f64 * (x * a * b).ln_1p();
            }
        }
        Ok(Bounded { value: log.exp(), floor: 0.0 })
    })
}

/// i.i.d. Rayleigh SEP with diversity `n_T n_R`.
pub fn sep_mpsk_iid_rayleigh(n_t: usize, n_r: usize, rate: f64, psk: &PskConstellation, snr: f64) -> Result<f64> {
    sep_mpsk_no_double_scattering(&Spectrum::scalar(1.0, n_t), &Spectrum::scalar(1.0, n_r), rate, psk, snr)
}

/// Which closed form applies to a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepFormula {
    NoDoubleScattering,
    Uncorrelated,
    Miso,
    DoublyCorrelated,
}

/// Formula selection in the order uncorrelated, single receive antenna,
/// doubly correlated.
pub fn select_formula(scn: &Scenario) -> Result<SepFormula> {
    if scn.no_double_scattering() {
        Ok(SepFormula::NoDoubleScattering)
    } else if scn.is_uncorrelated() {
        Ok(SepFormula::Uncorrelated)
    } else if scn.n_r() == 1 {
        Ok(SepFormula::Miso)
    } else if scn.phi_s().is_identity() && scn.n_s() >= scn.n_t() {
        Ok(SepFormula::DoublyCorrelated)
    } else {
        Err(Error::Unsupported(
            "no closed-form SEP for this correlation structure; use Monte Carlo".into(),
        ))
    }
}

/// Closed-form SEP through the first applicable formula.
pub fn sep_mpsk(scn: &Scenario, psk: &PskConstellation, snr: f64) -> Result<f64> {
    match select_formula(scn)? {
        SepFormula::NoDoubleScattering => sep_mpsk_no_double_scattering(
            scn.phi_t().spectrum(),
            scn.phi_r().spectrum(),
            scn.rate(),
            psk,
            snr,
        ),
        SepFormula::Uncorrelated => sep_mpsk_uncorrelated(scn, psk, snr),
        SepFormula::Miso => sep_mpsk_miso(scn, psk, snr),
        SepFormula::DoublyCorrelated => sep_mpsk_doubly_correlated(scn, psk, snr),
    }
}

/// dB to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Closed-form SEP at each SNR (dB) of the grid.
pub fn sep_curve(scn: &Scenario, psk: &PskConstellation, snr_db: &[f64], label: &str) -> Result<Vec<SepResult>> {
    snr_db
        .iter()
        .map(|&db| {
            Ok(SepResult {
                snr_db: db,
                sep: sep_mpsk(scn, psk, db_to_linear(db))?,
                method: SepMethod::ClosedForm,
                scenario: label.to_string(),
            })
        })
        .collect()
}
