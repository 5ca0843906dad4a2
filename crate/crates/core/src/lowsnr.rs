//! Effective fading figure and low-SNR capacity parameters.
//!
//! Everything here is a function of the three correlation figures
//! `ζ_T, ζ_S, ζ_R` and the code rate. Slopes are in bits/s/Hz per 3 dB.

use crate::corrmat::Spectrum;
use crate::error::{domain, Result};
use crate::matstat::{kurtosis_frobenius, Scenario};

/// `10 log₁₀ 2`, the width of one slope unit in dB.
pub const THREE_DB: f64 = 3.010_299_956_639_812;

/// Signaling assumed by the capacity expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signaling {
    /// Unconstrained Gaussian inputs.
    General,
    /// The scenario's orthogonal space-time block code.
    Ostbc,
}

/// Low-SNR summary of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowSnrMetrics {
    /// Transmit-side minimum `E_b/N_0`, natural units.
    pub ebn0_min_transmit: f64,
    pub ebn0_min_transmit_db: f64,
    pub ebn0_min_received_db: f64,
    pub s0_general: f64,
    pub s0_ostbc: f64,
    pub eff_db: f64,
}

/// Effective fading figure `10 log₁₀(ζ_Tζ_R + ζ_Tζ_S + ζ_Rζ_S)` in dB.
pub fn eff_stbc(scn: &Scenario) -> f64 {
    10.0 * (kurtosis_frobenius(scn) - 1.0).log10()
}

/// Minimum transmit-side `E_b/N_0 = ln 2 / n_R`, the same for both kinds of
/// signaling.
pub fn ebn0_min(n_r: usize, _mode: Signaling) -> Result<f64> {
    if n_r == 0 {
        return domain("at least one receive antenna is required");
    }
    Ok(std::f64::consts::LN_2 / n_r as f64)
}

/// Minimum received `E_b/N_0`, `10 log₁₀ ln 2 ≈ −1.59 dB`.
pub fn ebn0_min_received_db() -> f64 {
    10.0 * std::f64::consts::LN_2.log10()
}

/// `2 / (ζ_T + ζ_S + ζ_R + ζ_T ζ_S ζ_R)`.
pub fn s0_general(scn: &Scenario) -> f64 {
    let (zt, zs, zr) = scn.correlation_figures();
    2.0 / (zt + zs + zr + zt * zs * zr)
}

/// `2ℛ / κ(‖H‖_F)`.
pub fn s0_ostbc(scn: &Scenario) -> f64 {
    2.0 * scn.rate() / kurtosis_frobenius(scn)
}

pub fn lowsnr_metrics(scn: &Scenario) -> Result<LowSnrMetrics> {
    let tx = ebn0_min(scn.n_r(), Signaling::General)?;
    Ok(LowSnrMetrics {
        ebn0_min_transmit: tx,
        ebn0_min_transmit_db: 10.0 * tx.log10(),
        ebn0_min_received_db: ebn0_min_received_db(),
        s0_general: s0_general(scn),
        s0_ostbc: s0_ostbc(scn),
        eff_db: eff_stbc(scn),
    })
}

/// Which majorization object to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurOrder {
    /// `(Φ_T⊗Φ_R)/(n_T n_R) ⊕ (Φ_T⊗Φ_S)/(n_T n_S) ⊕ (Φ_S⊗Φ_R)/(n_S n_R)`,
    /// ordering the kurtosis.
    J,
    /// `Φ_T/n_T ⊕ Φ_S/n_S ⊕ Φ_R/n_R ⊕ (Φ_T⊗Φ_S⊗Φ_R)/(n_T n_S n_R)`,
    /// ordering the general low-SNR slope.
    JGrave,
}

fn scaled(spec: &Spectrum, dim: usize) -> Vec<f64> {
    spec.eigenvalues().into_iter().map(|v| v / dim as f64).collect()
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Eigenvalues of the chosen Schur-order object, sorted decreasingly, built
/// from products and unions of the component spectra.
pub fn schur_order_eigs(scn: &Scenario, which: SchurOrder) -> Vec<f64> {
    let t = scaled(scn.phi_t().spectrum(), scn.n_t());
    let s = scaled(scn.phi_s().spectrum(), scn.n_s());
    let r = scaled(scn.phi_r().spectrum(), scn.n_r());
    let mut out = match which {
        SchurOrder::J => [kron(&t, &r), kron(&t, &s), kron(&s, &r)].concat(),
        SchurOrder::JGrave => [t.clone(), s.clone(), r.clone(), kron(&kron(&t, &s), &r)].concat(),
    };
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// First-order capacity `S₀ (E_b/N_0|dB − E_b/N_0,min|dB) / 3.01` against the
/// received `E_b/N_0` grid (dB); grid points at or below the minimum are
/// skipped.
pub fn lowsnr_capacity_curve(scn: &Scenario, mode: Signaling, ebn0_grid_db: &[f64]) -> Vec<(f64, f64)> {
    let s0 = match mode {
        Signaling::General => s0_general(scn),
        Signaling::Ostbc => s0_ostbc(scn),
    };
    let min_db = ebn0_min_received_db();
    ebn0_grid_db
        .iter()
        .filter(|&&e| e > min_db)
        .map(|&e| (e, s0 * (e - min_db) / THREE_DB))
        .collect()
}

/// Received `E_b/N_0` in dB at average SNR `snr` and capacity `capacity`
/// (bits/s/Hz): `n_R γ̄ / C`.
pub fn received_ebn0_db(snr: f64, capacity: f64, n_r: usize) -> f64 {
    10.0 * (n_r as f64 * snr / capacity).log10()
}
