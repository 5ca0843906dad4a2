//! Performance analysis of orthogonal space-time block codes (OSTBCs) over
//! double-scattering MIMO channels
//!
//! ```text
//! H = (1/√n_S) · Φ_R^{1/2} · H₁ · Φ_S^{1/2} · H₂ · Φ_T^{1/2}
//! ```
//!
//! The crate evaluates exact symbol error probabilities for M-PSK, diversity
//! orders, the effective fading figure and the low-SNR capacity parameters of
//! such channels, and ships a Monte Carlo engine that checks every closed form
//! against simulation.
//!
//! Module map:
//! - [`corrmat`]: correlation models, spectra, correlation figures, majorization
//! - [`matstat`]: channel sampling and trace moments of complex Gaussian matrices
//! - [`detform`]: ₂F₀ kernel, characteristic coefficients, determinantal formulas
//! - [`sep`]: closed-form SEP for the uncorrelated, doubly correlated and MISO cases
//! - [`mc`]: OSTBC codebook and Monte Carlo estimators
//! - [`lowsnr`]: effective fading figure, minimum Eb/N0, low-SNR slopes

pub mod corrmat;
pub mod detform;
mod error;
pub mod lowsnr;
pub mod matstat;
pub mod mc;
pub mod numeric;
pub mod sep;

pub use corrmat::{CorrelationMatrix, Spectrum};
pub use error::{Error, Result};
pub use matstat::Scenario;
pub use mc::{Estimate, MonteCarloConfig, OstbcCode};
pub use sep::PskConstellation;

pub use nalgebra::DMatrix;
pub use num_complex::Complex64;
