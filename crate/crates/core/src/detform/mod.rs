//! Determinantal special-function machinery.
//!
//! The scalar kernel is `₂F₀(n, q; −x)` in its integral form. On top of it sit
//! the characteristic (partial-fraction) coefficients of `det(I + ξA)^{−1}`,
//! the two-matrix hypergeometric function as a ratio of confluent block
//! determinants, the joint eigenvalue densities of correlated Wishart
//! matrices and Gaussian quadratic forms, and closed forms for expected
//! inverse determinants.
//!
//! Repeated eigenvalues on the covariance side are handled by confluent
//! blocks: a value `σ_k` of multiplicity `τ_k` contributes `τ_k` columns
//! carrying successive derivatives. All block determinants are evaluated in
//! sign/log-magnitude form.

mod charcoef;
mod hyp;
mod invdet;
mod lemma;
mod pdf;

pub use charcoef::{characteristic_coefficients, CharCoefficients};
pub use hyp::hyp2f0;
pub use invdet::{expected_inv_det_kron, expected_inv_det_miso, expected_inv_det_uncorr};
pub use invdet::{kron_bounded, miso_bounded, uncorr_bounded, Bounded};
pub use lemma::{hyp_det_two_matrix, HypKernelId};
pub use pdf::{quadratic_form_eigen_pdf, wishart_eigen_pdf};
