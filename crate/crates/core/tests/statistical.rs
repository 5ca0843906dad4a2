//! Closed forms against sampled channels and matrices.

mod common;

use common::{ks_statistic, lambda_max_2x2, MaxEigenCdf, KS_CRITICAL};
use dsmimo::corrmat::{constant_corr, exponential_corr, hermitian_sqrt, spectrum_of, DEFAULT_CLUSTER_TOL};
use dsmimo::detform::{expected_inv_det_kron, expected_inv_det_miso, quadratic_form_eigen_pdf, wishart_eigen_pdf};
use dsmimo::matstat::{sample_channel, sample_gaussian, standard_complex_matrix, trace_quadratic_cumulant, GaussianMatrixSpec};
use dsmimo::mc::{mc_capacity, mc_sep, CapacityMode};
use dsmimo::{Complex64, DMatrix, MonteCarloConfig, OstbcCode, PskConstellation, Scenario, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn wishart_max_eigenvalue_passes_ks() {
    let sigma = Spectrum::new(vec![(2.0, 1), (1.0, 1)]).unwrap();
    let cdf = MaxEigenCdf::new(|a, b| wishart_eigen_pdf(&[a, b], 3, &sigma).unwrap(), 60.0, 3000);
    assert!((cdf.at(60.0) - 1.0).abs() < 1e-6);
    let row_cov = DMatrix::from_fn(2, 2, |i, j| Complex64::new(if i == j { (i + 1) as f64 } else { 0.0 }, 0.0));
    let spec = GaussianMatrixSpec::new(&row_cov, &DMatrix::identity(3, 3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<f64> = (0..100_000)
        .map(|_| {
            let x = sample_gaussian(&spec, &mut rng);
            lambda_max_2x2(&(&x * x.adjoint()))
        })
        .collect();
    let ks = ks_statistic(samples, &cdf);
    assert!(ks < KS_CRITICAL, "KS statistic {ks}");
}

#[test]
fn quadratic_form_max_eigenvalue_passes_ks() {
    let beta = Spectrum::new(vec![(3.0, 1), (1.0, 1)]).unwrap();
    let cdf = MaxEigenCdf::new(|a, b| quadratic_form_eigen_pdf(&[a, b], 2, &beta).unwrap(), 80.0, 4000);
    assert!((cdf.at(80.0) - 1.0).abs() < 1e-6);
    let scale = [3f64.sqrt(), 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let samples: Vec<f64> = (0..100_000)
        .map(|_| {
            let mut x = standard_complex_matrix(2, 2, &mut rng);
            for (j, s) in scale.iter().enumerate() {
                x.column_mut(j).scale_mut(*s);
            }
            lambda_max_2x2(&(&x * x.adjoint()))
        })
        .collect();
    let ks = ks_statistic(samples, &cdf);
    assert!(ks < KS_CRITICAL, "KS statistic {ks}");
}

#[test]
fn ks_rejects_a_wrong_density() {
    // Samples from β = {3, 1} against the β = {2, 1} density.
    let wrong = Spectrum::new(vec![(2.0, 1), (1.0, 1)]).unwrap();
    let cdf = MaxEigenCdf::new(|a, b| quadratic_form_eigen_pdf(&[a, b], 2, &wrong).unwrap(), 80.0, 4000);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let samples: Vec<f64> = (0..100_000)
        .map(|_| {
            let mut x = standard_complex_matrix(2, 2, &mut rng);
            x.column_mut(0).scale_mut(3f64.sqrt());
            lambda_max_2x2(&(&x * x.adjoint()))
        })
        .collect();
    assert!(ks_statistic(samples, &cdf) > KS_CRITICAL);
}

fn random_pd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = standard_complex_matrix(n, n, rng);
    let mut m = (&g * g.adjoint()).unscale(n as f64);
    for i in 0..n {
        m[(i, i)] += Complex64::new(0.2, 0.0);
    }
    m
}

fn sandwich_spectrum(outer: &DMatrix<Complex64>, inner: &DMatrix<Complex64>) -> Spectrum {
    let r = hermitian_sqrt(outer).unwrap();
    spectrum_of(&(&r * inner * &r), DEFAULT_CLUSTER_TOL).unwrap()
}

#[test]
fn trace_quadratic_cumulants_match_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (rows, cols) in [(1, 1), (2, 3), (4, 2), (3, 4)] {
        let (sigma, psi) = (random_pd(rows, &mut rng), random_pd(cols, &mut rng));
        let (a, b) = (random_pd(rows, &mut rng), random_pd(cols, &mut rng));
        let a_sigma = sandwich_spectrum(&sigma, &a);
        let psi_b = sandwich_spectrum(&psi, &b);
        let k1 = trace_quadratic_cumulant(1, &a_sigma, &psi_b).unwrap();
        let k2 = trace_quadratic_cumulant(2, &a_sigma, &psi_b).unwrap();
        let spec = GaussianMatrixSpec::new(&sigma, &psi).unwrap();
        let (batches, per) = (40, 5000);
        let (mut means, mut vars) = (Vec::new(), Vec::new());
        for _ in 0..batches {
            let t: Vec<f64> = (0..per)
                .map(|_| {
                    let x = sample_gaussian(&spec, &mut rng);
                    (&a * &x * &b * x.adjoint()).trace().re
                })
                .collect();
            let m = t.iter().sum::<f64>() / per as f64;
            means.push(m);
            vars.push(t.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (per - 1) as f64);
        }
        let summary = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
            (m, s / (v.len() as f64).sqrt())
        };
        let ((mean, se_m), (var, se_v)) = (summary(&means), summary(&vars));
        assert!((mean - k1).abs() < 3.0 * se_m, "{rows}x{cols}: mean {mean} ± {se_m} vs {k1}");
        assert!((var - k2).abs() < 3.0 * se_v, "{rows}x{cols}: var {var} ± {se_v} vs {k2}");
    }
}

fn laplace_mc(scn: &Scenario, s: f64, trials: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..trials)
        .map(|_| {
            let h = sample_channel(scn, &mut rng);
            (-s * h.iter().map(|z| z.norm_sqr()).sum::<f64>()).exp()
        })
        .collect();
    let m = v.iter().sum::<f64>() / trials as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (trials - 1) as f64;
    (m, (var / trials as f64).sqrt())
}

#[test]
fn keyhole_laplace_transform_matches_determinantal_form() {
    let scn = Scenario::new(
        exponential_corr(2, 0.6).unwrap(),
        constant_corr(1, 0.0).unwrap(),
        constant_corr(3, 0.4).unwrap(),
        OstbcCode::alamouti(),
    )
    .unwrap();
    for s in [0.1, 0.5, 2.0] {
        let exact = expected_inv_det_miso(scn.phi_r().spectrum(), scn.phi_t().spectrum(), s).unwrap();
        let (m, se) = laplace_mc(&scn, s, 200_000, 31);
        assert!((m - exact).abs() < 3.0 * se, "s={s}: {m} ± {se} vs {exact}");
    }
}

#[test]
fn doubly_correlated_laplace_transform_matches_determinantal_form() {
    let scn = Scenario::new(
        exponential_corr(2, 0.6).unwrap(),
        constant_corr(3, 0.0).unwrap(),
        constant_corr(2, 0.5).unwrap(),
        OstbcCode::alamouti(),
    )
    .unwrap();
    for s in [0.2, 1.0] {
        let exact = expected_inv_det_kron(2, 3, scn.phi_t().spectrum(), scn.phi_r().spectrum(), s / 3.0).unwrap();
        let (m, se) = laplace_mc(&scn, s, 200_000, 32);
        assert!((m - exact).abs() < 3.0 * se, "s={s}: {m} ± {se} vs {exact}");
    }
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let scn = Scenario::uncorrelated(2, 2, 2).unwrap();
    let psk = PskConstellation::new(8).unwrap();
    let run = |workers| {
        let cfg = MonteCarloConfig { trials: 150_000, seed: 77, workers: Some(workers) };
        mc_sep(&scn, &psk, 10.0, &cfg).unwrap()
    };
    let one = run(1);
    for w in [2, 3, 8] {
        let other = run(w);
        assert_eq!(one.value.to_bits(), other.value.to_bits());
        assert_eq!(one.std_error.to_bits(), other.std_error.to_bits());
    }
}

#[test]
fn ostbc_capacity_never_exceeds_general_capacity() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let scenarios = [
        Scenario::uncorrelated(2, 2, 2).unwrap(),
        Scenario::uncorrelated(4, 3, 2).unwrap(),
        Scenario::new(
            exponential_corr(4, 0.5).unwrap(),
            exponential_corr(6, 0.5).unwrap(),
            exponential_corr(2, 0.5).unwrap(),
            OstbcCode::g4(),
        )
        .unwrap(),
    ];
    for scn in &scenarios {
        for snr in [0.1, 1.0, 10.0, 100.0] {
            let cfg = MonteCarloConfig::new(20_000, rng.random());
            let g = mc_capacity(scn, snr, CapacityMode::General, &cfg).unwrap();
            let o = mc_capacity(scn, snr, CapacityMode::Ostbc, &cfg).unwrap();
            let se = (g.std_error.powi(2) + o.std_error.powi(2)).sqrt();
            assert!(o.value <= g.value + 3.0 * se, "snr {snr}: {} vs {}", o.value, g.value);
        }
    }
}
