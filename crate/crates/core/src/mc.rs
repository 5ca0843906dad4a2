//! Orthogonal space-time block codes and the Monte Carlo engine.
//!
//! Trials are split into blocks of 2¹⁶. Block `b` draws from a ChaCha8 stream
//! seeded by the master seed with stream number `b`, blocks run in parallel,
//! and partial sums are reduced in block order. Estimates therefore depend
//! only on `(trials, seed)`, never on the worker count.
//!
//! Standard errors come from 32 contiguous batch means, which also covers the
//! ratio estimators used for the kurtosis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::matstat::{sample_channel, Scenario};
use crate::numeric::GaussLegendre;
use crate::sep::{conditional_sep, PskConstellation, DEFAULT_THETA_NODES};

/// Trials per random stream.
pub const BLOCK_SIZE: u64 = 1 << 16;
/// Number of batches behind every standard error.
pub const BATCHES: u64 = 32;

/// Entry of a code matrix: zero or `±x_i` / `±x_i*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeEntry {
    Zero,
    Symbol { index: usize, conjugate: bool, negate: bool },
}

impl CodeEntry {
    const fn sym(index: usize) -> Self {
        CodeEntry::Symbol { index, conjugate: false, negate: false }
    }

    const fn neg_conj(index: usize) -> Self {
        CodeEntry::Symbol { index, conjugate: true, negate: true }
    }

    const fn conj(index: usize) -> Self {
        CodeEntry::Symbol { index, conjugate: true, negate: false }
    }

    const fn neg(index: usize) -> Self {
        CodeEntry::Symbol { index, conjugate: false, negate: true }
    }

    fn eval(&self, x: &[Complex64]) -> Complex64 {
        match *self {
            CodeEntry::Zero => Complex64::new(0.0, 0.0),
            CodeEntry::Symbol { index, conjugate, negate } => {
                let v = if conjugate { x[index].conj() } else { x[index] };
                if negate {
                    -v
                } else {
                    v
                }
            }
        }
    }
}

/// An `N_c × n_T` orthogonal design carrying `N` symbols per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OstbcCode {
    name: &'static str,
    n_symbols: usize,
    rows: Vec<Vec<CodeEntry>>,
}

impl OstbcCode {
    /// Uncoded single-antenna transmission.
    pub fn siso() -> Self {
        Self { name: "siso", n_symbols: 1, rows: vec![vec![CodeEntry::sym(0)]] }
    }

    /// Alamouti's rate-one code for two antennas.
    pub fn alamouti() -> Self {
        use CodeEntry as E;
        Self {
            name: "alamouti",
            n_symbols: 2,
            rows: vec![vec![E::sym(0), E::sym(1)], vec![E::neg_conj(1), E::conj(0)]],
        }
    }

    /// Rate-3/4 code for four antennas.
    pub fn g4() -> Self {
        use CodeEntry as E;
        Self {
            name: "g4",
            n_symbols: 3,
            rows: vec![
                vec![E::sym(0), E::sym(1), E::sym(2), E::Zero],
                vec![E::neg_conj(1), E::conj(0), E::Zero, E::neg(2)],
                vec![E::neg_conj(2), E::Zero, E::conj(0), E::sym(1)],
                vec![E::Zero, E::conj(2), E::neg_conj(1), E::sym(0)],
            ],
        }
    }

    /// Rate-3/4 code for three antennas: the first three columns of [`g4`](Self::g4).
    pub fn g3() -> Self {
        let mut code = Self::g4();
        code.name = "g3";
        for row in &mut code.rows {
            row.pop();
        }
        code
    }

    /// The shipped code for `n_t` transmit antennas.
    pub fn for_antennas(n_t: usize) -> Result<Self> {
        match n_t {
            1 => Ok(Self::siso()),
            2 => Ok(Self::alamouti()),
            3 => Ok(Self::g3()),
            4 => Ok(Self::g4()),
            0 => domain("at least one transmit antenna is required"),
            _ => Err(Error::Unsupported(format!("no orthogonal design shipped for {n_t} antennas"))),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "siso" => Ok(Self::siso()),
            "alamouti" => Ok(Self::alamouti()),
            "g3" => Ok(Self::g3()),
            "g4" => Ok(Self::g4()),
            _ => domain(format!("unknown code '{name}' (expected siso, alamouti, g3 or g4)")),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn n_t(&self) -> usize {
        self.rows[0].len()
    }

    /// Block length `N_c`.
    pub fn n_c(&self) -> usize {
        self.rows.len()
    }

    /// Symbols per block `N`.
    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    /// `ℛ = N / N_c`.
    pub fn rate(&self) -> f64 {
        self.n_symbols as f64 / self.n_c() as f64
    }

    /// The `N_c × n_T` transmission matrix for the given symbols.
    pub fn transmission_matrix(&self, symbols: &[Complex64]) -> Result<DMatrix<Complex64>> {
        if symbols.len() != self.n_symbols {
            return domain(format!("{} expects {} symbols", self.name, self.n_symbols));
        }
        Ok(DMatrix::from_fn(self.n_c(), self.n_t(), |i, j| self.rows[i][j].eval(symbols)))
    }

    /// `max |𝒢†𝒢 − (Σ|x_i|²) I|` over all entries.
    pub fn orthogonality_defect(&self, symbols: &[Complex64]) -> Result<f64> {
        let g = self.transmission_matrix(symbols)?;
        let energy: f64 = symbols.iter().map(|x| x.norm_sqr()).sum();
        let gram = g.adjoint() * &g;
        let n = self.n_t();
        Ok((0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let target = if i == j { energy } else { 0.0 };
                (gram[(i, j)] - Complex64::new(target, 0.0)).norm()
            })
            .fold(0.0, f64::max))
    }
}

/// `(⌈log₂ n_T⌉ + 1) / 2^{⌈log₂ n_T⌉}`.
pub fn ostbc_rate(n_t: usize) -> Result<f64> {
    if n_t == 0 {
        return domain("at least one transmit antenna is required");
    }
    let c = n_t.next_power_of_two().trailing_zeros();
    Ok((c as f64 + 1.0) / (1u64 << c) as f64)
}

/// Trial count and master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    /// Advisory worker count; `None` defers to `DSMIMO_THREADS` or the
    /// global pool. Never affects results.
    pub workers: Option<usize>,
}

impl MonteCarloConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, workers: None }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return domain("Monte Carlo needs at least one trial");
        }
        Ok(())
    }
}

/// A Monte Carlo estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl Estimate {
    /// `|value − reference|` in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.value == reference {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - reference).abs() / self.std_error
        }
    }
}

/// Per-batch sums of `K` per-trial statistics.
struct Batches<const K: usize> {
    sums: Vec<[f64; K]>,
    counts: Vec<u64>,
}

impl<const K: usize> Batches<K> {
    fn means(&self, b: usize) -> [f64; K] {
        let mut m = self.sums[b];
        m.iter_mut().for_each(|v| *v /= self.counts[b] as f64);
        m
    }

    fn overall(&self) -> [f64; K] {
        let total: u64 = self.counts.iter().sum();
        let mut m = [0.0; K];
        for s in &self.sums {
            for (acc, v) in m.iter_mut().zip(s) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= total as f64);
        m
    }

    /// Applies `f` to the overall means and to each batch's means.
    fn estimate(&self, f: impl Fn(&[f64; K]) -> f64) -> Estimate {
        let trials = self.counts.iter().sum();
        let value = f(&self.overall());
        let nb = self.sums.len();
        let std_error = if nb < 2 {
            0.0
        } else {
            let per: Vec<f64> = (0..nb).map(|b| f(&self.means(b))).collect();
            let mean = per.iter().sum::<f64>() / nb as f64;
            let var = per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nb - 1) as f64;
            (var / nb as f64).sqrt()
        };
        Estimate { value, std_error, trials }
    }
}

fn worker_count(cfg: &MonteCarloConfig) -> Option<usize> {
    cfg.workers.or_else(|| {
        std::env::var("DSMIMO_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
    })
}

/// Runs `trial` once per trial and accumulates its output into batches.
fn run_trials<const K: usize, F>(cfg: &MonteCarloConfig, trial: F) -> Result<Batches<K>>
where
    F: Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
{
    cfg.validate()?;
    let trials = cfg.trials;
    let nb = BATCHES.min(trials);
    let batch_of = |t: u64| ((t as u128 * nb as u128) / trials as u128) as usize;
    let n_blocks = trials.div_ceil(BLOCK_SIZE);
    let block = |b: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(b);
        let start = b * BLOCK_SIZE;
        let end = (start + BLOCK_SIZE).min(trials);
        let first = batch_of(start);
        let mut partial: Vec<([f64; K], u64)> = vec![([0.0; K], 0); batch_of(end - 1) - first + 1];
        for t in start..end {
            let out = trial(&mut rng);
            let slot = &mut partial[batch_of(t) - first];
            for (acc, v) in slot.0.iter_mut().zip(out) {
                *acc += v;
            }
            slot.1 += 1;
        }
        (first, partial)
    };
    let run = || (0..n_blocks).into_par_iter().map(block).collect::<Vec<_>>();
    let parts = match worker_count(cfg) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    let mut batches = Batches { sums: vec![[0.0; K]; nb as usize], counts: vec![0; nb as usize] };
    for (first, partial) in parts {
        for (offset, (sums, count)) in partial.into_iter().enumerate() {
            let b = first + offset;
            for (acc, v) in batches.sums[b].iter_mut().zip(sums) {
                *acc += v;
            }
            batches.counts[b] += count;
        }
    }
    Ok(batches)
}

fn frobenius_sq(h: &DMatrix<Complex64>) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum()
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr > 0.0) || !snr.is_finite() {
        return domain(format!("average SNR must be positive and finite, got {snr}"));
    }
    Ok(())
}

/// Semi-analytic M-PSK SEP: the exact conditional error probability at
/// `γ = γ̄‖H‖²_F/(n_T ℛ)`, averaged over channel draws.
pub fn mc_sep(scn: &Scenario, psk: &PskConstellation, snr: f64, cfg: &MonteCarloConfig) -> Result<Estimate> {
    check_snr(snr)?;
    let rule = GaussLegendre::cached(DEFAULT_THETA_NODES);
    let scale = snr / (scn.n_t() as f64 * scn.rate());
    let batches = run_trials(cfg, |rng| {
        let h = sample_channel(scn, rng);
        [conditional_sep(psk, scale * frobenius_sq(&h), &rule)]
    })?;
    Ok(batches.estimate(|m| m[0]))
}

/// Kurtosis of `‖H‖_F` and the derived effective fading figure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KurtosisEstimate {
    pub kurtosis: Estimate,
    /// `10 log₁₀(κ − 1)` in dB; NaN when `κ̂ ≤ 1`.
    pub eff_db: Estimate,
    /// False when `κ̂ ≤ 1`, where the effective fading figure is undefined.
    pub eff_defined: bool,
}

/// Minimum trial count for kurtosis estimation.
pub const MIN_KURTOSIS_TRIALS: u64 = 10_000;

/// Raw-moment estimate `E‖H‖⁴ / (E‖H‖²)²`.
pub fn mc_kurtosis_eff(scn: &Scenario, cfg: &MonteCarloConfig) -> Result<KurtosisEstimate> {
    if cfg.trials < MIN_KURTOSIS_TRIALS {
        return domain(format!("kurtosis estimation needs at least {MIN_KURTOSIS_TRIALS} trials"));
    }
    let batches = run_trials(cfg, |rng| {
        let f = frobenius_sq(&sample_channel(scn, rng));
        [f, f * f]
    })?;
    let kurt = |m: &[f64; 2]| m[1] / (m[0] * m[0]);
    let kurtosis = batches.estimate(kurt);
    let eff_defined = kurtosis.value > 1.0;
    let eff_db = batches.estimate(|m| 10.0 * (kurt(m) - 1.0).log10());
    Ok(KurtosisEstimate { kurtosis, eff_db, eff_defined })
}

/// Which capacity expression to average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMode {
    /// `log₂ det(I + (γ̄/n_T) HH†)`.
    General,
    /// `ℛ log₂(1 + γ̄‖H‖²_F/(n_T ℛ))`.
    Ostbc,
}

fn log2_det_identity_plus(h: &DMatrix<Complex64>, c: f64) -> Result<f64> {
    let n = h.nrows();
    let mut m = (h * h.adjoint()).scale(c);
    for i in 0..n {
        m[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Numeric("I + cHH† is not positive definite".into()))?;
    let l = chol.l_dirty();
    Ok((0..n).map(|i| l[(i, i)].re.ln()).sum::<f64>() * 2.0 / std::f64::consts::LN_2)
}

/// Ergodic capacity in bits/s/Hz.
pub fn mc_capacity(scn: &Scenario, snr: f64, mode: CapacityMode, cfg: &MonteCarloConfig) -> Result<Estimate> {
    check_snr(snr)?;
    let n_t = scn.n_t() as f64;
    let rate = scn.rate();
    let batches = run_trials(cfg, |rng| {
        let h = sample_channel(scn, rng);
        let c = match mode {
            CapacityMode::General => log2_det_identity_plus(&h, snr / n_t).unwrap_or(f64::NAN),
            CapacityMode::Ostbc => rate * (snr * frobenius_sq(&h) / (n_t * rate)).ln_1p() / std::f64::consts::LN_2,
        };
        [c]
    })?;
    let est = batches.estimate(|m| m[0]);
    if !est.value.is_finite() {
        return Err(Error::Numeric("capacity estimate is not finite".into()));
    }
    Ok(est)
}

/// Negative least-squares slope of `log₁₀ SEP` against `snr_db / 10` over the
/// top decade (the last 10 dB) of the curve.
pub fn fit_diversity_slope(curve: &[(f64, f64)]) -> Result<f64> {
    if curve.len() < 4 {
        return domain("slope fit needs at least 4 points");
    }
    let mut pts = curve.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let top = pts[pts.len() - 1].0;
    if top - pts[0].0 < 10.0 - 1e-9 {
        return domain("curve must span at least 10 dB");
    }
    let window: Vec<(f64, f64)> = pts.into_iter().filter(|p| p.0 >= top - 10.0 - 1e-9).collect();
    if window.len() < 2 {
        return domain("top decade holds fewer than two points");
    }
    if window.iter().any(|p| !(p.1 > 0.0)) {
        return domain("SEP values in the fitting window must be positive");
    }
    let xs: Vec<f64> = window.iter().map(|p| p.0 / 10.0).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// A random symbol vector with i.i.d. `CN(0, 1)` entries.
pub fn random_symbols<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| crate::matstat::standard_complex(rng)).collect()
}
