//! Subcommand drivers. Every value comes from a library call; the drivers only
//! arrange grids, seeds and columns.

use dsmimo::corrmat::{is_majorized, Majorization};
use dsmimo::detform::{expected_inv_det_kron, expected_inv_det_miso, expected_inv_det_uncorr};
use dsmimo::lowsnr::{lowsnr_capacity_curve, lowsnr_metrics, received_ebn0_db, s0_ostbc, Signaling};
use dsmimo::matstat::kurtosis_frobenius;
use dsmimo::mc::{fit_diversity_slope, mc_capacity, mc_sep, CapacityMode};
use dsmimo::sep::{
    db_to_linear, diversity_order, select_formula, sep_mpsk, sep_mpsk_doubly_correlated, sep_mpsk_uncorrelated,
};
use dsmimo::{Estimate, MonteCarloConfig, Scenario, Spectrum};

use crate::config::{ConfigError, CorrModel, RunConfig, Side, SweepAxis, SweepConfig};
use crate::csv::{Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Library(#[from] dsmimo::Error),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Library(dsmimo::Error::Numeric(_)) | CliError::Numeric(_) => 4,
            CliError::Library(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

/// A subcommand's CSV table, optional summary text, and whether every check
/// passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Option<String>,
    pub passed: bool,
}

impl Outcome {
    fn table(table: Table) -> Self {
        Self { table, summary: None, passed: true }
    }
}

fn config_error(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config(ConfigError { line: None, key: Some(key.to_string()), message: message.into() })
}

/// Closed-form SEP, or `None` when no formula covers the scenario.
fn closed_form(scn: &Scenario, cfg: &RunConfig, snr_db: f64) -> Result<Option<f64>, CliError> {
    match sep_mpsk(scn, &cfg.psk(), db_to_linear(snr_db)) {
        Ok(v) => Ok(Some(v)),
        Err(dsmimo::Error::Unsupported(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Monte Carlo SEP for row `row`, seeded `seed + row`; `None` when
/// `mc.trials = 0`.
fn monte_carlo(scn: &Scenario, cfg: &RunConfig, snr_db: f64, row: usize) -> Result<Option<Estimate>, CliError> {
    if cfg.trials == 0 {
        return Ok(None);
    }
    let mc = MonteCarloConfig::new(cfg.trials, cfg.seed.wrapping_add(row as u64));
    Ok(Some(mc_sep(scn, &cfg.psk(), db_to_linear(snr_db), &mc)?))
}

fn mc_cells(est: Option<Estimate>) -> [Cell; 2] {
    [est.map(|e| e.value).into(), est.map(|e| e.std_error).into()]
}

/// SEP against SNR over the configured grid.
pub fn sep_curve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scn = cfg.scenario()?;
    let d = diversity_order(&scn);
    let mut table = Table::new(vec!["snr_db", "sep_closed_form", "sep_mc", "mc_std_err", "diversity_order"]);
    for (i, &db) in cfg.snr_grid_db.iter().enumerate() {
        let [mc, se] = mc_cells(monte_carlo(&scn, cfg, db, i)?);
        table.push(vec![db.into(), closed_form(&scn, cfg, db)?.into(), mc, se, d.into()]);
    }
    Ok(Outcome::table(table))
}

fn swept_scenario(cfg: &RunConfig, sweep: &SweepConfig, value: f64) -> Result<Scenario, CliError> {
    let mut models = [cfg.tx, cfg.sc, cfg.rx];
    let mut n_s = cfg.n_s;
    match &sweep.axis {
        SweepAxis::Rho { sides } => {
            for side in sides {
                let k = *side as usize;
                models[k] = models[k].with_rho(value).expect("identity sides are rejected at parse time");
            }
        }
        SweepAxis::Ns => n_s = value as usize,
    }
    cfg.scenario_with(n_s, models[0], models[1], models[2]).map_err(|e| match e {
        dsmimo::Error::Domain(m) => config_error("sweep.values", format!("value {value}: {m}")),
        other => other.into(),
    })
}

/// SEP at a fixed SNR against ρ or `n_S`.
pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| config_error("sweep.axis", "missing required key"))?;
    let first = match sweep.axis {
        SweepAxis::Rho { .. } => "rho",
        SweepAxis::Ns => "n_s",
    };
    let mut table = Table::new(vec![first, "snr_db", "sep_closed_form", "sep_mc", "mc_std_err", "diversity_order"]);
    for (i, &v) in sweep.values.iter().enumerate() {
        let scn = swept_scenario(cfg, sweep, v)?;
        let [mc, se] = mc_cells(monte_carlo(&scn, cfg, sweep.snr_db, i)?);
        let key = match sweep.axis {
            SweepAxis::Rho { .. } => Cell::Real(v),
            SweepAxis::Ns => Cell::Int(v as u64),
        };
        table.push(vec![
            key,
            sweep.snr_db.into(),
            closed_form(&scn, cfg, sweep.snr_db)?.into(),
            mc,
            se,
            diversity_order(&scn).into(),
        ]);
    }
    Ok(Outcome::table(table))
}

/// Low-SNR parameters and capacity against received `E_b/N_0`.
pub fn lowsnr(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scn = cfg.scenario()?;
    let m = lowsnr_metrics(&scn)?;
    let mut table = Table::new(vec!["series", "ebn0_db", "snr_db", "capacity", "std_err"]);
    for (name, mode) in [("approx_general", Signaling::General), ("approx_ostbc", Signaling::Ostbc)] {
        for (e, c) in lowsnr_capacity_curve(&scn, mode, &cfg.lowsnr.ebn0_grid_db) {
            table.push(vec![name.into(), e.into(), Cell::Empty, c.into(), Cell::Empty]);
        }
    }
    if cfg.trials > 0 {
        for (name, mode) in [("mc_general", CapacityMode::General), ("mc_ostbc", CapacityMode::Ostbc)] {
            for (i, &db) in cfg.lowsnr.mc_snr_db.iter().enumerate() {
                let snr = db_to_linear(db);
                let mc = MonteCarloConfig::new(cfg.trials, cfg.seed.wrapping_add(i as u64));
                let c = mc_capacity(&scn, snr, mode, &mc)?;
                let e = received_ebn0_db(snr, c.value, scn.n_r());
                table.push(vec![name.into(), e.into(), db.into(), c.value.into(), c.std_error.into()]);
            }
        }
    }
    let summary = format!(
        "ebn0_min_transmit_db  {:.4}\nebn0_min_received_db  {:.4}\ns0_general            {:.4}\ns0_ostbc              {:.4}\neff_db                {:.4}\n",
        m.ebn0_min_transmit_db, m.ebn0_min_received_db, m.s0_general, m.s0_ostbc, m.eff_db
    );
    Ok(Outcome { table, summary: Some(summary), passed: true })
}

/// Analytic diversity order next to the slope fitted over the top decade of
/// the SNR grid (closed form where available, else Monte Carlo).
pub fn diversity(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = &cfg.snr_grid_db;
    if grid.len() < 4 || grid[grid.len() - 1] - grid[0] < 10.0 - 1e-9 {
        return Err(config_error("snr.stop_db", "the slope fit needs at least 4 grid points spanning 10 dB"));
    }
    let scn = cfg.scenario()?;
    let closed: Option<Vec<(f64, f64)>> = match select_formula(&scn) {
        Ok(_) => Some(grid.iter().map(|&db| Ok((db, closed_form(&scn, cfg, db)?.unwrap_or(f64::NAN)))).collect::<Result<_, CliError>>()?),
        Err(dsmimo::Error::Unsupported(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let (curve, source) = match closed {
        Some(c) => (c, "closed_form"),
        None => {
            if cfg.trials == 0 {
                return Err(config_error("mc.trials", "no closed form applies; Monte Carlo is needed for the fit"));
            }
            let mut c = Vec::with_capacity(grid.len());
            for (i, &db) in grid.iter().enumerate() {
                c.push((db, monte_carlo(&scn, cfg, db, i)?.expect("trials > 0").value));
            }
            (c, "monte_carlo")
        }
    };
    let slope = fit_diversity_slope(&curve).map_err(|e| CliError::Numeric(format!("slope fit: {e}")))?;
    let top = grid[grid.len() - 1];
    let mut table = Table::new(vec![
        "n_t",
        "n_s",
        "n_r",
        "diversity_order",
        "fitted_slope",
        "fit_start_db",
        "fit_stop_db",
        "fit_source",
    ]);
    table.push(vec![
        scn.n_t().into(),
        scn.n_s().into(),
        scn.n_r().into(),
        diversity_order(&scn).into(),
        slope.into(),
        (top - 10.0).into(),
        top.into(),
        source.into(),
    ]);
    Ok(Outcome::table(table))
}

struct Checks {
    table: Table,
    failures: usize,
}

impl Checks {
    fn new() -> Self {
        Self { table: Table::new(vec!["check", "status", "deviation", "tolerance", "detail"]), failures: 0 }
    }

    fn record(&mut self, name: &str, deviation: f64, tolerance: f64, detail: String) {
        let pass = deviation <= tolerance;
        if !pass {
            self.failures += 1;
        }
        self.table.push(vec![
            name.into(),
            if pass { "pass" } else { "fail" }.into(),
            deviation.into(),
            tolerance.into(),
            detail.as_str().into(),
        ]);
    }

    fn fail(&mut self, name: &str, detail: String) {
        self.failures += 1;
        self.table.push(vec![name.into(), "fail".into(), Cell::Empty, Cell::Empty, detail.as_str().into()]);
    }

    fn note(&mut self, name: &str, status: &str, detail: &str) {
        self.table.push(vec![name.into(), status.into(), Cell::Empty, Cell::Empty, detail.into()]);
    }
}

fn max_rel(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs.into_iter().map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max)
}

/// Cross-checks on the configured scenario; `passed` is false if any fails.
pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.trials == 0 {
        return Err(config_error("mc.trials", "validation needs Monte Carlo trials"));
    }
    let tol = cfg.tolerances;
    let scn = cfg.scenario()?;
    let mut checks = Checks::new();

    let supported = match select_formula(&scn) {
        Ok(f) => {
            checks.note("formula", "info", &format!("{f:?}"));
            true
        }
        Err(dsmimo::Error::Unsupported(m)) => {
            checks.note("formula", "unsupported", &format!("{m}; Monte Carlo only"));
            false
        }
        Err(e) => return Err(e.into()),
    };
    let mut mc_points = Vec::new();
    let mut compared = 0;
    for (i, &db) in cfg.snr_grid_db.iter().enumerate() {
        let est = monte_carlo(&scn, cfg, db, i)?.expect("trials > 0");
        mc_points.push((db, est));
        if !supported {
            continue;
        }
        let cf = closed_form(&scn, cfg, db)?.expect("formula applies");
        if cf < tol.sep_floor {
            continue;
        }
        compared += 1;
        let detail = format!("{db} dB: closed form {cf:.6e}, Monte Carlo {:.6e} ± {:.2e}", est.value, est.std_error);
        checks.record("sep_mc_sigma", est.z_score(cf), tol.sigma, detail.clone());
        checks.record("sep_mc_relative", (est.value - cf).abs() / cf, tol.rel_tol, detail);
    }
    if supported && compared == 0 {
        checks.fail("sep_mc_points", format!("no grid point has SEP ≥ {:e}", tol.sep_floor));
    }
    let max_sep = cfg.psk().max_sep();
    for w in mc_points.windows(2) {
        let ((d0, a), (d1, b)) = (w[0], w[1]);
        let spread = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        let rise = if spread > 0.0 { ((b.value - a.value) / spread).max(0.0) } else if b.value > a.value { f64::INFINITY } else { 0.0 };
        checks.record("mc_sep_nonincreasing", rise, tol.sigma, format!("{d0} → {d1} dB"));
    }
    let out_of_range = mc_points.iter().filter(|(_, e)| !(0.0..=max_sep).contains(&e.value)).count();
    checks.record("mc_sep_range", out_of_range as f64, 0.0, format!("estimates outside [0, {max_sep:.6}]"));

    // Identity-correlation reductions at the scenario's dimensions.
    let (n_t, n_s, n_r) = (cfg.n_t, cfg.n_s, cfg.n_r);
    let (m, n) = (n_t.min(n_s), n_t.max(n_s));
    let xis = [0.1, 1.0, 10.0];
    let mut pairs = Vec::new();
    for xi in xis {
        let u = expected_inv_det_uncorr(m, n, n_r, xi)?;
        pairs.push((expected_inv_det_kron(m, n, &Spectrum::scalar(1.0, m), &Spectrum::scalar(1.0, n_r), xi)?, u));
    }
    checks.record("reduction_kron_to_uncorr", max_rel(pairs), tol.reduction_tol, format!("m={m} n={n} ν={n_r}, ξ ∈ {xis:?}"));
    let mut pairs = Vec::new();
    for xi in xis {
        let u = expected_inv_det_uncorr(m, n, 1, xi)?;
        pairs.push((expected_inv_det_miso(&Spectrum::scalar(1.0, n_s), &Spectrum::scalar(1.0, n_t), xi)?, u));
    }
    checks.record("reduction_miso_to_uncorr", max_rel(pairs), tol.reduction_tol, format!("n_S={n_s} n_T={n_t}, ξ ∈ {xis:?}"));
    if n_s >= n_t {
        let iid = Scenario::new(
            CorrModel::Identity.build(n_t)?,
            CorrModel::Identity.build(n_s)?,
            CorrModel::Identity.build(n_r)?,
            cfg.code.clone(),
        )?;
        let (psk, snr) = (cfg.psk(), db_to_linear(cfg.snr_grid_db[0]));
        let dc = sep_mpsk_doubly_correlated(&iid, &psk, snr)?;
        let uc = sep_mpsk_uncorrelated(&iid, &psk, snr)?;
        checks.record("reduction_dc_sep_to_uc", max_rel([(dc, uc)]), tol.reduction_tol, format!("{} dB", cfg.snr_grid_db[0]));
    }

    // Majorization chains from ρ = 0 to the configured ρ on each correlated side.
    for (side, model, dim) in [(Side::Tx, cfg.tx, n_t), (Side::Sc, cfg.sc, n_s), (Side::Rx, cfg.rx, n_r)] {
        let Some(rho) = model.rho().filter(|&r| r > 0.0 && dim > 1) else {
            continue;
        };
        let grid: Vec<f64> = (0..=6).map(|k| rho * k as f64 / 6.0).collect();
        let mut chain = Vec::new();
        let mut kurt = Vec::new();
        for &r in &grid {
            let m = model.with_rho(r).expect("correlated side");
            chain.push(m.build(dim)?.eigenvalues());
            let mut models = [cfg.tx, cfg.sc, cfg.rx];
            models[side as usize] = m;
            kurt.push(kurtosis_frobenius(&cfg.scenario_with(n_s, models[0], models[1], models[2])?));
        }
        let mut violations = 0;
        for (w, k) in chain.windows(2).zip(kurt.windows(2)) {
            let strict = is_majorized(&w[0], &w[1], Majorization::Strict)? && !is_majorized(&w[1], &w[0], Majorization::Strict)?;
            violations += usize::from(!strict) + usize::from(k[1] <= k[0]);
        }
        checks.record(
            "majorization_chain",
            violations as f64,
            0.0,
            format!("{side:?} {} ρ from 0 to {rho}: majorization and kurtosis order", model.name()),
        );
    }

    let m = lowsnr_metrics(&scn)?;
    checks.record(
        "ebn0_min_received",
        (m.ebn0_min_received_db + 1.59).abs(),
        0.01,
        format!("{:.4} dB", m.ebn0_min_received_db),
    );
    let identity = s0_ostbc(&scn) * kurtosis_frobenius(&scn) / (2.0 * scn.rate());
    checks.record("s0_ostbc_kurtosis", (identity - 1.0).abs(), tol.reduction_tol, "S₀·κ / 2ℛ".into());

    let total = checks.table.rows().len();
    let summary = format!("validate: {total} rows, {} failed\n", checks.failures);
    Ok(Outcome { passed: checks.failures == 0, table: checks.table, summary: Some(summary) })
}
