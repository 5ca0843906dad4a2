//! Line-oriented `key = value` run configuration.
//!
//! Keys carry dotted section prefixes (`scenario.n_t`, `corr.tx.model`, ...).
//! `#` starts a comment. Unknown and repeated keys are errors, and every
//! error names the offending line and key.

use std::collections::BTreeMap;
use std::fmt;

use dsmimo::corrmat::{constant_corr, exponential_corr, tridiagonal_corr};
use dsmimo::{CorrelationMatrix, OstbcCode, PskConstellation, Scenario};

/// A configuration problem, located where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Count,
    Real,
    Seed,
    Text,
    RealList,
    TextList,
}

const KEYS: &[(&str, Kind)] = &[
    ("scenario.n_t", Kind::Count),
    ("scenario.n_s", Kind::Count),
    ("scenario.n_r", Kind::Count),
    ("scenario.double_scattering", Kind::Text),
    ("corr.tx.model", Kind::Text),
    ("corr.tx.rho", Kind::Real),
    ("corr.sc.model", Kind::Text),
    ("corr.sc.rho", Kind::Real),
    ("corr.rx.model", Kind::Text),
    ("corr.rx.rho", Kind::Real),
    ("code", Kind::Text),
    ("psk.m", Kind::Count),
    ("snr.start_db", Kind::Real),
    ("snr.stop_db", Kind::Real),
    ("snr.step_db", Kind::Real),
    ("mc.trials", Kind::Seed),
    ("mc.seed", Kind::Seed),
    ("output", Kind::Text),
    ("sweep.axis", Kind::Text),
    ("sweep.values", Kind::RealList),
    ("sweep.sides", Kind::TextList),
    ("sweep.snr_db", Kind::Real),
    ("lowsnr.ebn0_start_db", Kind::Real),
    ("lowsnr.ebn0_stop_db", Kind::Real),
    ("lowsnr.ebn0_step_db", Kind::Real),
    ("lowsnr.mc_snr_db", Kind::RealList),
    ("validate.sigma", Kind::Real),
    ("validate.rel_tol", Kind::Real),
    ("validate.sep_floor", Kind::Real),
    ("validate.reduction_tol", Kind::Real),
];

/// Correlation model of one side of the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrModel {
    Identity,
    Constant(f64),
    Exponential(f64),
    Tridiagonal(f64),
}

impl CorrModel {
    pub fn build(self, n: usize) -> dsmimo::Result<CorrelationMatrix> {
        match self {
            CorrModel::Identity => Ok(CorrelationMatrix::identity(n)),
            CorrModel::Constant(r) => constant_corr(n, r),
            CorrModel::Exponential(r) => exponential_corr(n, r),
            CorrModel::Tridiagonal(r) => tridiagonal_corr(n, r),
        }
    }

    pub fn with_rho(self, rho: f64) -> Option<Self> {
        match self {
            CorrModel::Identity => None,
            CorrModel::Constant(_) => Some(CorrModel::Constant(rho)),
            CorrModel::Exponential(_) => Some(CorrModel::Exponential(rho)),
            CorrModel::Tridiagonal(_) => Some(CorrModel::Tridiagonal(rho)),
        }
    }

    pub fn rho(self) -> Option<f64> {
        match self {
            CorrModel::Identity => None,
            CorrModel::Constant(r) | CorrModel::Exponential(r) | CorrModel::Tridiagonal(r) => Some(r),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CorrModel::Identity => "identity",
            CorrModel::Constant(_) => "constant",
            CorrModel::Exponential(_) => "exponential",
            CorrModel::Tridiagonal(_) => "tridiagonal",
        }
    }
}

/// Channel side addressed by a correlation block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tx,
    Sc,
    Rx,
}

impl Side {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "tx" => Some(Side::Tx),
            "sc" => Some(Side::Sc),
            "rx" => Some(Side::Rx),
            _ => None,
        }
    }
}

/// Swept parameter of the `sweep` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Rho { sides: Vec<Side> },
    Ns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowSnrConfig {
    pub ebn0_grid_db: Vec<f64>,
    pub mc_snr_db: Vec<f64>,
}

/// Tolerances of the `validate` subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub sigma: f64,
    pub rel_tol: f64,
    pub sep_floor: f64,
    pub reduction_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_t: usize,
    pub n_s: usize,
    pub n_r: usize,
    pub double_scattering: bool,
    pub tx: CorrModel,
    pub sc: CorrModel,
    pub rx: CorrModel,
    pub code: OstbcCode,
    pub psk_m: u32,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub output: Option<String>,
    pub sweep: Option<SweepConfig>,
    pub lowsnr: LowSnrConfig,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn psk(&self) -> PskConstellation {
        PskConstellation::new(self.psk_m).expect("validated at parse time")
    }

    /// The configured scenario with `n_S` and per-side models replaced.
    pub fn scenario_with(&self, n_s: usize, tx: CorrModel, sc: CorrModel, rx: CorrModel) -> dsmimo::Result<Scenario> {
        let s = Scenario::new(tx.build(self.n_t)?, sc.build(n_s)?, rx.build(self.n_r)?, self.code.clone())?;
        Ok(if self.double_scattering { s } else { s.without_double_scattering() })
    }

    pub fn scenario(&self) -> dsmimo::Result<Scenario> {
        self.scenario_with(self.n_s, self.tx, self.sc, self.rx)
    }

    pub fn model(&self, side: Side) -> CorrModel {
        match side {
            Side::Tx => self.tx,
            Side::Sc => self.sc,
            Side::Rx => self.rx,
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Raw {
    entries: BTreeMap<&'static str, Entry>,
}

fn err(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, key: key.map(str::to_string), message: message.into() }
}

impl Raw {
    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn fail(&self, key: &str, message: impl Into<String>) -> ConfigError {
        err(self.line(key), Some(key), message)
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.text(key)
            .map(|v| match v.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(self.fail(key, format!("expected a positive integer, got `{v}`"))),
            })
            .transpose()
    }

    fn required_count(&self, key: &str) -> Result<usize, ConfigError> {
        self.count(key)?.ok_or_else(|| err(None, Some(key), "missing required key"))
    }

    fn unsigned(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.text(key)
            .map(|v| v.parse::<u64>().map_err(|_| self.fail(key, format!("expected a non-negative integer, got `{v}`"))))
            .transpose()
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.text(key).map(|v| parse_real(v).map_err(|m| self.fail(key, m))).transpose()
    }

    fn real_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.text(key)
            .map(|v| {
                split_list(v).map(|item| parse_real(item).map_err(|m| self.fail(key, m))).collect::<Result<Vec<_>, _>>()
            })
            .transpose()
    }

    fn non_negative(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.real(key)?.unwrap_or(default);
        if v < 0.0 {
            return Err(self.fail(key, format!("must be non-negative, got {v}")));
        }
        Ok(v)
    }
}

fn parse_real(v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got `{v}`")),
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn tokenize(text: &str) -> Result<Raw, ConfigError> {
    let mut entries = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(Some(line), None, format!("expected `key = value`, got `{content}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&(known, _)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(err(Some(line), Some(key), "unknown key"));
        };
        if value.is_empty() {
            return Err(err(Some(line), Some(key), "missing value"));
        }
        if let Some(prev) = entries.insert(known, Entry { line, value: value.to_string() }) {
            return Err(err(Some(line), Some(key), format!("repeated key (first set on line {})", prev.line)));
        }
    }
    Ok(Raw { entries })
}

fn corr_model(raw: &Raw, side: &str) -> Result<CorrModel, ConfigError> {
    let model_key = format!("corr.{side}.model");
    let rho_key = format!("corr.{side}.rho");
    let rho = raw.real(&rho_key)?;
    let model = raw.text(&model_key).unwrap_or("identity");
    let need_rho = || rho.ok_or_else(|| err(raw.line(&model_key), Some(&rho_key), format!("required by model `{model}`")));
    match model {
        "identity" => {
            if rho.is_some() {
                return Err(raw.fail(&rho_key, "has no effect with the identity model"));
            }
            Ok(CorrModel::Identity)
        }
        "constant" => Ok(CorrModel::Constant(need_rho()?)),
        "exponential" => Ok(CorrModel::Exponential(need_rho()?)),
        "tridiagonal" => Ok(CorrModel::Tridiagonal(need_rho()?)),
        other => Err(raw.fail(
            &model_key,
            format!("unknown model `{other}` (expected identity, constant, exponential or tridiagonal)"),
        )),
    }
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| start + i as f64 * step).collect()
}

fn checked_grid(raw: &Raw, prefix: &str, defaults: (f64, f64, f64)) -> Result<Vec<f64>, ConfigError> {
    let key = |s: &str| format!("{prefix}{s}");
    let start = raw.real(&key("start_db"))?.unwrap_or(defaults.0);
    let stop = raw.real(&key("stop_db"))?.unwrap_or(defaults.1);
    let step = raw.real(&key("step_db"))?.unwrap_or(defaults.2);
    if step <= 0.0 {
        return Err(raw.fail(&key("step_db"), format!("must be positive, got {step}")));
    }
    if stop < start {
        return Err(raw.fail(&key("stop_db"), format!("stop {stop} is below start {start}")));
    }
    Ok(grid(start, stop, step))
}

/// Parses and validates a configuration.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let raw = tokenize(text)?;
    let n_t = raw.required_count("scenario.n_t")?;
    let n_s = raw.required_count("scenario.n_s")?;
    let n_r = raw.required_count("scenario.n_r")?;
    let double_scattering = match raw.text("scenario.double_scattering").unwrap_or("true") {
        "true" => true,
        "false" => false,
        other => return Err(raw.fail("scenario.double_scattering", format!("expected true or false, got `{other}`"))),
    };
    let (tx, sc, rx) = (corr_model(&raw, "tx")?, corr_model(&raw, "sc")?, corr_model(&raw, "rx")?);
    for (side, model, n) in [("tx", tx, n_t), ("sc", sc, n_s), ("rx", rx, n_r)] {
        if let Err(e) = model.build(n) {
            let key = format!("corr.{side}.rho");
            return Err(err(raw.line(&key).or(raw.line(&format!("corr.{side}.model"))), Some(&key), e.to_string()));
        }
    }
    let code = match raw.text("code") {
        Some(name) => OstbcCode::by_name(name).map_err(|e| raw.fail("code", e.to_string()))?,
        None => OstbcCode::for_antennas(n_t).map_err(|e| err(raw.line("scenario.n_t"), Some("scenario.n_t"), e.to_string()))?,
    };
    if code.n_t() != n_t {
        return Err(raw.fail(
            "code",
            format!("code {} uses {} transmit antennas but scenario.n_t = {n_t}", code.name(), code.n_t()),
        ));
    }
    let psk_m = raw.count("psk.m")?.unwrap_or(8);
    let psk_m = u32::try_from(psk_m).map_err(|_| raw.fail("psk.m", "too large"))?;
    PskConstellation::new(psk_m).map_err(|e| raw.fail("psk.m", e.to_string()))?;
    let snr_grid_db = checked_grid(&raw, "snr.", (0.0, 30.0, 2.0))?;
    let trials = raw.unsigned("mc.trials")?.unwrap_or(100_000);
    let seed = raw.unsigned("mc.seed")?.unwrap_or(1);

    let sweep = parse_sweep(&raw, tx, sc, rx)?;
    let lowsnr = LowSnrConfig {
        ebn0_grid_db: checked_grid(&raw, "lowsnr.ebn0_", (-1.5, 10.0, 0.5))?,
        mc_snr_db: raw.real_list("lowsnr.mc_snr_db")?.unwrap_or_else(|| vec![-20.0, -15.0, -10.0, -5.0]),
    };
    let tolerances = Tolerances {
        sigma: raw.non_negative("validate.sigma", 3.0)?,
        rel_tol: raw.non_negative("validate.rel_tol", 0.05)?,
        sep_floor: raw.non_negative("validate.sep_floor", 1e-4)?,
        reduction_tol: raw.non_negative("validate.reduction_tol", 1e-10)?,
    };
    Ok(RunConfig {
        n_t,
        n_s,
        n_r,
        double_scattering,
        tx,
        sc,
        rx,
        code,
        psk_m,
        snr_grid_db,
        trials,
        seed,
        output: raw.text("output").map(str::to_string),
        sweep,
        lowsnr,
        tolerances,
    })
}

fn parse_sweep(raw: &Raw, tx: CorrModel, sc: CorrModel, rx: CorrModel) -> Result<Option<SweepConfig>, ConfigError> {
    let Some(axis_name) = raw.text("sweep.axis") else {
        for key in ["sweep.values", "sweep.sides", "sweep.snr_db"] {
            if raw.text(key).is_some() {
                return Err(raw.fail(key, "requires sweep.axis"));
            }
        }
        return Ok(None);
    };
    let values = raw.real_list("sweep.values")?.unwrap_or_default();
    if values.is_empty() {
        return Err(err(raw.line("sweep.values").or(raw.line("sweep.axis")), Some("sweep.values"), "no values to sweep"));
    }
    let axis = match axis_name {
        "rho" => {
            let sides = match raw.text("sweep.sides") {
                Some(list) => split_list(list)
                    .map(|s| Side::parse(s).ok_or_else(|| raw.fail("sweep.sides", format!("unknown side `{s}` (expected tx, sc or rx)"))))
                    .collect::<Result<Vec<_>, _>>()?,
                None => [(Side::Tx, tx), (Side::Sc, sc), (Side::Rx, rx)]
                    .into_iter()
                    .filter(|(_, m)| *m != CorrModel::Identity)
                    .map(|(s, _)| s)
                    .collect(),
            };
            if sides.is_empty() {
                return Err(raw.fail("sweep.axis", "a ρ sweep needs at least one correlated side"));
            }
            let model = |s: Side| match s {
                Side::Tx => tx,
                Side::Sc => sc,
                Side::Rx => rx,
            };
            if let Some(s) = sides.iter().find(|&&s| model(s) == CorrModel::Identity) {
                return Err(raw.fail("sweep.sides", format!("side {s:?} uses the identity model and has no ρ")));
            }
            SweepAxis::Rho { sides }
        }
        "ns" => {
            if raw.text("sweep.sides").is_some() {
                return Err(raw.fail("sweep.sides", "only applies to a ρ sweep"));
            }
            if let Some(v) = values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0)) {
                return Err(raw.fail("sweep.values", format!("n_S values must be positive integers, got {v}")));
            }
            SweepAxis::Ns
        }
        other => return Err(raw.fail("sweep.axis", format!("unknown axis `{other}` (expected rho or ns)"))),
    };
    let snr_db = raw
        .real("sweep.snr_db")?
        .ok_or_else(|| err(raw.line("sweep.axis"), Some("sweep.snr_db"), "required by sweep.axis"))?;
    Ok(Some(SweepConfig { axis, values, snr_db }))
}
