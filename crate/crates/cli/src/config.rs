//! Run configuration: a flat `key = value` text format with `#` comments.
//! File values are applied first, then command-line overrides, through the
//! same per-key parser.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rarelab_core::{
    ConvectiveScheme, ConvexFlux, Grid1D, Integrator, Perturbation, RiemannData, SolverConfig,
    ViscosityForm, ViscosityModel,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub key: String,
    /// Line in the config file the offending value came from.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    Rates,
    Sweep,
    Check,
    Convergence,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Rates => "rates",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Check => "check",
            ExperimentKind::Convergence => "convergence",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simulate" => ExperimentKind::Simulate,
            "rates" => ExperimentKind::Rates,
            "sweep" => ExperimentKind::Sweep,
            "check" => ExperimentKind::Check,
            "convergence" => ExperimentKind::Convergence,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FluxChoice {
    Burgers,
    Quartic,
    /// Coefficients `c0, c1, ...` of `f(u) = Σ c_k u^k`.
    Polynomial(Vec<f64>),
}

impl FluxChoice {
    pub fn build(&self) -> rarelab_core::Result<ConvexFlux> {
        match self {
            FluxChoice::Burgers => Ok(ConvexFlux::burgers()),
            FluxChoice::Quartic => Ok(ConvexFlux::quartic()),
            FluxChoice::Polynomial(c) => ConvexFlux::polynomial(c.clone()),
        }
    }
}

/// Perturbation without its seed; the run seed is attached when resolving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationSpec {
    None,
    Gaussian { a: f64, c: f64, s: f64 },
    Sine { a: f64, c: f64, s: f64, k: f64 },
    Random { a: f64, l: f64 },
}

impl PerturbationSpec {
    pub fn resolve(self, seed: u64) -> Perturbation {
        match self {
            PerturbationSpec::None => Perturbation::None,
            PerturbationSpec::Gaussian { a, c, s } => Perturbation::Gaussian {
                amplitude: a,
                center: c,
                width: s,
            },
            PerturbationSpec::Sine { a, c, s, k } => Perturbation::SinePacket {
                amplitude: a,
                center: c,
                width: s,
                wavenumber: k,
            },
            PerturbationSpec::Random { a, l } => Perturbation::RandomSmooth {
                amplitude: a,
                seed,
                correlation: l,
            },
        }
    }

    /// `none`, `gaussian:a=0.3,c=0,s=2`, `sine:a=..,c=..,s=..,k=..` or
    /// `random:a=..,l=..`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let (kind, args) = text.split_once(':').unwrap_or((text, ""));
        let mut params = BTreeMap::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("expected name=value, got `{part}`"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("`{}` is not a number", v.trim()))?;
            params.insert(k.trim().to_string(), v);
        }
        let take = |params: &mut BTreeMap<String, f64>, name: &str| {
            params
                .remove(name)
                .ok_or_else(|| format!("{kind} perturbation needs `{name}`"))
        };
        let spec = match kind.trim() {
            "none" => PerturbationSpec::None,
            "gaussian" => PerturbationSpec::Gaussian {
                a: take(&mut params, "a")?,
                c: take(&mut params, "c")?,
                s: take(&mut params, "s")?,
            },
            "sine" => PerturbationSpec::Sine {
                a: take(&mut params, "a")?,
                c: take(&mut params, "c")?,
                s: take(&mut params, "s")?,
                k: take(&mut params, "k")?,
            },
            "random" => PerturbationSpec::Random {
                a: take(&mut params, "a")?,
                l: take(&mut params, "l")?,
            },
            other => return Err(format!("unknown perturbation `{other}`")),
        };
        if let Some(extra) = params.keys().next() {
            return Err(format!("unexpected parameter `{extra}`"));
        }
        Ok(spec)
    }
}

impl fmt::Display for PerturbationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PerturbationSpec::None => write!(f, "none"),
            PerturbationSpec::Gaussian { a, c, s } => write!(f, "gaussian:a={a},c={c},s={s}"),
            PerturbationSpec::Sine { a, c, s, k } => write!(f, "sine:a={a},c={c},s={s},k={k}"),
            PerturbationSpec::Random { a, l } => write!(f, "random:a={a},l={l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub flux: FluxChoice,
    pub viscosity: ViscosityForm,
    pub mu: f64,
    pub p: f64,
    pub p_list: Vec<f64>,
    pub q: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub t_end: f64,
    /// `None` sizes the grid automatically with `dx <= 0.05`.
    pub n_cells: Option<usize>,
    pub cfl_adv: f64,
    pub cfl_diff: f64,
    pub integrator: Integrator,
    pub scheme: ConvectiveScheme,
    pub pure_diffusion: bool,
    pub perturbation: PerturbationSpec,
    pub seed: u64,
    /// Spacing of diagnostics snapshots.
    pub snapshot_interval: f64,
    /// Times whose full profiles are written as `snap_t*.csv`; empty means
    /// `0, t_end/10, t_end`.
    pub dump_times: Vec<f64>,
    pub transient: f64,
    pub refinements: usize,
    pub fit_t_min: f64,
    pub fit_t_max: f64,
    pub out: PathBuf,
    pub plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Simulate,
            flux: FluxChoice::Burgers,
            viscosity: ViscosityForm::Carreau,
            mu: 1.0,
            p: 1.0,
            p_list: vec![0.45, 0.5, 0.6, 1.0, 1.5],
            q: 1.0,
            u_minus: -0.5,
            u_plus: 0.5,
            t_end: 200.0,
            n_cells: None,
            cfl_adv: 0.4,
            cfl_diff: 0.4,
            integrator: Integrator::Rk2Ssp,
            scheme: ConvectiveScheme::Rusanov,
            pure_diffusion: false,
            perturbation: PerturbationSpec::Gaussian {
                a: 0.3,
                c: 0.0,
                s: 2.0,
            },
            seed: 0,
            snapshot_interval: 1.0,
            dump_times: Vec::new(),
            transient: 10.0,
            refinements: 3,
            fit_t_min: 100.0,
            fit_t_max: 10_000.0,
            out: PathBuf::from("out"),
            plots: false,
        }
    }
}

/// Every config key, in serialization order.
pub const KEYS: &[&str] = &[
    "experiment",
    "flux",
    "viscosity",
    "mu",
    "p",
    "p_list",
    "q",
    "u_minus",
    "u_plus",
    "t_end",
    "n_cells",
    "cfl_adv",
    "cfl_diff",
    "integrator",
    "scheme",
    "pure_diffusion",
    "perturbation",
    "seed",
    "snapshot_interval",
    "dump_times",
    "transient",
    "refinements",
    "fit_t_min",
    "fit_t_max",
    "out",
    "plots",
];

fn number(value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{value}` is not finite"));
    }
    Ok(v)
}

fn number_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(number)
        .collect()
}

fn boolean(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{value}` is not a boolean")),
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "experiment" => {
                self.experiment = ExperimentKind::parse(value)
                    .ok_or_else(|| format!("unknown experiment `{value}`"))?
            }
            "flux" => {
                self.flux = match value {
                    "burgers" => FluxChoice::Burgers,
                    "quartic" => FluxChoice::Quartic,
                    _ => match value.strip_prefix("poly:") {
                        Some(c) => FluxChoice::Polynomial(number_list(c)?),
                        None => return Err(format!("unknown flux `{value}`")),
                    },
                }
            }
            "viscosity" => {
                self.viscosity = match value {
                    "carreau" => ViscosityForm::Carreau,
                    "powerlaw" => ViscosityForm::PowerLaw,
                    _ => return Err(format!("unknown viscosity `{value}`")),
                }
            }
            "mu" => self.mu = number(value)?,
            "p" => self.p = number(value)?,
            "p_list" => self.p_list = number_list(value)?,
            "q" => self.q = number(value)?,
            "u_minus" => self.u_minus = number(value)?,
            "u_plus" => self.u_plus = number(value)?,
            "t_end" => self.t_end = number(value)?,
            "n_cells" => {
                self.n_cells = match value {
                    "auto" => None,
                    _ => Some(
                        value
                            .parse()
                            .map_err(|_| format!("`{value}` is not a cell count"))?,
                    ),
                }
            }
            "cfl_adv" => self.cfl_adv = number(value)?,
            "cfl_diff" => self.cfl_diff = number(value)?,
            "integrator" => {
                self.integrator = match value {
                    "rk2" => Integrator::Rk2Ssp,
                    "rk3" => Integrator::Rk3Ssp,
                    _ => return Err(format!("unknown integrator `{value}`")),
                }
            }
            "scheme" => {
                self.scheme = match value {
                    "rusanov" => ConvectiveScheme::Rusanov,
                    "godunov" => ConvectiveScheme::Godunov,
                    _ => return Err(format!("unknown scheme `{value}`")),
                }
            }
            "pure_diffusion" => self.pure_diffusion = boolean(value)?,
            "perturbation" => self.perturbation = PerturbationSpec::parse(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("`{value}` is not an unsigned integer"))?
            }
            "snapshot_interval" => self.snapshot_interval = number(value)?,
            "dump_times" => self.dump_times = number_list(value)?,
            "transient" => self.transient = number(value)?,
            "refinements" => {
                self.refinements = value
                    .parse()
                    .map_err(|_| format!("`{value}` is not an integer"))?
            }
            "fit_t_min" => self.fit_t_min = number(value)?,
            "fit_t_max" => self.fit_t_max = number(value)?,
            "out" => self.out = PathBuf::from(value),
            "plots" => self.plots = boolean(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Text value of one key, inverse of [`RunConfig::set`].
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "experiment" => self.experiment.name().to_string(),
            "flux" => match &self.flux {
                FluxChoice::Burgers => "burgers".into(),
                FluxChoice::Quartic => "quartic".into(),
                FluxChoice::Polynomial(c) => format!("poly:{}", join(c)),
            },
            "viscosity" => match self.viscosity {
                ViscosityForm::Carreau => "carreau".into(),
                ViscosityForm::PowerLaw => "powerlaw".into(),
            },
            "mu" => self.mu.to_string(),
            "p" => self.p.to_string(),
            "p_list" => join(&self.p_list),
            "q" => self.q.to_string(),
            "u_minus" => self.u_minus.to_string(),
            "u_plus" => self.u_plus.to_string(),
            "t_end" => self.t_end.to_string(),
            "n_cells" => self
                .n_cells
                .map_or_else(|| "auto".to_string(), |n| n.to_string()),
            "cfl_adv" => self.cfl_adv.to_string(),
            "cfl_diff" => self.cfl_diff.to_string(),
            "integrator" => match self.integrator {
                Integrator::Rk2Ssp => "rk2".into(),
                Integrator::Rk3Ssp => "rk3".into(),
            },
            "scheme" => match self.scheme {
                ConvectiveScheme::Rusanov => "rusanov".into(),
                ConvectiveScheme::Godunov => "godunov".into(),
            },
            "pure_diffusion" => self.pure_diffusion.to_string(),
            "perturbation" => self.perturbation.to_string(),
            "seed" => self.seed.to_string(),
            "snapshot_interval" => self.snapshot_interval.to_string(),
            "dump_times" => join(&self.dump_times),
            "transient" => self.transient.to_string(),
            "refinements" => self.refinements.to_string(),
            "fit_t_min" => self.fit_t_min.to_string(),
            "fit_t_max" => self.fit_t_max.to_string(),
            "out" => self.out.display().to_string(),
            "plots" => self.plots.to_string(),
            _ => return None,
        })
    }

    /// Config text with every key, parseable by [`parse_config_text`].
    pub fn serialize(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }

    /// Resolved key/value pairs, in key order.
    pub fn entries(&self) -> BTreeMap<String, String> {
        KEYS.iter()
            .map(|k| (k.to_string(), self.get(k).expect("known key")))
            .collect()
    }

    pub fn riemann(&self) -> rarelab_core::Result<RiemannData> {
        RiemannData::new(self.u_minus, self.u_plus)
    }

    pub fn viscosity_model(&self, p: f64) -> rarelab_core::Result<ViscosityModel> {
        ViscosityModel::new(self.viscosity, self.mu, p)
    }

    /// Solver configuration for exponent `p` with diagnostics every
    /// `snapshot_interval`.
    pub fn solver_config(&self, p: f64) -> rarelab_core::Result<SolverConfig> {
        let flux = self.flux.build()?;
        let riemann = self.riemann()?;
        let mut c = SolverConfig::new(flux, self.viscosity_model(p)?, riemann, self.t_end)?;
        if let Some(n) = self.n_cells {
            c.grid = Grid1D::new(c.grid.x_min, c.grid.x_max, n)?;
        }
        c.cfl_advective = self.cfl_adv;
        c.cfl_diffusive = self.cfl_diff;
        c.integrator = self.integrator;
        c.scheme = self.scheme;
        c.pure_diffusion = self.pure_diffusion;
        c.perturbation = self.perturbation.resolve(self.seed);
        c.q = self.q;
        c.transient = self.transient;
        let mut times: Vec<f64> = Vec::new();
        if self.snapshot_interval > 0.0 && self.t_end > 0.0 {
            let count = (self.t_end / self.snapshot_interval).floor() as usize;
            times.extend((1..=count).map(|k| k as f64 * self.snapshot_interval));
        }
        times.extend(self.dump_times());
        times.retain(|&t| t >= 0.0 && t <= self.t_end);
        times.sort_by(f64::total_cmp);
        times.dedup();
        c.snapshot_times = times;
        Ok(c)
    }

    pub fn dump_times(&self) -> Vec<f64> {
        if self.dump_times.is_empty() {
            let mut t = vec![0.0, 0.1 * self.t_end, self.t_end];
            t.dedup();
            t
        } else {
            self.dump_times.clone()
        }
    }

    fn validate(&self, lines: &BTreeMap<String, Option<usize>>) -> Result<(), ConfigError> {
        let fail = |key: &str, message: String| ConfigError {
            key: key.to_string(),
            line: lines.get(key).copied().flatten(),
            message,
        };
        let positive = [
            ("mu", self.mu),
            ("p", self.p),
            ("snapshot_interval", self.snapshot_interval),
            ("fit_t_min", self.fit_t_min),
        ];
        for (key, v) in positive {
            if !(v > 0.0) {
                return Err(fail(key, format!("must be positive, got {v}")));
            }
        }
        if let Some(p) = self.p_list.iter().find(|&&p| !(p > 0.0)) {
            return Err(fail("p_list", format!("exponents must be positive, got {p}")));
        }
        if self.p_list.is_empty() {
            return Err(fail("p_list", "must not be empty".into()));
        }
        if !(self.u_minus < self.u_plus) {
            return Err(fail(
                if lines.contains_key("u_plus") { "u_plus" } else { "u_minus" },
                format!(
                    "a rarefaction requires u_minus < u_plus, got {} and {}",
                    self.u_minus, self.u_plus
                ),
            ));
        }
        if !(self.q > 0.5) {
            return Err(fail("q", format!("must exceed 1/2, got {}", self.q)));
        }
        if !(self.t_end > 0.0) {
            return Err(fail("t_end", format!("must be positive, got {}", self.t_end)));
        }
        for (key, v) in [("cfl_adv", self.cfl_adv), ("cfl_diff", self.cfl_diff)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(fail(key, format!("must lie in (0, 1], got {v}")));
            }
        }
        if self.n_cells.is_some_and(|n| n < 2) {
            return Err(fail("n_cells", "need at least 2 cells".into()));
        }
        if self.refinements < 2 {
            return Err(fail("refinements", "need at least 2".into()));
        }
        if !(self.fit_t_max > self.fit_t_min) {
            return Err(fail("fit_t_max", "must exceed fit_t_min".into()));
        }
        if let Some(t) = self.dump_times.iter().find(|&&t| !(0.0..=self.t_end).contains(&t)) {
            return Err(fail("dump_times", format!("{t} outside [0, t_end]")));
        }
        if !(self.transient >= 0.0) {
            return Err(fail("transient", "must be non-negative".into()));
        }
        self.flux
            .build()
            .map_err(|e| fail("flux", e.to_string()))?;
        if self.viscosity == ViscosityForm::PowerLaw {
            let low = std::iter::once(self.p)
                .chain(self.p_list.iter().copied())
                .find(|&p| p < 1.0 && matches!(self.experiment, ExperimentKind::Simulate | ExperimentKind::Sweep | ExperimentKind::Convergence));
            if let Some(p) = low {
                return Err(fail(
                    "viscosity",
                    format!("power-law viscosity with p = {p} < 1 is degenerate; use carreau"),
                ));
            }
        }
        Ok(())
    }
}

/// Applies `key = value` lines on top of `config`, recording where each
/// key was set (`None` for command-line overrides).
fn apply_text(
    config: &mut RunConfig,
    text: &str,
    lines: &mut BTreeMap<String, Option<usize>>,
) -> Result<(), ConfigError> {
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError {
            key: content.to_string(),
            line: Some(line),
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        config.set(key, value).map_err(|message| ConfigError {
            key: key.to_string(),
            line: Some(line),
            message,
        })?;
        lines.insert(key.to_string(), Some(line));
    }
    Ok(())
}

/// Parses config text (defaults for absent keys) and validates it.
pub fn parse_config_text(text: &str) -> Result<RunConfig, ConfigError> {
    parse_with_overrides(text, &[])
}

/// File text first, then `(key, value)` overrides, then validation.
pub fn parse_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    let mut lines = BTreeMap::new();
    apply_text(&mut config, text, &mut lines)?;
    for (key, value) in overrides {
        config.set(key, value).map_err(|message| ConfigError {
            key: key.clone(),
            line: None,
            message,
        })?;
        lines.insert(key.clone(), None);
    }
    config.validate(&lines)?;
    Ok(config)
}

/// Reads the optional config file and applies the overrides.
pub fn parse_config(
    path: Option<&Path>,
    overrides: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError {
            key: "config".into(),
            line: None,
            message: format!("cannot read {}: {e}", p.display()),
        })?,
        None => String::new(),
    };
    parse_with_overrides(&text, overrides)
}
