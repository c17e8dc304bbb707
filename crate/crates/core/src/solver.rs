//! Conservative method-of-lines solver for
//! `∂t u + ∂x(f(u) - σ(∂x u)) = 0` on a truncated domain.
//!
//! Nodes `x_i = x_min + i dx`, `i = 0..=n`, with faces at the midpoints.
//! The face flux is a Rusanov (or Godunov) convective flux minus
//! `σ((u_{i+1} - u_i)/dx)`. The two end nodes are pinned to `u±`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::flux::{ConvexFlux, ViscosityModel};
use crate::wave::{RiemannData, SmoothRarefaction};

/// Largest allowed `|φ0|` at the pinned boundary nodes.
const BOUNDARY_PERTURBATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        let dx = (x_max - x_min) / n_cells as f64;
        if n_cells < 2 || !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Config(format!(
                "invalid grid [{x_min}, {x_max}] with {n_cells} cells"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            dx,
        })
    }

    /// Fan-containment margin `20 + 0.1 T (f'(u+) - f'(u-))`.
    pub fn default_margin(flux: &ConvexFlux, riemann: &RiemannData, t_end: f64) -> f64 {
        20.0 + 0.1 * t_end * (flux.prime(riemann.u_plus) - flux.prime(riemann.u_minus))
    }

    /// Domain `[f'(u-) T - M, f'(u+) T + M]`.
    pub fn auto_domain(flux: &ConvexFlux, riemann: &RiemannData, t_end: f64) -> (f64, f64) {
        let margin = Self::default_margin(flux, riemann, t_end);
        (
            flux.prime(riemann.u_minus) * t_end - margin,
            flux.prime(riemann.u_plus) * t_end + margin,
        )
    }

    /// Auto-sized grid with `dx <= max_dx`.
    pub fn auto(flux: &ConvexFlux, riemann: &RiemannData, t_end: f64, max_dx: f64) -> Result<Self> {
        let (lo, hi) = Self::auto_domain(flux, riemann, t_end);
        let n = ((hi - lo) / max_dx).ceil() as usize;
        Self::new(lo, hi, n)
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.x_min + self.dx * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.node(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether the fan `[f'(u-) T, f'(u+) T]` stays `margin` away from both ends.
    pub fn contains_fan(&self, flux: &ConvexFlux, riemann: &RiemannData, t_end: f64, margin: f64) -> bool {
        self.x_min <= flux.prime(riemann.u_minus) * t_end - margin
            && self.x_max >= flux.prime(riemann.u_plus) * t_end + margin
    }
}

/// Node samples of `u` at time `t`; `values[0] = u-`, `values[n] = u+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Rk2Ssp,
    Rk3Ssp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvectiveScheme {
    Rusanov,
    Godunov,
}

/// Initial deviation `φ0` added to the smooth wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Perturbation {
    None,
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    SinePacket {
        amplitude: f64,
        center: f64,
        width: f64,
        wavenumber: f64,
    },
    /// Smooth random field: a sum of Gaussian bumps of width `correlation`
    /// with normal weights drawn from `seed`, scaled to peak `amplitude`.
    RandomSmooth {
        amplitude: f64,
        seed: u64,
        correlation: f64,
    },
}

const RANDOM_BUMPS: usize = 32;

impl Perturbation {
    /// Evaluates `φ0` on a set of points.
    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        match *self {
            Perturbation::None => vec![0.0; xs.len()],
            Perturbation::Gaussian {
                amplitude,
                center,
                width,
            } => xs
                .iter()
                .map(|&x| amplitude * gaussian(x - center, width))
                .collect(),
            Perturbation::SinePacket {
                amplitude,
                center,
                width,
                wavenumber,
            } => xs
                .iter()
                .map(|&x| amplitude * gaussian(x - center, width) * (wavenumber * (x - center)).sin())
                .collect(),
            Perturbation::RandomSmooth {
                amplitude,
                seed,
                correlation,
            } => {
                let (centers, weights) = random_bumps(seed, correlation);
                let raw = |x: f64| -> f64 {
                    centers
                        .iter()
                        .zip(&weights)
                        .map(|(c, w)| w * gaussian(x - c, correlation))
                        .sum()
                };
                // Normalize on a fixed reference sampling so the field does
                // not depend on the simulation grid.
                let span = 10.0 * correlation;
                let peak = (0..=2000)
                    .map(|i| raw(-span + 2.0 * span * i as f64 / 2000.0).abs())
                    .fold(0.0, f64::max);
                let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
                xs.iter().map(|&x| scale * raw(x)).collect()
            }
        }
    }
}

fn gaussian(d: f64, width: f64) -> f64 {
    (-d * d / (2.0 * width * width)).exp()
}

fn random_bumps(seed: u64, correlation: f64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = (0..=RANDOM_BUMPS)
        .map(|m| (m as f64 - 0.5 * RANDOM_BUMPS as f64) * 0.5 * correlation)
        .collect();
    let weights = (0..=RANDOM_BUMPS)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    (centers, weights)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub flux: ConvexFlux,
    pub viscosity: ViscosityModel,
    pub riemann: RiemannData,
    pub grid: Grid1D,
    pub t_end: f64,
    pub cfl_advective: f64,
    pub cfl_diffusive: f64,
    pub integrator: Integrator,
    pub scheme: ConvectiveScheme,
    /// Diagnostics are evaluated at these times (plus `0` and `t_end`).
    pub snapshot_times: Vec<f64>,
    pub perturbation: Perturbation,
    /// Tail exponent of the smooth wave.
    pub q: f64,
    /// Drops the convective flux (`f ≡ 0`).
    pub pure_diffusion: bool,
    /// Transient window skipped by the eventual-monotonicity probes.
    pub transient: f64,
}

impl SolverConfig {
    /// Defaults: auto-sized grid with `dx <= 0.05`, CFL 0.4, SSP-RK2,
    /// Rusanov, `q = 1`, no perturbation.
    pub fn new(
        flux: ConvexFlux,
        viscosity: ViscosityModel,
        riemann: RiemannData,
        t_end: f64,
    ) -> Result<Self> {
        let grid = Grid1D::auto(&flux, &riemann, t_end, 0.05)?;
        Ok(Self {
            flux,
            viscosity,
            riemann,
            grid,
            t_end,
            cfl_advective: 0.4,
            cfl_diffusive: 0.4,
            integrator: Integrator::Rk2Ssp,
            scheme: ConvectiveScheme::Rusanov,
            snapshot_times: Vec::new(),
            perturbation: Perturbation::None,
            q: 1.0,
            pure_diffusion: false,
            transient: 10.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        for (name, cfl) in [
            ("cfl_advective", self.cfl_advective),
            ("cfl_diffusive", self.cfl_diffusive),
        ] {
            if !(cfl > 0.0 && cfl <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {cfl}")));
            }
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(0.0..=self.t_end).contains(&t))
        {
            return Err(Error::Config(format!(
                "snapshot time {t} outside [0, {}]",
                self.t_end
            )));
        }
        if self.viscosity.is_degenerate() {
            return Err(Error::Config(format!(
                "power-law viscosity with p = {} < 1 has unbounded σ'(0); use the Carreau form",
                self.viscosity.p
            )));
        }
        let (lo, hi) = self.riemann.working_interval();
        self.flux.check_convex(lo, hi).map_err(|e| Error::Config(e.to_string()))?;
        let margin = Grid1D::default_margin(&self.flux, &self.riemann, self.t_end);
        if !self.grid.contains_fan(&self.flux, &self.riemann, self.t_end, margin) {
            return Err(Error::Config(format!(
                "grid [{}, {}] does not contain the fan at t = {} with margin {margin}",
                self.grid.x_min, self.grid.x_max, self.t_end
            )));
        }
        Ok(())
    }

    pub fn smooth_wave(&self) -> Result<SmoothRarefaction> {
        SmoothRarefaction::new(self.flux.clone(), self.riemann, self.q)
    }

    /// Sorted diagnostic times `{0} ∪ snapshot_times ∪ {t_end}`.
    pub fn output_times(&self) -> Vec<f64> {
        let mut times = vec![0.0, self.t_end];
        times.extend(self.snapshot_times.iter().copied());
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    fn blowup_bound(&self) -> f64 {
        10.0 * self.riemann.u_minus.abs().max(self.riemann.u_plus.abs()) + 10.0
    }
}

/// `u_i = U(0, x_i) + φ0(x_i)` inside, `u±` at the two end nodes.
pub fn initial_condition(config: &SolverConfig) -> Result<State> {
    let wave = config.smooth_wave()?;
    let nodes = config.grid.nodes();
    let (mut values, _) = wave.profile(0.0, &nodes)?;
    let phi0 = config.perturbation.sample(&nodes);
    let n = config.grid.n_cells;
    for end in [phi0[0], phi0[n]] {
        if end.abs() > BOUNDARY_PERTURBATION_TOL {
            return Err(Error::Config(format!(
                "initial perturbation is {end:e} at the boundary; it must stay below {BOUNDARY_PERTURBATION_TOL:e}"
            )));
        }
    }
    for (v, p) in values.iter_mut().zip(&phi0) {
        *v += p;
    }
    values[0] = config.riemann.u_minus;
    values[n] = config.riemann.u_plus;
    Ok(State { t: 0.0, values })
}

/// Godunov flux of a convex `f`.
pub fn godunov_flux(flux: &ConvexFlux, left: f64, right: f64) -> f64 {
    if left <= right {
        if flux.prime(left) >= 0.0 {
            flux.value(left)
        } else if flux.prime(right) <= 0.0 {
            flux.value(right)
        } else {
            let sonic = flux
                .prime_inverse(0.0, (left, right))
                .expect("f' changes sign inside [left, right]");
            flux.value(sonic)
        }
    } else {
        flux.value(left).max(flux.value(right))
    }
}

/// Face fluxes `F_{i+1/2}`, `i = 0..n`, written into `faces`.
fn face_fluxes(config: &SolverConfig, u: &[f64], faces: &mut [f64]) {
    let inv_dx = 1.0 / config.grid.dx;
    let flux = &config.flux;
    let visc = &config.viscosity;
    if config.pure_diffusion {
        for (face, pair) in faces.iter_mut().zip(u.windows(2)) {
            *face = -visc.eval((pair[1] - pair[0]) * inv_dx);
        }
        return;
    }
    match config.scheme {
        ConvectiveScheme::Rusanov => {
            let mut f_left = flux.value(u[0]);
            let mut a_left = flux.prime(u[0]).abs();
            for (i, face) in faces.iter_mut().enumerate() {
                let right = u[i + 1];
                let f_right = flux.value(right);
                let a_right = flux.prime(right).abs();
                let jump = right - u[i];
                let convective = 0.5 * (f_left + f_right) - 0.5 * a_left.max(a_right) * jump;
                *face = convective - visc.eval(jump * inv_dx);
                f_left = f_right;
                a_left = a_right;
            }
        }
        ConvectiveScheme::Godunov => {
            for (face, pair) in faces.iter_mut().zip(u.windows(2)) {
                *face = godunov_flux(flux, pair[0], pair[1]) - visc.eval((pair[1] - pair[0]) * inv_dx);
            }
        }
    }
}

/// `du/dt` at the interior nodes `1..n`.
pub fn rhs(state: &State, config: &SolverConfig) -> Vec<f64> {
    let mut faces = vec![0.0; config.grid.n_cells];
    face_fluxes(config, &state.values, &mut faces);
    let inv_dx = 1.0 / config.grid.dx;
    faces.windows(2).map(|f| -(f[1] - f[0]) * inv_dx).collect()
}

/// Face fluxes of a state, `F_{1/2} .. F_{n-1/2}`.
pub fn face_flux_profile(state: &State, config: &SolverConfig) -> Vec<f64> {
    let mut faces = vec![0.0; config.grid.n_cells];
    face_fluxes(config, &state.values, &mut faces);
    faces
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub dt: f64,
    pub dt_advective: f64,
    pub dt_diffusive: f64,
    /// Stage-weighted boundary fluxes actually applied over the step.
    pub flux_left: f64,
    pub flux_right: f64,
    /// `|dx Σ Δu_i + dt (F_right - F_left)|` over the mass scale.
    pub mass_residual: f64,
}

/// Stable time-step bounds `(dt_advective, dt_diffusive)` of a state.
pub fn stable_dt(state: &State, config: &SolverConfig) -> Result<(f64, f64)> {
    let dx = config.grid.dx;
    let u = &state.values;
    let alpha = if config.pure_diffusion {
        0.0
    } else {
        u.iter().fold(0.0, |m: f64, &v| m.max(config.flux.prime(v).abs()))
    };
    let (mut g_min, mut g_max) = (f64::INFINITY, 0.0f64);
    for pair in u.windows(2) {
        let g = ((pair[1] - pair[0]) / dx).abs();
        g_min = g_min.min(g);
        g_max = g_max.max(g);
    }
    let sigma_max = config.viscosity.derivative_max(g_min, g_max)?;
    let dt_adv = if alpha > 0.0 {
        config.cfl_advective * dx / alpha
    } else {
        f64::INFINITY
    };
    let dt_diff = if sigma_max > 0.0 {
        config.cfl_diffusive * dx * dx / (2.0 * sigma_max)
    } else {
        f64::INFINITY
    };
    Ok((dt_adv, dt_diff))
}

/// Reusable buffers for stepping one configuration.
pub struct Stepper<'a> {
    config: &'a SolverConfig,
    faces: Vec<f64>,
    stage: Vec<f64>,
    stage2: Vec<f64>,
    next: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(config: &'a SolverConfig) -> Self {
        let n = config.grid.len();
        Self {
            config,
            faces: vec![0.0; n - 1],
            stage: vec![0.0; n],
            stage2: vec![0.0; n],
            next: vec![0.0; n],
        }
    }

    /// Advances `state` by one stable step, never past `t_limit`.
    pub fn advance(&mut self, state: &mut State, t_limit: f64) -> Result<StepReport> {
        let config = self.config;
        let (dt_adv, dt_diff) = stable_dt(state, config)?;
        let remaining = t_limit - state.t;
        let stable = dt_adv.min(dt_diff);
        let (dt, t_new) = if stable >= remaining {
            (remaining, t_limit)
        } else {
            (stable, state.t + stable)
        };
        if !(dt > 0.0) {
            return Err(Error::Blowup {
                t: state.t,
                reason: format!("non-positive time step {dt}"),
            });
        }

        let u = &state.values;
        let Self {
            faces,
            stage,
            stage2,
            next,
            ..
        } = self;
        let (flux_left, flux_right) = match config.integrator {
            Integrator::Rk2Ssp => {
                let f0 = stage_update(config, faces, u, u, stage, 0.0, 1.0, dt);
                let f1 = stage_update(config, faces, u, stage, next, 0.5, 0.5, dt);
                (0.5 * (f0.0 + f1.0), 0.5 * (f0.1 + f1.1))
            }
            Integrator::Rk3Ssp => {
                let f0 = stage_update(config, faces, u, u, stage, 0.0, 1.0, dt);
                let f1 = stage_update(config, faces, u, stage, stage2, 0.75, 0.25, dt);
                let f2 = stage_update(config, faces, u, stage2, next, 1.0 / 3.0, 2.0 / 3.0, dt);
                (
                    (f0.0 + f1.0) / 6.0 + 2.0 * f2.0 / 3.0,
                    (f0.1 + f1.1) / 6.0 + 2.0 * f2.1 / 3.0,
                )
            }
        };

        let bound = config.blowup_bound();
        if let Some((i, v)) = self
            .next
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > bound)
        {
            return Err(Error::Blowup {
                t: t_new,
                reason: format!("u = {v} at node {i} (bound {bound})"),
            });
        }

        let n = config.grid.n_cells;
        let dx = config.grid.dx;
        let mut change = 0.0;
        let mut scale = 0.0;
        for i in 1..n {
            change += self.next[i] - u[i];
            scale += u[i].abs();
        }
        let imbalance = dx * change + dt * (flux_right - flux_left);
        let mass_scale = dx * scale + dt * (flux_left.abs() + flux_right.abs());
        let mass_residual = if mass_scale > 0.0 {
            imbalance.abs() / mass_scale
        } else {
            imbalance.abs()
        };

        std::mem::swap(&mut state.values, &mut self.next);
        state.t = t_new;
        Ok(StepReport {
            dt,
            dt_advective: dt_adv,
            dt_diffusive: dt_diff,
            flux_left,
            flux_right,
            mass_residual,
        })
    }
}

/// `out = a u + b (v + dt L(v))` on interior nodes with pinned ends.
/// Returns the boundary fluxes of `v`.
#[allow(clippy::too_many_arguments)]
fn stage_update(
    config: &SolverConfig,
    faces: &mut [f64],
    u: &[f64],
    v: &[f64],
    out: &mut [f64],
    a: f64,
    b: f64,
    dt: f64,
) -> (f64, f64) {
    let n = config.grid.n_cells;
    let inv_dx = 1.0 / config.grid.dx;
    face_fluxes(config, v, faces);
    for i in 1..n {
        let l = -(faces[i] - faces[i - 1]) * inv_dx;
        out[i] = a * u[i] + b * (v[i] + dt * l);
    }
    out[0] = config.riemann.u_minus;
    out[n] = config.riemann.u_plus;
    (faces[0], faces[n - 1])
}

/// One step towards the next output time after `state.t`.
pub fn step(state: &State, config: &SolverConfig) -> Result<(State, StepReport)> {
    let target = config
        .output_times()
        .into_iter()
        .find(|&t| t > state.t)
        .unwrap_or(config.t_end.max(state.t));
    let mut next = state.clone();
    if target <= state.t {
        return Err(Error::Config(format!(
            "state at t = {} is already past t_end = {}",
            state.t, config.t_end
        )));
    }
    let report = Stepper::new(config).advance(&mut next, target)?;
    Ok((next, report))
}

/// Mass bookkeeping over a whole run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassLedger {
    /// `dx Σ_interior u_i` at `t = 0`.
    pub initial: f64,
    pub final_: f64,
    /// `∫ (F_right - F_left) dt` accumulated step by step.
    pub boundary_flux: f64,
    pub max_step_residual: f64,
}

impl MassLedger {
    /// `M(T) - M(0) + ∫ (F_right - F_left) dt`.
    pub fn imbalance(&self) -> f64 {
        self.final_ - self.initial + self.boundary_flux
    }
}

fn interior_mass(state: &State, dx: f64) -> f64 {
    let n = state.values.len() - 1;
    dx * state.values[1..n].iter().sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub snapshots: Vec<State>,
    pub records: Vec<DiagnosticsRecord>,
    pub mass: MassLedger,
    pub steps: usize,
    pub wave: SmoothRarefaction,
}

/// Integrates to `t_end` and evaluates diagnostics at every output time.
pub fn simulate(config: &SolverConfig) -> Result<SimulationOutput> {
    run(config, true)
}

fn run(config: &SolverConfig, with_diagnostics: bool) -> Result<SimulationOutput> {
    config.validate()?;
    let wave = config.smooth_wave()?;
    let mut state = initial_condition(config)?;
    let dx = config.grid.dx;
    let p = config.viscosity.p;

    let mut ledger = MassLedger {
        initial: interior_mass(&state, dx),
        final_: 0.0,
        boundary_flux: 0.0,
        max_step_residual: 0.0,
    };
    let mut compensation = 0.0;
    let mut snapshots = Vec::new();
    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let mut steps = 0;
    let mut stepper = Stepper::new(config);

    for target in config.output_times() {
        while state.t < target {
            let report = stepper.advance(&mut state, target)?;
            steps += 1;
            // Neumaier summation of the boundary flux integral.
            let term = report.dt * (report.flux_right - report.flux_left);
            let sum = ledger.boundary_flux + term;
            if ledger.boundary_flux.abs() >= term.abs() {
                compensation += (ledger.boundary_flux - sum) + term;
            } else {
                compensation += (term - sum) + ledger.boundary_flux;
            }
            ledger.boundary_flux = sum;
            ledger.max_step_residual = ledger.max_step_residual.max(report.mass_residual);
        }
        if with_diagnostics {
            let rec = diagnostics::record(&state, &config.grid, &wave, p, records.last())?;
            records.push(rec);
        }
        snapshots.push(state.clone());
    }
    ledger.boundary_flux += compensation;
    ledger.final_ = interior_mass(&state, dx);

    Ok(SimulationOutput {
        snapshots,
        records,
        mass: ledger,
        steps,
        wave,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub dx: f64,
    /// Discrete L² distance to the next finer level on this level's nodes.
    pub error: Option<f64>,
    /// `log2(e_{k-1} / e_k)`.
    pub observed_order: Option<f64>,
}

/// Discrete L² difference between a coarse solution and a finer one
/// restricted to the coarse nodes (`ratio` fine cells per coarse cell).
pub fn restricted_l2_difference(coarse: &[f64], fine: &[f64], ratio: usize, dx: f64) -> f64 {
    let diffs: Vec<f64> = coarse
        .iter()
        .enumerate()
        .map(|(i, c)| c - fine[i * ratio])
        .collect();
    diagnostics::lp_norm(&diffs, diagnostics::NormIndex::Two, dx)
}

/// Runs `config` at `n_cells · 2^k`, `k = 0..=refinements`, on the same
/// domain and reports successive-level errors with observed orders.
pub fn convergence_study(config: &SolverConfig, refinements: usize) -> Result<Vec<ConvergenceRow>> {
    if refinements < 2 {
        return Err(Error::Config("convergence study needs at least 2 refinements".into()));
    }
    let mut finals = Vec::with_capacity(refinements + 1);
    let mut grids = Vec::with_capacity(refinements + 1);
    for k in 0..=refinements {
        let mut level = config.clone();
        level.grid = Grid1D::new(config.grid.x_min, config.grid.x_max, config.grid.n_cells << k)?;
        level.snapshot_times.clear();
        let out = run(&level, false)?;
        finals.push(out.snapshots.last().expect("final snapshot").values.clone());
        grids.push(level.grid);
    }

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(refinements + 1);
    for k in 0..=refinements {
        let error = (k < refinements)
            .then(|| restricted_l2_difference(&finals[k], &finals[k + 1], 2, grids[k].dx));
        let observed_order = match (k.checked_sub(1).and_then(|j| rows[j].error), error) {
            (Some(prev), Some(e)) if e > 0.0 => Some((prev / e).log2()),
            _ => None,
        };
        rows.push(ConvergenceRow {
            n_cells: grids[k].n_cells,
            dx: grids[k].dx,
            error,
            observed_order,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burgers_config(p: f64, t_end: f64) -> SolverConfig {
        SolverConfig::new(
            ConvexFlux::burgers(),
            ViscosityModel::carreau(1.0, p).unwrap(),
            RiemannData::new(-0.5, 0.5).unwrap(),
            t_end,
        )
        .unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = Grid1D::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.dx, 0.5);
        assert_eq!(g.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(Grid1D::new(1.0, -1.0, 4).is_err());
        assert!(Grid1D::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn auto_grid_contains_fan() {
        let f = ConvexFlux::burgers();
        let r = RiemannData::new(-0.5, 0.5).unwrap();
        let g = Grid1D::auto(&f, &r, 200.0, 0.05).unwrap();
        assert_eq!((g.x_min, g.x_max), (-140.0, 140.0));
        assert!(g.dx <= 0.05);
        assert!(g.contains_fan(&f, &r, 200.0, Grid1D::default_margin(&f, &r, 200.0)));
    }

    #[test]
    fn initial_condition_without_perturbation_is_the_wave() {
        let c = burgers_config(1.0, 10.0);
        let s = initial_condition(&c).unwrap();
        let wave = c.smooth_wave().unwrap();
        let n = c.grid.n_cells;
        for i in 1..n {
            assert_eq!(s.values[i], wave.eval(0.0, c.grid.node(i)).unwrap().value);
        }
        assert_eq!(s.values[0], -0.5);
        assert_eq!(s.values[n], 0.5);
    }

    #[test]
    fn zero_amplitude_gaussian_matches_none() {
        let mut c = burgers_config(1.0, 10.0);
        let none = initial_condition(&c).unwrap();
        c.perturbation = Perturbation::Gaussian {
            amplitude: 0.0,
            center: 0.0,
            width: 2.0,
        };
        assert_eq!(initial_condition(&c).unwrap(), none);
    }

    #[test]
    fn perturbation_reaching_boundary_is_rejected() {
        let mut c = burgers_config(1.0, 10.0);
        c.perturbation = Perturbation::Gaussian {
            amplitude: 0.3,
            center: 0.0,
            width: 20.0,
        };
        assert!(matches!(initial_condition(&c), Err(Error::Config(_))));
    }

    #[test]
    fn random_perturbation_is_reproducible() {
        let p = Perturbation::RandomSmooth {
            amplitude: 0.2,
            seed: 7,
            correlation: 1.5,
        };
        let xs: Vec<f64> = (0..200).map(|i| -20.0 + 0.2 * i as f64).collect();
        let a = p.sample(&xs);
        assert_eq!(a, p.sample(&xs));
        let peak = a.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        assert!(peak <= 0.2 + 1e-12 && peak > 0.1);
        let other = Perturbation::RandomSmooth {
            amplitude: 0.2,
            seed: 8,
            correlation: 1.5,
        };
        assert_ne!(a, other.sample(&xs));
    }

    #[test]
    fn constant_state_is_steady() {
        let c = burgers_config(0.6, 10.0);
        let state = State {
            t: 0.0,
            values: vec![0.25; c.grid.len()],
        };
        assert!(rhs(&state, &c).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_ramp_is_advected() {
        // u = βx > 0 on five nodes, Burgers + Newtonian viscosity: viscous
        // fluxes cancel, the central part gives -β u_i exactly and the
        // Rusanov term ½|u_{i+1/2}|βdx adds ½β²dx.
        let beta = 0.2;
        let mut c = burgers_config(1.0, 1.0);
        c.grid = Grid1D::new(1.0, 3.0, 4).unwrap();
        let state = State {
            t: 0.0,
            values: c.grid.nodes().iter().map(|x| beta * x).collect(),
        };
        let r = rhs(&state, &c);
        for (i, v) in r.iter().enumerate() {
            let u = state.values[i + 1];
            let expected = -beta * u + 0.5 * beta * beta * c.grid.dx;
            assert!((v - expected).abs() < 1e-14, "{v} vs {expected}");
        }
    }

    #[test]
    fn rhs_telescopes() {
        let mut c = burgers_config(0.6, 10.0);
        c.perturbation = Perturbation::Gaussian {
            amplitude: 0.3,
            center: 0.0,
            width: 2.0,
        };
        let s = initial_condition(&c).unwrap();
        let r = rhs(&s, &c);
        let faces = face_flux_profile(&s, &c);
        let total: f64 = r.iter().sum::<f64>() * c.grid.dx;
        let expected = -(faces[faces.len() - 1] - faces[0]);
        assert!((total - expected).abs() < 1e-12);
    }

    #[test]
    fn godunov_flux_cases() {
        let f = ConvexFlux::burgers();
        assert!((godunov_flux(&f, 0.2, 0.5) - 0.02).abs() < 1e-16);
        assert!((godunov_flux(&f, -0.5, -0.2) - 0.02).abs() < 1e-16);
        assert_eq!(godunov_flux(&f, -0.5, 0.5), 0.0);
        assert_eq!(godunov_flux(&f, 0.5, -0.3), 0.125);
    }

    #[test]
    fn steady_constant_state_under_steps() {
        let c = burgers_config(1.5, 10.0);
        let mut s = State {
            t: 0.0,
            values: vec![0.0; c.grid.len()],
        };
        let last = c.grid.n_cells;
        s.values[0] = -0.5;
        s.values[last] = 0.5;
        // interior constant away from the pinned ends only matters for the
        // nodes far from the boundary
        let mut stepper = Stepper::new(&c);
        for _ in 0..5 {
            stepper.advance(&mut s, 10.0).unwrap();
        }
        assert!(s.values[last / 2] == 0.0);
    }

    #[test]
    fn dt_respects_both_bounds() {
        let mut c = burgers_config(0.6, 10.0);
        c.perturbation = Perturbation::Gaussian {
            amplitude: 0.3,
            center: 0.0,
            width: 2.0,
        };
        let s = initial_condition(&c).unwrap();
        let (next, report) = step(&s, &c).unwrap();
        assert!(report.dt <= report.dt_advective);
        assert!(report.dt <= report.dt_diffusive);
        // Carreau p = 0.6 has σ' ≤ μ, so the diffusive bound is at least
        // cfl dx² / (2μ).
        let floor = c.cfl_diffusive * c.grid.dx * c.grid.dx / 2.0;
        assert!(report.dt_diffusive >= floor * (1.0 - 1e-15));
        assert_eq!(next.t, report.dt);
    }

    #[test]
    fn step_clips_to_output_time() {
        let mut c = burgers_config(1.0, 10.0);
        c.snapshot_times = vec![1e-5];
        let s = initial_condition(&c).unwrap();
        let (next, _) = step(&s, &c).unwrap();
        assert_eq!(next.t, 1e-5);
    }

    #[test]
    fn degenerate_power_law_rejected() {
        let mut c = burgers_config(1.0, 10.0);
        c.viscosity = ViscosityModel::power_law(1.0, 0.6).unwrap();
        assert!(matches!(simulate(&c), Err(Error::Config(_))));
    }

    #[test]
    fn uncontained_grid_rejected() {
        let mut c = burgers_config(1.0, 10.0);
        c.grid = Grid1D::new(-10.0, 10.0, 400).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn zero_horizon_returns_initial_condition() {
        let mut c = burgers_config(1.0, 0.0);
        c.perturbation = Perturbation::Gaussian {
            amplitude: 0.3,
            center: 0.0,
            width: 2.0,
        };
        let out = simulate(&c).unwrap();
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0], initial_condition(&c).unwrap());
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn blowup_is_detected() {
        let mut c = burgers_config(1.0, 1.0);
        c.cfl_diffusive = 1.0;
        c.cfl_advective = 1.0;
        // huge jump forces u far outside the guard through the viscous flux
        let mut s = initial_condition(&c).unwrap();
        let mid = c.grid.n_cells / 2;
        s.values[mid] = 1e6;
        let err = Stepper::new(&c).advance(&mut s, 1.0).unwrap_err();
        assert!(matches!(err, Error::Blowup { .. }));
    }

    #[test]
    fn identical_resolutions_have_zero_error() {
        let v = vec![0.1, 0.4, -0.3, 0.2, 0.0];
        assert_eq!(restricted_l2_difference(&v, &v, 1, 0.1), 0.0);
    }
}
