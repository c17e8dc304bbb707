use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use rarelab_core::diagnostics::{
    self, deviation, lemma42_check, sobolev_check, sobolev_check_extended, RunSummary,
};
use rarelab_core::solver::{convergence_study, ConvergenceRow, MassLedger};
use rarelab_core::wave::{kq_constant, RateFit};
use rarelab_core::{
    rate_table, simulate, ConvexFlux, Grid1D, NormIndex, Perturbation, RateField, RateNorm,
    RiemannData, SimulationOutput, SmoothRarefaction, SmoothWave, SolverConfig, ViscosityModel,
};

use crate::config::{parse_config_text, ExperimentKind, RunConfig};
use crate::manifest::{ArtifactWriter, Manifest};
use crate::plot::emit_plots;
use crate::{CliError, Result};

/// Largest accepted deviation of a fitted rate from its exponent.
pub const RATE_TOLERANCE: f64 = 0.1;

/// `%.6g`-style formatting used in snapshot file names.
pub fn format_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip(mantissa), exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        strip(&format!("{v:.decimals$}"))
    }
}

pub fn snapshot_name(t: f64) -> String {
    format!("snap_t{}.csv", format_g6(t))
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub p: f64,
    pub grid: Grid1D,
    pub steps: usize,
    pub mass: MassLedger,
    pub mass_imbalance: f64,
    pub summary: RunSummary,
    /// Snapshots whose `φ` satisfies the Sobolev inequality.
    pub sobolev_ok: usize,
    pub snapshots: usize,
    /// `∫ Q dt` over `[2^k, 2^{k+1}]`, `k = 4..=7`, when the run reaches 256.
    pub dyadic_q_increments: Option<Vec<f64>>,
}

#[derive(Debug)]
pub struct SimulateReport {
    pub solver: SolverConfig,
    pub output: SimulationOutput,
    pub summary: SimulationSummary,
    pub manifest: Manifest,
}

fn snapshot_csv(state: &rarelab_core::State, grid: &Grid1D, wave: &SmoothRarefaction) -> Result<String> {
    let dev = deviation(state, grid, wave)?;
    let mut out = String::from("x,u,U,phi\n");
    for (i, (&u, &phi)) in state.values.iter().zip(&dev.phi).enumerate() {
        let _ = writeln!(out, "{},{u},{},{phi}", grid.node(i), dev.wave[i]);
    }
    Ok(out)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

fn write_plots(writer: &mut ArtifactWriter, config: &RunConfig) -> Result<()> {
    let report = emit_plots(writer.dir(), Some(config))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.files {
        writer.register(f)?;
    }
    Ok(())
}

/// One simulation at `config.p`: snapshots, diagnostics, summary, manifest.
pub fn run_simulate(config: &RunConfig) -> Result<SimulateReport> {
    let solver = config.solver_config(config.p)?;
    let mut writer = ArtifactWriter::create(&config.out)?;
    let output = simulate(&solver)?;

    writer.write("diagnostics.csv", diagnostics::records_to_csv(&output.records))?;
    let dumps = config.dump_times();
    let mut sobolev_ok = 0;
    for state in &output.snapshots {
        let dev = deviation(state, &solver.grid, &output.wave)?;
        if sobolev_check_extended(&dev.phi, solver.grid.dx).ok {
            sobolev_ok += 1;
        }
        if dumps.contains(&state.t) || state.t == solver.t_end {
            let csv = snapshot_csv(state, &solver.grid, &output.wave)?;
            writer.write(&snapshot_name(state.t), csv)?;
        }
    }

    let summary = SimulationSummary {
        p: config.p,
        grid: solver.grid,
        steps: output.steps,
        mass: output.mass,
        mass_imbalance: output.mass.imbalance(),
        summary: diagnostics::summarize(&output.records, config.transient)?,
        sobolev_ok,
        snapshots: output.snapshots.len(),
        dyadic_q_increments: (solver.t_end >= 256.0)
            .then(|| diagnostics::dyadic_q_increments(&output.records, 4..=7))
            .transpose()?,
    };
    writer.write("summary.json", json(&summary))?;
    if config.plots {
        write_plots(&mut writer, config)?;
    }
    let manifest = writer.finish(config)?;
    Ok(SimulateReport {
        solver,
        output,
        summary,
        manifest,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFitRow {
    pub field: RateField,
    pub q: f64,
    pub norm: String,
    pub slope: f64,
    pub expected_slope: f64,
    pub r2: f64,
    pub residual: f64,
    pub within_tolerance: bool,
}

impl RateFitRow {
    fn new(field: RateField, q: f64, fit: &RateFit) -> Self {
        Self {
            field,
            q,
            norm: fit.norm.clone(),
            slope: fit.fit.slope,
            expected_slope: fit.expected_slope,
            r2: fit.fit.r2,
            residual: fit.fit.residual,
            within_tolerance: (fit.fit.slope - fit.expected_slope).abs() <= RATE_TOLERANCE,
        }
    }
}

pub fn all_rate_norms() -> Vec<RateNorm> {
    let mut norms = Vec::new();
    for order in [1, 2] {
        for r in [NormIndex::One, NormIndex::Two, NormIndex::Inf] {
            norms.push(RateNorm::new(order, r).expect("order 1 or 2"));
        }
    }
    norms
}

/// `n` log-spaced times over `[lo, hi]`.
pub fn log_times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Decay-rate tables of `w` and `U` with fitted slopes.
pub fn run_rates(config: &RunConfig) -> Result<Vec<RateFitRow>> {
    let wave = SmoothRarefaction::new(config.flux.build()?, config.riemann()?, config.q)?;
    let times = log_times(1.0, config.fit_t_max, 41);
    let window = (config.fit_t_min, config.fit_t_max);
    let norms = all_rate_norms();
    let mut writer = ArtifactWriter::create(&config.out)?;
    let mut rows = Vec::new();
    for (field, name) in [(RateField::W, "rates_w.csv"), (RateField::U, "rates_u.csv")] {
        let table = rate_table(&wave, field, &times, &norms, Some(window))?;
        writer.write(name, table.to_csv())?;
        rows.extend(table.fits.iter().map(|f| RateFitRow::new(field, config.q, f)));
    }
    writer.write("fits.json", json(&rows))?;
    if config.plots {
        write_plots(&mut writer, config)?;
    }
    writer.finish(config)?;
    let off: Vec<String> = rows
        .iter()
        .filter(|r| !r.within_tolerance)
        .map(|r| format!("{:?} {} slope {:.4} vs {:.4}", r.field, r.norm, r.slope, r.expected_slope))
        .collect();
    if off.is_empty() {
        Ok(rows)
    } else {
        Err(CliError::Fit(off.join("; ")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub completed: bool,
    pub final_sup_dev_exact: Option<f64>,
    pub essential_sup_bracket: Option<f64>,
    pub max_l2_phi: Option<f64>,
    pub final_cum_q_integral: Option<f64>,
    pub error: Option<String>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn sweep_member_dir(p: f64) -> String {
    format!("p_{p}")
}

/// One simulation per exponent in `p_list`, run concurrently; rows are
/// joined in list order.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<SweepRow>> {
    let mut writer = ArtifactWriter::create(&config.out)?;
    let members: Vec<RunConfig> = config
        .p_list
        .iter()
        .map(|&p| RunConfig {
            experiment: ExperimentKind::Simulate,
            p,
            out: config.out.join(sweep_member_dir(p)),
            ..config.clone()
        })
        .collect();
    let results: Vec<Result<SimulateReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = members
            .iter()
            .map(|m| scope.spawn(move || run_simulate(m)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep member panicked"))
            .collect()
    });

    let mut rows = Vec::new();
    let mut first_error = None;
    for (member, result) in members.iter().zip(results) {
        let row = match result {
            Ok(report) => {
                let s = &report.summary.summary;
                writer.register(&format!("{}/manifest.json", sweep_member_dir(member.p)))?;
                SweepRow {
                    p: member.p,
                    completed: true,
                    final_sup_dev_exact: s.final_sup_dev_exact,
                    essential_sup_bracket: Some(s.essential_sup_bracket),
                    max_l2_phi: Some(s.max_l2_phi),
                    final_cum_q_integral: Some(s.final_cum_q_integral),
                    error: None,
                }
            }
            Err(e) => {
                let row = SweepRow {
                    p: member.p,
                    completed: false,
                    final_sup_dev_exact: None,
                    essential_sup_bracket: None,
                    max_l2_phi: None,
                    final_cum_q_integral: None,
                    error: Some(e.to_string()),
                };
                first_error.get_or_insert(e);
                row
            }
        };
        rows.push(row);
    }

    let mut csv = String::from(
        "p,completed,final_sup_dev_exact,essential_sup_bracket,max_l2_phi,final_cum_q_integral,error\n",
    );
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.p,
            r.completed,
            opt(r.final_sup_dev_exact),
            opt(r.essential_sup_bracket),
            opt(r.max_l2_phi),
            opt(r.final_cum_q_integral),
            r.error.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    writer.write("sweep.csv", csv)?;
    writer.finish(config)?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut csv = String::from("n_cells,dx,error,observed_order\n");
    for r in rows {
        let _ = writeln!(csv, "{},{},{},{}", r.n_cells, r.dx, opt(r.error), opt(r.observed_order));
    }
    csv
}

/// Grid refinement study at `config.p` with `config.refinements` levels.
pub fn run_convergence(config: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    let solver = config.solver_config(config.p)?;
    let rows = convergence_study(&solver, config.refinements)?;
    let mut writer = ArtifactWriter::create(&config.out)?;
    writer.write("convergence.csv", convergence_csv(&rows))?;
    if config.plots {
        write_plots(&mut writer, config)?;
    }
    writer.finish(config)?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn item(name: &str, outcome: rarelab_core::Result<(bool, String)>) -> CheckItem {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckItem {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn check_kq() -> rarelab_core::Result<(bool, String)> {
    let a = kq_constant(1.0)?;
    let b = kq_constant(1.5)?;
    let ok = (a - std::f64::consts::FRAC_1_PI).abs() < 1e-12 && (b - 0.5).abs() < 1e-12;
    Ok((ok, format!("K_1 = {a}, K_3/2 = {b}")))
}

fn check_characteristics() -> rarelab_core::Result<(bool, String)> {
    let wave = SmoothWave::new(-0.5, 0.5, 1.0)?;
    let mut worst = 0.0f64;
    for i in 0..30 {
        let t = 1e3 * i as f64 / 29.0;
        for j in 0..30 {
            let x = -600.0 + 1200.0 * j as f64 / 29.0;
            let x0 = wave.foot(t, x)?;
            worst = worst.max((x0 + wave.initial(x0) * t - x).abs());
        }
    }
    Ok((worst < 1e-12, format!("max residual {worst:e}")))
}

fn check_rates() -> rarelab_core::Result<(bool, String)> {
    let wave = SmoothRarefaction::new(ConvexFlux::burgers(), RiemannData::new(-0.5, 0.5)?, 1.0)?;
    let table = rate_table(
        &wave,
        RateField::W,
        &log_times(1e2, 1e4, 15),
        &all_rate_norms(),
        Some((1e2, 1e4)),
    )?;
    let worst = table
        .fits
        .iter()
        .map(|f| (f.fit.slope - f.expected_slope).abs())
        .fold(0.0, f64::max);
    Ok((worst <= RATE_TOLERANCE, format!("max slope error {worst:.4}")))
}

fn gaussian_samples(amplitude: f64, width: f64, half: f64, n: usize) -> (Vec<f64>, f64) {
    let dx = 2.0 * half / n as f64;
    let g = (0..=n)
        .map(|i| {
            let x = -half + dx * i as f64;
            amplitude * (-x * x / (2.0 * width * width)).exp()
        })
        .collect();
    (g, dx)
}

fn check_sobolev() -> rarelab_core::Result<(bool, String)> {
    let mut ok = true;
    for (a, s) in [(1.0, 0.5), (0.3, 2.0), (2.0, 5.0)] {
        let (g, dx) = gaussian_samples(a, s, 60.0, 6000);
        ok &= sobolev_check(&g, dx)?.ok;
    }
    Ok((ok, "gaussian corpus".into()))
}

fn check_lemma42() -> rarelab_core::Result<(bool, String)> {
    let mut worst = 1.0f64;
    for p in [0.5, 0.7] {
        let cs = [0.25, 1.0, 4.0]
            .iter()
            .map(|&lambda| {
                let (g, dx) = gaussian_samples(1.0, 1.0 / lambda, 40.0 / lambda, 8000);
                lemma42_check(&g, p, dx).map(|c| c.fitted_c)
            })
            .collect::<rarelab_core::Result<Vec<f64>>>()?;
        let max = cs.iter().copied().fold(0.0, f64::max);
        let min = cs.iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.max(max / min);
    }
    Ok((worst < 10.0, format!("fitted C spread {worst:.3}x")))
}

fn short_solver(p: f64) -> rarelab_core::Result<SolverConfig> {
    let mut c = SolverConfig::new(
        ConvexFlux::burgers(),
        ViscosityModel::carreau(1.0, p)?,
        RiemannData::new(-0.5, 0.5)?,
        2.0,
    )?;
    c.perturbation = Perturbation::Gaussian {
        amplitude: 0.3,
        center: 0.0,
        width: 2.0,
    };
    c.snapshot_times = vec![1.0];
    Ok(c)
}

fn check_solver() -> rarelab_core::Result<(bool, String)> {
    let mut ok = true;
    let mut worst_step = 0.0f64;
    let mut worst_run = 0.0f64;
    for p in [0.5, 1.0, 1.5] {
        let c = short_solver(p)?;
        let a = simulate(&c)?;
        let b = simulate(&c)?;
        ok &= a.snapshots == b.snapshots;
        let n = c.grid.n_cells;
        ok &= a
            .snapshots
            .iter()
            .all(|s| s.values[0] == c.riemann.u_minus && s.values[n] == c.riemann.u_plus);
        worst_step = worst_step.max(a.mass.max_step_residual);
        worst_run = worst_run.max(a.mass.imbalance().abs());
    }
    ok &= worst_step < 1e-12 && worst_run < 1e-8;
    Ok((
        ok,
        format!("step residual {worst_step:e}, run imbalance {worst_run:e}"),
    ))
}

fn check_convergence() -> rarelab_core::Result<(bool, String)> {
    let mut c = short_solver(1.0)?;
    c.t_end = 1.0;
    c.snapshot_times.clear();
    c.grid = Grid1D::new(c.grid.x_min, c.grid.x_max, 200)?;
    let rusanov = convergence_study(&c, 3)?;
    c.pure_diffusion = true;
    let diffusion = convergence_study(&c, 3)?;
    let last = |rows: &[ConvergenceRow]| {
        rows.iter()
            .filter_map(|r| r.observed_order)
            .last()
            .unwrap_or(f64::NAN)
    };
    let (a, b) = (last(&rusanov), last(&diffusion));
    Ok((a >= 0.9 && b >= 1.9, format!("orders {a:.3} (default), {b:.3} (pure diffusion)")))
}

fn check_round_trip(config: &RunConfig) -> rarelab_core::Result<(bool, String)> {
    let parsed = parse_config_text(&config.serialize());
    Ok((parsed.as_ref() == Ok(config), "parse(serialize(config))".into()))
}

/// Runs the property suite and writes `check.json`; fails if any item fails.
pub fn run_check(config: &RunConfig) -> Result<Vec<CheckItem>> {
    let items = vec![
        item("normalization constants", check_kq()),
        item("characteristic residual", check_characteristics()),
        item("decay-rate exponents", check_rates()),
        item("sobolev inequality", check_sobolev()),
        item("interpolation inequality scaling", check_lemma42()),
        item("conservation and determinism", check_solver()),
        item("convergence orders", check_convergence()),
        item("config round trip", check_round_trip(config)),
    ];
    let mut writer = ArtifactWriter::create(&config.out)?;
    writer.write("check.json", json(&items))?;
    writer.finish(config)?;
    let failed: Vec<&str> = items
        .iter()
        .filter(|i| !i.passed)
        .map(|i| i.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(items)
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

/// Dispatches on `config.experiment`, returning a one-line report.
pub fn run(config: &RunConfig) -> Result<String> {
    match config.experiment {
        ExperimentKind::Simulate => {
            let r = run_simulate(config)?;
            Ok(format!(
                "simulated to t = {} in {} steps; final sup|u - u^r| = {}",
                r.solver.t_end,
                r.output.steps,
                opt(r.summary.summary.final_sup_dev_exact)
            ))
        }
        ExperimentKind::Rates => {
            let rows = run_rates(config)?;
            Ok(format!("{} rate fits within ±{RATE_TOLERANCE}", rows.len()))
        }
        ExperimentKind::Sweep => {
            let rows = run_sweep(config)?;
            Ok(format!("{} sweep members completed", rows.len()))
        }
        ExperimentKind::Convergence => {
            let rows = run_convergence(config)?;
            let orders: Vec<String> = rows
                .iter()
                .filter_map(|r| r.observed_order)
                .map(|o| format!("{o:.3}"))
                .collect();
            Ok(format!("observed orders: {}", orders.join(", ")))
        }
        ExperimentKind::Check => {
            let items = run_check(config)?;
            Ok(format!("{} checks passed", items.len()))
        }
    }
}

/// Plots the artifacts of a finished run directory.
pub fn run_plot(dir: &Path) -> Result<Vec<String>> {
    let config = Manifest::read(dir).ok().map(|m| {
        let mut c = RunConfig::default();
        for (k, v) in &m.config {
            let _ = c.set(k, v);
        }
        c
    });
    let report = emit_plots(dir, config.as_ref())?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(report.files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_g6(0.0), "0");
        assert_eq!(format_g6(20.0), "20");
        assert_eq!(format_g6(25.6), "25.6");
        assert_eq!(format_g6(1.0 / 3.0), "0.333333");
        assert_eq!(format_g6(123456.7), "123457");
        assert_eq!(format_g6(1234567.0), "1.23457e+06");
        assert_eq!(format_g6(0.00001234567), "1.23457e-05");
        assert_eq!(format_g6(999999.6), "1e+06");
        assert_eq!(snapshot_name(200.0), "snap_t200.csv");
    }
}
