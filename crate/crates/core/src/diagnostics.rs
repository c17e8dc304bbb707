//! Norms, energy functionals and inequality probes for the deviation
//! `φ = u - U` from the smooth rarefaction wave.
//!
//! Grid functions are node samples on a uniform grid of spacing `dx`.
//! Derivatives use centered differences inside and second-order one-sided
//! stencils at the two ends; integrals use the composite trapezoid rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::ConvexFlux;
use crate::solver::{Grid1D, State};
use crate::wave::{exact_rarefaction, RiemannData, SmoothRarefaction};

pub use crate::fit::{decay_rate_fit, DecayFit};

/// Lebesgue exponent `r ∈ {1, 2, ∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormIndex {
    One,
    Two,
    Inf,
}

impl NormIndex {
    pub fn reciprocal(self) -> f64 {
        match self {
            NormIndex::One => 1.0,
            NormIndex::Two => 0.5,
            NormIndex::Inf => 0.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NormIndex::One => "1",
            NormIndex::Two => "2",
            NormIndex::Inf => "inf",
        }
    }
}

/// Japanese bracket `⟨s⟩ = (1 + s²)^{1/2}`.
#[inline]
pub fn bracket(s: f64) -> f64 {
    s.hypot(1.0)
}

pub fn trapezoid(g: &[f64], dx: f64) -> f64 {
    match g.len() {
        0 | 1 => 0.0,
        n => dx * (g.iter().sum::<f64>() - 0.5 * (g[0] + g[n - 1])),
    }
}

fn trapezoid_map<F: Fn(usize) -> f64>(n: usize, dx: f64, f: F) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = (1..n - 1).map(&f).sum();
    dx * (inner + 0.5 * (f(0) + f(n - 1)))
}

pub fn lp_norm(g: &[f64], r: NormIndex, dx: f64) -> f64 {
    match r {
        NormIndex::One => trapezoid_map(g.len(), dx, |i| g[i].abs()),
        NormIndex::Two => trapezoid_map(g.len(), dx, |i| g[i] * g[i]).sqrt(),
        NormIndex::Inf => sup_abs(g),
    }
}

pub fn sup_abs(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// First derivative of a grid function.
pub fn derivative(g: &[f64], dx: f64) -> Vec<f64> {
    let n = g.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * dx);
    d[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * dx);
    for i in 1..n - 1 {
        d[i] = (g[i + 1] - g[i - 1]) / (2.0 * dx);
    }
    d
}

/// Second derivative of a grid function.
pub fn second_derivative(g: &[f64], dx: f64) -> Vec<f64> {
    let n = g.len();
    if n < 4 {
        return vec![0.0; n];
    }
    let h2 = dx * dx;
    let mut d = vec![0.0; n];
    d[0] = (2.0 * g[0] - 5.0 * g[1] + 4.0 * g[2] - g[3]) / h2;
    d[n - 1] = (2.0 * g[n - 1] - 5.0 * g[n - 2] + 4.0 * g[n - 3] - g[n - 4]) / h2;
    for i in 1..n - 1 {
        d[i] = (g[i + 1] - 2.0 * g[i] + g[i - 1]) / h2;
    }
    d
}

/// `Q = ∫ ⟨v⟩^{p-1} |v|² dx` of a supplied gradient field `v`.
pub fn q_functional(v: &[f64], p: f64, dx: f64) -> f64 {
    if p == 1.0 {
        return trapezoid_map(v.len(), dx, |i| v[i] * v[i]);
    }
    let e = 0.5 * (p - 1.0);
    trapezoid_map(v.len(), dx, |i| {
        let s = v[i] * v[i];
        (1.0 + s).powf(e) * s
    })
}

/// `∫ ⟨∂xφ⟩^{2(p-1)} |∂x²φ|² dx`.
pub fn q2_functional(dphi: &[f64], d2phi: &[f64], p: f64, dx: f64) -> f64 {
    trapezoid_map(dphi.len(), dx, |i| {
        (1.0 + dphi[i] * dphi[i]).powf(p - 1.0) * d2phi[i] * d2phi[i]
    })
}

/// `∫ φ² ∂xU dx`; the weight must be non-negative.
pub fn weighted_mass(phi: &[f64], du_dx: &[f64], dx: f64) -> Result<f64> {
    if let Some((index, &value)) = du_dx.iter().enumerate().find(|(_, &v)| v < -1e-12) {
        return Err(Error::NegativeWeight { index, value });
    }
    Ok(trapezoid_map(phi.len(), dx, |i| {
        phi[i] * phi[i] * du_dx[i].max(0.0)
    }))
}

/// `max_i |u_i - u^r(x_i / t)|`.
pub fn sup_deviation(
    state: &State,
    grid: &Grid1D,
    flux: &ConvexFlux,
    riemann: &RiemannData,
) -> Result<f64> {
    if !(state.t > 0.0) {
        return Err(Error::Domain(
            "deviation from the self-similar wave needs t > 0".into(),
        ));
    }
    Ok(state
        .values
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - exact_rarefaction(flux, riemann, grid.node(i) / state.t)).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

const DECAY_TOL: f64 = 1e-10;

fn require_decay(g: &[f64]) -> Result<()> {
    match (g.first(), g.last()) {
        (Some(a), Some(b)) if a.abs() >= DECAY_TOL || b.abs() >= DECAY_TOL => {
            Err(Error::Precondition(format!(
                "grid function does not decay at the ends ({a:e}, {b:e})"
            )))
        }
        _ => Ok(()),
    }
}

/// `sup|g| ≤ √2 ‖g‖^{1/2} ‖∂x g‖^{1/2}` with slack `10 dx`.
pub fn sobolev_check(g: &[f64], dx: f64) -> Result<SobolevCheck> {
    require_decay(g)?;
    Ok(sobolev_unchecked(g, dx))
}

/// [`sobolev_check`] for a function truncated to a finite window whose end
/// values need not vanish: the samples are extended by one zero node on
/// each side, i.e. by linear ramps, which is still an `H¹(ℝ)` function.
pub fn sobolev_check_extended(g: &[f64], dx: f64) -> SobolevCheck {
    let mut padded = Vec::with_capacity(g.len() + 2);
    padded.push(0.0);
    padded.extend_from_slice(g);
    padded.push(0.0);
    sobolev_unchecked(&padded, dx)
}

fn sobolev_unchecked(g: &[f64], dx: f64) -> SobolevCheck {
    let lhs = sup_abs(g);
    let dg = derivative(g, dx);
    let rhs = 2f64.sqrt()
        * lp_norm(g, NormIndex::Two, dx).sqrt()
        * lp_norm(&dg, NormIndex::Two, dx).sqrt();
    SobolevCheck {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + 10.0 * dx),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma42Check {
    /// `‖g‖²_∞`
    pub lhs: f64,
    /// `Q_g^{1/4} ‖g‖^{1/2}`
    pub term_low: f64,
    /// `Q_g^{1/(3p+1)} ‖g‖^{2p/(3p+1)}`
    pub term_high: f64,
    /// Smallest `C` with `lhs ≤ C (term_low + term_high)`.
    pub fitted_c: f64,
}

/// Interpolation bound `‖g‖²_∞ ≤ C Q_g^{1/4}‖g‖^{1/2} + C Q_g^{1/(3p+1)}‖g‖^{2p/(3p+1)}`
/// for `0 < p < 1`, with `Q_g = ∫⟨∂x g⟩^{p-1}|∂x g|²`.
pub fn lemma42_check(g: &[f64], p: f64, dx: f64) -> Result<Lemma42Check> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Precondition(format!("p must lie in (0, 1), got {p}")));
    }
    require_decay(g)?;
    let sup = sup_abs(g);
    let l2 = lp_norm(g, NormIndex::Two, dx);
    let q = q_functional(&derivative(g, dx), p, dx);
    let term_low = q.powf(0.25) * l2.sqrt();
    let term_high = q.powf(1.0 / (3.0 * p + 1.0)) * l2.powf(2.0 * p / (3.0 * p + 1.0));
    let lhs = sup * sup;
    let denom = term_low + term_high;
    let fitted_c = if denom > 0.0 { lhs / denom } else { 0.0 };
    Ok(Lemma42Check {
        lhs,
        term_low,
        term_high,
        fitted_c,
    })
}

/// `max ⟨v⟩` over every time and node of a series of gradient fields.
pub fn essential_sup_bracket<'a, I>(series: I) -> f64
where
    I: IntoIterator<Item = &'a [f64]>,
{
    series
        .into_iter()
        .map(|g| bracket(sup_abs(g)))
        .fold(1.0, f64::max)
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_phi: f64,
    pub h1_phi: f64,
    pub h2_phi: f64,
    pub weighted_mass: f64,
    pub q_phi: f64,
    pub q2_phi: f64,
    pub sup_phi: f64,
    /// `sup|u - u^r(x/t)|`; absent at `t = 0`.
    pub sup_dev_exact: Option<f64>,
    pub linf_dxphi: f64,
    pub cum_q_integral: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,l2_phi,h1_phi,h2_phi,weighted_mass,q_phi,q2_phi,sup_phi,sup_dev_exact,linf_dxphi,cum_q_integral";

    pub fn csv_row(&self) -> String {
        let dev = self
            .sup_dev_exact
            .map(|v| format!("{v:.17e}"))
            .unwrap_or_default();
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e}",
            self.t,
            self.l2_phi,
            self.h1_phi,
            self.h2_phi,
            self.weighted_mass,
            self.q_phi,
            self.q2_phi,
            self.sup_phi,
            dev,
            self.linf_dxphi,
            self.cum_q_integral
        )
    }

    /// `⟨‖∂xφ‖_∞⟩`, the per-time bracket sup.
    pub fn bracket_sup(&self) -> f64 {
        bracket(self.linf_dxphi)
    }
}

pub fn records_to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::from(DiagnosticsRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Deviation `φ = u - U(t)` with `∂x U(t)` on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub phi: Vec<f64>,
    pub wave: Vec<f64>,
    pub wave_slope: Vec<f64>,
}

pub fn deviation(state: &State, grid: &Grid1D, wave: &SmoothRarefaction) -> Result<Deviation> {
    let nodes = grid.nodes();
    let (values, slopes) = wave.profile(state.t, &nodes)?;
    let phi = state
        .values
        .iter()
        .zip(&values)
        .map(|(u, big_u)| u - big_u)
        .collect();
    Ok(Deviation {
        phi,
        wave: values,
        wave_slope: slopes,
    })
}

/// Diagnostics of one snapshot. `previous` supplies the running
/// `∫ Q dt` (trapezoid in time).
pub fn record(
    state: &State,
    grid: &Grid1D,
    wave: &SmoothRarefaction,
    p: f64,
    previous: Option<&DiagnosticsRecord>,
) -> Result<DiagnosticsRecord> {
    let dx = grid.dx;
    let dev = deviation(state, grid, wave)?;
    let dphi = derivative(&dev.phi, dx);
    let d2phi = second_derivative(&dev.phi, dx);

    let l2 = lp_norm(&dev.phi, NormIndex::Two, dx).powi(2);
    let l2_d = lp_norm(&dphi, NormIndex::Two, dx).powi(2);
    let l2_dd = lp_norm(&d2phi, NormIndex::Two, dx).powi(2);
    let q_phi = q_functional(&dphi, p, dx);

    let cum_q_integral = match previous {
        Some(prev) => prev.cum_q_integral + 0.5 * (state.t - prev.t) * (q_phi + prev.q_phi),
        None => 0.0,
    };
    let sup_dev_exact = if state.t > 0.0 {
        Some(sup_deviation(state, grid, &wave.flux, &wave.riemann)?)
    } else {
        None
    };

    Ok(DiagnosticsRecord {
        t: state.t,
        l2_phi: l2.sqrt(),
        h1_phi: (l2 + l2_d).sqrt(),
        h2_phi: (l2 + l2_d + l2_dd).sqrt(),
        weighted_mass: weighted_mass(&dev.phi, &dev.wave_slope, dx)?,
        q_phi,
        q2_phi: q2_functional(&dphi, &d2phi, p, dx),
        sup_phi: sup_abs(&dev.phi),
        sup_dev_exact,
        linf_dxphi: sup_abs(&dphi),
        cum_q_integral,
    })
}

/// Growth of `∫ Q dt` over `[2^k, 2^{k+1}]` for each `k` in `ks`, linearly
/// interpolating the running integral between records.
pub fn dyadic_q_increments(records: &[DiagnosticsRecord], ks: std::ops::RangeInclusive<i32>) -> Result<Vec<f64>> {
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let cum: Vec<f64> = records.iter().map(|r| r.cum_q_integral).collect();
    ks.map(|k| {
        let a = 2f64.powi(k);
        let b = 2.0 * a;
        Ok(interpolate(&times, &cum, b)? - interpolate(&times, &cum, a)?)
    })
    .collect()
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let last = xs.len().checked_sub(1).ok_or_else(|| Error::Domain("empty series".into()))?;
    if x < xs[0] || x > xs[last] {
        return Err(Error::Domain(format!(
            "t = {x} outside recorded range [{}, {}]",
            xs[0], xs[last]
        )));
    }
    let j = xs.partition_point(|&v| v < x);
    if xs[j.min(last)] == x {
        return Ok(ys[j.min(last)]);
    }
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = (x - x0) / (x1 - x0);
    Ok(ys[j - 1] * (1.0 - w) + ys[j] * w)
}

/// Whether `values` is non-increasing over the samples with `t > transient`.
pub fn eventually_non_increasing(times: &[f64], values: &[f64], transient: f64) -> bool {
    let tail: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t > transient)
        .map(|(_, &v)| v)
        .collect();
    tail.windows(2).all(|w| w[1] <= w[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_t: f64,
    pub final_sup_dev_exact: Option<f64>,
    pub essential_sup_bracket: f64,
    pub max_l2_phi: f64,
    pub initial_l2_phi: f64,
    pub max_h2_phi: f64,
    pub final_cum_q_integral: f64,
    pub l2_bounded: bool,
    pub cum_q_non_decreasing: bool,
    pub sup_dev_eventually_decreasing: bool,
    pub bracket_eventually_non_increasing: bool,
    pub sup_dev_slope: Option<DecayFit>,
}

/// Summary verdicts over a diagnostics series. `transient` is the initial
/// window skipped by the monotonicity probes.
pub fn summarize(records: &[DiagnosticsRecord], transient: f64) -> Result<RunSummary> {
    let last = records
        .last()
        .ok_or_else(|| Error::Domain("no diagnostics records".into()))?;
    let initial_l2 = records[0].l2_phi;
    let max_l2 = records.iter().map(|r| r.l2_phi).fold(0.0, f64::max);
    let max_h2 = records.iter().map(|r| r.h2_phi).fold(0.0, f64::max);

    let dyadic: Vec<&DiagnosticsRecord> = records
        .iter()
        .filter(|r| r.t > transient && r.t.log2().fract() == 0.0 && r.sup_dev_exact.is_some())
        .collect();
    let dev_t: Vec<f64> = dyadic.iter().map(|r| r.t).collect();
    let dev_v: Vec<f64> = dyadic.iter().filter_map(|r| r.sup_dev_exact).collect();

    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let brackets: Vec<f64> = records.iter().map(|r| r.bracket_sup()).collect();

    let with_dev: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.sup_dev_exact.map(|d| (r.t, d)))
        .filter(|&(t, _)| t > transient)
        .collect();
    let sup_dev_slope = decay_rate_fit(
        &with_dev.iter().map(|p| p.0).collect::<Vec<_>>(),
        &with_dev.iter().map(|p| p.1).collect::<Vec<_>>(),
        (transient, f64::INFINITY),
    )
    .ok();

    Ok(RunSummary {
        final_t: last.t,
        final_sup_dev_exact: last.sup_dev_exact,
        essential_sup_bracket: brackets.iter().copied().fold(1.0, f64::max),
        max_l2_phi: max_l2,
        initial_l2_phi: initial_l2,
        max_h2_phi: max_h2,
        final_cum_q_integral: last.cum_q_integral,
        l2_bounded: max_l2.is_finite() && max_h2.is_finite(),
        cum_q_non_decreasing: records
            .windows(2)
            .all(|w| w[1].cum_q_integral >= w[0].cum_q_integral),
        sup_dev_eventually_decreasing: dev_v.windows(2).all(|w| w[1] < w[0])
            && !dev_t.is_empty(),
        bracket_eventually_non_increasing: eventually_non_increasing(&times, &brackets, transient),
        sup_dev_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_fn(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
        let dx = (hi - lo) / n as f64;
        ((0..=n).map(|i| f(lo + dx * i as f64)).collect(), dx)
    }

    #[test]
    fn lp_norm_examples() {
        assert_eq!(lp_norm(&[0.0; 11], NormIndex::Two, 0.1), 0.0);
        let (ones, dx) = grid_fn(0.0, 1.0, 100, |_| 1.0);
        assert!((lp_norm(&ones, NormIndex::One, dx) - 1.0).abs() < 1e-12);
        assert_eq!(lp_norm(&[0.5, -2.0, 1.0], NormIndex::Inf, 1.0), 2.0);
    }

    #[test]
    fn l2_of_sine_converges_at_second_order() {
        let err = |n| {
            let (g, dx) = grid_fn(0.0, 1.0, n, |x| (std::f64::consts::PI * x).sin());
            (lp_norm(&g, NormIndex::Two, dx) - 0.5f64.sqrt()).abs()
        };
        // trapezoid is spectrally accurate for this periodic integrand, so
        // only the bound matters
        assert!(err(20) < 1e-10);
        assert!(err(40) <= err(20) + 1e-15);
    }

    #[test]
    fn derivative_stencils_are_second_order() {
        let err = |n| {
            let (g, dx) = grid_fn(0.0, 1.0, n, f64::exp);
            let (dg, _) = grid_fn(0.0, 1.0, n, f64::exp);
            let d1 = derivative(&g, dx);
            let d2 = second_derivative(&g, dx);
            let e1 = d1.iter().zip(&dg).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let e2 = d2.iter().zip(&dg).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (e1, e2)
        };
        let (a1, a2) = err(50);
        let (b1, b2) = err(100);
        assert!((a1 / b1).log2() > 1.9, "{a1} {b1}");
        assert!((a2 / b2).log2() > 1.9, "{a2} {b2}");
    }

    #[test]
    fn q_functional_examples() {
        assert_eq!(q_functional(&[0.0; 5], 0.5, 0.1), 0.0);
        let v = [0.3, -1.2, 2.0, 0.7];
        let l2 = lp_norm(&v, NormIndex::Two, 0.5).powi(2);
        assert!((q_functional(&v, 1.0, 0.5) - l2).abs() < 1e-14 * l2);
        let (ones, dx) = grid_fn(0.0, 1.0, 100, |_| 1.0);
        assert!((q_functional(&ones, 0.5, dx) - 2f64.powf(-0.25)).abs() < 1e-12);
    }

    #[test]
    fn weighted_mass_examples() {
        assert_eq!(weighted_mass(&[0.0; 4], &[1.0; 4], 0.1).unwrap(), 0.0);
        assert_eq!(weighted_mass(&[1.0; 4], &[0.0; 4], 0.1).unwrap(), 0.0);
        let err = weighted_mass(&[1.0; 3], &[0.1, -1e-6, 0.1], 0.1).unwrap_err();
        assert!(matches!(err, Error::NegativeWeight { index: 1, .. }));
        // round-off negatives are tolerated
        assert!(weighted_mass(&[1.0; 3], &[0.1, -1e-14, 0.1], 0.1).is_ok());
    }

    #[test]
    fn sobolev_examples() {
        let zero = sobolev_check(&[0.0; 9], 0.1).unwrap();
        assert_eq!((zero.lhs, zero.rhs, zero.ok), (0.0, 0.0, true));

        let (g, dx) = grid_fn(-10.0, 10.0, 2000, |x| (-x * x).exp());
        let c = sobolev_check(&g, dx).unwrap();
        let norm = (std::f64::consts::PI / 2.0).sqrt();
        assert!((c.rhs - 2f64.sqrt() * norm.sqrt()).abs() < 1e-4);
        assert!(c.ok);

        let err = sobolev_check(&[1.0, 0.0, 0.0], 0.1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn extended_sobolev_accepts_truncated_functions() {
        let (g, dx) = grid_fn(-3.0, 3.0, 600, |x| 0.2 + (-x * x).exp());
        let c = sobolev_check_extended(&g, dx);
        assert!(c.ok);
    }

    #[test]
    fn lemma42_degenerate_and_gaussian() {
        let zero = lemma42_check(&[0.0; 10], 0.5, 0.1).unwrap();
        assert_eq!((zero.lhs, zero.term_low, zero.term_high, zero.fitted_c), (0.0, 0.0, 0.0, 0.0));

        let (g, dx) = grid_fn(-10.0, 10.0, 4000, |x| (-x * x).exp());
        let c = lemma42_check(&g, 0.5, dx).unwrap();
        assert!(c.fitted_c.is_finite() && c.fitted_c > 0.0);
        assert!(lemma42_check(&g, 1.0, dx).is_err());
    }

    #[test]
    fn essential_sup_examples() {
        let zero = vec![0.0; 5];
        assert_eq!(essential_sup_bracket([zero.as_slice(), zero.as_slice()]), 1.0);
        assert_eq!(essential_sup_bracket([[1.0].as_slice()]), 2f64.sqrt());
    }

    #[test]
    fn bracket_weight() {
        assert_eq!(bracket(0.0), 1.0);
        assert!(bracket(-3.0) >= 1.0);
        assert!((bracket(1.0) - 2f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn dyadic_increments_interpolate() {
        let rec = |t: f64| DiagnosticsRecord {
            t,
            l2_phi: 0.0,
            h1_phi: 0.0,
            h2_phi: 0.0,
            weighted_mass: 0.0,
            q_phi: 0.0,
            q2_phi: 0.0,
            sup_phi: 0.0,
            sup_dev_exact: None,
            linf_dxphi: 0.0,
            cum_q_integral: t.sqrt(),
        };
        let records: Vec<_> = (0..=70).map(|i| rec(i as f64)).collect();
        let inc = dyadic_q_increments(&records, 2..=5).unwrap();
        assert!((inc[0] - (8f64.sqrt() - 2.0)).abs() < 1e-15);
        assert!(inc.windows(2).all(|w| w[1] > w[0]));
        assert!(dyadic_q_increments(&records, 6..=6).is_err());
    }
}
