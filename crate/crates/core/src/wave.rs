//! Exact and smoothed rarefaction waves.
//!
//! The smooth wave `w(t, x)` solves the inviscid Burgers equation from the
//! monotone datum
//!
//! ```text
//! w0(x) = (w- + w+)/2 + (w+ - w-) K_q ∫_0^x (1 + y²)^{-q} dy,
//! ```
//!
//! where `K_q` normalizes `(1 + y²)^{-q}` to unit mass on the whole line, so
//! that `w0(±∞) = w±`. It is evaluated through its characteristics
//! `x = x0 + w0(x0) t`, and `U = (f')^{-1}(w)` carries it over to a general
//! convex flux.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::diagnostics::NormIndex;
use crate::error::{Error, Result};
use crate::fit::{decay_rate_fit, DecayFit};
use crate::flux::ConvexFlux;
use crate::quad::{integrate, QuadOptions};

const FOOT_TOL: f64 = 1e-13;
const FOOT_MAX_ITER: usize = 200;

/// Omitted tail mass of `∂x w` allowed by the rate-table window.
const WINDOW_TAIL: f64 = 1e-8;
/// Minimum fraction of the fan mass the window must capture.
const WINDOW_CAPTURE: f64 = 1.0 - 1e-6;

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        max_subdivisions: 4000,
    }
}

/// Far-field states of a rarefaction configuration, `u- < u+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannData {
    pub u_minus: f64,
    pub u_plus: f64,
}

impl RiemannData {
    pub fn new(u_minus: f64, u_plus: f64) -> Result<Self> {
        if !(u_minus < u_plus) || !u_minus.is_finite() || !u_plus.is_finite() {
            return Err(Error::Domain(format!(
                "rarefaction requires u- < u+, got u- = {u_minus}, u+ = {u_plus}"
            )));
        }
        Ok(Self { u_minus, u_plus })
    }

    /// Interval on which flux convexity is required.
    pub fn working_interval(&self) -> (f64, f64) {
        (self.u_minus - 1.0, self.u_plus + 1.0)
    }
}

/// `∫_{-∞}^{∞} (1 + y²)^{-q} dy`.
pub fn normalization_integral(q: f64) -> Result<f64> {
    if !(q > 0.5) || !q.is_finite() {
        return Err(Error::Domain(format!(
            "q must exceed 1/2 for an integrable tail, got {q}"
        )));
    }
    if q == 1.0 {
        return Ok(PI);
    }
    if q == 1.5 {
        return Ok(2.0);
    }
    Ok(2.0 * half_line_integral(q))
}

/// Normalization constant `K_q` with `K_q ∫ (1 + y²)^{-q} dy = 1`.
pub fn kq_constant(q: f64) -> Result<f64> {
    if q == 1.0 {
        return Ok(1.0 / PI);
    }
    if q == 1.5 {
        return Ok(0.5);
    }
    normalization_integral(q).map(|n| 1.0 / n)
}

// y = tan θ turns ∫_0^∞ (1+y²)^{-q} dy into ∫_0^{π/2} cos^{2q-2} θ dθ.
fn half_line_integral(q: f64) -> f64 {
    if q >= 1.0 {
        integrate(|th| th.cos().powf(2.0 * q - 2.0), 0.0, FRAC_PI_2, quad_opts()).value
    } else {
        tail_integral(q, FRAC_PI_2)
    }
}

/// `∫_0^{φ_max} sin^{2q-2} φ dφ` for `1/2 < q < 1`. The substitution
/// `φ = s^{1/(2q-1)}` removes the endpoint singularity.
fn tail_integral(q: f64, phi_max: f64) -> f64 {
    let a = 2.0 * q - 1.0;
    let m = 1.0 / a;
    let s_max = phi_max.powf(a);
    integrate(
        |s| {
            let phi = s.powf(m);
            let sinc = if phi < 1e-4 {
                1.0 - phi * phi / 6.0
            } else {
                phi.sin() / phi
            };
            m * sinc.powf(2.0 * q - 2.0)
        },
        0.0,
        s_max,
        quad_opts(),
    )
    .value
}

/// `∫_0^x (1 + y²)^{-q} dy`.
fn partial_integral(q: f64, x: f64) -> f64 {
    if q == 1.0 {
        return x.atan();
    }
    if q == 1.5 {
        return x / (1.0 + x * x).sqrt();
    }
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let value = if q >= 1.0 {
        integrate(
            |th| th.cos().powf(2.0 * q - 2.0),
            0.0,
            ax.atan(),
            quad_opts(),
        )
        .value
    } else if ax <= 1.0 {
        integrate(|y| (1.0 + y * y).powf(-q), 0.0, ax, quad_opts()).value
    } else {
        half_line_integral(q) - tail_integral(q, (1.0 / ax).atan())
    };
    value.copysign(x)
}

/// Value and first two spatial derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSample {
    pub value: f64,
    pub dx: f64,
    pub dxx: f64,
}

/// Smooth approximation `w(t, x; w-, w+)` of the Burgers rarefaction fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothWave {
    pub w_minus: f64,
    pub w_plus: f64,
    pub q: f64,
    pub k_q: f64,
    amplitude: f64,
    half_mass: f64,
}

impl SmoothWave {
    pub fn new(w_minus: f64, w_plus: f64, q: f64) -> Result<Self> {
        if !(w_minus < w_plus) {
            return Err(Error::Domain(format!(
                "smooth wave needs w- < w+, got {w_minus} >= {w_plus}"
            )));
        }
        let total = normalization_integral(q)?;
        let k_q = kq_constant(q)?;
        Ok(Self {
            w_minus,
            w_plus,
            q,
            k_q,
            amplitude: (w_plus - w_minus) * k_q,
            half_mass: 0.5 * total,
        })
    }

    /// Wave carrying the characteristic speeds `λ± = f'(u±)`.
    pub fn for_riemann(flux: &ConvexFlux, riemann: &RiemannData, q: f64) -> Result<Self> {
        Self::new(flux.prime(riemann.u_minus), flux.prime(riemann.u_plus), q)
    }

    fn midpoint(&self) -> f64 {
        0.5 * (self.w_minus + self.w_plus)
    }

    fn max_speed(&self) -> f64 {
        self.w_minus.abs().max(self.w_plus.abs())
    }

    /// `w0(x)`.
    pub fn initial(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return self.w_plus;
        }
        if x == f64::NEG_INFINITY {
            return self.w_minus;
        }
        (self.midpoint() + self.amplitude * partial_integral(self.q, x))
            .clamp(self.w_minus, self.w_plus)
    }

    /// `w0'(x)`.
    #[inline]
    pub fn initial_prime(&self, x: f64) -> f64 {
        let base = 1.0 + x * x;
        if self.q == 1.0 {
            self.amplitude / base
        } else {
            self.amplitude * base.powf(-self.q)
        }
    }

    /// `w0''(x)`.
    #[inline]
    pub fn initial_second(&self, x: f64) -> f64 {
        let base = 1.0 + x * x;
        if self.q == 1.0 {
            -2.0 * self.amplitude * x / (base * base)
        } else {
            -2.0 * self.q * self.amplitude * x * base.powf(-self.q - 1.0)
        }
    }

    pub fn initial_sample(&self, x: f64) -> WaveSample {
        WaveSample {
            value: self.initial(x),
            dx: self.initial_prime(x),
            dxx: self.initial_second(x),
        }
    }

    /// Fraction of the total variation `w+ - w-` carried by `|x0| > x`.
    pub fn tail_fraction(&self, x: f64) -> f64 {
        1.0 - partial_integral(self.q, x.abs()) / self.half_mass
    }

    /// Foot `x0` of the characteristic through `(t, x)`: the unique root
    /// of `x0 + w0(x0) t = x`.
    pub fn foot(&self, t: f64, x: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("negative time {t}")));
        }
        if t == 0.0 {
            return Ok(x);
        }
        let reach = self.max_speed() * t;
        let (mut lo, mut hi) = (x - reach, x + reach);
        let residual = |x0: f64| x0 + self.initial(x0) * t - x;

        // A fixed-point sweep is nearly exact away from the fan.
        let mut x0 = (x - self.initial(x) * t).clamp(lo, hi);
        let mut last_g = f64::INFINITY;
        for _ in 0..FOOT_MAX_ITER {
            let g = residual(x0);
            if g.abs() <= FOOT_TOL {
                return Ok(x0);
            }
            if g < 0.0 {
                lo = x0;
            } else {
                hi = x0;
            }
            // Newton can cycle across the inflection of the residual; fall
            // back to bisection whenever it stops halving |g|.
            let newton = x0 - g / (1.0 + self.initial_prime(x0) * t);
            let converging = g.abs() <= 0.5 * last_g;
            last_g = g.abs();
            let next = if converging && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == x0 || hi - lo <= 4.0 * f64::EPSILON * x0.abs().max(1.0) {
                // Floating-point resolution of x0 reached.
                return Ok(next);
            }
            x0 = next;
        }
        Err(Error::Convergence {
            what: format!("characteristic foot at (t, x) = ({t}, {x})"),
            iterations: FOOT_MAX_ITER,
        })
    }

    /// `w` and its `x`-derivatives at the point whose characteristic starts
    /// from `x0`; returns the point's position alongside.
    pub fn along_characteristic(&self, t: f64, x0: f64) -> (f64, WaveSample) {
        let w0 = self.initial(x0);
        let stretch = 1.0 + self.initial_prime(x0) * t;
        let sample = WaveSample {
            value: w0,
            dx: self.initial_prime(x0) / stretch,
            dxx: self.initial_second(x0) / (stretch * stretch * stretch),
        };
        (x0 + w0 * t, sample)
    }

    /// `w(t, x)`, `∂x w`, `∂x² w`.
    pub fn eval(&self, t: f64, x: f64) -> Result<WaveSample> {
        let x0 = self.foot(t, x)?;
        Ok(self.along_characteristic(t, x0).1)
    }

    /// Inviscid Burgers rarefaction `w^r(x/t)`.
    pub fn rarefaction(&self, xi: f64) -> f64 {
        xi.clamp(self.w_minus, self.w_plus)
    }
}

/// `w(t, x)` with its first two `x`-derivatives.
pub fn smooth_w(wave: &SmoothWave, t: f64, x: f64) -> Result<WaveSample> {
    wave.eval(t, x)
}

/// `w0(x)`.
pub fn burgers_initial(wave: &SmoothWave, x: f64) -> f64 {
    wave.initial(x)
}

/// Smooth approximation `U = (f')^{-1}(w)` of the rarefaction wave of a
/// convex flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothRarefaction {
    pub flux: ConvexFlux,
    pub riemann: RiemannData,
    pub wave: SmoothWave,
}

impl SmoothRarefaction {
    pub fn new(flux: ConvexFlux, riemann: RiemannData, q: f64) -> Result<Self> {
        let (lo, hi) = riemann.working_interval();
        flux.check_convex(lo, hi)?;
        let wave = SmoothWave::for_riemann(&flux, &riemann, q)?;
        Ok(Self {
            flux,
            riemann,
            wave,
        })
    }

    fn bracket(&self) -> (f64, f64) {
        (self.riemann.u_minus, self.riemann.u_plus)
    }

    /// Maps a sample of `w` to the matching sample of `U`.
    pub fn from_w(&self, w: WaveSample) -> Result<WaveSample> {
        let u = self.flux.prime_inverse(w.value, self.bracket())?;
        let curvature = self.flux.second(u);
        let du = w.dx / curvature;
        let duu = w.dxx / curvature - self.flux.third(u) * w.dx * w.dx / curvature.powi(3);
        Ok(WaveSample {
            value: u,
            dx: du,
            dxx: duu,
        })
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<WaveSample> {
        self.from_w(self.wave.eval(t, x)?)
    }

    /// `U(t, x_i)` and `∂x U(t, x_i)` on a set of nodes.
    pub fn profile(&self, t: f64, nodes: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut values = Vec::with_capacity(nodes.len());
        let mut slopes = Vec::with_capacity(nodes.len());
        for &x in nodes {
            let s = self.eval(t, x)?;
            values.push(s.value);
            slopes.push(s.dx);
        }
        Ok((values, slopes))
    }

    /// Exact rarefaction `u^r(x/t)`.
    pub fn exact(&self, xi: f64) -> f64 {
        exact_rarefaction(&self.flux, &self.riemann, xi)
    }
}

/// `(U, ∂x U)` at `(t, x)`; `wave` must carry `w± = f'(u±)`.
pub fn smooth_u(
    flux: &ConvexFlux,
    riemann: &RiemannData,
    wave: &SmoothWave,
    t: f64,
    x: f64,
) -> Result<(f64, f64)> {
    let w = wave.eval(t, x)?;
    let u = flux.prime_inverse(w.value, (riemann.u_minus, riemann.u_plus))?;
    Ok((u, w.dx / flux.second(u)))
}

/// Entropy solution `u^r(ξ)` of the Riemann problem at `ξ = x/t`.
pub fn exact_rarefaction(flux: &ConvexFlux, riemann: &RiemannData, xi: f64) -> f64 {
    let lambda_minus = flux.prime(riemann.u_minus);
    let lambda_plus = flux.prime(riemann.u_plus);
    if xi <= lambda_minus {
        riemann.u_minus
    } else if xi >= lambda_plus {
        riemann.u_plus
    } else {
        flux.prime_inverse(xi, (riemann.u_minus, riemann.u_plus))
            .expect("xi lies strictly inside the speed range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateField {
    /// Burgers wave `w`.
    W,
    /// Transformed wave `U = (f')^{-1}(w)`.
    U,
}

/// `‖∂x^order (field)(t)‖_{L^r}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateNorm {
    pub order: u8,
    pub r: NormIndex,
}

impl RateNorm {
    pub fn new(order: u8, r: NormIndex) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(Error::Domain(format!(
                "derivative order must be 1 or 2, got {order}"
            )));
        }
        Ok(Self { order, r })
    }

    /// Decay exponent of the upper bound `(1+t)^e`.
    pub fn expected_exponent(&self, q: f64) -> f64 {
        let inv_r = self.r.reciprocal();
        match self.order {
            1 => -1.0 + inv_r,
            k => -1.0 - (k as f64 - 1.0 - inv_r) / (2.0 * q),
        }
    }

    pub fn label(&self) -> String {
        format!("k{}_r{}", self.order, self.r.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub norm: String,
    pub expected_slope: f64,
    pub fit: DecayFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub field: RateField,
    pub q: f64,
    pub times: Vec<f64>,
    pub norms: Vec<RateNorm>,
    /// `values[i][j]`: norm `j` at time `i`.
    pub values: Vec<Vec<f64>>,
    /// Spatial window `[x_lo, x_hi]` used at each time.
    pub windows: Vec<(f64, f64)>,
    pub fit_window: Option<(f64, f64)>,
    pub fits: Vec<RateFit>,
}

impl RateTable {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    pub fn fit_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            field: RateField,
            q: f64,
            fit_window: Option<(f64, f64)>,
            fits: &'a [RateFit],
        }
        serde_json::to_string(&Summary {
            field: self.field,
            q: self.q,
            fit_window: self.fit_window,
            fits: &self.fits,
        })
        .expect("rate summary serializes")
    }

    /// Rows `t, <norm>...` followed by a `#fit-summary` line and the fit
    /// summary as one line of JSON.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for n in &self.norms {
            out.push(',');
            out.push_str(&n.label());
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t:e}"));
            for v in row {
                out.push_str(&format!(",{v:.17e}"));
            }
            out.push('\n');
        }
        out.push_str("#fit-summary\n");
        out.push_str(&self.fit_json());
        out.push('\n');
        out
    }
}

/// Norms of `∂x^k w(t)` (or `∂x^k U(t)`) over all of ℝ, tabulated against
/// time, with log-log slopes fitted over `fit_window`.
///
/// Integrals are taken along characteristics, `x = x0 + w0(x0) t` with
/// `x0 = tan θ`, so the unbounded line becomes a finite `θ` window whose
/// omitted tails carry less than `1e-8` of the fan mass.
pub fn rate_table(
    wave: &SmoothRarefaction,
    field: RateField,
    times: &[f64],
    norms: &[RateNorm],
    fit_window: Option<(f64, f64)>,
) -> Result<RateTable> {
    if times.windows(2).any(|w| !(w[0] < w[1])) || times.first().is_some_and(|&t| !(t > 0.0)) {
        return Err(Error::Domain(
            "rate times must be positive and increasing".into(),
        ));
    }
    let smooth = &wave.wave;
    let foot_max = window_foot(smooth)?;
    let theta_max = foot_max.atan();

    let derivative = |t: f64, x0: f64| -> Result<(f64, WaveSample)> {
        let (x, w) = smooth.along_characteristic(t, x0);
        let sample = match field {
            RateField::W => w,
            RateField::U => wave.from_w(w)?,
        };
        Ok((x, sample))
    };

    let mut values = Vec::with_capacity(times.len());
    let mut windows = Vec::with_capacity(times.len());
    for &t in times {
        let (x_lo, _) = smooth.along_characteristic(t, -foot_max);
        let (x_hi, _) = smooth.along_characteristic(t, foot_max);
        windows.push((x_lo, x_hi));

        let mut row = Vec::with_capacity(norms.len());
        for norm in norms {
            let pick = |s: &WaveSample| if norm.order == 1 { s.dx } else { s.dxx };
            let value = match norm.r {
                NormIndex::Inf => {
                    let g = |th: f64| derivative(t, th.tan()).map(|(_, s)| pick(&s).abs());
                    maximize(g, -theta_max, theta_max)?
                }
                NormIndex::One | NormIndex::Two => {
                    let power = if norm.r == NormIndex::One { 1 } else { 2 };
                    let integrand = |th: f64| {
                        let x0 = th.tan();
                        let jac = (1.0 + smooth.initial_prime(x0) * t) * (1.0 + x0 * x0);
                        match derivative(t, x0) {
                            Ok((_, s)) => pick(&s).abs().powi(power) * jac,
                            Err(_) => f64::NAN,
                        }
                    };
                    let opts = QuadOptions {
                        abs_tol: 1e-16,
                        rel_tol: 1e-11,
                        max_subdivisions: 4000,
                    };
                    let left = integrate(integrand, -theta_max, 0.0, opts);
                    let right = integrate(integrand, 0.0, theta_max, opts);
                    let total = left.value + right.value;
                    if !total.is_finite() {
                        return Err(Error::Convergence {
                            what: format!("norm {} at t = {t}", norm.label()),
                            iterations: left.subdivisions + right.subdivisions,
                        });
                    }
                    if power == 2 {
                        total.sqrt()
                    } else {
                        total
                    }
                }
            };
            row.push(value);
        }
        values.push(row);
    }

    let mut fits = Vec::new();
    if let Some(window) = fit_window {
        for (j, norm) in norms.iter().enumerate() {
            let column: Vec<f64> = values.iter().map(|row| row[j]).collect();
            let fit = decay_rate_fit(times, &column, window)?;
            fits.push(RateFit {
                norm: norm.label(),
                expected_slope: norm.expected_exponent(smooth.q),
                fit,
            });
        }
    }

    Ok(RateTable {
        field,
        q: smooth.q,
        times: times.to_vec(),
        norms: norms.to_vec(),
        values,
        windows,
        fit_window,
        fits,
    })
}

/// Smallest power-of-two foot `X` whose exterior `|x0| > X` carries less
/// than `WINDOW_TAIL` of the fan mass.
fn window_foot(wave: &SmoothWave) -> Result<f64> {
    let mut x = 1.0_f64;
    while x < 1e300 {
        if wave.tail_fraction(x) < WINDOW_TAIL {
            return Ok(x);
        }
        x *= 2.0;
    }
    let captured = 1.0 - wave.tail_fraction(x);
    if captured < WINDOW_CAPTURE {
        return Err(Error::Window { captured });
    }
    Ok(x)
}

/// Maximum of `g` on `[a, b]`: dense sampling, then golden-section search
/// around the best sample.
fn maximize<G: Fn(f64) -> Result<f64>>(g: G, a: f64, b: f64) -> Result<f64> {
    const SAMPLES: usize = 4096;
    let h = (b - a) / SAMPLES as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..=SAMPLES {
        let v = g(a + h * i as f64)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let mut lo = a + h * best.0.saturating_sub(1) as f64;
    let mut hi = (a + h * (best.0 + 1) as f64).min(b);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    for _ in 0..80 {
        if gc > gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - ratio * (hi - lo);
            gc = g(c)?;
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + ratio * (hi - lo);
            gd = g(d)?;
        }
    }
    Ok(best.1.max(gc).max(gd))
}
