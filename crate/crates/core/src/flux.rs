//! Convective flux `f` and viscous flux `σ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Residual target; the inverse contract is |f'(u) - xi| < 1e-12.
const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxKind {
    /// `f(u) = u²/2`
    Burgers,
    /// `f(u) = u²/2 + u⁴/12`
    QuarticRegularized,
    /// Polynomial with even degree and positive leading coefficient.
    Polynomial,
}

/// Strictly convex polynomial flux. Coefficients are in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexFlux {
    kind: FluxKind,
    coeffs: Vec<f64>,
}

impl ConvexFlux {
    pub fn burgers() -> Self {
        Self {
            kind: FluxKind::Burgers,
            coeffs: vec![0.0, 0.0, 0.5],
        }
    }

    pub fn quartic() -> Self {
        Self {
            kind: FluxKind::QuarticRegularized,
            coeffs: vec![0.0, 0.0, 0.5, 0.0, 1.0 / 12.0],
        }
    }

    /// General polynomial flux. Only the degree and the sign of the leading
    /// coefficient are checked here; convexity on a working interval is
    /// checked by [`ConvexFlux::check_convex`].
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let degree = coeffs.len().saturating_sub(1);
        if degree < 2 || degree % 2 != 0 {
            return Err(Error::Domain(format!(
                "flux polynomial must have even degree >= 2, got degree {degree}"
            )));
        }
        if coeffs[degree] <= 0.0 || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(
                "flux polynomial needs a finite, positive leading coefficient".into(),
            ));
        }
        Ok(Self {
            kind: FluxKind::Polynomial,
            coeffs,
        })
    }

    pub fn kind(&self) -> FluxKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Burgers => 0.5 * u * u,
            FluxKind::QuarticRegularized => {
                let u2 = u * u;
                u2 * (0.5 + u2 / 12.0)
            }
            FluxKind::Polynomial => horner(&self.coeffs, u),
        }
    }

    /// Characteristic speed `λ(u) = f'(u)`.
    #[inline]
    pub fn prime(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Burgers => u,
            FluxKind::QuarticRegularized => u + u * u * u / 3.0,
            FluxKind::Polynomial => derivative_horner(&self.coeffs, 1, u),
        }
    }

    #[inline]
    pub fn second(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Burgers => 1.0,
            FluxKind::QuarticRegularized => 1.0 + u * u,
            FluxKind::Polynomial => derivative_horner(&self.coeffs, 2, u),
        }
    }

    #[inline]
    pub fn third(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Burgers => 0.0,
            FluxKind::QuarticRegularized => 2.0 * u,
            FluxKind::Polynomial => derivative_horner(&self.coeffs, 3, u),
        }
    }

    /// Samples `f''` on `[lo, hi]` and rejects the flux if it is not
    /// strictly positive everywhere sampled.
    pub fn check_convex(&self, lo: f64, hi: f64) -> Result<()> {
        const SAMPLES: usize = 1000;
        for i in 0..=SAMPLES {
            let u = lo + (hi - lo) * i as f64 / SAMPLES as f64;
            let curvature = self.second(u);
            if curvature.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::Domain(format!(
                    "flux is not strictly convex: f''({u}) = {curvature}"
                )));
            }
        }
        Ok(())
    }

    /// Solves `f'(u) = xi` for `u` in `bracket` by Newton's method,
    /// falling back to bisection whenever a step leaves the bracket.
    pub fn prime_inverse(&self, xi: f64, bracket: (f64, f64)) -> Result<f64> {
        let (mut lo, mut hi) = bracket;
        let (f_lo, f_hi) = (self.prime(lo), self.prime(hi));
        if !(f_lo <= xi && xi <= f_hi) {
            return Err(Error::Bracket {
                target: xi,
                lo: f_lo,
                hi: f_hi,
            });
        }
        if self.kind == FluxKind::Burgers {
            return Ok(xi);
        }
        if f_lo == xi {
            return Ok(lo);
        }
        if f_hi == xi {
            return Ok(hi);
        }

        let mut u = lo + (hi - lo) * (xi - f_lo) / (f_hi - f_lo);
        for _ in 0..NEWTON_MAX_ITER {
            let residual = self.prime(u) - xi;
            if residual.abs() < NEWTON_TOL {
                return Ok(u);
            }
            if residual < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let newton = u - residual / self.second(u);
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == u || hi - lo <= f64::EPSILON * u.abs().max(1.0) {
                return Ok(next);
            }
            u = next;
        }
        // Bisection has shrunk the bracket far below the tolerance by now.
        Ok(u)
    }
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

fn derivative_horner(coeffs: &[f64], order: usize, u: f64) -> f64 {
    let mut acc = 0.0;
    for (power, &c) in coeffs.iter().enumerate().skip(order).rev() {
        let falling: f64 = ((power - order + 1)..=power).map(|k| k as f64).product();
        acc = acc * u + c * falling;
    }
    acc
}

/// Evaluation contract for a viscous flux `σ(v)` with `σ(0) = 0`, `σ' > 0`.
pub trait ViscousFlux {
    fn sigma(&self, v: f64) -> f64;
    fn sigma_prime(&self, v: f64) -> Result<f64>;
    /// Large-gradient growth exponent: `|σ(v)| ~ |v|^p`.
    fn exponent(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViscosityForm {
    /// `σ(v) = μ (1 + v²)^{(p-1)/2} v`
    Carreau,
    /// `σ(v) = μ |v|^{p-1} v` (Ostwald-de Waele)
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscosityModel {
    pub form: ViscosityForm,
    pub mu: f64,
    pub p: f64,
}

impl ViscosityModel {
    pub fn new(form: ViscosityForm, mu: f64, p: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!("p must be positive, got {p}")));
        }
        Ok(Self { form, mu, p })
    }

    pub fn carreau(mu: f64, p: f64) -> Result<Self> {
        Self::new(ViscosityForm::Carreau, mu, p)
    }

    pub fn power_law(mu: f64, p: f64) -> Result<Self> {
        Self::new(ViscosityForm::PowerLaw, mu, p)
    }

    /// Power law with `p < 1` has `σ'(0) = ∞`.
    pub fn is_degenerate(&self) -> bool {
        self.form == ViscosityForm::PowerLaw && self.p < 1.0
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        match self.form {
            ViscosityForm::Carreau => {
                if self.p == 1.0 {
                    self.mu * v
                } else {
                    self.mu * (1.0 + v * v).powf(0.5 * (self.p - 1.0)) * v
                }
            }
            ViscosityForm::PowerLaw => {
                if v == 0.0 {
                    0.0
                } else if self.p == 1.0 {
                    self.mu * v
                } else {
                    self.mu * v.abs().powf(self.p - 1.0) * v
                }
            }
        }
    }

    pub fn derivative(&self, v: f64) -> Result<f64> {
        match self.form {
            ViscosityForm::Carreau => Ok(self.carreau_prime(v)),
            ViscosityForm::PowerLaw => {
                if self.p == 1.0 {
                    Ok(self.mu)
                } else if v == 0.0 {
                    if self.p < 1.0 {
                        Err(Error::Degenerate { v, p: self.p })
                    } else {
                        Ok(0.0)
                    }
                } else {
                    Ok(self.mu * self.p * v.abs().powf(self.p - 1.0))
                }
            }
        }
    }

    #[inline]
    fn carreau_prime(&self, v: f64) -> f64 {
        if self.p == 1.0 {
            return self.mu;
        }
        let v2 = v * v;
        self.mu * (1.0 + v2).powf(0.5 * (self.p - 3.0)) * (1.0 + self.p * v2)
    }

    /// `max σ'(v)` over gradients with `min_abs ≤ |v| ≤ max_abs`.
    ///
    /// Both built-in forms have `σ'` monotone in `|v|` (increasing for
    /// `p > 1`, decreasing for `p < 1`), so the maximum sits at one end.
    pub fn derivative_max(&self, min_abs: f64, max_abs: f64) -> Result<f64> {
        if self.p == 1.0 {
            return Ok(self.mu);
        }
        let v = if self.p > 1.0 { max_abs } else { min_abs };
        self.derivative(v)
    }
}

impl ViscousFlux for ViscosityModel {
    fn sigma(&self, v: f64) -> f64 {
        self.eval(v)
    }

    fn sigma_prime(&self, v: f64) -> Result<f64> {
        self.derivative(v)
    }

    fn exponent(&self) -> f64 {
        self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burgers_values() {
        let f = ConvexFlux::burgers();
        assert_eq!(f.value(1.0), 0.5);
        assert_eq!(f.value(0.0), 0.0);
        assert_eq!(f.value(-2.0), 2.0);
        assert_eq!(f.prime(0.5), 0.5);
        assert_eq!(f.prime(0.0), 0.0);
    }

    #[test]
    fn burgers_inverse_is_identity() {
        let f = ConvexFlux::burgers();
        assert_eq!(f.prime_inverse(0.3, (-1.0, 1.0)).unwrap(), 0.3);
        assert_eq!(f.prime_inverse(0.0, (-1.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn quartic_inverse_round_trip() {
        let f = ConvexFlux::quartic();
        let xi = f.prime(0.7);
        let u = f.prime_inverse(xi, (-2.0, 2.0)).unwrap();
        assert!((u - 0.7).abs() < 1e-12);
        assert!((f.prime(u) - xi).abs() < 1e-12);
    }

    #[test]
    fn inverse_outside_bracket() {
        let f = ConvexFlux::quartic();
        let err = f.prime_inverse(10.0, (-1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
        let err = ConvexFlux::burgers()
            .prime_inverse(-1.5, (-1.0, 1.0))
            .unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }

    #[test]
    fn polynomial_matches_quartic() {
        let poly = ConvexFlux::polynomial(vec![0.0, 0.0, 0.5, 0.0, 1.0 / 12.0]).unwrap();
        let quartic = ConvexFlux::quartic();
        for &u in &[-1.3, -0.2, 0.0, 0.4, 2.1] {
            assert!((poly.value(u) - quartic.value(u)).abs() < 1e-14);
            assert!((poly.prime(u) - quartic.prime(u)).abs() < 1e-14);
            assert!((poly.second(u) - quartic.second(u)).abs() < 1e-14);
            assert!((poly.third(u) - quartic.third(u)).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_rejects_odd_or_negative_leading() {
        assert!(ConvexFlux::polynomial(vec![0.0, 1.0, 0.0, 1.0]).is_err());
        assert!(ConvexFlux::polynomial(vec![0.0, 0.0, -1.0]).is_err());
        assert!(ConvexFlux::polynomial(vec![1.0]).is_err());
        // trailing zeros are trimmed before the degree check
        assert!(ConvexFlux::polynomial(vec![0.0, 0.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn convexity_check_catches_inflection() {
        // f = u^4/12 - u^2/2 has f'' = u^2 - 1 < 0 near the origin
        let f = ConvexFlux::polynomial(vec![0.0, 0.0, -0.5, 0.0, 1.0 / 12.0]).unwrap();
        assert!(f.check_convex(2.0, 3.0).is_ok());
        assert!(f.check_convex(-1.5, 1.5).is_err());
    }

    #[test]
    fn sigma_examples() {
        let newtonian = ViscosityModel::carreau(1.0, 1.0).unwrap();
        assert_eq!(newtonian.eval(3.0), 3.0);
        assert_eq!(newtonian.derivative(-7.5).unwrap(), 1.0);

        let shear_thinning = ViscosityModel::carreau(1.0, 0.5).unwrap();
        assert!((shear_thinning.eval(1.0) - 2f64.powf(-0.25)).abs() < 1e-15);
        assert_eq!(shear_thinning.derivative(0.0).unwrap(), 1.0);

        let power = ViscosityModel::power_law(2.0, 2.0).unwrap();
        assert_eq!(power.eval(-3.0), -18.0);
    }

    #[test]
    fn power_law_degenerate_derivative() {
        let m = ViscosityModel::power_law(1.0, 0.6).unwrap();
        assert!(m.is_degenerate());
        assert_eq!(m.eval(0.0), 0.0);
        assert!(matches!(m.derivative(0.0), Err(Error::Degenerate { .. })));
        assert!(m.derivative(0.5).unwrap() > 0.0);
    }

    #[test]
    fn model_rejects_non_positive_parameters() {
        assert!(ViscosityModel::carreau(1.0, 0.0).is_err());
        assert!(ViscosityModel::carreau(0.0, 1.0).is_err());
        assert!(ViscosityModel::power_law(1.0, -2.0).is_err());
    }

    #[test]
    fn derivative_max_matches_brute_force() {
        for &p in &[0.3, 0.6, 1.0, 1.5, 2.5] {
            let m = ViscosityModel::carreau(1.3, p).unwrap();
            let brute = (0..=2000)
                .map(|i| m.derivative(0.2 + 3.0 * i as f64 / 2000.0).unwrap())
                .fold(f64::MIN, f64::max);
            let fast = m.derivative_max(0.2, 3.2).unwrap();
            assert!((brute - fast).abs() <= 1e-12 * fast, "p={p}");
        }
    }

    #[test]
    fn carreau_p06_derivative_bounded_by_mu() {
        let m = ViscosityModel::carreau(1.0, 0.6).unwrap();
        for i in 0..1000 {
            let v = -50.0 + 0.1 * i as f64;
            assert!(m.derivative(v).unwrap() <= 1.0);
        }
    }
}
