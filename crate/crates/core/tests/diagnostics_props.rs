use proptest::prelude::*;
use rarelab_core::diagnostics::{
    derivative, lemma42_check, lp_norm, q_functional, sobolev_check, sup_abs,
};
use rarelab_core::NormIndex;

fn sample(f: impl Fn(f64) -> f64, half_width: f64, n: usize) -> (Vec<f64>, f64) {
    let dx = 2.0 * half_width / n as f64;
    ((0..=n).map(|i| f(-half_width + dx * i as f64)).collect(), dx)
}

fn corpus() -> Vec<(&'static str, Vec<f64>, f64)> {
    let mut out = Vec::new();
    for (s, a) in [(0.5, 1.0), (2.0, 0.3), (5.0, 2.0)] {
        let (g, dx) = sample(|x| a * (-x * x / (2.0 * s * s)).exp(), 60.0, 6000);
        out.push(("gaussian", g, dx));
    }
    for s in [0.3, 1.0, 3.0] {
        // sech² tails drop below 1e-10 by x = 60 for these widths
        let (g, dx) = sample(|x| 1.0 / (x / s).cosh(), 90.0, 9000);
        out.push(("sech", g, dx));
    }
    for r in [0.5, 2.0, 10.0] {
        let bump = move |x: f64| {
            let y = x / r;
            if y.abs() < 1.0 {
                (-1.0 / (1.0 - y * y)).exp()
            } else {
                0.0
            }
        };
        let (g, dx) = sample(bump, 2.0 * r, 4000);
        out.push(("bump", g, dx));
    }
    out
}

#[test]
fn sobolev_holds_on_analytic_corpus() {
    for (name, g, dx) in corpus() {
        let check = sobolev_check(&g, dx).unwrap();
        assert!(check.ok, "{name}: {check:?}");
        // the inequality is strict for these profiles, not only within slack
        assert!(check.lhs < check.rhs, "{name}: {check:?}");
    }
}

/// Gaussian: sup = a, ‖g‖² = a² s √π, ‖g'‖² = a² √π / (2 s).
#[test]
fn sobolev_sides_match_closed_form_for_gaussian() {
    let (a, s) = (0.7, 1.3);
    let (g, dx) = sample(|x| a * (-x * x / (2.0 * s * s)).exp(), 40.0, 8000);
    let check = sobolev_check(&g, dx).unwrap();
    let pi_sqrt = std::f64::consts::PI.sqrt();
    let l2 = (a * a * s * pi_sqrt).sqrt();
    let h1 = (a * a * pi_sqrt / (2.0 * s)).sqrt();
    let expected_rhs = 2f64.sqrt() * (l2 * h1).sqrt();
    assert!((check.lhs - a).abs() < 1e-12);
    assert!((check.rhs - expected_rhs).abs() < 1e-5 * expected_rhs);
}

#[test]
fn non_decaying_function_is_rejected() {
    let g = vec![1.0; 50];
    assert!(sobolev_check(&g, 0.1).is_err());
}

/// Dilations `g(λx)`, `λ ∈ {1/4, 1, 4}`, of fixed profiles.
#[test]
fn lemma42_constant_is_stable_across_scalings() {
    let profiles: [(&str, fn(f64) -> f64); 2] = [
        ("gaussian", |x| (-x * x / 2.0).exp()),
        ("sech", |x| 1.0 / x.cosh()),
    ];
    for p in [0.5, 0.7] {
        for (name, g) in profiles {
            let cs: Vec<f64> = [0.25, 1.0, 4.0]
                .iter()
                .map(|&lambda| {
                    let half = 40.0 / lambda;
                    let (samples, dx) = sample(|x| g(lambda * x), half, 8000);
                    lemma42_check(&samples, p, dx).unwrap().fitted_c
                })
                .collect();
            let max = cs.iter().copied().fold(0.0, f64::max);
            let min = cs.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0 && max / min < 10.0, "p = {p}, {name}: {cs:?}");
        }
    }
}

#[test]
fn lemma42_rejects_p_outside_unit_interval() {
    let (g, dx) = sample(|x| (-x * x).exp(), 10.0, 100);
    assert!(lemma42_check(&g, 1.0, dx).is_err());
    assert!(lemma42_check(&g, 0.0, dx).is_err());
}

proptest! {
    #[test]
    fn q_functional_at_p1_is_squared_l2(v in prop::collection::vec(-5.0f64..5.0, 3..200), dx in 1e-3f64..1.0) {
        let q = q_functional(&v, 1.0, dx);
        let l2 = lp_norm(&v, NormIndex::Two, dx).powi(2);
        prop_assert!((q - l2).abs() <= 1e-13 * l2.max(1e-300));
    }

    #[test]
    fn q_functional_ordered_in_p(v in prop::collection::vec(-5.0f64..5.0, 3..100), p in 0.1f64..1.0) {
        // ⟨v⟩^{p-1} ≤ 1 for p < 1 and ≥ 1 for p > 1
        let q1 = q_functional(&v, 1.0, 0.1);
        prop_assert!(q_functional(&v, p, 0.1) <= q1 * (1.0 + 1e-14));
        prop_assert!(q_functional(&v, 1.0 + p, 0.1) >= q1 * (1.0 - 1e-14));
    }

    #[test]
    fn sobolev_holds_for_random_bump_sums(
        centers in prop::collection::vec(-10.0f64..10.0, 1..6),
        weights in prop::collection::vec(-2.0f64..2.0, 6),
        width in 0.3f64..3.0,
    ) {
        let f = |x: f64| -> f64 {
            centers.iter().zip(&weights).map(|(c, w)| w * (-(x - c).powi(2) / (2.0 * width * width)).exp()).sum()
        };
        let (g, dx) = sample(f, 40.0, 4000);
        prop_assume!(sup_abs(&g) > 1e-6);
        let check = sobolev_check(&g, dx).unwrap();
        prop_assert!(check.ok, "{:?}", check);
    }

    #[test]
    fn derivative_exact_on_quadratics(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let (g, dx) = sample(|x| a * x * x + b * x + c, 2.0, 40);
        let d = derivative(&g, dx);
        for (i, v) in d.iter().enumerate() {
            let x = -2.0 + dx * i as f64;
            prop_assert!((v - (2.0 * a * x + b)).abs() < 1e-11);
        }
    }
}
