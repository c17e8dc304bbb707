use rarelab_core::diagnostics::deviation;
use rarelab_core::{
    simulate, ConvexFlux, Grid1D, Perturbation, RiemannData, SolverConfig, ViscosityModel,
};

fn burgers(p: f64, t_end: f64) -> SolverConfig {
    SolverConfig::new(
        ConvexFlux::burgers(),
        ViscosityModel::carreau(1.0, p).unwrap(),
        RiemannData::new(-0.5, 0.5).unwrap(),
        t_end,
    )
    .unwrap()
}

/// Cole–Hopf solution of `u_t + u u_x = μ u_xx` from
/// `u0(y) = atan(y)/π`, whose primitive is `(y atan y - ln(1+y²)/2)/π`:
/// `u = ∫ (x-y)/t e^{-G} dy / ∫ e^{-G} dy`,
/// `G = (x-y)²/(4μt) + F(y)/(2μ)`.
fn cole_hopf(mu: f64, t: f64, x: f64) -> f64 {
    let primitive = |y: f64| (y * y.atan() - 0.5 * (1.0 + y * y).ln()) / std::f64::consts::PI;
    let g = |y: f64| (x - y).powi(2) / (4.0 * mu * t) + primitive(y) / (2.0 * mu);
    let (a, b) = (x - 300.0, x + 300.0);
    let n = 120_000;
    let h = (b - a) / n as f64;
    let g_min = (0..=n).map(|i| g(a + h * i as f64)).fold(f64::INFINITY, f64::min);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        let y = a + h * i as f64;
        let weight = (g_min - g(y)).exp();
        num += (x - y) / t * weight;
        den += weight;
    }
    num / den
}

#[test]
fn newtonian_run_matches_cole_hopf() {
    let mut c = burgers(1.0, 50.0);
    c.grid = Grid1D::new(c.grid.x_min, c.grid.x_max, 4000).unwrap();
    let out = simulate(&c).unwrap();
    let last = out.snapshots.last().unwrap();
    // Stay clear of the pinned ends, where the truncated problem differs
    // from the whole-line one.
    let mut worst = 0.0f64;
    for i in (0..=c.grid.n_cells).step_by(20) {
        let x = c.grid.node(i);
        if x.abs() > 35.0 {
            continue;
        }
        worst = worst.max((last.values[i] - cole_hopf(1.0, 50.0, x)).abs());
    }
    assert!(worst < 5e-3, "sup |u - u_exact| = {worst}");

    // The deviation from the inviscid smooth wave is the physical viscous
    // correction, far larger than the discretization error.
    let dev = deviation(last, &c.grid, &out.wave).unwrap();
    let sup = dev.phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(sup > 10.0 * worst);
}

#[test]
fn gaussian_run_completes_for_p_0_8() {
    let mut c = burgers(0.8, 200.0);
    c.perturbation = Perturbation::Gaussian {
        amplitude: 0.3,
        center: 0.0,
        width: 2.0,
    };
    c.snapshot_times = vec![20.0, 100.0];
    let out = simulate(&c).unwrap();
    let dev: Vec<f64> = out.records.iter().filter_map(|r| r.sup_dev_exact).collect();
    assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
}
