use proptest::prelude::*;
use rarelab_core::solver::{face_flux_profile, initial_condition, rhs, Stepper};
use rarelab_core::{
    simulate, ConvexFlux, Integrator, Perturbation, RiemannData, SolverConfig, State,
    ViscosityModel,
};

fn short_config(p: f64, amplitude: f64, width: f64, integrator: Integrator, quartic: bool) -> SolverConfig {
    let flux = if quartic { ConvexFlux::quartic() } else { ConvexFlux::burgers() };
    let mut c = SolverConfig::new(
        flux,
        ViscosityModel::carreau(1.0, p).unwrap(),
        RiemannData::new(-0.5, 0.5).unwrap(),
        1.0,
    )
    .unwrap();
    c.integrator = integrator;
    c.perturbation = Perturbation::Gaussian {
        amplitude,
        center: 0.0,
        width,
    };
    c.snapshot_times = vec![0.25, 0.5];
    c
}

fn integrators() -> impl Strategy<Value = Integrator> {
    prop_oneof![Just(Integrator::Rk2Ssp), Just(Integrator::Rk3Ssp)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_balance_per_step_and_per_run(
        p in 0.4f64..2.5,
        amplitude in -0.5f64..0.5,
        width in 0.5f64..2.5,
        integrator in integrators(),
        quartic in any::<bool>(),
    ) {
        let c = short_config(p, amplitude, width, integrator, quartic);
        let out = simulate(&c).unwrap();
        prop_assert!(out.mass.max_step_residual < 1e-12, "{:?}", out.mass);
        prop_assert!(out.mass.imbalance().abs() < 1e-8, "{:?}", out.mass);
    }

    #[test]
    fn boundary_pinned_and_runs_deterministic(
        p in 0.4f64..2.5,
        amplitude in -0.5f64..0.5,
        integrator in integrators(),
    ) {
        let c = short_config(p, amplitude, 1.5, integrator, false);
        let a = simulate(&c).unwrap();
        let b = simulate(&c).unwrap();
        prop_assert_eq!(&a.snapshots, &b.snapshots);
        prop_assert_eq!(&a.records, &b.records);
        let n = c.grid.n_cells;
        for s in &a.snapshots {
            prop_assert_eq!(s.values[0].to_bits(), (-0.5f64).to_bits());
            prop_assert_eq!(s.values[n].to_bits(), 0.5f64.to_bits());
        }
        let times: Vec<f64> = a.snapshots.iter().map(|s| s.t).collect();
        prop_assert_eq!(times, vec![0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn rhs_telescopes_for_arbitrary_states(
        values in prop::collection::vec(-0.5f64..0.5, 20..60),
        p in 0.3f64..3.0,
    ) {
        let mut c = short_config(p, 0.0, 1.0, Integrator::Rk2Ssp, false);
        c.grid = rarelab_core::Grid1D::new(-1.0, 1.0, values.len() + 1).unwrap();
        let mut all = vec![-0.5];
        all.extend(values);
        all.push(0.5);
        let state = State { t: 0.0, values: all };
        let r = rhs(&state, &c);
        let faces = face_flux_profile(&state, &c);
        let total: f64 = r.iter().sum::<f64>() * c.grid.dx;
        let expected = -(faces[faces.len() - 1] - faces[0]);
        prop_assert!((total - expected).abs() < 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn random_smooth_perturbation_reproducible(seed in any::<u64>()) {
        let mut c = short_config(1.0, 0.0, 1.0, Integrator::Rk2Ssp, false);
        c.perturbation = Perturbation::RandomSmooth { amplitude: 0.2, seed, correlation: 1.0 };
        let a = initial_condition(&c).unwrap();
        prop_assert_eq!(&a, &initial_condition(&c).unwrap());
    }
}

/// The monotone scheme keeps monotone data monotone.
#[test]
fn monotone_data_stays_monotone() {
    for p in [0.5, 1.0, 2.0] {
        let mut c = SolverConfig::new(
            ConvexFlux::burgers(),
            ViscosityModel::carreau(1.0, p).unwrap(),
            RiemannData::new(-0.5, 0.5).unwrap(),
            10.0,
        )
        .unwrap();
        c.snapshot_times = (1..10).map(f64::from).collect();
        let out = simulate(&c).unwrap();
        for s in &out.snapshots {
            for w in s.values.windows(2) {
                assert!(w[1] >= w[0], "p = {p}, t = {}", s.t);
            }
        }
    }
}

#[test]
fn constant_state_unchanged_after_many_steps() {
    let c = short_config(0.6, 0.0, 1.0, Integrator::Rk3Ssp, false);
    let n = c.grid.n_cells;
    // the pinned ends differ, so only a window far from them is constant
    // over 50 steps; diffusion reaches at most a few cells per step
    let mut state = State {
        t: 0.0,
        values: vec![0.1; n + 1],
    };
    state.values[0] = -0.5;
    state.values[n] = 0.5;
    let mut stepper = Stepper::new(&c);
    for _ in 0..50 {
        stepper.advance(&mut state, 1.0).unwrap();
    }
    assert!(state.values[200..n - 200].iter().all(|&v| v == 0.1));
}
