use pftg::diagnostics::energy_balance_residual;
use pftg::io::{read_snapshot, write_snapshot};
use pftg::solver::{run, DiagnosticsHooks};
use pftg::sweep::{run_sweep, well_prepared_initial, Geometry, SweepPlan};
use pftg::{Field, Grid, Interpolation, ModelSpec, Potential, Proliferation, State, StepConfig};

fn stripe_state(spec: &ModelSpec, n: usize, sigma0: f64) -> State {
    let g = Grid::new_1d(n, 1.0).unwrap();
    let phi = well_prepared_initial(&Geometry::Stripe { position: 0.4 }, spec, g).unwrap();
    State::initial(phi, Field::constant(g, sigma0), spec).unwrap()
}

#[test]
fn problem_p_conserves_the_sum_in_1d() {
    let eps: f64 = 0.05;
    let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::quadratic(1.0), eps).unwrap();
    let traj = run(stripe_state(&spec, 200, 0.6), &spec, &StepConfig::new(0.5 * eps.powi(3)), 200, DiagnosticsHooks::default())
        .unwrap();
    assert!(traj.trace.mass_drift() < 1e-12, "{}", traj.trace.mass_drift());
    // the nutrient is consumed where the tumour grows, so [φ] has moved
    let m = &traj.trace.mass_phi;
    assert!((m[m.len() - 1] - m[0]).abs() > 1e-6);
}

#[test]
fn problem_h_mass_is_monotone_and_sigma_boxed() {
    let eps: f64 = 0.05;
    let spec = ModelSpec::problem_h(Potential::quartic(), Interpolation::smooth(), eps).unwrap();
    let dt = 0.5 * eps.powi(3);
    let traj = run(stripe_state(&spec, 200, 1.0), &spec, &StepConfig::new(dt), 200, DiagnosticsHooks::default()).unwrap();
    let tr = &traj.trace;
    for k in 1..tr.len() {
        let drop = tr.mass_phi[k - 1] - tr.mass_phi[k];
        assert!(drop >= -1e-14 && drop <= dt * (1.0 + 1e-9), "step {k}: {drop}");
    }
    assert!(tr.sigma_min.iter().all(|s| *s >= -1e-9));
    assert!(tr.sigma_max.iter().all(|s| *s <= 1.0 + 1e-9));
}

#[test]
fn recomputed_balance_matches_recorded_residual() {
    let eps: f64 = 0.05;
    let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::linear(1.0), eps).unwrap();
    let traj = run(stripe_state(&spec, 120, 0.8), &spec, &StepConfig::new(1e-4), 30, DiagnosticsHooks::default()).unwrap();
    let recomputed = energy_balance_residual(&traj.trace, spec.problem());
    assert_eq!(recomputed.len(), traj.trace.len());
    for (a, b) in recomputed.iter().zip(&traj.trace.balance_residual) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn snapshot_round_trip_is_bitwise() {
    let spec = ModelSpec::problem_p(Potential::quartic(), Proliferation::zero(), 0.05).unwrap();
    let g = Grid::new_2d(48, 40, 1.0, 0.8).unwrap();
    let phi = well_prepared_initial(&Geometry::Circle { center: (0.5, 0.4), radius: 0.15 }, &spec, g).unwrap();
    let st = State::initial(phi, Field::constant(g, 0.3), &spec).unwrap();
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &st, 0.05).unwrap();
    let back = read_snapshot(buf.as_slice()).unwrap();
    assert_eq!(back.epsilon, 0.05);
    assert_eq!(back.state.phi, st.phi);
    assert_eq!(back.state.sigma, st.sigma);
    assert_eq!(back.state.mu, st.mu);
    assert!(read_snapshot(&buf[..buf.len() - 8]).is_err());
}

#[test]
fn stripe_sweep_in_1d() {
    let base = ModelSpec::problem_p(Potential::quartic(), Proliferation::zero(), 0.04)
        .unwrap()
        .with_horizon(1e-3)
        .unwrap();
    let mut plan = SweepPlan::new(base, vec![0.04, 0.02, 0.01], Geometry::Stripe { position: 0.5 });
    plan.dim = 1;
    let report = run_sweep(&plan).unwrap();
    let rows: Vec<_> = report.rows().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ny == 1 && r.mass_drift < 1e-12));
    // a flat interface sits at equilibrium, so w-distance is pure profile width
    let order = report.w_distance_order().unwrap();
    assert!(order > 0.9, "{order}");
}
