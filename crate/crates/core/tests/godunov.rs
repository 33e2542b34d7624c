use wavefront::compare::{l1_compare, tracker_vs_godunov, Snapshot};
use wavefront::fv::FvSolver;
use wavefront::scenario::{Scenario, DEMO};
use wavefront::{ControlSignal, FluxModel, StepFunction};

fn shock_distance(dx: f64) -> f64 {
    let m = FluxModel::greenshields(1.0, 1.0, 0.75).unwrap();
    let rho0 = StepFunction::new(vec![0.0], vec![0.2, 0.6]).unwrap();
    // The AV starts outside the domain, so the scheme is plain Godunov.
    let mut fv = FvSolver::new(&m, &rho0, &ControlSignal::constant(1.0), 10.0, (-1.0, 1.0), dx).unwrap();
    fv.run(1.0, 0.9).unwrap();
    assert!(fv.cap_log().is_empty());
    // Exact solution: the shock moves at 1 − 0.2 − 0.6 = 0.2.
    let exact = StepFunction::new(vec![0.2], vec![0.2, 0.6]).unwrap();
    fv.profile().l1_distance(&exact, -1.0, 1.0)
}

#[test]
fn lwr_shock_error_is_first_order() {
    let d: Vec<f64> = [4e-3, 2e-3, 1e-3].iter().map(|&dx| shock_distance(dx)).collect();
    for (dist, dx) in d.iter().zip([4e-3, 2e-3, 1e-3]) {
        assert!(*dist < 2.0 * dx, "distance {dist} at dx {dx}");
    }
    assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
}

#[test]
fn refinement_against_tracker_is_monotone_on_demo() {
    let sc = Scenario::parse(DEMO).unwrap();
    let d: Vec<f64> = [(4, 4e-3), (5, 2e-3), (6, 1e-3)]
        .iter()
        .map(|&(nu, dx)| tracker_vs_godunov(&sc, nu, dx, 0.9).unwrap())
        .collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn snapshots_from_different_scenarios_do_not_compare() {
    let a = Scenario::parse(DEMO).unwrap();
    let b = Scenario::parse(&DEMO.replace("y0 = 0.0", "y0 = 0.5")).unwrap();
    let h = a.solve().unwrap();
    let mut fv = FvSolver::new(
        &b.model().unwrap(),
        &b.initial_profile().unwrap(),
        &b.control_signal().unwrap(),
        b.y0,
        (-5.0, 5.0),
        1e-2,
    )
    .unwrap();
    fv.run(1.0, 0.9).unwrap();
    let ours = Snapshot::from_history(&h, 1.0, &a.hash()).unwrap();
    assert!(l1_compare(&ours, &fv.snapshot(&b.hash())).is_err());
    assert!(l1_compare(&ours, &fv.snapshot(&a.hash())).is_ok());
}

#[test]
fn constrained_run_holds_back_mass() {
    let sc = Scenario::parse(DEMO).unwrap();
    let mut fv = FvSolver::new(
        &sc.model().unwrap(),
        &sc.initial_profile().unwrap(),
        &sc.control_signal().unwrap(),
        sc.y0,
        (-6.0, 6.0),
        2e-3,
    )
    .unwrap();
    let m0 = fv.mass();
    fv.run(sc.t_end, 0.9).unwrap();
    assert!(!fv.cap_log().is_empty());
    assert!(fv.cap_log().iter().all(|c| c.cap < c.godunov && c.dt > 0.0));
    assert!((fv.mass() - m0 - fv.boundary_inflow()).abs() < 1e-11);
}
