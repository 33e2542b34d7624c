use wavefront::scenario::Scenario;
use wavefront::tracker::{simulate, validate_solution, AvMode, EventKind, NextEvent, Tracker};
use wavefront::{ControlSignal, FluxModel, Grids, StepFunction};

fn gs() -> FluxModel {
    FluxModel::greenshields(1.0, 1.0, 0.75).unwrap()
}

const WORKED: &str = "flux = \"greenshields\"\nR = 1.0\nV = 1.0\nalpha = 0.75\nnu = 4\n\
rho0 = [[-1.0, 0.4], [0.0, 0.6]]\nu = [[0.0, 0.1]]\ny0 = 0.0\nt_end = 1.0\n";

#[test]
fn worked_datum_produces_three_waves_at_grid_speeds() {
    let sc = Scenario::parse(WORKED).unwrap();
    let grids = sc.grids().unwrap();
    let control = grids.quantize_control(&sc.control_signal().unwrap());
    let rho0 = grids.quantize_profile(&sc.initial_profile().unwrap()).unwrap();
    let mut tracker = Tracker::init(grids.clone(), &rho0, &control, 0.0).unwrap();
    assert_eq!(tracker.wave_count(), 3);
    // All three waves diverge, so nothing ever happens.
    assert!(tracker.next_event().is_none());
    tracker.run(1.0).unwrap();
    let h = tracker.history();

    let m = gs();
    let q = control.value_at(0.0);
    let (l, r) = (rho0.value_at(-0.5), rho0.value_at(0.5));
    let g = m.geometry_at(q).unwrap();
    assert_eq!(h.av.len(), 1);
    assert_eq!(h.av[0].mode, AvMode::Undercompressive);
    assert_eq!(h.av[0].speed, q);

    // Greenshields shock speed is 1 − ρ_l − ρ_r.
    let mut positions: Vec<f64> = h
        .fronts
        .iter()
        .filter(|f| f.alive_at(1.0))
        .map(|f| f.position(1.0))
        .collect();
    positions.sort_by(f64::total_cmp);
    let expected = [1.0 - l - g.hat_rho, 1.0 - g.check_rho - r];
    assert_eq!(positions.len(), 2);
    for (p, e) in positions.iter().zip(expected) {
        assert!((p - e).abs() < 1e-12, "{p} vs {e}");
    }
    assert!((h.av_position(1.0).unwrap() - q).abs() < 1e-12);

    // Behind the AV the density is ρ̂, ahead of it ρ̌.
    let s = h
        .sample_density(1.0, &[0.5 * (expected[0] + q), 0.5 * (q + expected[1])])
        .unwrap();
    assert!((s[0] - g.hat_rho).abs() < 1e-12);
    assert!((s[1] - g.check_rho).abs() < 1e-12);
    assert!(validate_solution(&h, 500).is_clean());
}

#[test]
fn large_downward_jump_becomes_a_fan() {
    let m = gs();
    let grids = Grids::build(&m, 3).unwrap();
    let eps = grids.stats().eps_rho;
    let low = *grids.densities().iter().rev().find(|&&d| 1.0 - d >= 3.0 * eps).unwrap();
    let rho0 = StepFunction::new(vec![0.0], vec![1.0, low]).unwrap();
    // AV parked far to the left in an empty region.
    let rho0 = StepFunction::new(vec![-20.0, 0.0], vec![0.0, rho0.value_at(-1.0), rho0.value_at(1.0)]).unwrap();
    let h = simulate(grids, &rho0, &ControlSignal::constant(0.0), -50.0, 0.5).unwrap();
    let fan: Vec<_> = h
        .fronts
        .iter()
        .filter(|f| f.t_birth == 0.0 && f.x_birth == 0.0)
        .collect();
    assert!(fan.len() >= 3);
    for f in fan {
        assert!(f.left > f.right && f.left - f.right <= eps + 1e-12);
    }
}

#[test]
fn control_jump_on_free_av_lowers_functional_by_control_term() {
    let m = gs();
    let grids = Grids::build(&m, 3).unwrap();
    let (ua, ub) = (grids.speeds()[2], grids.speeds()[5]);
    let control = ControlSignal::from_breakpoints(&[(0.0, ua), (1.0, ub)]).unwrap();
    // Empty road: zero density is outside every band.
    let h = simulate(grids, &StepFunction::constant(0.0), &control, 0.0, 2.0).unwrap();
    let jump = h.ledger.iter().find(|e| e.kind == EventKind::ControlJump).unwrap();
    // 6/β with β = 2 for this flux.
    assert!((jump.delta_upsilon + 3.0 * (ub - ua)).abs() < 1e-12);
    assert!((h.av_position(2.0).unwrap() - (ua + ub)).abs() < 1e-12);
}

#[test]
fn shock_absorbs_rarefaction_front() {
    let m = gs();
    let grids = Grids::build(&m, 2).unwrap();
    let rho0 = StepFunction::new(vec![0.0, 1.0], vec![0.5, 0.75, 0.625]).unwrap();
    // The AV drives at full speed far ahead and never meets these fronts.
    let mut tracker = Tracker::init(grids, &rho0, &ControlSignal::constant(1.0), 50.0).unwrap();
    assert_eq!(tracker.wave_count(), 2);
    match tracker.next_event() {
        // Speeds −0.25 and −0.375 meet at t = 8, x = −2.
        Some(NextEvent::Meeting { t, x }) => {
            assert!((t - 8.0).abs() < 1e-12);
            assert!((x + 2.0).abs() < 1e-12);
        }
        other => panic!("unexpected {other:?}"),
    }
    tracker.run(10.0).unwrap();
    let h = tracker.history();
    let hit = h.ledger.iter().find(|e| e.kind == EventKind::Collision).unwrap();
    // TV goes from 0.25 + 0.125 to 0.125.
    assert!((hit.delta_upsilon + 0.25).abs() < 1e-12);
    assert!(hit.delta_upsilon <= -h.delta_rho);
    assert_eq!(tracker.wave_count(), 1);
    let survivor = h.fronts.iter().find(|f| f.alive_at(10.0)).unwrap();
    assert_eq!((survivor.left, survivor.right), (0.5, 0.625));
    assert!((survivor.speed + 0.125).abs() < 1e-12);
}

#[test]
fn av_path_matches_segment_speeds() {
    let sc = Scenario::parse(wavefront::scenario::DEMO).unwrap();
    let h = sc.solve().unwrap();
    for s in &h.av {
        let mid = 0.5 * (s.t_start + s.t_end);
        let dy = h.av_position(s.t_end).unwrap() - h.av_position(mid).unwrap();
        assert!((dy - s.speed * (s.t_end - mid)).abs() < 1e-12);
    }
}

#[test]
fn queries_outside_the_run_are_rejected() {
    let sc = Scenario::parse(WORKED).unwrap();
    let h = sc.solve().unwrap();
    assert!(h.snapshot(1.5).is_err());
    assert!(h.sample_density(-0.1, &[0.0]).is_err());
}
