use proptest::prelude::*;

use wavefront::riemann::{audit_solution, classical_riemann, constrained_riemann, sample, ExactFlux};
use wavefront::scenario::{random_scenario, RandomSpec};
use wavefront::tracker::validate_solution;
use wavefront::{ControlSignal, FluxModel, Grids, Scenario, StepFunction};

fn model_strategy() -> impl Strategy<Value = FluxModel> {
    prop_oneof![
        (0.05f64..0.95).prop_map(|alpha| FluxModel::greenshields(1.0, 1.0, alpha).unwrap()),
        (-0.45f64..0.9, 0.05f64..0.95, 0.5f64..2.0, 0.5f64..2.0)
            .prop_map(|(c, alpha, r, v)| FluxModel::skewed_cubic(r, v, c, alpha).unwrap()),
    ]
}

fn on_grid(grid: &[f64], x: f64) -> bool {
    grid.iter().any(|g| (g - x).abs() <= 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geometry_is_ordered_and_consistent(m in model_strategy(), s in 0.0f64..0.99) {
        let u = s * m.v_max();
        let g = m.geometry_at(u).unwrap();
        prop_assert!(g.check_rho < g.tilde_rho);
        prop_assert!(g.tilde_rho < g.hat_rho);
        prop_assert!(g.hat_rho < g.star_rho);
        prop_assert!((m.speed(g.star_rho) - u).abs() < 1e-9);
        // The support line of slope u touches the reduced flux at ρ̃ and cuts f at ρ̌ and ρ̂.
        let line = |rho: f64| g.capacity + u * rho;
        prop_assert!((m.reduced_flux(g.tilde_rho) - line(g.tilde_rho)).abs() < 1e-9);
        prop_assert!((m.flux(g.check_rho) - line(g.check_rho)).abs() < 1e-9);
        prop_assert!((m.flux(g.hat_rho) - line(g.hat_rho)).abs() < 1e-9);
        for k in 1..20 {
            let rho = m.rho_max() * f64::from(k) / 20.0;
            prop_assert!(m.reduced_flux(rho.min(m.alpha() * m.rho_max())) <= line(rho.min(m.alpha() * m.rho_max())) + 1e-9);
        }
    }

    #[test]
    fn band_maps_invert(m in model_strategy(), s in 0.0f64..0.99) {
        let u = s * m.v_max();
        prop_assert!((m.hat_inverse(m.hat_rho(u)) - u).abs() < 1e-8 * m.v_max());
        prop_assert!((m.check_inverse(m.check_rho(u)) - u).abs() < 1e-8 * m.v_max());
    }

    #[test]
    fn grids_are_closed(m in model_strategy(), nu in 1u32..5) {
        let g = Grids::build(&m, nu).unwrap();
        prop_assert_eq!(g.densities()[0], 0.0);
        prop_assert_eq!(*g.densities().last().unwrap(), m.rho_max());
        prop_assert_eq!(g.speeds()[0], 0.0);
        prop_assert_eq!(*g.speeds().last().unwrap(), m.v_max());
        for &u in g.speeds().iter().filter(|&&u| u < m.v_max()) {
            prop_assert!(on_grid(g.densities(), m.check_rho(u)));
            prop_assert!(on_grid(g.densities(), m.hat_rho(u)));
        }
        prop_assert!(g.piecewise_flux().is_strictly_concave());
    }

    #[test]
    fn control_projection_keeps_variation(
        nu in 1u32..6,
        values in prop::collection::vec(0.0f64..1.0, 1..12),
    ) {
        let m = FluxModel::greenshields(1.0, 1.0, 0.75).unwrap();
        let g = Grids::build(&m, nu).unwrap();
        let points: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64 * 0.5, v)).collect();
        let control = ControlSignal::from_breakpoints(&points).unwrap();
        let q = g.quantize_control(&control);
        prop_assert!(q.total_variation() <= control.total_variation() + 1e-12);
        for t in points.iter().map(|p| p.0 + 0.1) {
            prop_assert!(on_grid(g.speeds(), q.value_at(t)));
            prop_assert!((q.value_at(t) - control.value_at(t)).abs() <= g.stats().eps_u + 1e-12);
        }
    }

    #[test]
    fn profile_projection_keeps_variation(
        nu in 1u32..6,
        values in prop::collection::vec(0.0f64..1.0, 1..12),
    ) {
        let m = FluxModel::greenshields(1.0, 1.0, 0.75).unwrap();
        let g = Grids::build(&m, nu).unwrap();
        let points: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        let p = StepFunction::from_breakpoints(&points).unwrap();
        let q = g.quantize_profile(&p).unwrap();
        prop_assert!(q.total_variation() <= p.total_variation() + 1e-12);
        for &v in q.values() {
            prop_assert!(on_grid(g.densities(), v));
        }
        for x in points.iter().map(|p| p.0 + 0.5) {
            prop_assert!((q.value_at(x) - p.value_at(x)).abs() <= g.stats().eps_rho + 1e-12);
        }
    }

    #[test]
    fn riemann_solutions_pass_audit(
        m in model_strategy(),
        s in 0.0f64..0.99,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let (u, l, r) = (s * m.v_max(), a * m.rho_max(), b * m.rho_max());
        let sol = constrained_riemann(&m, u, l, r).unwrap();
        let issues = audit_solution(&m, u, &sol);
        prop_assert!(issues.is_empty(), "{:?}", issues);
    }

    #[test]
    fn classical_solution_is_bounded_by_its_states(a in 0.0f64..1.0, b in 0.0f64..1.0, xi in -1.5f64..1.5) {
        let m = FluxModel::greenshields(1.0, 1.0, 0.75).unwrap();
        let sol = classical_riemann(&m, a, b).unwrap();
        let flux = ExactFlux::new(&m);
        let v = sample(&flux, &sol, xi);
        prop_assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
        if xi < -1.0 {
            prop_assert_eq!(v, a);
        }
        if xi > 1.0 {
            prop_assert_eq!(v, b);
        }
    }

    #[test]
    fn scenario_text_round_trips(seed in 0u64..10_000) {
        let sc = random_scenario(&RandomSpec::default(), seed);
        let back = Scenario::parse(&sc.to_text()).unwrap();
        prop_assert_eq!(back.hash(), sc.hash());
        prop_assert_eq!(back, sc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tracker_runs_validate(seed in 0u64..1_000_000, nu in 2u32..6, skewed in any::<bool>()) {
        let spec = RandomSpec {
            family: if skewed {
                wavefront::FluxFamily::SkewedCubic { skew: 0.5 }
            } else {
                wavefront::FluxFamily::Greenshields
            },
            nu,
            max_jumps: 8,
            max_control_jumps: 4,
            t_end: 2.0,
            x_half: 2.0,
            ..RandomSpec::default()
        };
        let h = random_scenario(&spec, seed).solve().unwrap();
        let report = validate_solution(&h, 200);
        prop_assert!(report.is_clean(), "{:?}", report.violations.first());
        prop_assert!(report.max_tv <= report.upsilon0 + 1e-9);
        for pair in h.ledger.windows(2) {
            prop_assert!(pair[1].upsilon <= pair[0].upsilon + 1e-9);
        }
    }
}
