use fdtc::beamforming::{build, cancellable_pairs, Strategy};
use fdtc::bounds::{tc_upper_bound, BoundOptions};
use fdtc::channel::{draw_channel_set, AntennaConfig, InterfererModel};
use fdtc::numerics::{
    op_lb_approx, regularized_gamma_pair, solve_density, OutageCurve, SolverConfig,
};
use fdtc::simulator::{estimate_outage, trial_rng, SystemParams};
use proptest::prelude::*;

fn strategy() -> impl proptest::strategy::Strategy<Value = Strategy> {
    prop::sample::select(Strategy::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regularized_pair_sums_to_one(a in 0.1f64..20.0, x in 0.0f64..60.0) {
        let (p, q) = regularized_gamma_pair(a, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        prop_assert!((p + q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outage_curve_increases_with_density(n in 1u32..8, omega in 0.1f64..10.0, l1 in 1e-4f64..1.0, l2 in 1e-4f64..1.0) {
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        prop_assert!(op_lb_approx(lo, n, omega).unwrap() <= op_lb_approx(hi, n, omega).unwrap());
    }

    #[test]
    fn solved_density_hits_target(n in 1u32..8, omega in 0.1f64..10.0, eps in 0.01f64..0.5) {
        let curve = OutageCurve::nearest_neighbor(n).unwrap();
        let sol = solve_density(&curve, omega, eps, &SolverConfig::default()).unwrap();
        prop_assert!((curve.evaluate(sol.lambda, omega).unwrap() - eps).abs() < 1e-8);
    }

    #[test]
    fn beams_are_unit_norm_and_filters_null_constraints(
        s in strategy(), tx in 1usize..7, rx in 1usize..7, seed in any::<u64>()
    ) {
        let config = AntennaConfig::new(tx, rx).unwrap();
        let Ok(allowed) = cancellable_pairs(s, &config) else { return Ok(()); };
        let layout = s.channel_layout(&config, InterfererModel::Explicit);
        let ch = draw_channel_set(&config, 0.2, allowed + 1, &layout, &mut trial_rng(seed, 0)).unwrap();
        let nearest: Vec<usize> = (1..=allowed).collect();
        let set = build(s, &ch, &nearest, &config).unwrap();
        prop_assert!((set.w_partner_tx.norm() - 1.0).abs() < 1e-12);
        prop_assert!((set.w_typical_tx.norm() - 1.0).abs() < 1e-12);
        let z = &set.z_typical_rx;
        for c in set.constraints() {
            let leak = z.dotc(&c).norm_sqr() / (z.norm_squared() * c.norm_squared());
            prop_assert!(leak < 1e-20, "leak {leak}");
        }
    }

    #[test]
    fn bound_shrinks_with_si_error(s in strategy(), tx in 2usize..7, rx in 2usize..7, a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let config = AntennaConfig::new(tx, rx).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let at = |sigma2_si| {
            let p = SystemParams { config, strategy: s, sigma2_si, ..SystemParams::default() };
            tc_upper_bound(&p, &BoundOptions::default()).map(|r| r.tc_ub)
        };
        if let (Ok(x), Ok(y)) = (at(lo), at(hi)) {
            prop_assert!(y <= x + 1e-12);
            prop_assert!(x >= 0.0 && y >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // Common random numbers make the estimate exactly monotone.
    #[test]
    fn simulated_outage_monotone_in_density(seed in any::<u64>(), l1 in 0.01f64..0.3, l2 in 0.01f64..0.3) {
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let p = SystemParams { mean_pairs: 60.0, ..SystemParams::default() };
        let a = estimate_outage(&p.with_lambda(lo), 400, seed).unwrap();
        let b = estimate_outage(&p.with_lambda(hi), 400, seed).unwrap();
        prop_assert!(a.outages <= b.outages);
    }

    #[test]
    fn simulated_outage_monotone_in_threshold(seed in any::<u64>(), b1 in 0.2f64..4.0, b2 in 0.2f64..4.0) {
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        let p = SystemParams { mean_pairs: 60.0, ..SystemParams::default() };
        let a = estimate_outage(&SystemParams { beta: lo, ..p }, 400, seed).unwrap();
        let b = estimate_outage(&SystemParams { beta: hi, ..p }, 400, seed).unwrap();
        prop_assert!(a.outages <= b.outages);
    }
}
