use dpgdp::curves::{advantage, delta_at, tradeoff_from_pld};
use dpgdp::gdp::{fit_mu, gdp_advantage, gdp_tradeoff};
use dpgdp::mechanisms::{adp_tradeoff, pure_dp_to_gdp, Direction, MechanismSpec};
use dpgdp::normal;
use dpgdp::regret::{regret, Curve, DEFAULT_TOL};
use dpgdp::PrivacyProfile;
use proptest::prelude::*;

fn mechanism() -> impl Strategy<Value = MechanismSpec> {
    prop_oneof![
        (0.1f64..3.0).prop_map(MechanismSpec::gaussian_mu),
        (0.5f64..5.0, 0.01f64..1.0, prop_oneof![Just(Direction::Add), Just(Direction::Remove)])
            .prop_map(|(s, q, d)| MechanismSpec::subsampled_gaussian(s, q).with_direction(d)),
        (0.2f64..5.0).prop_map(MechanismSpec::laplace),
        (0.0f64..3.0).prop_map(MechanismSpec::randomized_response),
    ]
}

fn direction_of(m: &MechanismSpec) -> Direction {
    m.directions()[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn discretization_is_pessimistic(m in mechanism(), step in prop_oneof![Just(1e-2), Just(1e-3)]) {
        let dir = direction_of(&m);
        let pld = m.pld(dir, step, 1).unwrap();
        let exact = m.profile_for(dir).unwrap();
        for i in -30..=60 {
            let eps = f64::from(i) * 0.1;
            prop_assert!(pld.delta(eps) >= exact.delta(eps) - 1e-12, "ε={}: {} < {}", eps, pld.delta(eps), exact.delta(eps));
        }
    }

    #[test]
    fn profile_and_curve_are_monotone(m in mechanism(), t in 1u64..6) {
        let acc = dpgdp::Accounting::run(
            &[dpgdp::MechanismEntry::new(m, t)], 1e-2, &dpgdp::ComposeOptions::default()).unwrap();
        let mut prev = f64::INFINITY;
        for i in -50..=100 {
            let d = acc.delta_at(f64::from(i) * 0.1);
            prop_assert!(d <= prev + 1e-15);
            prev = d;
        }
        let c = acc.tradeoff().unwrap();
        let p = c.breakpoints();
        for w in p.windows(3) {
            // α decreases along the vector; β increases and each middle point
            // lies on or below the chord of its neighbours.
            prop_assert!(w[1].beta >= w[0].beta);
            let span = w[0].alpha - w[2].alpha;
            if span > 0.0 {
                let t = (w[0].alpha - w[1].alpha) / span;
                let chord = w[0].beta + t * (w[2].beta - w[0].beta);
                prop_assert!(w[1].beta <= chord + 1e-12, "not convex at α={}", w[1].alpha);
            }
        }
    }

    #[test]
    fn fitted_mu_dominates(m in mechanism()) {
        let pld = m.pld(direction_of(&m), 1e-3, 1).unwrap();
        let c = tradeoff_from_pld(&pld);
        if let Ok(b) = fit_mu(&c) {
            let (sx, sy) = (1.0 - c.x_residual(), 1.0 - c.delta_inf());
            for p in c.breakpoints() {
                let (a, oma, omb) = (p.alpha / sx, p.lower_x / sx, p.upper_y / sy);
                if a <= 0.0 || oma <= 0.0 {
                    continue;
                }
                let z = if a < 0.5 { normal::upper_quantile(a) } else { normal::quantile(oma) };
                // f_μ(α) ≤ β on the complement side: 1 − f_μ(α) ≥ 1 − β.
                prop_assert!(normal::sf(z - b.mu) >= omb * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn regret_satisfies_triangle_inequality(
        e1 in 0.0f64..3.0, d1 in 0.0f64..0.2,
        e2 in 0.0f64..3.0, d2 in 0.0f64..0.2,
        mu in 0.1f64..3.0,
    ) {
        let f = adp_tradeoff(e1, d1).unwrap();
        let h = adp_tradeoff(e2, d2).unwrap();
        let (cf, cg, ch) = (Curve::Linear(&f), Curve::Gaussian(mu), Curve::Linear(&h));
        let fh = regret(cf, ch, DEFAULT_TOL);
        let fg = regret(cf, cg, DEFAULT_TOL);
        let gh = regret(cg, ch, DEFAULT_TOL);
        prop_assert!(fh <= fg + gh + 3.0 * DEFAULT_TOL, "{} > {} + {}", fh, fg, gh);
    }

    #[test]
    fn advantage_gap_is_bounded_by_twice_the_regret(eps in 0.05f64..4.0) {
        let f = adp_tradeoff(eps, 0.0).unwrap();
        let mu = pure_dp_to_gdp(eps);
        let delta = regret(Curve::Linear(&f), Curve::Gaussian(mu), DEFAULT_TOL);
        let gap = (advantage(&f) - gdp_advantage(mu)).abs();
        prop_assert!(gap <= 2.0 * (delta + DEFAULT_TOL), "{} > 2·{}", gap, delta);
        // f_μ lies below f everywhere.
        for i in 0..=200 {
            let a = f64::from(i) / 200.0;
            prop_assert!(gdp_tradeoff(mu, a) <= f.eval(a) + 1e-12);
        }
    }

    #[test]
    fn refinement_tightens_the_estimate(m in mechanism()) {
        let dir = direction_of(&m);
        let coarse = m.pld(dir, 2e-2, 1).unwrap();
        let fine = m.pld(dir, 1e-2, 1).unwrap();
        for i in -30..=60 {
            let eps = f64::from(i) * 0.1;
            prop_assert!(delta_at(&fine, eps) <= delta_at(&coarse, eps) + 1e-12);
        }
    }
}
