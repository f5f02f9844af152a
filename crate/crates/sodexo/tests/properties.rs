//! Property-based checks of algebraic contracts that should hold across the
//! whole parameter space, not just at pinned instances.

use proptest::prelude::*;
use sodexo::dynamics::{integrate, PopulationState};
use sodexo::model::{HoneybotConfig, PopulationParams, SubtreeState};
use sodexo::pas::{estimate_detect_rate, trust_at, TrustTimeline};
use sodexo::stackelberg::{best_response, bop_allocate};

proptest! {
    /// Exponential trust decay composes: decaying over t1 + t2 equals
    /// decaying over t1 and then over t2.
    #[test]
    fn trust_decay_is_a_semigroup(
        initial_trust in 0.1f64..1.0,
        detect_rate in 0.05f64..3.0,
        t1 in 0.0f64..20.0,
        t2 in 0.0f64..20.0,
    ) {
        let timeline = TrustTimeline { initial_trust, start_time: 4.0, detect_rate };
        let direct = trust_at(&timeline, 4.0 + t1 + t2).unwrap();
        let staged = trust_at(&timeline, 4.0 + t1).unwrap() * (-detect_rate * t2).exp();
        prop_assert!(
            (direct - staged).abs() <= 1e-12 * direct.abs().max(1e-300),
            "direct {direct} vs staged {staged}"
        );
    }

    /// Scaling every observed lifetime by s scales the estimated detection
    /// rate by 1/s.
    #[test]
    fn detect_rate_estimate_is_scale_equivariant(
        lifetimes in prop::collection::vec(0.01f64..100.0, 1..20),
        scale in 0.1f64..10.0,
    ) {
        let base = estimate_detect_rate(&lifetimes).unwrap();
        let scaled: Vec<f64> = lifetimes.iter().map(|l| l * scale).collect();
        let rescaled = estimate_detect_rate(&scaled).unwrap();
        prop_assert!(
            (rescaled - base / scale).abs() <= 1e-9 * base,
            "estimate is not scale-equivariant: {rescaled} vs {}",
            base / scale
        );
    }

    /// The command-rate allocation always spends within budget with
    /// nonnegative rates.
    #[test]
    fn allocation_is_feasible(
        seeds in prop::collection::vec((0.1f64..1.0, 0.1f64..5.0, 0.1f64..4.0), 1..10),
        capacity in 1.0f64..50.0,
        alpha in 0.5f64..40.0,
    ) {
        let subtree = SubtreeState {
            trust: seeds.iter().map(|s| s.0).collect(),
            response_rates: seeds.iter().map(|s| s.1).collect(),
            costs: seeds.iter().map(|s| s.2).collect(),
            capacity,
            alpha,
        };
        let allocation = bop_allocate(&subtree).unwrap();
        let spend: f64 = allocation.rates.iter().zip(&subtree.costs).map(|(p, c)| p * c).sum();
        prop_assert!(spend <= capacity * (1.0 + 1e-9), "overspent: {spend} > {capacity}");
        prop_assert!(allocation.rates.iter().all(|&p| p >= 0.0));
    }

    /// The follower's reply to any honeybot rate is a rate, not a share:
    /// nonnegative and below the normalized capacity.
    #[test]
    fn best_response_is_bounded(
        seeds in prop::collection::vec((0.1f64..1.0, 0.1f64..5.0, 0.1f64..4.0), 1..10),
        capacity in 1.0f64..50.0,
        alpha in 0.5f64..40.0,
        hb_trust in 0.1f64..1.0,
        hb_cost in 0.1f64..5.0,
        honeybot_rate in 0.0f64..10.0,
    ) {
        let subtree = SubtreeState {
            trust: seeds.iter().map(|s| s.0).collect(),
            response_rates: seeds.iter().map(|s| s.1).collect(),
            costs: seeds.iter().map(|s| s.2).collect(),
            capacity,
            alpha,
        };
        let hb = HoneybotConfig {
            beta: 1.0,
            xi: 0.0,
            rate_cap: None,
            trust: hb_trust,
            cost: hb_cost,
        };
        let reply = best_response(&subtree, &hb, honeybot_rate);
        let ceiling = (capacity
            + (subtree.costs.iter().sum::<f64>() + hb_cost) / alpha)
            / hb_cost;
        prop_assert!((0.0..=ceiling).contains(&reply), "reply {reply} outside [0, {ceiling}]");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The biologically meaningful box 0 <= x1 <= N, 0 <= x2 <= M/k is
    /// forward invariant under the flow.
    #[test]
    fn population_box_is_forward_invariant(
        n_users in 1_000u64..100_000,
        degree in 10.0f64..150.0,
        click_prob in 0.005f64..0.1,
        clean_rate in 0.05f64..0.5,
        detect_rate in 0.1f64..2.0,
        reserve in 0.0f64..20.0,
        bot_frac in 0.0f64..1.0,
        hb_frac in 0.0f64..1.0,
    ) {
        let params = PopulationParams {
            n_users,
            degree,
            spam_rate: 0.4,
            click_prob,
            link_fraction: 0.01,
            link_universe: 1e4,
            clean_rate,
            detect_rate,
            honeybot_reserve: reserve,
        };
        let ceiling = 1.0 / params.link_fraction;
        let start = PopulationState {
            bots: bot_frac * params.n(),
            honeybots: hb_frac * ceiling,
        };
        let trajectory = integrate(&params, start, 20.0, 0.05).unwrap();
        for state in &trajectory.states {
            prop_assert!(
                (-1e-9..=params.n() * (1.0 + 1e-9)).contains(&state.bots),
                "bots left the box: {}",
                state.bots
            );
            prop_assert!(
                (-1e-9..=ceiling * (1.0 + 1e-9)).contains(&state.honeybots),
                "honeybots left the box: {}",
                state.honeybots
            );
        }
    }
}
