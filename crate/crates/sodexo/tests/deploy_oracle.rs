//! Cross-validation of both deployment optimizers against grid searches that
//! rebuild the steady-state payoffs from scratch.
//!
//! The oracle knows nothing about square-root formulas or golden sections in
//! the library: it evaluates the net deployment value on a dense reserve
//! grid (with local refinement) and reports the argmax. The combined-mode
//! oracle searches the same `[0, N/100]` window the library uses, so edge
//! (`capped`) optima are compared like-for-like.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sodexo::model::{reference_params, DeploymentEconomics, PopulationParams};
use sodexo::pas::{
    deployment_utility, optimal_deployment, optimal_deployment_combined, DeploymentMode,
};

/// Steady-state infiltrated honeybots for a reserve of `z`, written directly
/// from the two balance equations.
fn infiltrated(params: &PopulationParams, z: f64) -> f64 {
    let gain = params.rd() - params.clean_rate / params.click_prob;
    gain * z / (params.rd() * params.link_fraction * z + params.detect_rate)
}

fn endemic_bots(params: &PopulationParams, z: f64) -> f64 {
    let n = params.n();
    n * params.detect_rate * (params.rdq() - params.clean_rate)
        / (params.rdq() * params.detect_rate
            + params.rd() * params.link_fraction * z * params.clean_rate)
}

fn fixed_benefit_value(params: &PopulationParams, benefit: f64, tau: f64, z: f64) -> f64 {
    (benefit - tau) * infiltrated(params, z) - tau * z
}

fn grid_refine_argmax(value: impl Fn(f64) -> f64, hi: f64, cells: usize) -> f64 {
    let h = hi / cells as f64;
    let mut best = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for i in 0..=cells {
        let v = value(i as f64 * h);
        if v > best_value {
            best_value = v;
            best = i;
        }
    }
    let mut lo = h * best.saturating_sub(1) as f64;
    let mut up = (h * (best + 1) as f64).min(hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = up - INV_PHI * (up - lo);
    let mut x2 = lo + INV_PHI * (up - lo);
    let mut f1 = value(x1);
    let mut f2 = value(x2);
    for _ in 0..100 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (up - lo);
            f2 = value(x2);
        } else {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - INV_PHI * (up - lo);
            f1 = value(x1);
        }
    }
    0.5 * (lo + up)
}

#[test]
fn pinned_reference_deployment() {
    // benefit 1, cost 0.1 on the million-user baseline: z* = (sqrt(90) - 1/2)/0.4.
    let params = reference_params();
    let econ = DeploymentEconomics { benefit: 1.0, cost: 0.1, zeta: None };
    let plan = optimal_deployment(&params, &econ).unwrap();
    let expected = (90.0_f64.sqrt() - 0.5) / 0.4;
    assert!(
        (plan.reserve - expected).abs() < 1e-9,
        "closed form {} vs hand value {expected}",
        plan.reserve
    );
    let oracle = grid_refine_argmax(|z| fixed_benefit_value(&params, 1.0, 0.1, z), 2_000.0, 20_000);
    assert!(
        (plan.reserve - oracle).abs() < 1e-4,
        "closed form {} vs grid oracle {oracle}",
        plan.reserve
    );
    assert_eq!(plan.mode, DeploymentMode::ClosedForm);
}

#[test]
fn closed_form_matches_grid_search_on_random_economics() {
    let params = reference_params();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut interior = 0;
    for case in 0..40 {
        let benefit = rng.random_range(0.15..5.0);
        let tau = benefit * rng.random_range(0.02..0.9);
        let econ = DeploymentEconomics { benefit, cost: tau, zeta: None };
        let plan = optimal_deployment(&params, &econ).unwrap();
        let oracle =
            grid_refine_argmax(|z| fixed_benefit_value(&params, benefit, tau, z), 2_000.0, 20_000);
        assert!(
            (plan.reserve - oracle).abs() <= 1e-4 * oracle.max(1.0),
            "case {case}: closed form {} vs oracle {oracle} at (p, tau) = ({benefit}, {tau})",
            plan.reserve
        );
        if plan.reserve > 0.0 {
            interior += 1;
            let lib_value = deployment_utility(plan.reserve, &params, &econ).unwrap();
            let oracle_value = fixed_benefit_value(&params, benefit, tau, plan.reserve);
            assert!(
                (lib_value - oracle_value).abs() <= 1e-9 * oracle_value.abs().max(1.0),
                "case {case}: utilities diverge, {lib_value} vs {oracle_value}"
            );
        }
    }
    assert!(interior >= 20, "random economics produced only {interior} nonzero plans");
}

#[test]
fn deployment_value_is_concave_in_the_reserve() {
    let params = reference_params();
    let econ = DeploymentEconomics { benefit: 1.0, cost: 0.1, zeta: None };
    let h = 0.2;
    let values: Vec<f64> = (0..1_000)
        .map(|i| deployment_utility(i as f64 * h, &params, &econ).unwrap())
        .collect();
    for (i, window) in values.windows(3).enumerate() {
        let curvature = window[2] - 2.0 * window[1] + window[0];
        assert!(
            curvature <= 1e-9,
            "second difference {curvature} turned positive at z = {}",
            i as f64 * h
        );
    }
}

#[test]
fn costlier_maintenance_shrinks_the_reserve() {
    let params = reference_params();
    let mut last = f64::INFINITY;
    for tau in [0.05, 0.1, 0.2, 0.3, 0.5] {
        let econ = DeploymentEconomics { benefit: 1.0, cost: tau, zeta: None };
        let plan = optimal_deployment(&params, &econ).unwrap();
        assert!(
            plan.reserve < last,
            "reserve should fall as tau rises: {} at tau = {tau}",
            plan.reserve
        );
        last = plan.reserve;
    }
}

#[test]
fn faster_malware_needs_fewer_honeybots() {
    // With the cleaning-to-click ratio small against the contact rate and a
    // cheap honeybot, the optimum reserve falls monotonically in r*d.
    let mut last = f64::INFINITY;
    for degree in [50.0, 100.0, 150.0, 200.0] {
        let mut params = reference_params();
        params.degree = degree;
        params.click_prob = 0.05;
        let econ = DeploymentEconomics { benefit: 1.0, cost: 0.01, zeta: None };
        let plan = optimal_deployment(&params, &econ).unwrap();
        let oracle =
            grid_refine_argmax(|z| fixed_benefit_value(&params, 1.0, 0.01, z), 2_000.0, 20_000);
        assert!((plan.reserve - oracle).abs() < 1e-3, "oracle disagrees at d = {degree}");
        assert!(
            plan.reserve < last,
            "contact rate {} should need fewer honeybots than slower malware, got {}",
            params.rd(),
            plan.reserve
        );
        last = plan.reserve;
    }
}

#[test]
fn harder_detection_erodes_the_plans_value() {
    let mut last = f64::INFINITY;
    for detect_rate in [0.3, 0.5, 0.8, 1.2] {
        let mut params = reference_params();
        params.detect_rate = detect_rate;
        let econ = DeploymentEconomics { benefit: 1.0, cost: 0.1, zeta: None };
        let plan = optimal_deployment(&params, &econ).unwrap();
        assert!(
            plan.predicted_utility < last,
            "value should fall as honeybots die faster: {} at mu2 = {detect_rate}",
            plan.predicted_utility
        );
        last = plan.predicted_utility;
    }
}

fn interior_combined_instance() -> (PopulationParams, DeploymentEconomics) {
    (
        PopulationParams {
            n_users: 10_000,
            degree: 10.0,
            spam_rate: 0.4,
            click_prob: 0.5,
            link_fraction: 0.01,
            link_universe: 1e4,
            clean_rate: 0.5,
            detect_rate: 2.0,
            honeybot_reserve: 0.0,
        },
        DeploymentEconomics { benefit: 1.0, cost: 1.0, zeta: Some(6e-5) },
    )
}

#[test]
fn combined_mode_matches_the_windowed_grid_oracle() {
    let (params, econ) = interior_combined_instance();
    let zeta = econ.zeta.unwrap();
    let tau = econ.cost;
    let window = 0.01 * params.n();
    let value = |z: f64| {
        (1.0 / (zeta * endemic_bots(&params, z)) - tau) * infiltrated(&params, z) - tau * z
    };
    let oracle = grid_refine_argmax(value, window, 100_000);
    let plan = optimal_deployment_combined(&params, &econ).unwrap();
    assert_eq!(plan.mode, DeploymentMode::Combined);
    assert!(
        (plan.reserve - oracle).abs() <= 1e-2,
        "combined optimizer {} vs windowed grid {oracle}",
        plan.reserve
    );
    assert!(
        !plan.diagnostics.capped,
        "this instance has an interior optimum, reserve {}",
        plan.reserve
    );
    assert!(
        (plan.predicted_utility - value(plan.reserve)).abs()
            <= 1e-9 * plan.predicted_utility.abs().max(1.0),
        "reported value {} vs recomputed {}",
        plan.predicted_utility,
        value(plan.reserve)
    );
}

#[test]
fn combined_mode_caps_at_the_window_edge_when_value_keeps_growing() {
    // Cheap maintenance and a tiny dilution constant make the per-bot price
    // outgrow the linear cost everywhere: the optimizer must run to the edge
    // of its search window and say so.
    let params = reference_params();
    let econ = DeploymentEconomics { benefit: 1.0, cost: 0.05, zeta: Some(1e-5) };
    let window = 0.01 * params.n();
    let plan = optimal_deployment_combined(&params, &econ).unwrap();
    assert!(plan.diagnostics.capped, "monotone value must report a capped plan");
    assert!(
        (plan.reserve - window).abs() < 1e-6 * window,
        "capped reserve {} should sit at the window edge {window}",
        plan.reserve
    );
    let zeta = econ.zeta.unwrap();
    let value = |z: f64| {
        (1.0 / (zeta * endemic_bots(&params, z)) - econ.cost) * infiltrated(&params, z)
            - econ.cost * z
    };
    let oracle = grid_refine_argmax(value, window, 50_000);
    assert!(
        (oracle - window).abs() < 1e-3 * window,
        "the windowed grid oracle should also pick the edge, got {oracle}"
    );
}

#[test]
fn vanishing_dilution_recovers_the_fixed_benefit_plan() {
    // As the dilution constant shrinks the per-bot price explodes, both
    // optimizers chase it past any bound, and — measured inside the common
    // window — they coincide.
    let params = reference_params();
    let window = 0.01 * params.n();
    let zeta = 1e-8;
    let econ = DeploymentEconomics { benefit: 1.0, cost: 0.05, zeta: Some(zeta) };
    let combined = optimal_deployment_combined(&params, &econ).unwrap();
    let implied_price = 1.0 / (zeta * combined.predicted_endemic.bots);
    let fixed = optimal_deployment(
        &params,
        &DeploymentEconomics { benefit: implied_price, cost: 0.05, zeta: None },
    )
    .unwrap();
    let fixed_in_window = fixed.reserve.min(window);
    assert!(
        (combined.reserve - fixed_in_window).abs() <= 0.05 * fixed_in_window,
        "combined {} vs fixed-benefit-at-implied-price {} (window {window})",
        combined.reserve,
        fixed_in_window
    );
}

#[test]
fn combined_mode_walks_away_from_ruinous_costs() {
    let (params, mut econ) = interior_combined_instance();
    econ.cost = 500.0;
    let plan = optimal_deployment_combined(&params, &econ).unwrap();
    assert_eq!(plan.reserve, 0.0, "no reserve can pay for itself at tau = 500");
    assert_eq!(plan.predicted_utility, 0.0);
    assert!(plan.diagnostics.zero_reason.is_some(), "the zero must carry a reason");
}
