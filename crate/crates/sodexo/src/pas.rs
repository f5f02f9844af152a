//! Planning layer: trust decay, cross-layer parameter links, and optimal
//! honeybot deployment.
//!
//! The defender runs on a slower clock than both the message-level game
//! ([`crate::stackelberg`]) and the daily population dynamics
//! ([`crate::dynamics`]). This module holds the glue between those layers and
//! the deployment decision itself:
//!
//! * Trust placed in an infiltrated honeybot decays as `T(t) = T⁰·e^(−μ₂·Δt)`,
//!   with `μ₂` estimated from observed honeybot lifetimes (`μ̂₂ = 1/mean`).
//! * With per-honeybot benefit `p` and maintenance cost `τ`, deploying a
//!   reserve of `z` honeybots is worth
//!
//!   ```text
//!   V(z) = (p − τ)·(rd − μ₁/q)·z / ((rd·k/M)·z + μ₂) − τ·z
//!   ```
//!
//!   (the first factor is the endemic infiltrated count `x₂*(z)`), which is
//!   strictly concave with maximizer
//!
//!   ```text
//!   z* = (−μ₂ + √((p−τ)(rd − μ₁/q)·μ₂/τ)) / (rd·k/M),   clamped at 0.
//!   ```
//!
//! * The combined objective replaces `p` by the exploitation payoff
//!   `1/(ζ·x₁*(z))`, coupling the deployment to how much command traffic each
//!   honeybot can still harvest once the botnet has shrunk. That benefit term
//!   grows linearly in `z` (fewer bots ⇒ more attention per honeybot), so the
//!   objective is only well-posed on a bounded deployment window; we use
//!   `z ≤ 0.01·N`, the same reserve scale past which the mean-field model
//!   itself loses validity, and flag plans that hit the edge.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{endemic_state, PopulationState};
use crate::model::{DeploymentEconomics, PopulationParams};

#[derive(Debug, Error, PartialEq)]
pub enum PasError {
    #[error("t = {t} precedes the timeline start {start_time}")]
    TimeBeforeStart { t: f64, start_time: f64 },
    #[error("cannot estimate a detection rate from zero lifetimes")]
    NoLifetimes,
    #[error("lifetime[{index}] = {value} must be positive")]
    NonPositiveLifetime { index: usize, value: f64 },
    #[error("no endemic botnet at these parameters (r·d·q = {rdq} <= mu1 = {mu1}); the deployment model does not apply")]
    NotEndemic { rdq: f64, mu1: f64 },
    #[error("benefit p = {benefit} is below cost tau = {cost}: the closed-form radicand is negative")]
    NotProfitable { benefit: f64, cost: f64 },
    #[error("combined deployment requires a positive dilution constant zeta")]
    MissingZeta,
}

/// Exponentially decaying trust in one infiltrated honeybot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrustTimeline {
    /// Trust at the moment of infiltration, in [0,1].
    pub initial_trust: f64,
    /// Infiltration time (days).
    pub start_time: f64,
    /// Decay rate μ₂ (per day).
    pub detect_rate: f64,
}

/// Trust at time `t ≥ start_time`: `initial_trust·e^(−μ₂·(t − start_time))`.
pub fn trust_at(timeline: &TrustTimeline, t: f64) -> Result<f64, PasError> {
    if t < timeline.start_time {
        return Err(PasError::TimeBeforeStart {
            t,
            start_time: timeline.start_time,
        });
    }
    Ok(timeline.initial_trust * (-timeline.detect_rate * (t - timeline.start_time)).exp())
}

/// Detection-rate estimate `μ̂₂ = 1/mean(lifetimes)` from observed honeybot
/// lifetimes in days.
pub fn estimate_detect_rate(lifetimes: &[f64]) -> Result<f64, PasError> {
    if lifetimes.is_empty() {
        return Err(PasError::NoLifetimes);
    }
    for (index, &value) in lifetimes.iter().enumerate() {
        if !value.is_finite() || value <= 0.0 {
            return Err(PasError::NonPositiveLifetime { index, value });
        }
    }
    let mean = lifetimes.iter().sum::<f64>() / lifetimes.len() as f64;
    Ok(1.0 / mean)
}

/// Total bot and honeybot populations from per-subtree counts.
pub fn link_populations(per_subtree_bots: &[f64], per_subtree_honeybots: &[f64]) -> (f64, f64) {
    (
        per_subtree_bots.iter().sum(),
        per_subtree_honeybots.iter().sum(),
    )
}

/// Activity-level bridge between layers: the game-layer mean response rate is
/// `p̄ = α·r` for population spam rate `r` (per day) and unit-conversion
/// factor `α`.
pub fn activity_link(r: f64, alpha: f64) -> f64 {
    alpha * r
}

/// Which objective a [`DeploymentPlan`] optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeploymentMode {
    /// Fixed per-honeybot benefit `p`.
    ClosedForm,
    /// Benefit derived from the exploitation payoff `1/(ζ·x₁*)`.
    Combined,
}

/// Why a plan's reserve was forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroReason {
    /// No positive reserve improves on deploying nothing.
    NoPositiveValue,
    /// The per-honeybot benefit at the unconstrained optimum fell below the
    /// maintenance cost (`1/(ζ·x₁*) < τ`).
    ProfitabilityConstraint,
}

/// Optimizer internals worth surfacing alongside the plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeploymentDiagnostics {
    /// Per-honeybot benefit the objective used: the configured `p`, or
    /// `1/(ζ·x₁*(z*))` in combined mode.
    pub benefit: f64,
    /// Dilution constant ζ, when the combined objective was used.
    pub zeta: Option<f64>,
    /// Change-of-variable diagnostics of the convex reformulation:
    /// θ = x₂* − M/(2k) and φ = 1 − k·x₂*/M at the optimum.
    pub theta: f64,
    pub phi: f64,
    /// The optimizer stopped at the deployment window edge `0.01·N`.
    pub capped: bool,
    pub zero_reason: Option<ZeroReason>,
}

/// An optimized honeybot deployment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeploymentPlan {
    /// Optimal reserve size z*.
    pub reserve: f64,
    /// Endemic point the population model predicts at that reserve.
    pub predicted_endemic: PopulationState,
    /// Objective value at z*.
    pub predicted_utility: f64,
    pub mode: DeploymentMode,
    pub diagnostics: DeploymentDiagnostics,
}

fn require_endemic(params: &PopulationParams) -> Result<(), PasError> {
    if params.rdq() <= params.clean_rate {
        return Err(PasError::NotEndemic {
            rdq: params.rdq(),
            mu1: params.clean_rate,
        });
    }
    Ok(())
}

/// Endemic infiltrated-honeybot count as a function of the reserve `z`
/// (the `x₂*(z)` factor shared by every deployment objective).
fn infiltrated_at(z: f64, params: &PopulationParams) -> f64 {
    let rd = params.rd();
    (rd - params.clean_rate / params.click_prob) * z
        / (rd * params.link_fraction * z + params.detect_rate)
}

/// Net deployment value `V(z) = (p − τ)·x₂*(z) − τ·z` of keeping `z ≥ 0`
/// reserve honeybots, where `x₂*(z)` is the endemic infiltrated count.
pub fn deployment_utility(
    z: f64,
    params: &PopulationParams,
    econ: &DeploymentEconomics,
) -> Result<f64, PasError> {
    assert!(z >= 0.0, "reserve z = {z} must be nonnegative");
    require_endemic(params)?;
    Ok((econ.benefit - econ.cost) * infiltrated_at(z, params) - econ.cost * z)
}

fn plan_diagnostics(
    endemic: &PopulationState,
    benefit: f64,
    zeta: Option<f64>,
    capped: bool,
    zero_reason: Option<ZeroReason>,
    params: &PopulationParams,
) -> DeploymentDiagnostics {
    DeploymentDiagnostics {
        benefit,
        zeta,
        theta: endemic.honeybots - 0.5 / params.link_fraction,
        phi: 1.0 - params.link_fraction * endemic.honeybots,
        capped,
        zero_reason,
    }
}

/// Closed-form optimal deployment for a fixed per-honeybot benefit.
///
/// Requires the endemic regime and `p ≥ τ`; the stationary point
/// `z* = (−μ₂ + √((p−τ)(rd − μ₁/q)·μ₂/τ))/(rd·k/M)` is clamped at 0 when the
/// detection rate already eats the whole margin.
pub fn optimal_deployment(
    params: &PopulationParams,
    econ: &DeploymentEconomics,
) -> Result<DeploymentPlan, PasError> {
    require_endemic(params)?;
    if econ.benefit < econ.cost {
        return Err(PasError::NotProfitable {
            benefit: econ.benefit,
            cost: econ.cost,
        });
    }
    let rd = params.rd();
    let radicand = (econ.benefit - econ.cost)
        * (rd - params.clean_rate / params.click_prob)
        * params.detect_rate
        / econ.cost;
    let raw = (-params.detect_rate + radicand.sqrt()) / (rd * params.link_fraction);
    let reserve = raw.max(0.0);
    let zero_reason = (raw <= 0.0).then_some(ZeroReason::NoPositiveValue);

    let mut at_reserve = params.clone();
    at_reserve.honeybot_reserve = reserve;
    let predicted_endemic =
        endemic_state(&at_reserve).expect("endemic regime was checked above");
    let predicted_utility = deployment_utility(reserve, params, econ)?;
    Ok(DeploymentPlan {
        reserve,
        predicted_endemic,
        predicted_utility,
        mode: DeploymentMode::ClosedForm,
        diagnostics: plan_diagnostics(
            &predicted_endemic,
            econ.benefit,
            None,
            false,
            zero_reason,
            params,
        ),
    })
}

/// Golden-section maximization of a unimodal scalar function on [lo, hi].
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Optimal deployment under the combined objective
/// `V(z) = (1/(ζ·x₁*(z)) − τ)·x₂*(z) − τ·z`.
///
/// Maximized over the deployment window `[0, 0.01·N]` by a coarse grid
/// followed by golden-section refinement; the diluted-benefit term is linear
/// in `z`, so past a parameter threshold the objective climbs forever and the
/// plan is returned at the window edge with `capped` set. If the benefit at
/// the optimum cannot cover the maintenance cost (`1/(ζ·x₁*) < τ`), or no
/// positive reserve beats deploying nothing, the reserve is forced to zero
/// with the reason recorded.
pub fn optimal_deployment_combined(
    params: &PopulationParams,
    econ: &DeploymentEconomics,
) -> Result<DeploymentPlan, PasError> {
    require_endemic(params)?;
    let zeta = match econ.zeta {
        Some(z) if z > 0.0 && z.is_finite() => z,
        _ => return Err(PasError::MissingZeta),
    };
    let tau = econ.cost;
    let window = 0.01 * params.n();

    let endemic_at = |z: f64| {
        let mut p = params.clone();
        p.honeybot_reserve = z;
        endemic_state(&p).expect("endemic regime was checked above")
    };
    let value = |z: f64| {
        let e = endemic_at(z);
        (1.0 / (zeta * e.bots) - tau) * e.honeybots - tau * z
    };

    // Coarse grid to localize the maximum, then golden-section on the
    // bracketing cells. Concavity of the objective makes this exact up to the
    // tolerance; on monotone instances it converges to the window edge.
    let cells = 4096usize;
    let h = window / cells as f64;
    let mut best_index = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for i in 0..=cells {
        let v = value(i as f64 * h);
        if v > best_value {
            best_value = v;
            best_index = i;
        }
    }
    let lo = h * best_index.saturating_sub(1) as f64;
    let hi = (h * (best_index + 1) as f64).min(window);
    let mut reserve = golden_max(&value, lo, hi, 1e-10 * window.max(1.0));
    let capped = window - reserve <= 1e-6 * window;
    if capped {
        reserve = window;
    }
    let mut utility = value(reserve);

    let mut zero_reason = None;
    if 1.0 / (zeta * endemic_at(reserve).bots) < tau {
        zero_reason = Some(ZeroReason::ProfitabilityConstraint);
    } else if utility <= 0.0 {
        zero_reason = Some(ZeroReason::NoPositiveValue);
    }
    if zero_reason.is_some() {
        reserve = 0.0;
        utility = 0.0;
    }

    let predicted_endemic = endemic_at(reserve);
    Ok(DeploymentPlan {
        reserve,
        predicted_endemic,
        predicted_utility: utility,
        mode: DeploymentMode::Combined,
        diagnostics: plan_diagnostics(
            &predicted_endemic,
            1.0 / (zeta * predicted_endemic.bots),
            Some(zeta),
            capped && zero_reason.is_none(),
            zero_reason,
            params,
        ),
    })
}

/// Per-honeybot exploitation benefit, exact and in the large-botnet limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExploitationBenefit {
    /// Dilution constant ζ = β·T̄·p̄/T_iH.
    pub zeta: f64,
    /// `p = 1/(1 + ζ·x₁*)` — the honeybot's equilibrium share of command
    /// traffic.
    pub exact: f64,
    /// `p ≈ 1/(ζ·x₁*)`, valid when `ζ·x₁* ≫ 1`.
    pub approximate: f64,
}

/// Benefit each infiltrated honeybot earns during exploitation of a botnet
/// with `n_bots` bots of mean trust `mean_trust` responding at `mean_rate`,
/// seen by a honeybot of trust `hb_trust` with response cost `beta`.
///
/// The exact value coincides with
/// [`info_growth_rate`](crate::stackelberg::info_growth_rate) at the same
/// inputs.
pub fn benefit_from_exploitation(
    n_bots: f64,
    mean_trust: f64,
    mean_rate: f64,
    hb_trust: f64,
    beta: f64,
) -> ExploitationBenefit {
    let zeta = beta * mean_trust * mean_rate / hb_trust;
    ExploitationBenefit {
        zeta,
        exact: 1.0 / (1.0 + zeta * n_bots),
        approximate: 1.0 / (zeta * n_bots),
    }
}
