//! The command-and-control allocation program and the honeybot's game on top
//! of it.
//!
//! A C&C bot with channel capacity `C_i` commands `n_i` subordinates. Sending
//! commands to bot `j` at rate `p_ij` costs `c_ij·p_ij` capacity and earns
//! trust-weighted log utility `T_ij·p_ji·ln(α_i·p_ij + 1)`, so the bot solves
//!
//! ```text
//! max Σ_j T_ij·p_ji·ln(α_i·p_ij + 1)   s.t.  Σ_j c_ij·p_ij ≤ C_i,  p_ij ≥ 0.
//! ```
//!
//! With weights `w_j = T_ij·p_ji` the interior optimum is the closed form
//! `p_ij = (w_j/Σw)·(C_i + Σc/α)/c_j − 1/α`; when that would go negative for
//! some bot, [`bop_allocate`] falls back to water-filling (bisection on the
//! multiplier with rates floored at zero, then an exact active-set polish).
//!
//! A honeybot infiltrates the subtree and chooses its response rate `p_Hi` as
//! a Stackelberg leader. Given the follower's best response
//! `π(p) = C_H·T·p/(T·p + I) − 1/α` (with `I = I_{−H}` the competing bots'
//! trust-weighted response mass and `C_H` the capacity aggregate), the
//! honeybot maximizes
//!
//! ```text
//! U_H(p) = ln(C_H·T·p/(T·p + I) + ξ̄) − β·p ,     ξ̄ = ξ_H + 1/α ,
//! ```
//!
//! whose stationarity condition is the quadratic
//!
//! ```text
//! β·T²·(C_H + ξ̄)·p² + β·T·I·(C_H + 2ξ̄)·p + (β·ξ̄·I² − C_H·T·I) = 0 ,
//! ```
//!
//! solved in closed form by [`solve_equilibrium`]. Large-botnet and fully
//! symmetric simplifications are provided as separate operations with their
//! stated (not re-derived) published forms.

use serde::Serialize;
use thiserror::Error;

use crate::model::{HoneybotConfig, SubtreeState};

#[derive(Debug, Error, PartialEq)]
pub enum StackelbergError {
    #[error("capacity must be positive, got {0}")]
    NonPositiveCapacity(f64),
    #[error("all trust*response_rate weights are zero: allocation objective is degenerate")]
    DegenerateObjective,
    #[error("stationarity quadratic has no nonnegative real root (discriminant {0})")]
    NoNonnegativeRoot(f64),
}

/// A solved capacity allocation for one subtree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    /// Command rate per subordinate bot, same indexing as the subtree.
    pub rates: Vec<f64>,
    /// Lagrange multiplier of the capacity constraint (water level).
    pub multiplier: f64,
    /// Objective value Σ_j w_j·ln(α·p_ij + 1) at the allocation.
    pub utility: f64,
    /// True when at least one rate was floored at zero (closed form invalid).
    pub clamped: bool,
}

/// Stackelberg equilibrium of the honeybot-vs-C&C game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameEquilibrium {
    /// Leader's committed response rate p*_Hi.
    pub honeybot_rate: f64,
    /// Follower's command rate to the honeybot, p*_iH = π(p*_Hi).
    pub cc_to_honeybot_rate: f64,
    /// Follower's command rates to the real bots at equilibrium, from the
    /// joint allocation over the whole subtree including the honeybot.
    pub residual_allocation: Allocation,
    /// Leader's utility U_H at the equilibrium.
    pub honeybot_utility: f64,
    /// Trust-weighted response mass of the competing real bots.
    pub i_minus_h: f64,
    /// Capacity aggregate C_H seen by the honeybot.
    pub c_h: f64,
    /// True when the rate cap truncated the unconstrained optimizer.
    pub cap_bound: bool,
}

/// The two aggregates the honeybot's problem depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregates {
    /// I_{−H} = Σ_{j≠H} T_ij·p_ji.
    pub i_minus_h: f64,
    /// C_H = (C_i + (Σ_j c_ij + c_iH)/α) / c_iH.
    pub c_h: f64,
}

/// Large-botnet (dominant-competition) equilibrium rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeBotnetRate {
    pub rate: f64,
    /// True when the dominance assumption I_{−H} ≫ T_iH·p*_Hi actually held
    /// at the returned rate (checked post-hoc at two orders of magnitude).
    pub a4_satisfied: bool,
}

/// Fully symmetric equilibrium: `n_bots` identical real bots of mean trust,
/// response rate, and cost, plus `n_honeybots` honeybots represented by one
/// super node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricEquilibrium {
    /// p*_Hi = 1/β.
    pub honeybot_rate: f64,
    /// Honeybot-count-independent part of the follower's rate.
    pub cc_rate_independent: f64,
    /// Honeybot-count-dependent part (the per-equilibrium harvest term).
    pub cc_rate_harvest: f64,
    pub i_minus_h: f64,
    pub c_h: f64,
}

impl SymmetricEquilibrium {
    /// Total follower rate p*_iH = independent + harvest terms.
    pub fn cc_rate(&self) -> f64 {
        self.cc_rate_independent + self.cc_rate_harvest
    }
}

/// Objective value Σ_j w_j·ln(α·p_j + 1) of an allocation.
pub fn allocation_utility(subtree: &SubtreeState, rates: &[f64]) -> f64 {
    subtree
        .trust
        .iter()
        .zip(&subtree.response_rates)
        .zip(rates)
        .map(|((&t, &p_resp), &p)| t * p_resp * (subtree.alpha * p + 1.0).ln())
        .sum()
}

/// Maximize the subtree's trust-weighted log utility under the capacity
/// constraint.
///
/// Returns the interior closed form when it is feasible; otherwise runs the
/// clamped water-filling solver (bisection on the multiplier, rates floored
/// at zero, exact closed form re-applied on the final active set) and sets
/// `clamped`. Zero-weight bots always receive rate zero. The returned rates
/// lie exactly on the Pareto boundary Σ c_j·p_j = C.
pub fn bop_allocate(subtree: &SubtreeState) -> Result<Allocation, StackelbergError> {
    if !(subtree.capacity > 0.0) {
        return Err(StackelbergError::NonPositiveCapacity(subtree.capacity));
    }
    let n = subtree.bot_count();
    let weights: Vec<f64> = (0..n)
        .map(|j| subtree.trust[j] * subtree.response_rates[j])
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        return Err(StackelbergError::DegenerateObjective);
    }

    // Try the closed form on the full positive-weight set first.
    let active: Vec<usize> = (0..n).filter(|&j| weights[j] > 0.0).collect();
    let (rates, multiplier) = closed_form_on(subtree, &weights, &active);
    if rates.iter().all(|&p| p >= 0.0) {
        let utility = allocation_utility(subtree, &rates);
        return Ok(Allocation {
            rates,
            multiplier,
            utility,
            clamped: false,
        });
    }

    // Clamped regime: bisection on the multiplier to locate the active set,
    // then the exact closed form on that set.
    let spend = |lambda: f64| -> f64 {
        active
            .iter()
            .map(|&j| {
                let p = (weights[j] / (lambda * subtree.costs[j]) - 1.0 / subtree.alpha).max(0.0);
                subtree.costs[j] * p
            })
            .sum()
    };
    // Spending is strictly decreasing in λ while any rate is positive. The
    // unclamped multiplier under-spends never (flooring only adds spend), and
    // above α·max(w/c) every rate is zero.
    let mut lo = multiplier.max(f64::MIN_POSITIVE);
    let mut hi = active
        .iter()
        .map(|&j| subtree.alpha * weights[j] / subtree.costs[j])
        .fold(0.0_f64, f64::max);
    debug_assert!(spend(lo) >= subtree.capacity);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spend(mid) >= subtree.capacity {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-14 * hi {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let mut surviving: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&j| weights[j] / (lambda * subtree.costs[j]) - 1.0 / subtree.alpha > 0.0)
        .collect();

    // Polish: re-solve exactly on the surviving set, dropping any member the
    // exact solution still sends negative (at most n iterations).
    loop {
        let (rates, multiplier) = closed_form_on(subtree, &weights, &surviving);
        if let Some(&worst) = surviving
            .iter()
            .filter(|&&j| rates[j] < 0.0)
            .min_by(|&&a, &&b| rates[a].partial_cmp(&rates[b]).unwrap())
        {
            surviving.retain(|&j| j != worst);
            if surviving.is_empty() {
                // Cannot happen: spending Σc·p = C > 0 forces a nonempty set.
                return Err(StackelbergError::DegenerateObjective);
            }
            continue;
        }
        let utility = allocation_utility(subtree, &rates);
        return Ok(Allocation {
            rates,
            multiplier,
            utility,
            clamped: surviving.len() < active.len(),
        });
    }
}

/// Interior closed form restricted to `active`: p_j = w_j/(λc_j) − 1/α with
/// λ = Σ_A w / (C + Σ_A c/α); rates outside `active` are zero.
fn closed_form_on(
    subtree: &SubtreeState,
    weights: &[f64],
    active: &[usize],
) -> (Vec<f64>, f64) {
    let w_sum: f64 = active.iter().map(|&j| weights[j]).sum();
    let c_sum: f64 = active.iter().map(|&j| subtree.costs[j]).sum();
    let lambda = w_sum / (subtree.capacity + c_sum / subtree.alpha);
    let mut rates = vec![0.0; weights.len()];
    for &j in active {
        rates[j] = weights[j] / (lambda * subtree.costs[j]) - 1.0 / subtree.alpha;
    }
    (rates, lambda)
}

/// The aggregates I_{−H} and C_H of the honeybot's problem.
///
/// The cost sum in C_H runs over the full extended subtree — all real bots
/// plus the honeybot itself — consistent with the joint allocation the
/// follower actually solves.
pub fn aggregates(subtree: &SubtreeState, hb: &HoneybotConfig) -> Aggregates {
    let i_minus_h: f64 = subtree
        .trust
        .iter()
        .zip(&subtree.response_rates)
        .map(|(&t, &p)| t * p)
        .sum();
    let cost_sum: f64 = subtree.costs.iter().sum::<f64>() + hb.cost;
    Aggregates {
        i_minus_h,
        c_h: (subtree.capacity + cost_sum / subtree.alpha) / hb.cost,
    }
}

/// Follower's best-response rate to the honeybot from raw aggregates:
/// max(C_H·T·p/(T·p + I) − 1/α, 0).
pub fn best_response_from(
    c_h: f64,
    i_minus_h: f64,
    hb_trust: f64,
    alpha: f64,
    honeybot_rate: f64,
) -> f64 {
    let w_h = hb_trust * honeybot_rate;
    if w_h + i_minus_h == 0.0 {
        // Share of zero competition for a zero response is undefined; the
        // only consistent command rate for a silent honeybot is zero.
        return 0.0;
    }
    (c_h * w_h / (w_h + i_minus_h) - 1.0 / alpha).max(0.0)
}

/// Follower's best-response command rate to a honeybot responding at
/// `honeybot_rate`.
pub fn best_response(subtree: &SubtreeState, hb: &HoneybotConfig, honeybot_rate: f64) -> f64 {
    let agg = aggregates(subtree, hb);
    best_response_from(agg.c_h, agg.i_minus_h, hb.trust, subtree.alpha, honeybot_rate)
}

/// Leader's utility U_H(p) = ln(C_H·T·p/(T·p + I) + ξ̄) − β·p.
pub fn honeybot_utility(
    c_h: f64,
    i_minus_h: f64,
    hb_trust: f64,
    xi_bar: f64,
    beta: f64,
    rate: f64,
) -> f64 {
    let w = hb_trust * rate;
    let share = if w == 0.0 { 0.0 } else { w / (w + i_minus_h) };
    (c_h * share + xi_bar).ln() - beta * rate
}

/// Solve the Stackelberg game: the honeybot's optimal committed rate and the
/// follower's induced allocation.
pub fn solve_equilibrium(
    subtree: &SubtreeState,
    hb: &HoneybotConfig,
) -> Result<GameEquilibrium, StackelbergError> {
    let agg = aggregates(subtree, hb);
    let (i, c_h) = (agg.i_minus_h, agg.c_h);
    let t = hb.trust;
    let xi_bar = hb.xi + 1.0 / subtree.alpha;
    let cap = hb.effective_rate_cap();

    let unconstrained = if t == 0.0 || i == 0.0 {
        // No trust means no share to earn; no competition is outside the
        // game's regime (the share jumps discontinuously at p = 0). Both
        // degenerate to a zero commitment.
        0.0
    } else {
        // Stationarity quadratic a·p² + b·p + c = 0 (see module docs).
        let a = hb.beta * t * t * (c_h + xi_bar);
        let b = hb.beta * t * i * (c_h + 2.0 * xi_bar);
        let c = hb.beta * xi_bar * i * i - c_h * t * i;
        if c >= 0.0 {
            // U'(0) ≤ 0: the objective is nonincreasing from the start.
            0.0
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                return Err(StackelbergError::NoNonnegativeRoot(disc));
            }
            // c < 0 guarantees exactly one positive root; the stable form
            // avoids cancellation. Guard the theoretical uniqueness anyway by
            // taking the utility-maximizing nonnegative root.
            let sqrt_disc = disc.sqrt();
            let root_hi = -2.0 * c / (b + sqrt_disc);
            let root_lo = (-b - sqrt_disc) / (2.0 * a);
            if root_lo >= 0.0 {
                let u_hi = honeybot_utility(c_h, i, t, xi_bar, hb.beta, root_hi);
                let u_lo = honeybot_utility(c_h, i, t, xi_bar, hb.beta, root_lo);
                if u_lo > u_hi {
                    root_lo
                } else {
                    root_hi
                }
            } else {
                root_hi
            }
        }
    };

    let cap_bound = unconstrained > cap;
    let honeybot_rate = if cap_bound { cap } else { unconstrained };
    let cc_to_honeybot_rate = best_response_from(c_h, i, t, subtree.alpha, honeybot_rate);

    // The follower's equilibrium allocation to the real bots comes from the
    // joint program over the extended subtree (real bots + honeybot).
    let extended = SubtreeState {
        trust: {
            let mut v = subtree.trust.clone();
            v.push(t);
            v
        },
        response_rates: {
            let mut v = subtree.response_rates.clone();
            v.push(honeybot_rate);
            v
        },
        costs: {
            let mut v = subtree.costs.clone();
            v.push(hb.cost);
            v
        },
        capacity: subtree.capacity,
        alpha: subtree.alpha,
    };
    let joint = bop_allocate(&extended)?;
    let n = subtree.bot_count();
    let residual_rates: Vec<f64> = joint.rates[..n].to_vec();
    let residual_utility = allocation_utility(subtree, &residual_rates);
    let residual_allocation = Allocation {
        rates: residual_rates,
        multiplier: joint.multiplier,
        utility: residual_utility,
        clamped: joint.clamped,
    };

    Ok(GameEquilibrium {
        honeybot_rate,
        cc_to_honeybot_rate,
        residual_allocation,
        honeybot_utility: honeybot_utility(c_h, i, t, xi_bar, hb.beta, honeybot_rate),
        i_minus_h: i,
        c_h,
        cap_bound,
    })
}

/// Equilibrium honeybot rate in the dominant-competition regime
/// I_{−H} ≫ T_iH·p_Hi:
///
/// ```text
/// p*_Hi = (1/β − I_{−H}·ξ_H / (C_H·T_iH + T_iH·ξ_H))⁺ ,
/// ```
///
/// which reduces to 1/β when ξ_H = 0.
pub fn solve_equilibrium_large_botnet(
    i_minus_h: f64,
    c_h: f64,
    hb: &HoneybotConfig,
) -> LargeBotnetRate {
    let t = hb.trust;
    let dilution = if hb.xi == 0.0 {
        0.0
    } else {
        i_minus_h * hb.xi / (c_h * t + t * hb.xi)
    };
    let rate = (1.0 / hb.beta - dilution).max(0.0);
    LargeBotnetRate {
        rate,
        a4_satisfied: i_minus_h >= 100.0 * t * rate,
    }
}

/// Symmetric homogeneous-subtree instance: `n_bots` identical real bots with
/// mean cost `c̄`, response rate `p̄`, and trust `T̄`; `n_honeybots` honeybots
/// of trust `hb_trust` folded into one super node; satiation ξ̄ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricInstance {
    pub n_bots: u64,
    pub n_honeybots: u64,
    pub mean_cost: f64,
    pub mean_rate: f64,
    pub mean_trust: f64,
    pub hb_trust: f64,
    pub capacity: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Closed-form equilibrium of the symmetric game.
///
/// The follower's rate splits into a honeybot-count-independent term
///
/// ```text
/// p*_iH,S = T/(T + β·n_B·T̄·p̄) · (C_i/c̄ + n_B/α) − 1/α
/// ```
///
/// and a harvest term proportional to the honeybot count,
///
/// ```text
/// p*_iH,N = n_H·T/(T + β·n_B·T̄·p̄) ,
/// ```
///
/// both taken in their published simplified form (the harvest term is kept
/// as stated rather than re-derived from the exact aggregates).
pub fn symmetric_equilibrium(inst: &SymmetricInstance) -> SymmetricEquilibrium {
    let n_b = inst.n_bots as f64;
    let n_h = inst.n_honeybots as f64;
    let i_minus_h = n_b * inst.mean_trust * inst.mean_rate;
    let share = inst.hb_trust / (inst.hb_trust + inst.beta * i_minus_h);
    SymmetricEquilibrium {
        honeybot_rate: 1.0 / inst.beta,
        cc_rate_independent: share * (inst.capacity / inst.mean_cost + n_b / inst.alpha)
            - 1.0 / inst.alpha,
        cc_rate_harvest: n_h * share,
        i_minus_h,
        c_h: inst.capacity / inst.mean_cost + (n_b + n_h) / inst.alpha,
    }
}

/// Growth rate of harvested command traffic per additional infiltrated
/// honeybot: r*_iH = T_iH / (β·n_B·T̄·p̄ + T_iH).
///
/// Strictly decreasing in the competing bot count and approaching 1 as
/// either the competition or the response cost vanishes.
pub fn info_growth_rate(
    n_bots: f64,
    mean_trust: f64,
    mean_rate: f64,
    hb_trust: f64,
    beta: f64,
) -> f64 {
    hb_trust / (beta * n_bots * mean_trust * mean_rate + hb_trust)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-9;

    fn symmetric_pair() -> SubtreeState {
        SubtreeState {
            trust: vec![1.0, 1.0],
            response_rates: vec![1.0, 1.0],
            costs: vec![1.0, 1.0],
            capacity: 10.0,
            alpha: 1e6,
        }
    }

    #[test]
    fn symmetric_bots_split_capacity() {
        let alloc = bop_allocate(&symmetric_pair()).unwrap();
        assert!(
            (alloc.rates[0] - 5.0).abs() < 1e-4 && (alloc.rates[1] - 5.0).abs() < 1e-4,
            "symmetric bots should get ~(5, 5), got {:?}",
            alloc.rates
        );
        assert!(!alloc.clamped);
    }

    #[test]
    fn two_to_one_weights_split_six_three() {
        let subtree = SubtreeState {
            trust: vec![1.0, 1.0],
            response_rates: vec![2.0, 1.0],
            costs: vec![1.0, 1.0],
            capacity: 9.0,
            alpha: 1e6,
        };
        let alloc = bop_allocate(&subtree).unwrap();
        assert!(
            (alloc.rates[0] - 6.0).abs() < 1e-4,
            "weight-2 bot should get ~6, got {}",
            alloc.rates[0]
        );
        assert!(
            (alloc.rates[1] - 3.0).abs() < 1e-4,
            "weight-1 bot should get ~3, got {}",
            alloc.rates[1]
        );
    }

    #[test]
    fn allocation_sits_on_pareto_boundary() {
        for subtree in [
            symmetric_pair(),
            SubtreeState {
                trust: vec![0.9, 0.3, 0.7],
                response_rates: vec![2.0, 5.0, 0.5],
                costs: vec![1.5, 0.7, 2.0],
                capacity: 4.0,
                alpha: 50.0,
            },
        ] {
            let alloc = bop_allocate(&subtree).unwrap();
            let spend: f64 = subtree
                .costs
                .iter()
                .zip(&alloc.rates)
                .map(|(c, p)| c * p)
                .sum();
            assert!(
                (spend - subtree.capacity).abs() <= EPS * subtree.capacity,
                "total spend {spend} should equal capacity {}",
                subtree.capacity
            );
        }
    }

    #[test]
    fn low_weight_bot_gets_clamped() {
        // With α = 1 the interior form would give the weak bot a negative
        // rate: everything goes to the strong bot.
        let subtree = SubtreeState {
            trust: vec![1.0, 1.0],
            response_rates: vec![100.0, 0.001],
            costs: vec![1.0, 1.0],
            capacity: 0.5,
            alpha: 1.0,
        };
        let alloc = bop_allocate(&subtree).unwrap();
        assert!(alloc.clamped, "expected the clamped solver to fire");
        assert_eq!(alloc.rates[1], 0.0);
        assert!(
            (alloc.rates[0] - 0.5).abs() < 1e-12,
            "strong bot should take the whole budget, got {}",
            alloc.rates[0]
        );
    }

    #[test]
    fn kkt_marginals_match_on_unclamped_bots() {
        let subtree = SubtreeState {
            trust: vec![0.9, 0.3, 0.7],
            response_rates: vec![2.0, 5.0, 0.5],
            costs: vec![1.5, 0.7, 2.0],
            capacity: 4.0,
            alpha: 50.0,
        };
        let alloc = bop_allocate(&subtree).unwrap();
        let marginals: Vec<f64> = (0..3)
            .filter(|&j| alloc.rates[j] > 0.0)
            .map(|j| {
                let w = subtree.trust[j] * subtree.response_rates[j];
                w * subtree.alpha / (subtree.alpha * alloc.rates[j] + 1.0) / subtree.costs[j]
            })
            .collect();
        for m in &marginals {
            assert!(
                (m - marginals[0]).abs() <= 1e-8 * marginals[0].abs(),
                "scaled marginal utilities should be equal, got {marginals:?}"
            );
        }
    }

    #[test]
    fn zero_weight_objective_is_an_error() {
        let subtree = SubtreeState {
            trust: vec![0.0, 0.0],
            response_rates: vec![1.0, 1.0],
            costs: vec![1.0, 1.0],
            capacity: 1.0,
            alpha: 10.0,
        };
        assert_eq!(
            bop_allocate(&subtree),
            Err(StackelbergError::DegenerateObjective)
        );
    }

    fn tame_honeybot() -> HoneybotConfig {
        HoneybotConfig {
            beta: 1.0,
            xi: 0.0,
            rate_cap: None,
            trust: 1.0,
            cost: 1.0,
        }
    }

    #[test]
    fn silent_honeybot_earns_nothing() {
        let rate = best_response(&symmetric_pair(), &tame_honeybot(), 0.0);
        assert_eq!(rate, 0.0);
    }

    #[test]
    fn best_response_unit_case() {
        // C_H = 2, I = 1, T = 1, α = 10⁶, p_Hi = 1 → 2·(1/2) − 10⁻⁶.
        let rate = best_response_from(2.0, 1.0, 1.0, 1e6, 1.0);
        assert!(
            (rate - (1.0 - 1e-6)).abs() < 1e-12,
            "expected 1 − 10⁻⁶, got {rate}"
        );
    }

    #[test]
    fn best_response_is_monotone_and_bounded() {
        let subtree = symmetric_pair();
        let hb = tame_honeybot();
        let c_h = aggregates(&subtree, &hb).c_h;
        let mut last = -1.0;
        for i in 0..100 {
            let p = i as f64 * 0.5;
            let resp = best_response(&subtree, &hb, p);
            assert!(resp >= last, "best response must be nondecreasing in p_Hi");
            assert!((0.0..=c_h).contains(&resp), "response {resp} out of [0, C_H]");
            last = resp;
        }
    }

    #[test]
    fn best_response_matches_joint_allocation() {
        // The closed-form response must agree with actually re-running the
        // allocation with the honeybot included as one more subordinate.
        let subtree = SubtreeState {
            trust: vec![0.8, 0.6, 0.9],
            response_rates: vec![1.2, 3.0, 0.7],
            costs: vec![1.0, 1.3, 0.8],
            capacity: 20.0,
            alpha: 1e7,
        };
        let hb = HoneybotConfig {
            beta: 1.0,
            xi: 0.0,
            rate_cap: None,
            trust: 0.95,
            cost: 1.1,
        };
        for hb_rate in [0.3, 1.0, 4.0] {
            let direct = best_response(&subtree, &hb, hb_rate);
            let extended = SubtreeState {
                trust: vec![0.8, 0.6, 0.9, hb.trust],
                response_rates: vec![1.2, 3.0, 0.7, hb_rate],
                costs: vec![1.0, 1.3, 0.8, hb.cost],
                capacity: 20.0,
                alpha: 1e7,
            };
            let joint = bop_allocate(&extended).unwrap();
            assert!(
                (direct - joint.rates[3]).abs() <= 1e-9 * direct.max(1.0),
                "closed form {direct} vs joint allocation {} at p_Hi = {hb_rate}",
                joint.rates[3]
            );
        }
    }

    #[test]
    fn equilibrium_is_self_consistent() {
        let subtree = symmetric_pair();
        let hb = tame_honeybot();
        let eq = solve_equilibrium(&subtree, &hb).unwrap();
        let resp = best_response(&subtree, &hb, eq.honeybot_rate);
        assert!(
            (eq.cc_to_honeybot_rate - resp).abs() <= 1e-8 * resp.max(1.0),
            "stored follower rate {} should equal re-evaluated best response {resp}",
            eq.cc_to_honeybot_rate
        );
        assert!(eq.honeybot_rate > 0.0 && !eq.cap_bound);
    }

    #[test]
    fn huge_response_cost_kills_the_rate() {
        let subtree = symmetric_pair();
        let mut hb = tame_honeybot();
        hb.beta = 1e6;
        let eq = solve_equilibrium(&subtree, &hb).unwrap();
        assert!(
            eq.honeybot_rate <= 2e-6,
            "β = 10⁶ should push the rate to ~1/β, got {}",
            eq.honeybot_rate
        );
    }

    #[test]
    fn rate_cap_binds_and_is_flagged() {
        let subtree = symmetric_pair();
        let mut hb = tame_honeybot();
        hb.rate_cap = Some(1e-3);
        let eq = solve_equilibrium(&subtree, &hb).unwrap();
        assert!(eq.cap_bound);
        assert_eq!(eq.honeybot_rate, 1e-3);
    }

    #[test]
    fn equilibrium_dominates_random_feasible_rates() {
        let subtree = SubtreeState {
            trust: vec![0.9, 0.5, 0.8, 0.2],
            response_rates: vec![2.0, 1.0, 3.0, 5.0],
            costs: vec![1.0, 0.5, 2.0, 1.5],
            capacity: 12.0,
            alpha: 1e5,
        };
        let hb = HoneybotConfig {
            beta: 0.7,
            xi: 0.3,
            rate_cap: None,
            trust: 0.9,
            cost: 1.2,
        };
        let eq = solve_equilibrium(&subtree, &hb).unwrap();
        let xi_bar = hb.xi + 1.0 / subtree.alpha;
        // Deterministic low-discrepancy sweep of the feasible interval.
        let cap = hb.effective_rate_cap();
        for i in 0..1000 {
            let p = cap * (i as f64 + 0.5) / 1000.0;
            let u = honeybot_utility(eq.c_h, eq.i_minus_h, hb.trust, xi_bar, hb.beta, p);
            assert!(
                eq.honeybot_utility >= u - 1e-9,
                "leader utility {} beaten by {} at p = {p}",
                eq.honeybot_utility,
                u
            );
        }
    }

    #[test]
    fn large_botnet_rate_without_satiation_is_one_over_beta() {
        let mut hb = tame_honeybot();
        hb.beta = 0.5;
        let sol = solve_equilibrium_large_botnet(1e6, 10.0, &hb);
        assert_eq!(sol.rate, 2.0);
        assert!(sol.a4_satisfied);
    }

    #[test]
    fn large_satiation_clamps_to_zero() {
        let mut hb = tame_honeybot();
        hb.xi = 1e12;
        let sol = solve_equilibrium_large_botnet(1e6, 10.0, &hb);
        assert_eq!(sol.rate, 0.0);
    }

    #[test]
    fn large_botnet_matches_full_solver_under_dominance() {
        // I ≥ 10⁴·T·rate_cap with the default cap 10³/β: 1% agreement.
        let n = 1000;
        let subtree = SubtreeState {
            trust: vec![1.0; n],
            response_rates: vec![1e4; n],
            costs: vec![1.0; n],
            capacity: 1e8,
            alpha: 1e9,
        };
        let hb = HoneybotConfig {
            beta: 1.0,
            xi: 2.0,
            rate_cap: None,
            trust: 1.0,
            cost: 1.0,
        };
        let agg = aggregates(&subtree, &hb);
        assert!(agg.i_minus_h >= 1e4 * hb.trust * hb.effective_rate_cap());
        let approx = solve_equilibrium_large_botnet(agg.i_minus_h, agg.c_h, &hb);
        let exact = solve_equilibrium(&subtree, &hb).unwrap();
        let rel = (approx.rate - exact.honeybot_rate).abs() / exact.honeybot_rate;
        assert!(
            rel < 0.01,
            "large-botnet form {} vs exact {} (rel {rel})",
            approx.rate,
            exact.honeybot_rate
        );
    }

    #[test]
    fn symmetric_rate_is_inverse_beta() {
        let inst = SymmetricInstance {
            n_bots: 100,
            n_honeybots: 3,
            mean_cost: 1.0,
            mean_rate: 1.0,
            mean_trust: 1.0,
            hb_trust: 1.0,
            capacity: 10.0,
            alpha: 1e9,
            beta: 1.0,
        };
        let eq = symmetric_equilibrium(&inst);
        assert_eq!(eq.honeybot_rate, 1.0);

        let no_harvest = symmetric_equilibrium(&SymmetricInstance {
            n_honeybots: 0,
            ..inst
        });
        assert_eq!(no_harvest.cc_rate_harvest, 0.0);
    }

    #[test]
    fn harvest_slope_equals_growth_rate_exactly() {
        let base = SymmetricInstance {
            n_bots: 1000,
            n_honeybots: 0,
            mean_cost: 1.0,
            mean_rate: 1.0,
            mean_trust: 1.0,
            hb_trust: 1.0,
            capacity: 10.0,
            alpha: 1e9,
            beta: 1.0,
        };
        let r = info_growth_rate(1000.0, 1.0, 1.0, 1.0, 1.0);
        for n_h in 0..10u64 {
            let lo = symmetric_equilibrium(&SymmetricInstance {
                n_honeybots: n_h,
                ..base
            });
            let hi = symmetric_equilibrium(&SymmetricInstance {
                n_honeybots: n_h + 1,
                ..base
            });
            let slope = hi.cc_rate() - lo.cc_rate();
            assert!(
                (slope - r).abs() < 1e-8,
                "harvest slope {slope} should equal growth rate {r}"
            );
        }
    }

    #[test]
    fn growth_rate_reference_values() {
        let r = info_growth_rate(1000.0, 1.0, 1.0, 1.0, 1.0);
        assert!(
            (r - 1.0 / 1001.0).abs() < 1e-15,
            "1000 competing bots should give 1/1001, got {r}"
        );
        assert_eq!(info_growth_rate(0.0, 1.0, 1.0, 1.0, 1.0), 1.0);
        assert_eq!(info_growth_rate(1000.0, 1.0, 1.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn growth_rate_decreases_with_competition() {
        let mut last = f64::INFINITY;
        for n in [0.0, 1.0, 10.0, 100.0, 1e4, 1e8] {
            let r = info_growth_rate(n, 0.9, 2.0, 0.8, 0.5);
            assert!(r < last, "growth rate must strictly decrease in n_bots");
            last = r;
        }
        assert!(last < 1e-6, "growth rate should vanish for huge botnets");
    }
}
