//! Mean-field population dynamics of bots and infiltrated honeybots.
//!
//! With `x₁` bots and `x₂` infiltrated honeybots among `N` accounts, each bot
//! spams its `d` neighbors at rate `r` per day, a recipient clicks with
//! probability `q`, and a click infects only if the carried link is not yet
//! blacklisted — probability `1 − k·x₂/M` when each of the `x₂` honeybots has
//! reported `k` of the `M` malicious links. Bots are cleaned at rate `μ₁`;
//! the `z` reserve honeybots get recruited like users (clicking with
//! probability 1) and infiltrated honeybots are detected and removed at rate
//! `μ₂`:
//!
//! ```text
//! ẋ₁ = r·d·q·x₁·(1 − k·x₂/M)·(N − x₁)/N − μ₁·x₁
//! ẋ₂ = r·d·x₁·(1 − k·x₂/M)·z/N − μ₂·x₂
//! ```
//!
//! Besides extinction (0,0) the system has one endemic equilibrium when
//! `r·d·q > μ₁`:
//!
//! ```text
//! x₁* = N·μ₂·(rdq − μ₁) / (rdq·μ₂ + rd·(k/M)·z·μ₁)
//! x₂* = (rd − μ₁/q)·z / (rd·(k/M)·z + μ₂)
//! ```
//!
//! Stability is judged from the eigenvalues of a finite-difference Jacobian
//! of the right-hand side rather than transcribed linearization algebra.
//!
//! The heterogeneous-degree extension tracks per-degree-class populations
//! `x₁^d, x₂^d` with the same blacklist coupling through the aggregates; its
//! equilibrium is found by damped fixed-point iteration, and the published
//! closed-form approximation (which assumes the infected mean degree stays at
//! the network mean) is evaluated alongside with its discrepancy reported.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{DegreeDistribution, PopulationParams};

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("integration step {step} must be positive and no larger than the horizon {t_end}")]
    BadStep { step: f64, t_end: f64 },
    #[error("state ({bots}, {honeybots}) is not an equilibrium: rhs residual {residual} exceeds {tolerance}")]
    NotAnEquilibrium {
        bots: f64,
        honeybots: f64,
        residual: f64,
        tolerance: f64,
    },
    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: u64, residual: f64 },
    #[error("degree distribution carries {dist_nodes} nodes but params.n_users = {n_users}")]
    InconsistentDistribution { dist_nodes: u64, n_users: u64 },
}

/// Macroscopic population state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationState {
    /// Bot count x₁.
    pub bots: f64,
    /// Infiltrated-honeybot count x₂.
    pub honeybots: f64,
}

/// A time series of population states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PopulationState>,
    /// Integrator step the series was produced with.
    pub step: f64,
    /// Number of steps on which the nonnegativity/ceiling clamp fired.
    pub clamped_steps: u64,
}

impl Trajectory {
    pub fn final_state(&self) -> PopulationState {
        *self.states.last().expect("trajectory is never empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Extinction,
    Endemic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    AsymptoticallyStable,
    Unstable,
    Indeterminate,
}

/// An equilibrium with its stability classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub state: PopulationState,
    pub kind: EquilibriumKind,
    pub stability: Stability,
    pub eigenvalues: [Complex64; 2],
}

/// Jacobian eigenstructure at a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
    pub classification: Stability,
}

/// Time derivatives (ẋ₁, ẋ₂) of the population model.
pub fn rhs(state: &PopulationState, params: &PopulationParams) -> (f64, f64) {
    let n = params.n();
    let unblocked = 1.0 - params.link_fraction * state.honeybots;
    let spread = params.spam_rate * params.degree * state.bots * unblocked / n;
    (
        params.click_prob * spread * (n - state.bots) - params.clean_rate * state.bots,
        spread * params.honeybot_reserve - params.detect_rate * state.honeybots,
    )
}

/// Fixed-step 4th-order Runge–Kutta integration of [`rhs`].
///
/// States are clamped to [0, N] × [0, ∞) after every step; the trajectory
/// records how often that fired (zero at sane steps). The final step is
/// shortened so the series lands exactly on `t_end`.
pub fn integrate(
    params: &PopulationParams,
    initial: PopulationState,
    t_end: f64,
    step: f64,
) -> Result<Trajectory, DynamicsError> {
    if !(step > 0.0) || !(t_end > 0.0) || step > t_end {
        return Err(DynamicsError::BadStep { step, t_end });
    }
    let n = params.n();
    let f = |s: &PopulationState| rhs(s, params);
    let mut state = initial;
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![state];
    let mut clamped_steps = 0u64;
    while t < t_end - 1e-12 * t_end {
        let h = step.min(t_end - t);
        let k1 = f(&state);
        let k2 = f(&advance(&state, &k1, 0.5 * h));
        let k3 = f(&advance(&state, &k2, 0.5 * h));
        let k4 = f(&advance(&state, &k3, h));
        let mut next = PopulationState {
            bots: state.bots + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            honeybots: state.honeybots + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        };
        if next.bots < 0.0 || next.bots > n || next.honeybots < 0.0 {
            next.bots = next.bots.clamp(0.0, n);
            next.honeybots = next.honeybots.max(0.0);
            clamped_steps += 1;
        }
        state = next;
        t += h;
        times.push(t);
        states.push(state);
    }
    Ok(Trajectory {
        times,
        states,
        step,
        clamped_steps,
    })
}

fn advance(s: &PopulationState, k: &(f64, f64), h: f64) -> PopulationState {
    PopulationState {
        bots: s.bots + h * k.0,
        honeybots: s.honeybots + h * k.1,
    }
}

/// All equilibria of the model, each with its stability classification.
///
/// Extinction (0,0) always exists; the endemic point exists when
/// `r·d·q > μ₁` and is computed from its closed form.
pub fn equilibria(params: &PopulationParams) -> Vec<EquilibriumPoint> {
    let mut points = Vec::new();
    let origin = PopulationState {
        bots: 0.0,
        honeybots: 0.0,
    };
    points.push(annotate(params, origin, EquilibriumKind::Extinction));
    if let Some(endemic) = endemic_state(params) {
        points.push(annotate(params, endemic, EquilibriumKind::Endemic));
    }
    points
}

/// Closed-form endemic equilibrium, when it exists (`r·d·q > μ₁`).
pub fn endemic_state(params: &PopulationParams) -> Option<PopulationState> {
    let rdq = params.rdq();
    let rd = params.rd();
    let (mu1, mu2) = (params.clean_rate, params.detect_rate);
    let z = params.honeybot_reserve;
    if rdq <= mu1 {
        return None;
    }
    let bots =
        params.n() * mu2 * (rdq - mu1) / (rdq * mu2 + rd * params.link_fraction * z * mu1);
    let honeybots =
        (rd - mu1 / params.click_prob) * z / (rd * params.link_fraction * z + mu2);
    Some(PopulationState { bots, honeybots })
}

fn annotate(
    params: &PopulationParams,
    state: PopulationState,
    kind: EquilibriumKind,
) -> EquilibriumPoint {
    let report = classify_stability(params, &state)
        .expect("closed-form equilibria satisfy the residual precondition");
    EquilibriumPoint {
        state,
        kind,
        stability: report.classification,
        eigenvalues: report.eigenvalues,
    }
}

/// Classify an equilibrium by the eigenvalues of the finite-difference
/// Jacobian of [`rhs`].
///
/// The state must actually be an equilibrium: the rhs residual may not exceed
/// `10⁻⁶·max(1, N)`. Classification thresholds sit at ±10⁻⁹ on the real
/// parts; anything in between is reported as indeterminate rather than
/// over-claimed.
pub fn classify_stability(
    params: &PopulationParams,
    state: &PopulationState,
) -> Result<StabilityReport, DynamicsError> {
    let (f1, f2) = rhs(state, params);
    let residual = f1.abs().max(f2.abs());
    let tolerance = 1e-6 * params.n().max(1.0);
    if residual > tolerance {
        return Err(DynamicsError::NotAnEquilibrium {
            bots: state.bots,
            honeybots: state.honeybots,
            residual,
            tolerance,
        });
    }

    // Central differences with per-coordinate step 10⁻⁶·max(1, |x|).
    let mut jacobian = [[0.0; 2]; 2];
    for (col, pick) in [(0usize, true), (1usize, false)] {
        let x = if pick { state.bots } else { state.honeybots };
        let h = 1e-6 * x.abs().max(1.0);
        let mut plus = *state;
        let mut minus = *state;
        if pick {
            plus.bots += h;
            minus.bots -= h;
        } else {
            plus.honeybots += h;
            minus.honeybots -= h;
        }
        let fp = rhs(&plus, params);
        let fm = rhs(&minus, params);
        jacobian[0][col] = (fp.0 - fm.0) / (2.0 * h);
        jacobian[1][col] = (fp.1 - fm.1) / (2.0 * h);
    }

    let eigenvalues = eigenvalues_2x2(&jacobian);
    let max_re = eigenvalues[0].re.max(eigenvalues[1].re);
    let classification = if max_re < -1e-9 {
        Stability::AsymptoticallyStable
    } else if max_re > 1e-9 {
        Stability::Unstable
    } else {
        Stability::Indeterminate
    };
    Ok(StabilityReport {
        jacobian,
        eigenvalues,
        classification,
    })
}

fn eigenvalues_2x2(j: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [
            Complex64::new(0.5 * (tr + s), 0.0),
            Complex64::new(0.5 * (tr - s), 0.0),
        ]
    } else {
        let s = (-disc).sqrt();
        [
            Complex64::new(0.5 * tr, 0.5 * s),
            Complex64::new(0.5 * tr, -0.5 * s),
        ]
    }
}

/// Per-degree-class populations for the heterogeneous model.
///
/// Vectors are aligned with the ascending degree classes of the
/// [`DegreeDistribution`] the state was built for. `reserve[i]` is the
/// not-yet-infiltrated honeybot mass attributed to class `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeClassState {
    pub degrees: Vec<u32>,
    pub bots: Vec<f64>,
    pub honeybots: Vec<f64>,
    pub reserve: Vec<f64>,
}

impl DegreeClassState {
    /// Zero populations, with the honeybot reserve spread over classes in
    /// proportion to class size — which pins the reserve's average degree to
    /// the network mean degree.
    pub fn zero(dist: &DegreeDistribution, reserve_total: f64) -> Self {
        let n = dist.total_nodes() as f64;
        let degrees: Vec<u32> = dist.class_counts.keys().copied().collect();
        let reserve = dist
            .class_counts
            .values()
            .map(|&c| reserve_total * c as f64 / n)
            .collect();
        let len = degrees.len();
        DegreeClassState {
            degrees,
            bots: vec![0.0; len],
            honeybots: vec![0.0; len],
            reserve,
        }
    }

    pub fn total_bots(&self) -> f64 {
        self.bots.iter().sum()
    }

    pub fn total_honeybots(&self) -> f64 {
        self.honeybots.iter().sum()
    }

    /// Average degree of the honeybot reserve (d̄_Z); falls back to the class
    /// mean when the reserve is empty.
    pub fn reserve_mean_degree(&self) -> f64 {
        let z: f64 = self.reserve.iter().sum();
        if z > 0.0 {
            self.degrees
                .iter()
                .zip(&self.reserve)
                .map(|(&d, &r)| d as f64 * r)
                .sum::<f64>()
                / z
        } else {
            let n: f64 = self.bots.len() as f64;
            self.degrees.iter().map(|&d| d as f64).sum::<f64>() / n.max(1.0)
        }
    }
}

/// Per-class time derivatives of the heterogeneous model:
///
/// ```text
/// ẋ₁^d = (r·d·q/N)·x₁·(1 − k·x₂/M)·(N_d − x₁^d) − μ₁·x₁^d
/// ẋ₂^d = (r·d/N)·x₁·(1 − k·x₂/M)·z_d − μ₂·x₂^d
/// ```
///
/// where `x₁ = Σ_d x₁^d` and `x₂ = Σ_d x₂^d` couple the classes through the
/// shared infection pool and blacklist coverage.
pub fn rhs_heterogeneous(
    state: &DegreeClassState,
    params: &PopulationParams,
    dist: &DegreeDistribution,
) -> Result<(Vec<f64>, Vec<f64>), DynamicsError> {
    if dist.total_nodes() != params.n_users {
        return Err(DynamicsError::InconsistentDistribution {
            dist_nodes: dist.total_nodes(),
            n_users: params.n_users,
        });
    }
    let n = params.n();
    let x1 = state.total_bots();
    let x2 = state.total_honeybots();
    let unblocked = 1.0 - params.link_fraction * x2;
    let mut d_bots = Vec::with_capacity(state.degrees.len());
    let mut d_honeybots = Vec::with_capacity(state.degrees.len());
    for (i, (&d, &n_d)) in dist.class_counts.iter().enumerate() {
        debug_assert_eq!(state.degrees[i], d, "state/distribution class mismatch");
        let pressure = params.spam_rate * d as f64 * x1 * unblocked / n;
        d_bots.push(
            params.click_prob * pressure * (n_d as f64 - state.bots[i])
                - params.clean_rate * state.bots[i],
        );
        d_honeybots.push(pressure * state.reserve[i] - params.detect_rate * state.honeybots[i]);
    }
    Ok((d_bots, d_honeybots))
}

/// Heterogeneous equilibrium: the numerically converged fixed point plus the
/// published closed-form approximation and their discrepancy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterogeneousEquilibrium {
    pub state: DegreeClassState,
    /// Max-norm of the per-class derivatives at the returned state.
    pub residual: f64,
    pub iterations: u64,
    /// Closed-form per-class predictions (same class order).
    pub closed_form_bots: Vec<f64>,
    pub closed_form_honeybots: Vec<f64>,
    /// Largest relative deviation of the closed forms from the fixed point.
    pub closed_form_discrepancy: f64,
}

/// Find the nontrivial heterogeneous equilibrium by damped fixed-point
/// iteration on the aggregates (x₁, x₂), then back-substitute into the
/// per-class balance equations.
///
/// In the subcritical regime (`r·d̄·q ≤ μ₁`) the iteration collapses onto the
/// extinction point, which is then returned. The honeybot reserve is split
/// across classes in proportion to class size (reserve mean degree = network
/// mean degree).
pub fn equilibria_heterogeneous(
    params: &PopulationParams,
    dist: &DegreeDistribution,
) -> Result<HeterogeneousEquilibrium, DynamicsError> {
    if dist.total_nodes() != params.n_users {
        return Err(DynamicsError::InconsistentDistribution {
            dist_nodes: dist.total_nodes(),
            n_users: params.n_users,
        });
    }
    let n = params.n();
    let z_total = params.honeybot_reserve;
    let mut state = DegreeClassState::zero(dist, z_total);
    let degrees: Vec<f64> = state.degrees.iter().map(|&d| d as f64).collect();
    let counts: Vec<f64> = dist.class_counts.values().map(|&c| c as f64).collect();
    let (mu1, mu2) = (params.clean_rate, params.detect_rate);
    let rq = params.spam_rate * params.click_prob;

    // Damped iteration on the aggregates; the per-class balances
    //   x₁^d = N_d·G_d/(G_d + μ₁),  x₂^d = G_d·z_d/(q·μ₂),  G_d = r·d·q·x₁·φ/N
    // define the update map.
    let d_bar = dist.mean_degree();
    let mut x1 = n * (1.0 - mu1 / (params.spam_rate * d_bar * params.click_prob)).max(0.0);
    if x1 == 0.0 {
        x1 = 1e-6 * n; // give supercritical quenched cases a nonzero start
    }
    let mut x2 = 0.0;
    let damping = 0.5;
    let max_iterations = 100_000u64;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let unblocked = (1.0 - params.link_fraction * x2).max(0.0);
        let mut x1_next = 0.0;
        let mut x2_next = 0.0;
        for i in 0..degrees.len() {
            let g = rq * degrees[i] * x1 * unblocked / n;
            x1_next += counts[i] * g / (g + mu1);
            x2_next += g * state.reserve[i] / (params.click_prob * mu2);
        }
        let x1_new = (1.0 - damping) * x1 + damping * x1_next;
        let x2_new = (1.0 - damping) * x2 + damping * x2_next;
        let delta = ((x1_new - x1).abs() / x1.abs().max(1.0))
            .max((x2_new - x2).abs() / x2.abs().max(1.0));
        x1 = x1_new;
        x2 = x2_new;
        if delta <= 1e-14 {
            break;
        }
        if iterations >= max_iterations {
            return Err(DynamicsError::NoConvergence {
                iterations,
                residual: delta,
            });
        }
    }

    // Back-substitute the converged aggregates.
    let unblocked = (1.0 - params.link_fraction * x2).max(0.0);
    for i in 0..degrees.len() {
        let g = rq * degrees[i] * x1 * unblocked / n;
        state.bots[i] = counts[i] * g / (g + mu1);
        state.honeybots[i] = g * state.reserve[i] / (params.click_prob * mu2);
    }
    let (db, dh) = rhs_heterogeneous(&state, params, dist)?;
    let residual = db
        .iter()
        .chain(dh.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));

    // Published closed forms: they replace the infected mean degree by the
    // network mean degree, so they are exact only in the single-class case.
    let d_bar_z = state.reserve_mean_degree();
    let x2_cf = params.spam_rate * d_bar_z * z_total
        * (1.0 - mu1 / (params.spam_rate * d_bar * params.click_prob))
        / (params.spam_rate * params.link_fraction * z_total * d_bar_z + mu2);
    let b = 1.0 - params.link_fraction * x2_cf - mu1 / (params.spam_rate * d_bar * params.click_prob);
    let mut closed_form_bots = Vec::with_capacity(degrees.len());
    let mut closed_form_honeybots = Vec::with_capacity(degrees.len());
    let mut closed_form_discrepancy = 0.0_f64;
    for i in 0..degrees.len() {
        let rdq_d = params.spam_rate * degrees[i] * params.click_prob;
        let cf_bots = counts[i] * rdq_d * b / (rdq_d * b + mu1);
        let cf_honeybots = params.spam_rate * degrees[i] / mu2 * b * state.reserve[i];
        closed_form_discrepancy = closed_form_discrepancy
            .max((cf_bots - state.bots[i]).abs() / state.bots[i].abs().max(1.0))
            .max((cf_honeybots - state.honeybots[i]).abs() / state.honeybots[i].abs().max(1.0));
        closed_form_bots.push(cf_bots);
        closed_form_honeybots.push(cf_honeybots);
    }

    Ok(HeterogeneousEquilibrium {
        state,
        residual,
        iterations,
        closed_form_bots,
        closed_form_honeybots,
        closed_form_discrepancy,
    })
}
