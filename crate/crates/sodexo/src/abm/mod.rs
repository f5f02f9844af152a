//! Seeded stochastic agent-based simulation of botnet and honeybot spread.
//!
//! The simulator discretizes the continuous-rate population model into ticks
//! (default 0.1 day): per tick, each bot messages each neighbor independently
//! with probability `r·tick` (drawn as one binomial per bot plus a distinct
//! random recipient subset — the same joint distribution, far fewer RNG
//! calls), each message carries one link from the sender's `k`-link set,
//! susceptible recipients click with probability `q`, reserve honeybots click
//! with probability 1, and clicks on non-blocked links convert the recipient.
//! Bots revert to susceptible with probability `μ₁·tick` and infiltrated
//! honeybots are removed with probability `μ₂·tick`.
//!
//! Two link-set structures are tracked separately:
//!
//! * the *reported blacklist* — the union of recruiting bots' link sets
//!   observed by infiltrated honeybots; it only ever grows and is the
//!   artifact a defender would export;
//! * the *active coverage* — the set of link ids currently neutralized by
//!   standing honeybot infrastructure. Each infiltration claims a fresh block
//!   of `k` uncovered ids (freed again when that honeybot is removed), so
//!   coverage is exactly `k` per active infiltrated honeybot and the blocking
//!   probability matches the `k·x₂/M` term of the mean-field equations
//!   instead of saturating the way the monotone reported set does.
//!
//! When `replacement` is on, every infiltration immediately spawns a fresh
//! reserve honeybot wired to `d̄` random users, holding the *reserve* — the
//! honeybots not yet part of the botnet — constant at `z`, which is the
//! regime the mean-field recruitment term `r·d·x₁·φ·z/N` describes.

pub mod graph;

pub use graph::{generate_graph, DegreeStats, SocialGraph};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{PopulationState, Trajectory};
use crate::model::{DegreeDistribution, PopulationParams, Validate, ValidationReport};

#[derive(Debug, Error, PartialEq)]
pub enum AbmError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("configuration-model wiring failed: realized mean degree {realized} deviates more than 5% from the target {target}")]
    WiringFailed { target: f64, realized: f64 },
    #[error("time ranges do not overlap: ensemble [{0}, {1}] vs trajectory [{2}, {3}]")]
    DisjointTimeRanges(f64, f64, f64, f64),
}

/// Where a freshly recruited bot's link set comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkInheritance {
    /// Independent uniform sample of `k` links (each bot "independently
    /// given" its set).
    #[default]
    Resample,
    /// Copy of the recruiting bot's set.
    Inherit,
}

/// Full description of one simulation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: PopulationParams,
    pub dist: DegreeDistribution,
    /// Total simulated time in days.
    pub horizon: f64,
    /// Time step in days; per-event probabilities are `rate·tick`.
    pub tick: f64,
    pub seed: u64,
    pub replicates: u32,
    /// Keep the honeybot reserve constant by spawning a replacement at every
    /// infiltration.
    #[serde(default = "default_true")]
    pub replacement: bool,
    #[serde(default = "default_initial_bots")]
    pub initial_bots: u32,
    /// Fraction of the link universe blacklisted before the run starts.
    #[serde(default)]
    pub initial_blacklist_fraction: f64,
    #[serde(default)]
    pub link_inheritance: LinkInheritance,
}

fn default_true() -> bool {
    true
}

fn default_initial_bots() -> u32 {
    50
}

impl Validate for SimConfig {
    fn validate(&self) -> ValidationReport {
        let mut report = self.params.validate();
        report.findings.extend(self.dist.validate().findings);
        let mut violation = |msg: String| {
            report.findings.push(crate::model::Finding {
                severity: crate::model::Severity::Violation,
                message: msg,
            })
        };
        if self.dist.total_nodes() != self.params.n_users {
            violation(format!(
                "degree distribution carries {} nodes but params.n_users = {}",
                self.dist.total_nodes(),
                self.params.n_users
            ));
        }
        if !(self.tick > 0.0 && self.tick <= 1.0) {
            violation(format!("tick = {} out of (0, 1] days", self.tick));
        }
        if self.horizon < self.tick {
            violation(format!(
                "horizon = {} must cover at least one tick of {}",
                self.horizon, self.tick
            ));
        }
        for (name, rate) in [
            ("spam_rate", self.params.spam_rate),
            ("clean_rate", self.params.clean_rate),
            ("detect_rate", self.params.detect_rate),
        ] {
            if rate * self.tick > 1.0 {
                violation(format!(
                    "{name}*tick = {} exceeds 1: the per-tick Bernoulli approximation breaks",
                    rate * self.tick
                ));
            }
        }
        if self.replicates == 0 {
            violation("replicates must be >= 1".into());
        }
        if u64::from(self.initial_bots) > self.params.n_users {
            violation(format!(
                "initial_bots = {} exceeds n_users = {}",
                self.initial_bots, self.params.n_users
            ));
        }
        if !(0.0..=1.0).contains(&self.initial_blacklist_fraction) {
            violation(format!(
                "initial_blacklist_fraction = {} out of [0,1]",
                self.initial_blacklist_fraction
            ));
        }
        if (self.params.link_fraction * self.params.link_universe).round() < 1.0 {
            violation(format!(
                "per-bot link count k = {} rounds to zero",
                self.params.link_fraction * self.params.link_universe
            ));
        }
        if self.params.honeybot_reserve.fract() != 0.0 {
            report.findings.push(crate::model::Finding {
                severity: crate::model::Severity::Warning,
                message: format!(
                    "honeybot_reserve = {} is rounded to a whole agent count",
                    self.params.honeybot_reserve
                ),
            });
        }
        report
    }
}

/// Lifecycle stage of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Susceptible,
    Bot,
    HoneybotReserve,
    HoneybotInfiltrated,
    Removed,
}

/// Complete mutable state of one replicate.
///
/// Nodes `0..n_users` are the social-network users (only ever susceptible or
/// bot); honeybots are appended behind them and move reserve → infiltrated →
/// removed.
#[derive(Debug, Clone)]
pub struct AgentState {
    statuses: Vec<NodeStatus>,
    adjacency: Vec<Vec<u32>>,
    n_users: usize,
    attach_degree: usize,
    link_count: usize,
    universe: usize,
    link_sets: Vec<Option<Vec<u32>>>,
    covered: Vec<bool>,
    covered_count: u64,
    uncovered: Vec<u32>,
    blocks: Vec<Vec<u32>>,
    reported: Vec<bool>,
    reported_count: u64,
    replacements: u64,
    bots: u64,
    reserve: u64,
    infiltrated: u64,
    removed: u64,
}

impl AgentState {
    /// Set up a replicate on `graph`: mark the initial blacklist, spawn the
    /// honeybot reserve, then infect `initial_bots` random users.
    pub fn new(graph: &SocialGraph, config: &SimConfig, rng: &mut ChaCha8Rng) -> AgentState {
        let n_users = graph.node_count();
        let universe = config.params.link_universe.round() as usize;
        let link_count = (config.params.link_fraction * config.params.link_universe).round()
            as usize;
        let preblocked = (config.initial_blacklist_fraction * universe as f64).round() as usize;
        let mut covered = vec![false; universe];
        for id in covered.iter_mut().take(preblocked) {
            *id = true;
        }
        let mut state = AgentState {
            statuses: vec![NodeStatus::Susceptible; n_users],
            adjacency: graph.adjacency.clone(),
            n_users,
            attach_degree: (graph.degree_stats.mean.round() as usize)
                .clamp(1, n_users.saturating_sub(1).max(1)),
            link_count,
            universe,
            link_sets: vec![None; n_users],
            covered,
            covered_count: preblocked as u64,
            uncovered: (preblocked as u32..universe as u32).collect(),
            blocks: vec![Vec::new(); n_users],
            reported: vec![false; universe],
            reported_count: 0,
            replacements: 0,
            bots: 0,
            reserve: 0,
            infiltrated: 0,
            removed: 0,
        };
        for _ in 0..config.params.honeybot_reserve.round() as u64 {
            state.spawn_reserve(rng);
        }
        for i in index::sample(rng, n_users, config.initial_bots as usize) {
            state.statuses[i] = NodeStatus::Bot;
            state.link_sets[i] = Some(state.sample_links(rng));
            state.bots += 1;
        }
        state
    }

    pub fn statuses(&self) -> &[NodeStatus] {
        &self.statuses
    }

    pub fn node_count(&self) -> usize {
        self.statuses.len()
    }

    pub fn bot_count(&self) -> u64 {
        self.bots
    }

    pub fn reserve_count(&self) -> u64 {
        self.reserve
    }

    pub fn infiltrated_count(&self) -> u64 {
        self.infiltrated
    }

    pub fn removed_count(&self) -> u64 {
        self.removed
    }

    pub fn replacement_count(&self) -> u64 {
        self.replacements
    }

    /// Number of link ids on the monotone reported blacklist.
    pub fn reported_count(&self) -> u64 {
        self.reported_count
    }

    /// Number of link ids currently neutralized (initial blacklist plus
    /// active honeybot blocks).
    pub fn covered_count(&self) -> u64 {
        self.covered_count
    }

    fn sample_links(&self, rng: &mut ChaCha8Rng) -> Vec<u32> {
        index::sample(rng, self.universe, self.link_count.min(self.universe))
            .iter()
            .map(|i| i as u32)
            .collect()
    }

    fn spawn_reserve(&mut self, rng: &mut ChaCha8Rng) {
        let node = self.statuses.len() as u32;
        let targets: Vec<u32> = index::sample(rng, self.n_users, self.attach_degree)
            .iter()
            .map(|i| i as u32)
            .collect();
        for &t in &targets {
            self.adjacency[t as usize].push(node);
        }
        self.statuses.push(NodeStatus::HoneybotReserve);
        self.adjacency.push(targets);
        self.link_sets.push(None);
        self.blocks.push(Vec::new());
        self.reserve += 1;
    }

    fn infect(&mut self, node: usize, sender: usize, mode: LinkInheritance, rng: &mut ChaCha8Rng) {
        self.statuses[node] = NodeStatus::Bot;
        self.link_sets[node] = Some(match mode {
            LinkInheritance::Resample => self.sample_links(rng),
            LinkInheritance::Inherit => self.link_sets[sender]
                .clone()
                .expect("senders always hold a link set"),
        });
        self.bots += 1;
    }

    fn infiltrate(&mut self, node: usize, sender: usize, replace: bool, rng: &mut ChaCha8Rng) {
        self.statuses[node] = NodeStatus::HoneybotInfiltrated;
        self.reserve -= 1;
        self.infiltrated += 1;
        // Report everything observable about the recruiter.
        let sender_links = self.link_sets[sender]
            .as_ref()
            .expect("senders always hold a link set")
            .clone();
        for l in sender_links {
            if !self.reported[l as usize] {
                self.reported[l as usize] = true;
                self.reported_count += 1;
            }
        }
        // Claim a fresh block of uncovered ids for active blocking.
        let take = self.link_count.min(self.uncovered.len());
        let mut block = Vec::with_capacity(take);
        for _ in 0..take {
            let j = rng.random_range(0..self.uncovered.len());
            let id = self.uncovered.swap_remove(j);
            self.covered[id as usize] = true;
            self.covered_count += 1;
            block.push(id);
        }
        self.blocks[node] = block;
        if replace {
            self.spawn_reserve(rng);
            self.replacements += 1;
        }
    }

    fn remove_honeybot(&mut self, node: usize) {
        self.statuses[node] = NodeStatus::Removed;
        self.infiltrated -= 1;
        self.removed += 1;
        let block = std::mem::take(&mut self.blocks[node]);
        for id in block {
            self.covered[id as usize] = false;
            self.covered_count -= 1;
            self.uncovered.push(id);
        }
    }
}

/// Advance the state by one tick.
///
/// Phase 1 walks the bots present at tick start in ascending node order and
/// delivers their messages immediately (recipients converted mid-tick stop
/// being targets but do not send until the next tick). Phase 2 applies
/// cleaning and detection over all nodes in ascending order.
pub fn step(state: &mut AgentState, config: &SimConfig, rng: &mut ChaCha8Rng) {
    let send_p = config.params.spam_rate * config.tick;
    let clean_p = config.params.clean_rate * config.tick;
    let detect_p = config.params.detect_rate * config.tick;
    let q = config.params.click_prob;

    let senders: Vec<usize> = (0..state.statuses.len())
        .filter(|&i| state.statuses[i] == NodeStatus::Bot)
        .collect();
    for &b in &senders {
        let degree = state.adjacency[b].len();
        if degree == 0 {
            continue;
        }
        let messages = Binomial::new(degree as u64, send_p)
            .expect("send probability is validated to [0,1]")
            .sample(rng) as usize;
        if messages == 0 {
            continue;
        }
        for slot in index::sample(rng, degree, messages) {
            let recipient = state.adjacency[b][slot] as usize;
            let link = {
                let set = state.link_sets[b].as_ref().expect("bots hold a link set");
                set[rng.random_range(0..set.len())] as usize
            };
            match state.statuses[recipient] {
                NodeStatus::Susceptible => {
                    if rng.random::<f64>() < q && !state.covered[link] {
                        state.infect(recipient, b, config.link_inheritance, rng);
                    }
                }
                NodeStatus::HoneybotReserve => {
                    if !state.covered[link] {
                        state.infiltrate(recipient, b, config.replacement, rng);
                    }
                }
                _ => {}
            }
        }
    }

    for i in 0..state.statuses.len() {
        match state.statuses[i] {
            NodeStatus::Bot => {
                if rng.random::<f64>() < clean_p {
                    state.statuses[i] = NodeStatus::Susceptible;
                    state.link_sets[i] = None;
                    state.bots -= 1;
                }
            }
            NodeStatus::HoneybotInfiltrated => {
                if rng.random::<f64>() < detect_p {
                    state.remove_honeybot(i);
                }
            }
            _ => {}
        }
    }
}

/// Per-tick ensemble mean and standard deviation (sample, n−1) of the bot and
/// infiltrated-honeybot counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean_bots: Vec<f64>,
    pub sd_bots: Vec<f64>,
    pub mean_honeybots: Vec<f64>,
    pub sd_honeybots: Vec<f64>,
}

/// Run `config.replicates` independent replicates on one shared graph.
///
/// Replicate `i` draws from a generator seeded with `seed + i` (on a
/// different stream than graph wiring), so results are independent of thread
/// scheduling and fully reproducible.
pub fn run_ensemble(config: &SimConfig) -> Result<(EnsembleStats, Vec<Trajectory>), AbmError> {
    let report = config.validate();
    if !report.is_valid() {
        return Err(AbmError::InvalidConfig(report.violations().join("; ")));
    }
    let graph = generate_graph(&config.dist, config.seed)?;
    let ticks = ((config.horizon / config.tick) - 1e-9).ceil().max(1.0) as usize;

    let trajectories: Vec<Trajectory> = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(u64::from(i)));
            rng.set_stream(1); // graph wiring uses stream 0 of the base seed
            let mut state = AgentState::new(&graph, config, &mut rng);
            let mut times = Vec::with_capacity(ticks + 1);
            let mut states = Vec::with_capacity(ticks + 1);
            times.push(0.0);
            states.push(observe(&state));
            for t in 1..=ticks {
                step(&mut state, config, &mut rng);
                times.push(t as f64 * config.tick);
                states.push(observe(&state));
            }
            Trajectory {
                times,
                states,
                step: config.tick,
                clamped_steps: 0,
            }
        })
        .collect();

    Ok((ensemble_stats(&trajectories), trajectories))
}

fn observe(state: &AgentState) -> PopulationState {
    PopulationState {
        bots: state.bot_count() as f64,
        honeybots: state.infiltrated_count() as f64,
    }
}

fn ensemble_stats(trajectories: &[Trajectory]) -> EnsembleStats {
    let ticks = trajectories[0].times.len();
    let n = trajectories.len() as f64;
    let mut stats = EnsembleStats {
        times: trajectories[0].times.clone(),
        mean_bots: Vec::with_capacity(ticks),
        sd_bots: Vec::with_capacity(ticks),
        mean_honeybots: Vec::with_capacity(ticks),
        sd_honeybots: Vec::with_capacity(ticks),
    };
    for t in 0..ticks {
        let bots: Vec<f64> = trajectories.iter().map(|tr| tr.states[t].bots).collect();
        let hbs: Vec<f64> = trajectories.iter().map(|tr| tr.states[t].honeybots).collect();
        let (mb, sb) = mean_sd(&bots, n);
        let (mh, sh) = mean_sd(&hbs, n);
        stats.mean_bots.push(mb);
        stats.sd_bots.push(sb);
        stats.mean_honeybots.push(mh);
        stats.sd_honeybots.push(sh);
    }
    stats
}

fn mean_sd(values: &[f64], n: f64) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Relative deviation of an ensemble mean from an ODE solution on the
/// overlapping part of their time grids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub times: Vec<f64>,
    pub bots_rel_error: Vec<f64>,
    pub honeybots_rel_error: Vec<f64>,
    pub max_bots_rel_error: f64,
    pub max_honeybots_rel_error: f64,
    pub mean_bots_rel_error: f64,
    pub mean_honeybots_rel_error: f64,
}

impl DivergenceReport {
    /// Time-averaged errors after discarding the first `burn_in` fraction of
    /// the covered interval.
    pub fn trimmed_means(&self, burn_in: f64) -> (f64, f64) {
        let cutoff = self.times.last().copied().unwrap_or(0.0) * burn_in;
        let kept: Vec<usize> = (0..self.times.len())
            .filter(|&i| self.times[i] >= cutoff)
            .collect();
        let n = kept.len().max(1) as f64;
        (
            kept.iter().map(|&i| self.bots_rel_error[i]).sum::<f64>() / n,
            kept.iter().map(|&i| self.honeybots_rel_error[i]).sum::<f64>() / n,
        )
    }
}

/// Compare ensemble means against an ODE trajectory, interpolating the ODE
/// linearly onto the ensemble's tick grid.
///
/// Relative error is `|mean − ode| / max(|ode|, 10⁻⁹)` so exact-zero
/// components (e.g. honeybots at z = 0) compare cleanly.
pub fn compare_to_ode(
    stats: &EnsembleStats,
    trajectory: &Trajectory,
) -> Result<DivergenceReport, AbmError> {
    let (t0, t1) = (trajectory.times[0], *trajectory.times.last().unwrap());
    let eps = 1e-9 * t1.abs().max(1.0);
    let mut report = DivergenceReport {
        times: Vec::new(),
        bots_rel_error: Vec::new(),
        honeybots_rel_error: Vec::new(),
        max_bots_rel_error: 0.0,
        max_honeybots_rel_error: 0.0,
        mean_bots_rel_error: 0.0,
        mean_honeybots_rel_error: 0.0,
    };
    for (i, &t) in stats.times.iter().enumerate() {
        if t < t0 - eps || t > t1 + eps {
            continue;
        }
        let ode = interpolate(trajectory, t.clamp(t0, t1));
        let rb = (stats.mean_bots[i] - ode.bots).abs() / ode.bots.abs().max(1e-9);
        let rh = (stats.mean_honeybots[i] - ode.honeybots).abs() / ode.honeybots.abs().max(1e-9);
        report.times.push(t);
        report.bots_rel_error.push(rb);
        report.honeybots_rel_error.push(rh);
        report.max_bots_rel_error = report.max_bots_rel_error.max(rb);
        report.max_honeybots_rel_error = report.max_honeybots_rel_error.max(rh);
    }
    if report.times.is_empty() {
        return Err(AbmError::DisjointTimeRanges(
            stats.times[0],
            *stats.times.last().unwrap(),
            t0,
            t1,
        ));
    }
    let n = report.times.len() as f64;
    report.mean_bots_rel_error = report.bots_rel_error.iter().sum::<f64>() / n;
    report.mean_honeybots_rel_error = report.honeybots_rel_error.iter().sum::<f64>() / n;
    Ok(report)
}

fn interpolate(trajectory: &Trajectory, t: f64) -> PopulationState {
    let times = &trajectory.times;
    let i = times.partition_point(|&x| x < t).min(times.len() - 1);
    if i == 0 {
        return trajectory.states[0];
    }
    let (ta, tb) = (times[i - 1], times[i]);
    let w = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
    let (a, b) = (trajectory.states[i - 1], trajectory.states[i]);
    PopulationState {
        bots: a.bots + w * (b.bots - a.bots),
        honeybots: a.honeybots + w * (b.honeybots - a.honeybots),
    }
}
