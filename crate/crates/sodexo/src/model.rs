//! Shared parameter types, unit conventions, and validation.
//!
//! Every other module consumes these types. Conventions used throughout:
//!
//! * Population-level rates (`spam_rate`, `clean_rate`, `detect_rate`) are
//!   per *day*; the game layer in [`crate::stackelberg`] works in an abstract
//!   per-second rate unit, bridged by the unitless activity factor
//!   `p̄ = α·r` (see [`crate::pas::activity_link`]).
//! * Malicious links live in a universe of `M` identifiers; each bot holds a
//!   set of `k = link_fraction·M` of them. Only the ratio `k/M` enters the
//!   population dynamics, but `M` itself is needed by the deployment
//!   optimizer, so both are stored.
//! * Validation is report-based: hard invariant breaks are violations, the
//!   soft modeling assumptions (`k ≪ M`, `z ≪ N`) degrade gracefully and
//!   only produce warnings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Severity of a single validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// A hard invariant is broken; downstream operations may refuse the input.
    Violation,
    /// A soft modeling assumption is stressed; results degrade gracefully.
    Warning,
}

/// One validation finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

/// Result of validating a parameter set.
///
/// Empty report ⇔ every invariant holds and no soft bound is stressed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    fn violation(&mut self, message: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Violation,
            message: message.into(),
        });
    }

    fn warning(&mut self, message: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            message: message.into(),
        });
    }

    /// True when no hard invariant is broken (warnings allowed).
    pub fn is_valid(&self) -> bool {
        self.findings
            .iter()
            .all(|f| f.severity != Severity::Violation)
    }

    /// Messages of all hard violations.
    pub fn violations(&self) -> Vec<&str> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Violation)
            .map(|f| f.message.as_str())
            .collect()
    }

    /// Messages of all warnings.
    pub fn warnings(&self) -> Vec<&str> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Warning)
            .map(|f| f.message.as_str())
            .collect()
    }
}

/// Types that can report on their own invariants.
///
/// `validate` is pure and idempotent: the same input always yields the same
/// report, and validating twice changes nothing.
pub trait Validate {
    fn validate(&self) -> ValidationReport;
}

/// One command-and-control bot's view of its subtree.
///
/// Index `j` runs over the `bot_count()` subordinate bots: `trust[j]` is the
/// C&C bot's [0,1] quality assessment of bot `j`, `response_rates[j]` the rate
/// at which bot `j` responds, and `costs[j]` the channel cost per message sent
/// to it. `capacity` bounds the cost-weighted total command rate and `alpha`
/// sets the marginal-utility scale of the log objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubtreeState {
    pub trust: Vec<f64>,
    pub response_rates: Vec<f64>,
    pub costs: Vec<f64>,
    pub capacity: f64,
    pub alpha: f64,
}

impl SubtreeState {
    /// Number of subordinate bots (`n_i`).
    pub fn bot_count(&self) -> usize {
        self.trust.len()
    }
}

impl Validate for SubtreeState {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.trust.len();
        if n == 0 {
            report.violation("subtree must contain at least one bot");
        }
        if self.response_rates.len() != n || self.costs.len() != n {
            report.violation(format!(
                "vector lengths disagree: trust {}, response_rates {}, costs {}",
                n,
                self.response_rates.len(),
                self.costs.len()
            ));
            return report; // indexing below would be meaningless
        }
        for (j, &t) in self.trust.iter().enumerate() {
            if !(0.0..=1.0).contains(&t) {
                report.violation(format!("trust[{j}] = {t} out of [0,1]"));
            }
        }
        for (j, &p) in self.response_rates.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                report.violation(format!("response_rates[{j}] = {p} must be finite and >= 0"));
            }
        }
        for (j, &c) in self.costs.iter().enumerate() {
            if !c.is_finite() || c <= 0.0 {
                report.violation(format!("costs[{j}] = {c} must be finite and > 0"));
            }
        }
        if !self.capacity.is_finite() || self.capacity <= 0.0 {
            report.violation(format!("capacity = {} must be finite and > 0", self.capacity));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            report.violation(format!("alpha = {} must be finite and > 0", self.alpha));
        }
        // Active-trusted condition: every subordinate contributes a nonzero
        // trust-weighted response, otherwise the allocation objective ignores it.
        for j in 0..n.min(self.response_rates.len()) {
            if self.trust[j] * self.response_rates[j] == 0.0 {
                report.violation(format!(
                    "bot {j} has trust*response_rate = 0 (active-trusted condition)"
                ));
            }
        }
        report
    }
}

/// Honeybot-side game parameters.
///
/// `beta` is the per-message response cost, `xi` the satiation offset added
/// inside the honeybot's log utility, `trust`/`cost` the honeybot's entries in
/// the C&C bot's subtree, and `rate_cap` the cap on the honeybot's response
/// rate (`None` means the default cap of `1000/beta`, large enough that it
/// never binds at sane parameters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoneybotConfig {
    pub beta: f64,
    pub xi: f64,
    #[serde(default)]
    pub rate_cap: Option<f64>,
    pub trust: f64,
    pub cost: f64,
}

impl HoneybotConfig {
    /// Effective response-rate cap: the configured value, or `1000/beta`.
    pub fn effective_rate_cap(&self) -> f64 {
        self.rate_cap.unwrap_or(1e3 / self.beta)
    }
}

impl Validate for HoneybotConfig {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if !self.beta.is_finite() || self.beta <= 0.0 {
            report.violation(format!("beta = {} must be finite and > 0", self.beta));
        }
        if !self.xi.is_finite() || self.xi < 0.0 {
            report.violation(format!("xi = {} must be finite and >= 0", self.xi));
        }
        if let Some(cap) = self.rate_cap {
            if !cap.is_finite() || cap <= 0.0 {
                report.violation(format!("rate_cap = {cap} must be finite and > 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.trust) {
            report.violation(format!("trust = {} out of [0,1]", self.trust));
        }
        if !self.cost.is_finite() || self.cost <= 0.0 {
            report.violation(format!("cost = {} must be finite and > 0", self.cost));
        }
        report
    }
}

/// Macroscopic population-model constants.
///
/// `n_users` (`N`) social-network accounts of average `degree` (`d`); each bot
/// spams every neighbor at `spam_rate` (`r`) per day; a user follows a
/// malicious link with probability `click_prob` (`q`); bots are cleaned at
/// `clean_rate` (`μ₁`) and infiltrated honeybots detected and removed at
/// `detect_rate` (`μ₂`), both per day. `honeybot_reserve` (`z`) is the number
/// of not-yet-infiltrated honeybots kept in the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationParams {
    pub n_users: u64,
    pub degree: f64,
    pub spam_rate: f64,
    pub click_prob: f64,
    /// Fraction `k/M` of the link universe held by each bot.
    pub link_fraction: f64,
    /// Size `M` of the malicious-link universe.
    #[serde(default = "default_link_universe")]
    pub link_universe: f64,
    pub clean_rate: f64,
    pub detect_rate: f64,
    #[serde(default)]
    pub honeybot_reserve: f64,
}

fn default_link_universe() -> f64 {
    1e4
}

impl PopulationParams {
    /// `N` as a float.
    pub fn n(&self) -> f64 {
        self.n_users as f64
    }

    /// Per-bot infection pressure `r·d·q` (per day).
    pub fn rdq(&self) -> f64 {
        self.spam_rate * self.degree * self.click_prob
    }

    /// Per-bot spam throughput `r·d` (messages per day).
    pub fn rd(&self) -> f64 {
        self.spam_rate * self.degree
    }

    /// Absolute per-bot link count `k = link_fraction·M`.
    pub fn k(&self) -> f64 {
        self.link_fraction * self.link_universe
    }
}

impl Validate for PopulationParams {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.n_users == 0 {
            report.violation("n_users must be >= 1");
        }
        if !self.degree.is_finite() || self.degree <= 0.0 {
            report.violation(format!("degree = {} must be finite and > 0", self.degree));
        }
        if !self.spam_rate.is_finite() || self.spam_rate <= 0.0 {
            report.violation(format!(
                "spam_rate = {} must be finite and > 0",
                self.spam_rate
            ));
        }
        if !self.click_prob.is_finite() || self.click_prob <= 0.0 || self.click_prob > 1.0 {
            report.violation(format!("click_prob = {} out of (0,1]", self.click_prob));
        }
        if !self.link_fraction.is_finite() || self.link_fraction <= 0.0 || self.link_fraction > 0.1
        {
            report.violation(format!(
                "link_fraction = {} out of (0, 0.1] (per-bot links must be a small fraction of the universe)",
                self.link_fraction
            ));
        } else if self.link_fraction > 0.05 {
            report.warning(format!(
                "link_fraction = {} above 0.05: the k << M approximation is stressed",
                self.link_fraction
            ));
        }
        if !self.link_universe.is_finite() || self.link_universe <= 0.0 {
            report.violation(format!(
                "link_universe = {} must be finite and > 0",
                self.link_universe
            ));
        }
        if !self.clean_rate.is_finite() || self.clean_rate <= 0.0 {
            report.violation(format!(
                "clean_rate = {} must be finite and > 0",
                self.clean_rate
            ));
        }
        if !self.detect_rate.is_finite() || self.detect_rate <= 0.0 {
            report.violation(format!(
                "detect_rate = {} must be finite and > 0",
                self.detect_rate
            ));
        }
        if !self.honeybot_reserve.is_finite() || self.honeybot_reserve < 0.0 {
            report.violation(format!(
                "honeybot_reserve = {} must be finite and >= 0",
                self.honeybot_reserve
            ));
        } else if self.honeybot_reserve > 0.01 * self.n() {
            report.warning(format!(
                "A8 violated: honeybot_reserve = {} exceeds 1% of n_users = {}",
                self.honeybot_reserve, self.n_users
            ));
        }
        report
    }
}

/// Degree-distribution family for graph generation and the
/// heterogeneous-degree population model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DegreeKind {
    /// Every node has the same degree.
    Regular { degree: u32 },
    /// P(degree = d) ∝ d^(−gamma) on [d_min, d_max].
    ScaleFree { gamma: f64, d_min: u32, d_max: u32 },
}

/// A degree distribution resolved to integer per-class counts.
///
/// `class_counts[d] = N_d`, the number of accounts of degree `d`;
/// counts always sum to the population size the distribution was built for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeDistribution {
    pub kind: DegreeKind,
    pub class_counts: BTreeMap<u32, u64>,
}

impl DegreeDistribution {
    /// All `n_users` nodes at one degree.
    pub fn regular(n_users: u64, degree: u32) -> Self {
        let mut class_counts = BTreeMap::new();
        class_counts.insert(degree, n_users);
        DegreeDistribution {
            kind: DegreeKind::Regular { degree },
            class_counts,
        }
    }

    /// Truncated power law with P(d) ∝ d^(−gamma) on [d_min, d_max].
    ///
    /// Expected class counts are rounded to integers by largest remainder so
    /// they sum to `n_users` exactly.
    pub fn scale_free(n_users: u64, gamma: f64, d_min: u32, d_max: u32) -> Self {
        assert!(d_min >= 1 && d_min <= d_max, "need 1 <= d_min <= d_max");
        assert!(gamma.is_finite() && gamma > 0.0, "need gamma > 0");
        let weights: Vec<f64> = (d_min..=d_max)
            .map(|d| (d as f64).powf(-gamma))
            .collect();
        let total: f64 = weights.iter().sum();
        let expected: Vec<f64> = weights
            .iter()
            .map(|w| w / total * n_users as f64)
            .collect();

        // Largest-remainder rounding: floor everything, then hand the leftover
        // units to the classes with the biggest fractional parts.
        let mut counts: Vec<u64> = expected.iter().map(|e| e.floor() as u64).collect();
        let assigned: u64 = counts.iter().sum();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = expected[a] - expected[a].floor();
            let fb = expected[b] - expected[b].floor();
            fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().take((n_users - assigned) as usize) {
            counts[i] += 1;
        }

        let class_counts = (d_min..=d_max)
            .zip(counts)
            .filter(|&(_, c)| c > 0)
            .collect();
        DegreeDistribution {
            kind: DegreeKind::ScaleFree {
                gamma,
                d_min,
                d_max,
            },
            class_counts,
        }
    }

    /// Total node count Σ_d N_d.
    pub fn total_nodes(&self) -> u64 {
        self.class_counts.values().sum()
    }

    /// Average degree d̄ = Σ_d d·N_d / Σ_d N_d.
    pub fn mean_degree(&self) -> f64 {
        let total = self.total_nodes();
        if total == 0 {
            return 0.0;
        }
        let weighted: f64 = self
            .class_counts
            .iter()
            .map(|(&d, &c)| d as f64 * c as f64)
            .sum();
        weighted / total as f64
    }
}

impl Validate for DegreeDistribution {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.class_counts.is_empty() || self.total_nodes() == 0 {
            report.violation("degree distribution has no nodes");
        }
        if self.class_counts.keys().any(|&d| d == 0) {
            report.violation("degree 0 class is not allowed (isolated nodes)");
        }
        match self.kind {
            DegreeKind::Regular { degree } => {
                if degree == 0 {
                    report.violation("regular degree must be >= 1");
                }
                if self.class_counts.len() > 1 {
                    report.violation("regular distribution must have a single degree class");
                }
            }
            DegreeKind::ScaleFree { gamma, d_min, d_max } => {
                if !gamma.is_finite() || gamma <= 0.0 {
                    report.violation(format!("gamma = {gamma} must be finite and > 0"));
                }
                if d_min == 0 || d_min > d_max {
                    report.violation(format!("need 1 <= d_min <= d_max, got [{d_min}, {d_max}]"));
                }
                let total = self.total_nodes();
                if u64::from(d_max) >= total && total > 0 {
                    report.violation(format!(
                        "d_max = {d_max} must be below the node count {total}"
                    ));
                }
            }
        }
        report
    }
}

/// Economics of honeybot deployment: per-honeybot `benefit` (`p`) of an
/// infiltrated honeybot, per-honeybot maintenance `cost` (`τ`), and the
/// exploitation-dilution constant `zeta` (`ζ`) used only by the combined
/// optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentEconomics {
    pub benefit: f64,
    pub cost: f64,
    #[serde(default)]
    pub zeta: Option<f64>,
}

impl Validate for DeploymentEconomics {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if !self.benefit.is_finite() || self.benefit <= 0.0 {
            report.violation(format!("benefit = {} must be finite and > 0", self.benefit));
        }
        if !self.cost.is_finite() || self.cost <= 0.0 {
            report.violation(format!("cost = {} must be finite and > 0", self.cost));
        }
        if let Some(zeta) = self.zeta {
            if !zeta.is_finite() || zeta <= 0.0 {
                report.violation(format!("zeta = {zeta} must be finite and > 0"));
            }
        }
        if self.benefit.is_finite() && self.cost.is_finite() && self.benefit <= self.cost {
            report.warning(format!(
                "benefit = {} does not exceed cost = {}: optimal deployment is zero",
                self.benefit, self.cost
            ));
        }
        report
    }
}

/// Parameters of the baseline large-network experiment: N = 10⁶ users of
/// degree 100, r = 0.4 spam per neighbor per day, q = 1% click probability,
/// k/M = 0.01, bots cleaned in 5 days and honeybots detected in 2 on average.
pub fn reference_params() -> PopulationParams {
    PopulationParams {
        n_users: 1_000_000,
        degree: 100.0,
        spam_rate: 0.4,
        click_prob: 0.01,
        link_fraction: 0.01,
        link_universe: 1e4,
        clean_rate: 0.2,
        detect_rate: 0.5,
        honeybot_reserve: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_params_are_valid() {
        let report = reference_params().validate();
        assert!(
            report.findings.is_empty(),
            "reference parameters should validate cleanly, got {:?}",
            report.findings
        );
    }

    #[test]
    fn trust_out_of_range_is_a_violation() {
        let state = SubtreeState {
            trust: vec![1.5],
            response_rates: vec![1.0],
            costs: vec![1.0],
            capacity: 1.0,
            alpha: 1.0,
        };
        let report = state.validate();
        assert!(!report.is_valid());
        assert!(
            report.violations().iter().any(|m| m.contains("trust")),
            "expected a trust violation, got {:?}",
            report.findings
        );
    }

    #[test]
    fn oversized_reserve_only_warns() {
        let mut params = reference_params();
        params.honeybot_reserve = 0.5 * params.n();
        let report = params.validate();
        assert!(report.is_valid(), "soft A8 bound must not hard-fail");
        assert!(
            report.warnings().iter().any(|m| m.contains("A8")),
            "expected an A8 warning, got {:?}",
            report.findings
        );
    }

    #[test]
    fn link_fraction_bounds() {
        let mut params = reference_params();
        params.link_fraction = 0.07;
        assert!(params.validate().is_valid());
        assert_eq!(params.validate().warnings().len(), 1);

        params.link_fraction = 0.2;
        assert!(!params.validate().is_valid());
    }

    #[test]
    fn validate_is_pure() {
        let params = reference_params();
        assert_eq!(params.validate(), params.validate());
    }

    #[test]
    fn zero_response_rate_breaks_active_trusted() {
        let state = SubtreeState {
            trust: vec![1.0, 1.0],
            response_rates: vec![1.0, 0.0],
            costs: vec![1.0, 1.0],
            capacity: 1.0,
            alpha: 1.0,
        };
        assert!(!state.validate().is_valid());
    }

    #[test]
    fn scale_free_counts_sum_exactly() {
        let dist = DegreeDistribution::scale_free(10_000, 2.5, 2, 500);
        assert_eq!(dist.total_nodes(), 10_000);
        assert!(dist.validate().is_valid());
        let mean = dist.mean_degree();
        assert!(mean > 2.0 && mean < 500.0, "mean degree {mean} out of range");
    }

    #[test]
    fn regular_distribution_is_single_class() {
        let dist = DegreeDistribution::regular(1000, 4);
        assert_eq!(dist.class_counts.len(), 1);
        assert_eq!(dist.mean_degree(), 4.0);
        assert!(dist.validate().is_valid());
    }

    #[test]
    fn default_rate_cap_scales_inversely_with_beta() {
        let hb = HoneybotConfig {
            beta: 0.5,
            xi: 0.0,
            rate_cap: None,
            trust: 1.0,
            cost: 1.0,
        };
        assert_eq!(hb.effective_rate_cap(), 2000.0);
    }
}
