//! Scenario execution: resolve the output directory, run the requested
//! pipeline, and emit the CSV/JSON artifacts plus a `run_report.json`
//! manifest.
//!
//! CSV cells are printed with nine significant digits (`{:.8e}`) so repeated
//! runs of the same config and seed produce byte-identical files; a non-finite
//! value headed for a CSV cell is a runtime error, never silent output.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use sodexo::abm::{compare_to_ode, run_ensemble, EnsembleStats, SimConfig};
use sodexo::dynamics::{equilibria, integrate, PopulationState, Trajectory};
use sodexo::model::{DegreeDistribution, DegreeKind, Validate, ValidationReport};
use sodexo::pas::{deployment_utility, optimal_deployment, optimal_deployment_combined};
use sodexo::stackelberg::{
    aggregates, info_growth_rate, solve_equilibrium, solve_equilibrium_large_botnet,
};

use crate::config::{
    parse_config, AbmBlock, CliError, CompareBlock, DeployBlock, OdeBlock, Scenario,
    StackelbergBlock,
};
use crate::Cli;

/// What a run produced: resolved inputs, timing, and the output manifest.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub scenario: &'static str,
    pub config_path: String,
    pub out_dir: String,
    /// Seed the run actually used (flag > config envelope > sim block).
    pub seed: Option<u64>,
    pub timing_seconds: f64,
    /// Every file this run wrote, relative to `out_dir`.
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    /// The config document as parsed, for provenance.
    pub resolved: serde_json::Value,
}

pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let loaded = parse_config(&cli.config)?;
    let out_dir = resolve_out_dir(cli, loaded.out_dir.as_deref());
    fs::create_dir_all(&out_dir).map_err(|e| {
        CliError::Runtime(format!("cannot create out dir {}: {e}", out_dir.display()))
    })?;

    let mut sink = OutputSink {
        dir: out_dir.clone(),
        files: Vec::new(),
    };
    let mut warnings = Vec::new();
    let seed_override = cli.seed.or(loaded.seed);
    let mut seed_used = seed_override;

    match &loaded.scenario {
        Scenario::Ode(block) => run_ode(block, &mut sink, &mut warnings)?,
        Scenario::Abm(block) => {
            let seed = seed_override.unwrap_or(block.sim.seed);
            seed_used = Some(seed);
            run_abm(block, seed, &mut sink, &mut warnings)?;
        }
        Scenario::Stackelberg(block) => run_stackelberg(block, &mut sink, &mut warnings)?,
        Scenario::Deploy(block) => run_deploy(block, &mut sink, &mut warnings)?,
        Scenario::Compare(block) => {
            let seed = seed_override.unwrap_or(block.sim.seed);
            seed_used = Some(seed);
            run_compare(block, seed, &mut sink, &mut warnings)?;
        }
    }

    let mut outputs = sink.files;
    outputs.push("run_report.json".to_string());
    let report = RunReport {
        scenario: loaded.scenario.name(),
        config_path: cli.config.display().to_string(),
        out_dir: out_dir.display().to_string(),
        seed: seed_used,
        timing_seconds: start.elapsed().as_secs_f64(),
        outputs,
        warnings,
        resolved: loaded.raw,
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Runtime(format!("cannot serialize run report: {e}")))?;
    fs::write(out_dir.join("run_report.json"), text + "\n")
        .map_err(|e| CliError::Runtime(format!("cannot write run_report.json: {e}")))?;
    for name in &report.outputs {
        if !out_dir.join(name).is_file() {
            return Err(CliError::Runtime(format!(
                "manifest lists {name} but the file does not exist"
            )));
        }
    }
    Ok(report)
}

fn resolve_out_dir(cli: &Cli, config_out: Option<&str>) -> PathBuf {
    if let Some(dir) = &cli.out {
        return dir.clone();
    }
    if let Some(dir) = config_out {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("SODEXO_OUT") {
        return PathBuf::from(dir);
    }
    PathBuf::from("out")
}

/// Reject on hard violations; forward soft findings into the run report.
fn require_valid(
    what: &str,
    report: &ValidationReport,
    warnings: &mut Vec<String>,
) -> Result<(), CliError> {
    if !report.is_valid() {
        return Err(CliError::Config(format!(
            "{what}: {}",
            report.violations().join("; ")
        )));
    }
    for w in report.warnings() {
        warnings.push(format!("{what}: {w}"));
    }
    Ok(())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Nine-significant-digit cell formatting; the byte-stability contract for
/// every CSV this binary writes.
fn sig9(v: f64) -> Result<String, CliError> {
    if !v.is_finite() {
        return Err(CliError::Runtime(format!(
            "non-finite value {v} cannot be written to a CSV cell"
        )));
    }
    Ok(format!("{v:.8e}"))
}

struct OutputSink {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputSink {
    fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        fs::write(self.dir.join(name), text)
            .map_err(|e| CliError::Runtime(format!("cannot write {name}: {e}")))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Runtime(format!("cannot serialize {name}: {e}")))?;
        self.write_text(name, &(text + "\n"))
    }
}

fn run_ode(
    block: &OdeBlock,
    sink: &mut OutputSink,
    warnings: &mut Vec<String>,
) -> Result<(), CliError> {
    require_valid("params", &block.params.validate(), warnings)?;
    if !(block.step > 0.0 && block.horizon > 0.0 && block.step <= block.horizon) {
        return Err(CliError::Config(format!(
            "need 0 < step <= horizon, got step = {} and horizon = {}",
            block.step, block.horizon
        )));
    }
    if !(block.initial_bots >= 0.0 && block.initial_bots <= block.params.n()) {
        return Err(CliError::Config(format!(
            "initial_bots = {} out of [0, n_users]",
            block.initial_bots
        )));
    }
    let reserves = block
        .reserves
        .clone()
        .unwrap_or_else(|| vec![block.params.honeybot_reserve]);
    if reserves.is_empty() {
        return Err(CliError::Config("reserves must not be empty".into()));
    }

    let mut entries = Vec::new();
    for &z in &reserves {
        if !z.is_finite() || z < 0.0 {
            return Err(CliError::Config(format!(
                "reserve z = {z} must be a finite nonnegative count"
            )));
        }
        let mut params = block.params.clone();
        params.honeybot_reserve = z;
        let initial = PopulationState {
            bots: block.initial_bots,
            honeybots: 0.0,
        };
        let traj = integrate(&params, initial, block.horizon, block.step).map_err(runtime)?;
        let mut csv = String::from("t,x1,x2\n");
        for i in 0..traj.times.len() {
            csv.push_str(&format!(
                "{},{},{}\n",
                sig9(traj.times[i])?,
                sig9(traj.states[i].bots)?,
                sig9(traj.states[i].honeybots)?
            ));
        }
        sink.write_text(&format!("trajectory_z{z}.csv"), &csv)?;
        entries.push(json!({
            "reserve": z,
            "clamped_steps": traj.clamped_steps,
            "equilibria": equilibria(&params),
        }));
    }
    sink.write_json("equilibria.json", &entries)
}

fn run_stackelberg(
    block: &StackelbergBlock,
    sink: &mut OutputSink,
    warnings: &mut Vec<String>,
) -> Result<(), CliError> {
    require_valid("subtree", &block.subtree.validate(), warnings)?;
    require_valid("honeybot", &block.honeybot.validate(), warnings)?;
    let eq = solve_equilibrium(&block.subtree, &block.honeybot).map_err(runtime)?;
    let agg = aggregates(&block.subtree, &block.honeybot);
    // n·T̄·p̄ enters the growth rate only through the product I_{−H}.
    let growth = info_growth_rate(agg.i_minus_h, 1.0, 1.0, block.honeybot.trust, block.honeybot.beta);
    let large = solve_equilibrium_large_botnet(agg.i_minus_h, agg.c_h, &block.honeybot);
    sink.write_json(
        "equilibrium.json",
        &json!({
            "equilibrium": eq,
            "info_growth_rate": growth,
            "large_botnet": large,
        }),
    )
}

fn run_deploy(
    block: &DeployBlock,
    sink: &mut OutputSink,
    warnings: &mut Vec<String>,
) -> Result<(), CliError> {
    require_valid("params", &block.params.validate(), warnings)?;
    require_valid("econ", &block.econ.validate(), warnings)?;
    let taus = block.taus.clone().unwrap_or_else(|| vec![block.econ.cost]);
    if taus.is_empty() {
        return Err(CliError::Config("taus must not be empty".into()));
    }
    for &tau in &taus {
        if !(tau.is_finite() && tau > 0.0 && tau <= block.econ.benefit) {
            return Err(CliError::Config(format!(
                "sweep cost tau = {tau} out of (0, benefit = {}]",
                block.econ.benefit
            )));
        }
    }

    let plan = optimal_deployment(&block.params, &block.econ).map_err(runtime)?;
    // A real deployment buys whole honeybots: pick the better neighbor integer.
    let lo = plan.reserve.floor().max(0.0);
    let hi = plan.reserve.ceil();
    let u_lo = deployment_utility(lo, &block.params, &block.econ).map_err(runtime)?;
    let u_hi = deployment_utility(hi, &block.params, &block.econ).map_err(runtime)?;
    let (reserve_integer, integer_utility) = if u_hi > u_lo { (hi, u_hi) } else { (lo, u_lo) };
    sink.write_json(
        "plan_closed_form.json",
        &json!({
            "plan": plan,
            "reserve_integer": reserve_integer,
            "integer_utility": integer_utility,
        }),
    )?;

    if block.econ.zeta.is_some() {
        let combined = optimal_deployment_combined(&block.params, &block.econ).map_err(runtime)?;
        sink.write_json("plan_combined.json", &combined)?;
    }

    let mut csv = String::from("tau,p,z_star,utility\n");
    for &tau in &taus {
        let mut econ = block.econ.clone();
        econ.cost = tau;
        let swept = optimal_deployment(&block.params, &econ).map_err(runtime)?;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            sig9(tau)?,
            sig9(econ.benefit)?,
            sig9(swept.reserve)?,
            sig9(swept.predicted_utility)?
        ));
    }
    sink.write_text("deploy_sweep.csv", &csv)
}

fn run_abm(
    block: &AbmBlock,
    seed: u64,
    sink: &mut OutputSink,
    warnings: &mut Vec<String>,
) -> Result<(), CliError> {
    let base = block.sim.build(Some(seed));
    require_valid("sim", &base.validate(), warnings)?;
    check_ode_step(block.ode_step, base.horizon)?;

    match &block.gammas {
        None => ensemble_artifacts(&base, block.ode_step, "", sink).map(|_| ()),
        Some(gammas) => {
            let (d_min, d_max) = match base.dist.kind {
                DegreeKind::ScaleFree { d_min, d_max, .. } => (d_min, d_max),
                DegreeKind::Regular { .. } => {
                    return Err(CliError::Config(
                        "a gammas sweep requires a scale_free degree distribution".into(),
                    ))
                }
            };
            if gammas.is_empty() {
                return Err(CliError::Config("gammas must not be empty".into()));
            }
            for &gamma in gammas {
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(CliError::Config(format!(
                        "scale-free exponent gamma = {gamma} must be positive"
                    )));
                }
                let mut cfg = base.clone();
                cfg.dist =
                    DegreeDistribution::scale_free(cfg.params.n_users, gamma, d_min, d_max);
                require_valid(&format!("sim at gamma = {gamma}"), &cfg.validate(), warnings)?;
                ensemble_artifacts(&cfg, block.ode_step, &format!("_gamma{gamma}"), sink)?;
            }
            Ok(())
        }
    }
}

fn run_compare(
    block: &CompareBlock,
    seed: u64,
    sink: &mut OutputSink,
    warnings: &mut Vec<String>,
) -> Result<(), CliError> {
    let cfg = block.sim.build(Some(seed));
    require_valid("sim", &cfg.validate(), warnings)?;
    check_ode_step(block.ode_step, cfg.horizon)?;

    let (stats, traj) = ensemble_with_baseline(&cfg, block.ode_step)?;
    let mut csv =
        String::from("t,mean_bots,sd_bots,mean_honeybots,sd_honeybots,ode_bots,ode_honeybots\n");
    for i in 0..stats.times.len() {
        let ode = interpolate(&traj, stats.times[i]);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sig9(stats.times[i])?,
            sig9(stats.mean_bots[i])?,
            sig9(stats.sd_bots[i])?,
            sig9(stats.mean_honeybots[i])?,
            sig9(stats.sd_honeybots[i])?,
            sig9(ode.bots)?,
            sig9(ode.honeybots)?
        ));
    }
    sink.write_text("comparison.csv", &csv)?;
    write_divergence(&stats, &traj, "divergence.json", sink)
}

fn check_ode_step(step: f64, horizon: f64) -> Result<(), CliError> {
    if !(step > 0.0 && step <= horizon) {
        return Err(CliError::Config(format!(
            "ode_step = {step} out of (0, horizon = {horizon}]"
        )));
    }
    Ok(())
}

/// Run one ensemble and write its `ensemble{suffix}.csv` and
/// `divergence{suffix}.json`.
fn ensemble_artifacts(
    cfg: &SimConfig,
    ode_step: f64,
    suffix: &str,
    sink: &mut OutputSink,
) -> Result<(), CliError> {
    let (stats, traj) = ensemble_with_baseline(cfg, ode_step)?;
    let mut csv = String::from("t,mean_bots,sd_bots,mean_honeybots,sd_honeybots\n");
    for i in 0..stats.times.len() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            sig9(stats.times[i])?,
            sig9(stats.mean_bots[i])?,
            sig9(stats.sd_bots[i])?,
            sig9(stats.mean_honeybots[i])?,
            sig9(stats.sd_honeybots[i])?
        ));
    }
    sink.write_text(&format!("ensemble{suffix}.csv"), &csv)?;
    write_divergence(&stats, &traj, &format!("divergence{suffix}.json"), sink)
}

/// Ensemble statistics plus the mean-field trajectory at the distribution's
/// realized mean degree — the baseline every divergence report compares to.
fn ensemble_with_baseline(
    cfg: &SimConfig,
    ode_step: f64,
) -> Result<(EnsembleStats, Trajectory), CliError> {
    let (stats, _trajectories) = run_ensemble(cfg).map_err(runtime)?;
    let mut ode_params = cfg.params.clone();
    ode_params.degree = cfg.dist.mean_degree();
    let initial = PopulationState {
        bots: f64::from(cfg.initial_bots),
        honeybots: 0.0,
    };
    let traj = integrate(&ode_params, initial, cfg.horizon, ode_step).map_err(runtime)?;
    Ok((stats, traj))
}

fn write_divergence(
    stats: &EnsembleStats,
    traj: &Trajectory,
    name: &str,
    sink: &mut OutputSink,
) -> Result<(), CliError> {
    let report = compare_to_ode(stats, traj).map_err(runtime)?;
    let (bots_err, honeybots_err) = report.trimmed_means(0.1);
    sink.write_json(
        name,
        &json!({
            "burn_in": 0.1,
            "trimmed_mean_bots_rel_error": bots_err,
            "trimmed_mean_honeybots_rel_error": honeybots_err,
            "report": report,
        }),
    )
}

/// Linear interpolation of an ODE trajectory onto an arbitrary time,
/// clamped to the trajectory's range.
fn interpolate(traj: &Trajectory, t: f64) -> PopulationState {
    let times = &traj.times;
    let t = t.clamp(times[0], *times.last().unwrap());
    let i = times.partition_point(|&x| x < t).min(times.len() - 1);
    if i == 0 {
        return traj.states[0];
    }
    let (ta, tb) = (times[i - 1], times[i]);
    let w = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
    let (a, b) = (traj.states[i - 1], traj.states[i]);
    PopulationState {
        bots: a.bots + w * (b.bots - a.bots),
        honeybots: a.honeybots + w * (b.honeybots - a.honeybots),
    }
}
