//! End-to-end solve pipeline and batch runner.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::time::{Duration, Instant};

use hhc_milp::{backend_by_name, default_backend, relative_gap, MilpBackend, MilpStatus, SolveParams, OPTIMALITY_GAP};
use log::info;
use serde::{Deserialize, Serialize};

use crate::formulation::{plan_value, Formulation};
use crate::heuristics::{improve_timing, mtz_primal_heuristic, ti_primal_heuristic, HeuristicBudget};
use crate::metrics::{plan_metrics, PlanMetrics};
use crate::mode::{Objective, SolveMode, SplitPolicy};
use crate::model::{plan_cost, plan_travel_time, rational_to_f64, Instance, Plan};
use crate::mtz::{build_mtz_model, MtzModel};
use crate::preprocess::{preprocess, tighten_time_windows, PreprocessResult, ReductionStats};
use crate::routing::build_routing_graph_with;
use crate::search::{run, GuardStats, ImproveFn, PrimalFn};
use crate::ti_model::{build_ti_model, TiModel};
use crate::timing::retime;
use crate::verify::check_plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "TI")]
    Ti,
    #[serde(rename = "TI+HTI")]
    TiHti,
    #[serde(rename = "TI+HMTZ")]
    TiHmtz,
    #[serde(rename = "MTZ")]
    Mtz,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Ti, Variant::TiHti, Variant::TiHmtz, Variant::Mtz];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ti => "TI",
            Variant::TiHti => "TI+HTI",
            Variant::TiHmtz => "TI+HMTZ",
            Variant::Mtz => "MTZ",
        }
    }

    pub fn uses_heuristics(self) -> bool {
        matches!(self, Variant::TiHti | Variant::TiHmtz)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown variant `{0}` (expected TI, TI+HTI, TI+HMTZ or MTZ)")]
pub struct UnknownVariant(pub String);

impl FromStr for Variant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace(['-', '_'], "+");
        Variant::ALL.iter().copied().find(|v| v.name() == norm).ok_or_else(|| UnknownVariant(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub variant: Variant,
    pub mode: SolveMode,
    pub wall_limit: Duration,
    /// Share of the wall limit available to heuristics.
    pub heuristic_fraction: f64,
    /// Backend name; `None` uses the environment default.
    pub backend: Option<String>,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            variant: Variant::Ti,
            mode: SolveMode::default(),
            wall_limit: Duration::from_secs(60),
            heuristic_fraction: 0.1,
            backend: None,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn new(variant: Variant, mode: SolveMode) -> Self {
        SolveConfig { variant, mode, ..SolveConfig::default() }
    }

    pub fn with_wall_limit(mut self, limit: Duration) -> Self {
        self.wall_limit = limit;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    NoSolution,
    Error,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NoSolution => "no-solution",
            SolveStatus::Error => "error",
        }
    }

    /// Process exit code for the status.
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::Optimal => 0,
            SolveStatus::Feasible => 1,
            SolveStatus::Infeasible => 3,
            SolveStatus::NoSolution => 4,
            SolveStatus::Error => 5,
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub backend: String,
    pub elapsed_seconds: f64,
    pub first_solution_seconds: Option<f64>,
    pub nodes: u64,
    pub lp_solves: u64,
    pub model_variables: usize,
    pub model_constraints: usize,
    pub heuristic_budget_seconds: f64,
    pub heuristic_seconds: f64,
    pub heuristic_calls: u64,
    pub heuristic_successes: u64,
    pub improvement_calls: u64,
    pub improvements: u64,
    pub rejected_incumbents: u64,
    pub extraction_failures: u64,
    pub verifier_rejections: u64,
    pub reductions: Option<ReductionStats>,
}

mod plan_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::io::{plan_from_value, plan_to_value};
    use crate::model::Plan;

    pub fn serialize<S: Serializer>(plan: &Option<Plan>, s: S) -> Result<S::Ok, S::Error> {
        plan.as_ref().map(plan_to_value).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Plan>, D::Error> {
        let value = Option::<serde_json::Value>::deserialize(d)?;
        value.map(plan_from_value).transpose().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub instance: Option<String>,
    pub variant: Variant,
    pub split_policy: String,
    pub objective_mode: String,
    pub preprocessed: bool,
    pub status: SolveStatus,
    /// Value of the plan under the solve objective.
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    /// Operational cost and travel time of the plan, whatever the objective.
    pub cost: Option<f64>,
    pub travel_time: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visit_profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub staff_profile: Option<String>,
    #[serde(default)]
    pub metrics: Option<PlanMetrics>,
    #[serde(with = "plan_json", default)]
    pub plan: Option<Plan>,
    pub stats: SolveStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SolveResult {
    fn empty(instance: &Instance, config: &SolveConfig) -> Self {
        SolveResult {
            instance: instance.meta.name.clone(),
            variant: config.variant,
            split_policy: config.mode.split_policy.name().to_string(),
            objective_mode: config.mode.objective.name().to_string(),
            preprocessed: config.mode.preprocessed && config.variant != Variant::Mtz,
            status: SolveStatus::Error,
            objective: None,
            bound: None,
            gap: None,
            cost: None,
            travel_time: None,
            visit_profile: instance.meta.visit_profile.clone(),
            staff_profile: instance.meta.staff_profile.clone(),
            metrics: None,
            plan: None,
            stats: SolveStats::default(),
            error: None,
        }
    }

    fn failed(instance: &Instance, config: &SolveConfig, message: String) -> Self {
        SolveResult { error: Some(message), ..Self::empty(instance, config) }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("serializable");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

fn backend_for(config: &SolveConfig) -> Result<Box<dyn MilpBackend>, String> {
    match &config.backend {
        Some(name) => backend_by_name(name),
        None => default_backend(),
    }
    .map_err(|e| e.to_string())
}

/// Solves one instance. Failures of any stage, including panics, come back
/// as results with status `error`.
pub fn solve(instance: &Instance, config: &SolveConfig) -> SolveResult {
    match catch_unwind(AssertUnwindSafe(|| solve_inner(instance, config))) {
        Ok(r) => r,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            SolveResult::failed(instance, config, format!("internal error: {msg}"))
        }
    }
}

fn solve_inner(instance: &Instance, config: &SolveConfig) -> SolveResult {
    let clock = Instant::now();
    if let Err(e) = instance.validate() {
        return SolveResult::failed(instance, config, format!("invalid instance: {e}"));
    }
    if !(0.0..=1.0).contains(&config.heuristic_fraction) {
        return SolveResult::failed(instance, config, "heuristic fraction must lie in [0, 1]".into());
    }
    let backend = match backend_for(config) {
        Ok(b) => b,
        Err(e) => return SolveResult::failed(instance, config, e),
    };
    let mode = config.mode;
    let budget = HeuristicBudget::new(config.wall_limit.mul_f64(config.heuristic_fraction));
    let mut result = SolveResult::empty(instance, config);

    let remaining = |clock: &Instant| config.wall_limit.saturating_sub(clock.elapsed());
    let mut reductions = None;
    let built = match config.variant {
        Variant::Mtz => {
            let tight = tighten_time_windows(instance);
            let graph = build_routing_graph_with(instance, &tight.windows);
            Built::Mtz(build_mtz_model(instance, &graph, mode))
        }
        _ => {
            let pre = if mode.preprocessed { preprocess(instance) } else { PreprocessResult::raw(instance) };
            reductions = Some(pre.stats.clone());
            Built::Ti(build_ti_model(instance, &pre, mode))
        }
    };
    let form: &dyn Formulation = match &built {
        Built::Mtz(m) => m,
        Built::Ti(m) => m,
    };
    result.stats.reductions = reductions;
    result.stats.model_variables = form.model().num_vars();
    result.stats.model_constraints = form.model().num_constraints();
    result.stats.backend = backend.name().to_string();
    result.stats.heuristic_budget_seconds = budget.total().as_secs_f64();
    info!(
        "{}: {} variables, {} constraints, backend {}",
        config.variant,
        result.stats.model_variables,
        result.stats.model_constraints,
        backend.name()
    );

    let params = SolveParams::default().with_time_limit(remaining(&clock));
    let ti = match &built {
        Built::Ti(m) => Some(m),
        Built::Mtz(_) => None,
    };
    let mut primal_closure = |values: &[f64]| -> Option<Plan> {
        let ti = ti?;
        match config.variant {
            Variant::TiHti => ti_primal_heuristic(values, ti, instance, &budget),
            Variant::TiHmtz => mtz_primal_heuristic(values, ti, instance, &budget),
            _ => None,
        }
    };
    let mut improve_closure = |plan: &Plan| -> Plan { improve_timing(plan, instance, mode.objective, &budget) };
    let (primal, improve): (Option<&mut PrimalFn<'_>>, Option<&mut ImproveFn<'_>>) = if config.variant.uses_heuristics() {
        (Some(&mut primal_closure), Some(&mut improve_closure))
    } else {
        (None, None)
    };
    let out = match run(form, instance, backend.as_ref(), &params, clock, primal, improve) {
        Ok(out) => out,
        Err(e) => return SolveResult::failed(instance, config, format!("backend failure: {e}")),
    };

    let s = &out.outcome.stats;
    result.stats.nodes = s.nodes;
    result.stats.lp_solves = s.lp_solves;
    result.stats.rejected_incumbents = s.rejected_incumbents;
    fill_guard_stats(&mut result.stats, &out.stats);
    result.stats.heuristic_seconds = budget.consumed().as_secs_f64();
    result.stats.first_solution_seconds = out.first_found.map(|d| d.as_secs_f64());

    let mut plan = out.best.map(|(p, _)| p);
    if mode.objective == Objective::Travel {
        // Re-time the fixed routes for operational cost; travel is unaffected.
        plan = plan.map(|p| retime(instance, &p).filter(|r| check_plan(r, instance).is_ok()).unwrap_or(p));
    }
    result.bound = out.outcome.bound;
    result.status = match (out.outcome.status, &plan) {
        (MilpStatus::Infeasible, None) => SolveStatus::Infeasible,
        (MilpStatus::NoSolution, None) => SolveStatus::NoSolution,
        (_, None) if out.stats.verifier_rejections > 0 || out.stats.extraction_failures > 0 && !backend.supports_hooks() => {
            result.error = Some("no extracted plan passed the verifier".into());
            SolveStatus::Error
        }
        (MilpStatus::Optimal | MilpStatus::Feasible, None) => {
            result.error = Some("backend reported a solution that could not be extracted".into());
            SolveStatus::Error
        }
        (status, Some(_)) => {
            if status == MilpStatus::Optimal {
                SolveStatus::Optimal
            } else {
                SolveStatus::Feasible
            }
        }
    };
    if let Some(plan) = &plan {
        let report = check_plan(plan, instance);
        if !report.is_ok() {
            result.status = SolveStatus::Error;
            result.error = Some(format!("plan failed verification: {:?}", report.classes()));
        }
        let value = plan_value(plan, instance, mode.objective);
        result.objective = Some(value);
        result.cost = plan_cost(plan, instance).ok().map(rational_to_f64);
        result.travel_time = plan_travel_time(plan, instance).ok();
        result.metrics = Some(plan_metrics(plan, instance));
        if let Some(b) = result.bound {
            let b = b.min(value);
            result.bound = Some(b);
            result.gap = Some(relative_gap(value, b));
            if result.status == SolveStatus::Optimal && relative_gap(value, b) > OPTIMALITY_GAP {
                result.status = SolveStatus::Feasible;
            }
        }
    }
    if let Some(plan) = plan.as_mut() {
        plan.objective = result.objective;
        plan.bound = result.bound;
        plan.gap = result.gap;
        plan.status = Some(result.status.name().to_string());
    }
    result.plan = plan;
    result.stats.elapsed_seconds = clock.elapsed().as_secs_f64();
    result
}

enum Built {
    Mtz(MtzModel),
    Ti(TiModel),
}

fn fill_guard_stats(stats: &mut SolveStats, g: &GuardStats) {
    stats.heuristic_calls = g.primal_calls;
    stats.heuristic_successes = g.primal_successes;
    stats.improvement_calls = g.improve_calls;
    stats.improvements = g.improvements;
    stats.extraction_failures = g.extraction_failures;
    stats.verifier_rejections = g.verifier_rejections;
}

/// Solves every instance independently, preserving input order.
pub fn batch_solve(instances: &[Instance], config: &SolveConfig, jobs: Option<usize>) -> Vec<SolveResult> {
    crate::par::with_jobs(jobs, || crate::par::map(instances, |inst| solve(inst, config)))
}

/// Convenience for split-policy comparisons.
pub fn with_policy(config: &SolveConfig, policy: SplitPolicy) -> SolveConfig {
    SolveConfig { mode: config.mode.with_split(policy), ..config.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{guard_rail, i1, infeasible_medical, split_benefit, GuardRailOptions};
    use crate::oracle::{brute_force_optimal, OracleOutcome};

    fn config(variant: Variant, mode: SolveMode) -> SolveConfig {
        SolveConfig { backend: Some("bnb".into()), ..SolveConfig::new(variant, mode).with_wall_limit(Duration::from_secs(60)) }
    }

    #[test]
    fn i1_costs_180_for_every_variant() {
        for variant in Variant::ALL {
            for mode in [SolveMode::default(), SolveMode::raw()] {
                let r = solve(&i1(), &config(variant, mode));
                assert_eq!(r.status, SolveStatus::Optimal, "{variant} {mode:?}: {:?}", r.error);
                assert!((r.cost.unwrap() - 180.0).abs() < 1e-6, "{variant}: {:?}", r.cost);
            }
        }
    }

    #[test]
    fn infeasible_instance_is_reported() {
        for variant in Variant::ALL {
            let r = solve(&infeasible_medical(), &config(variant, SolveMode::default()));
            assert_eq!(r.status, SolveStatus::Infeasible, "{variant}");
            assert!(r.plan.is_none());
        }
    }

    #[test]
    fn splitting_pays_off() {
        let mode = SolveMode::default();
        let opt = solve(&split_benefit(), &config(Variant::Ti, mode));
        let none = solve(&split_benefit(), &config(Variant::Ti, mode.with_split(SplitPolicy::Forbid)));
        assert!((opt.cost.unwrap() - 240.0).abs() < 1e-6);
        assert!((none.cost.unwrap() - 300.0).abs() < 1e-6);
    }

    #[test]
    fn matches_oracle_on_small_instances() {
        let opts = GuardRailOptions::default();
        for seed in 0..6 {
            let inst = guard_rail(seed, &opts);
            let expected = match brute_force_optimal(&inst, Objective::Cost, SplitPolicy::Optimize) {
                OracleOutcome::Optimal { value, .. } => Some(rational_to_f64(value)),
                OracleOutcome::Infeasible => None,
                OracleOutcome::TooLarge(m) => panic!("{m}"),
            };
            for variant in Variant::ALL {
                for mode in [SolveMode::default(), SolveMode::raw()] {
                    let r = solve(&inst, &config(variant, mode));
                    match expected {
                        Some(v) => {
                            assert_eq!(r.status, SolveStatus::Optimal, "seed {seed} {variant} {mode:?}: {:?}", r.error);
                            assert!((r.cost.unwrap() - v).abs() < 1e-6, "seed {seed} {variant} {mode:?}: {:?} vs {v}", r.cost);
                        }
                        None => assert_eq!(r.status, SolveStatus::Infeasible, "seed {seed} {variant} {mode:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn result_json_round_trips() {
        let r = solve(&i1(), &config(Variant::Ti, SolveMode::default()));
        let back = SolveResult::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn variant_names_parse() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("ti-hmtz".parse::<Variant>().unwrap(), Variant::TiHmtz);
        assert!("xyz".parse::<Variant>().is_err());
    }

    #[test]
    fn unknown_backend_is_an_error() {
        let cfg = SolveConfig { backend: Some("nope".into()), ..config(Variant::Ti, SolveMode::default()) };
        let r = solve(&i1(), &cfg);
        assert_eq!(r.status, SolveStatus::Error);
        assert!(r.error.is_some());
    }
}
