//! Running a formulation through a backend while keeping track of the best
//! verified plan.

use std::time::{Duration, Instant};

use hhc_milp::{IncumbentDecision, Injection, MilpBackend, MilpOutcome, SearchHooks, SolveParams};
use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::formulation::{plan_value, Formulation};
use crate::model::{Instance, Plan};
use crate::verify::check_plan;

pub type PrimalFn<'a> = dyn FnMut(&[f64]) -> Option<Plan> + 'a;
pub type ImproveFn<'a> = dyn FnMut(&Plan) -> Plan + 'a;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GuardStats {
    pub extraction_failures: u64,
    pub verifier_rejections: u64,
    pub primal_calls: u64,
    pub primal_successes: u64,
    pub improve_calls: u64,
    pub improvements: u64,
}

/// Search hooks that turn incumbents into plans, reject incumbents whose
/// plans cannot be timed, and run the optional heuristics.
pub struct Guard<'a, 'h> {
    form: &'a dyn Formulation,
    instance: &'a Instance,
    clock: Instant,
    pub best: Option<(Plan, f64)>,
    /// Time of the first verified plan, measured from `clock`.
    pub first_found: Option<Duration>,
    pub stats: GuardStats,
    primal: Option<&'h mut PrimalFn<'h>>,
    improve: Option<&'h mut ImproveFn<'h>>,
}

impl<'a, 'h> Guard<'a, 'h> {
    pub fn new(form: &'a dyn Formulation, instance: &'a Instance, clock: Instant) -> Self {
        Guard { form, instance, clock, best: None, first_found: None, stats: GuardStats::default(), primal: None, improve: None }
    }

    pub fn with_primal(mut self, primal: Option<&'h mut PrimalFn<'h>>) -> Self {
        self.primal = primal;
        self
    }

    pub fn with_improve(mut self, improve: Option<&'h mut ImproveFn<'h>>) -> Self {
        self.improve = improve;
        self
    }

    fn improved(&mut self, plan: Plan) -> Plan {
        match self.improve.as_deref_mut() {
            Some(f) => {
                self.stats.improve_calls += 1;
                let before = plan_value(&plan, self.instance, self.form.objective());
                let better = f(&plan);
                if plan_value(&better, self.instance, self.form.objective()) < before - 1e-9 {
                    self.stats.improvements += 1;
                }
                better
            }
            None => plan,
        }
    }

    /// Records a verified plan; returns its value.
    pub fn offer(&mut self, plan: Plan) -> Option<f64> {
        let report = check_plan(&plan, self.instance);
        if !report.is_ok() {
            self.stats.verifier_rejections += 1;
            warn!("plan rejected by the verifier: {:?}", report.violations);
            return None;
        }
        let value = plan_value(&plan, self.instance, self.form.objective());
        if self.first_found.is_none() {
            self.first_found = Some(self.clock.elapsed());
        }
        if self.best.as_ref().is_none_or(|(_, b)| value < *b - 1e-9) {
            self.best = Some((plan, value));
        }
        Some(value)
    }
}

impl SearchHooks for Guard<'_, '_> {
    fn on_fractional(&mut self, values: &[f64], _lp_bound: f64) -> Option<Injection> {
        if self.best.is_some() {
            return None;
        }
        let primal = self.primal.as_deref_mut()?;
        self.stats.primal_calls += 1;
        let plan = primal(values)?;
        let plan = self.improved(plan);
        let value = self.offer(plan)?;
        self.stats.primal_successes += 1;
        Some(Injection { objective: value, values: None })
    }

    fn on_incumbent(&mut self, values: &[f64], objective: f64) -> IncumbentDecision {
        let form = self.form;
        let cut = || form.no_good(values).into_iter().collect::<Vec<_>>();
        let plan = match self.form.extract(self.instance, values) {
            Ok(plan) => plan,
            Err(e) => {
                debug!("incumbent rejected: {e}");
                self.stats.extraction_failures += 1;
                return IncumbentDecision::Reject(cut());
            }
        };
        let plan = self.improved(plan);
        match self.offer(plan) {
            Some(value) if value < objective - 1e-9 => {
                IncumbentDecision::Accept(Some(Injection { objective: value, values: None }))
            }
            Some(_) => IncumbentDecision::Accept(None),
            None => IncumbentDecision::Reject(cut()),
        }
    }
}

/// Outcome of one backend run plus the best plan seen.
#[derive(Debug, Clone)]
pub struct Run {
    pub outcome: MilpOutcome,
    pub best: Option<(Plan, f64)>,
    pub first_found: Option<Duration>,
    pub stats: GuardStats,
}

/// Runs `form` with a guard and optional heuristics. Backends without hooks
/// get their final solution extracted afterwards.
pub fn run<'h>(
    form: &dyn Formulation,
    instance: &Instance,
    backend: &dyn MilpBackend,
    params: &SolveParams,
    clock: Instant,
    primal: Option<&'h mut PrimalFn<'h>>,
    improve: Option<&'h mut ImproveFn<'h>>,
) -> Result<Run, hhc_milp::BackendError> {
    let mut guard = Guard::new(form, instance, clock).with_primal(primal).with_improve(improve);
    let outcome = if backend.supports_hooks() {
        backend.solve(form.model(), params, Some(&mut guard))?
    } else {
        backend.solve(form.model(), params, None)?
    };
    if !backend.supports_hooks() {
        if let Some(values) = &outcome.values {
            match form.extract(instance, values) {
                Ok(plan) => {
                    guard.offer(plan);
                }
                Err(e) => {
                    warn!("final solution could not be extracted: {e}");
                    guard.stats.extraction_failures += 1;
                }
            }
        }
    }
    Ok(Run { outcome, best: guard.best, first_found: guard.first_found, stats: guard.stats })
}
