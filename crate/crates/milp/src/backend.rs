//! The MILP backend contract: what any solver plugged into the pipeline has
//! to provide, plus the two search hooks used by the primal and improvement
//! heuristics.

use std::time::Duration;

use crate::model::{Constraint, Model};

/// Relative gap at or below which a solve is declared optimal.
pub const OPTIMALITY_GAP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SolveParams {
    pub time_limit: Option<Duration>,
    pub relative_gap: f64,
    /// Terminate as soon as any incumbent (found or injected) exists.
    pub stop_at_first_solution: bool,
    pub node_limit: Option<u64>,
    /// Objective value of a solution known to exist; nodes that cannot beat
    /// it are pruned.
    pub cutoff: Option<f64>,
    /// A full assignment used as the initial incumbent when feasible.
    pub warm_start: Option<Vec<f64>>,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            time_limit: None,
            relative_gap: OPTIMALITY_GAP,
            stop_at_first_solution: false,
            node_limit: None,
            cutoff: None,
            warm_start: None,
        }
    }
}

impl SolveParams {
    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn first_solution(mut self) -> Self {
        self.stop_at_first_solution = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    /// An incumbent exists but optimality was not proven.
    Feasible,
    Infeasible,
    /// A limit was reached before any incumbent was found.
    NoSolution,
}

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    pub nodes: u64,
    pub lp_solves: u64,
    pub elapsed: Duration,
    pub first_solution: Option<Duration>,
    pub fractional_hook_calls: u64,
    pub incumbent_hook_calls: u64,
    pub injections: u64,
    pub rejected_incumbents: u64,
}

#[derive(Debug, Clone)]
pub struct MilpOutcome {
    pub status: MilpStatus,
    /// Best assignment carrying variable values, if any.
    pub values: Option<Vec<f64>>,
    /// Objective of `values`.
    pub values_objective: Option<f64>,
    /// Best objective known, including value-less injections.
    pub objective: Option<f64>,
    /// Proven lower bound.
    pub bound: Option<f64>,
    pub stats: SearchStats,
}

impl MilpOutcome {
    pub fn gap(&self) -> Option<f64> {
        match (self.objective, self.bound) {
            (Some(obj), Some(bound)) => Some(relative_gap(obj, bound)),
            _ => None,
        }
    }
}

pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    if objective == bound {
        0.0
    } else if objective.abs() < 1e-12 {
        f64::INFINITY
    } else {
        ((objective - bound) / objective.abs()).max(0.0)
    }
}

/// A solution handed to the backend from outside its own search.
#[derive(Debug, Clone)]
pub struct Injection {
    pub objective: f64,
    /// Full assignment. When absent the injection only acts as a cutoff and
    /// the caller keeps track of the solution itself.
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub enum IncumbentDecision {
    Accept(Option<Injection>),
    /// Discard the candidate. Non-empty cuts are added to the model and the
    /// node is re-solved; with no cuts the node is pruned.
    Reject(Vec<Constraint>),
}

/// Callbacks invoked from the search thread.
pub trait SearchHooks {
    /// H1: a fractional relaxation is available and no incumbent exists yet.
    fn on_fractional(&mut self, _values: &[f64], _lp_bound: f64) -> Option<Injection> {
        None
    }

    /// H2: the search found a new improving integer solution.
    fn on_incumbent(&mut self, _values: &[f64], _objective: f64) -> IncumbentDecision {
        IncumbentDecision::Accept(None)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("unknown MILP backend `{0}` (expected `bnb` or `microlp`)")]
    Unknown(String),
    #[error("LP engine failure: {0}")]
    Engine(String),
    #[error("model is unbounded")]
    Unbounded,
}

pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether H1/H2 are honoured. Backends without hooks ignore them.
    fn supports_hooks(&self) -> bool;

    fn solve(
        &self,
        model: &Model,
        params: &SolveParams,
        hooks: Option<&mut dyn SearchHooks>,
    ) -> Result<MilpOutcome, BackendError>;
}

/// Environment variable consulted by [`default_backend`].
pub const BACKEND_ENV: &str = "HHC_MILP_BACKEND";

pub fn backend_by_name(name: &str) -> Result<Box<dyn MilpBackend>, BackendError> {
    match name.to_ascii_lowercase().as_str() {
        "bnb" | "branch-and-bound" => Ok(Box::new(crate::bnb::BranchAndBound::default())),
        "microlp" => Ok(Box::new(crate::native::MicrolpMip)),
        other => Err(BackendError::Unknown(other.to_string())),
    }
}

/// Backend chosen by `HHC_MILP_BACKEND`, falling back to branch-and-bound.
pub fn default_backend() -> Result<Box<dyn MilpBackend>, BackendError> {
    match std::env::var(BACKEND_ENV) {
        Ok(name) if !name.trim().is_empty() => backend_by_name(name.trim()),
        _ => Ok(Box::new(crate::bnb::BranchAndBound::default())),
    }
}
