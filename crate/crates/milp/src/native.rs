//! `microlp`'s own MIP search. It has no callbacks, so heuristics that rely
//! on search hooks are unavailable when this backend is selected.

use std::time::Instant;

use log::debug;
use microlp::{ComparisonOp, OptimizationDirection, Problem, SolutionStatus, SolveOptions, SolveOutcome};

use crate::backend::{
    BackendError, MilpBackend, MilpOutcome, MilpStatus, SearchHooks, SearchStats, SolveParams,
};
use crate::model::{Model, Sense, VarKind};

#[derive(Debug, Clone, Copy, Default)]
pub struct MicrolpMip;

impl MilpBackend for MicrolpMip {
    fn name(&self) -> &'static str {
        "microlp"
    }

    fn supports_hooks(&self) -> bool {
        false
    }

    fn solve(
        &self,
        model: &Model,
        params: &SolveParams,
        hooks: Option<&mut dyn SearchHooks>,
    ) -> Result<MilpOutcome, BackendError> {
        if hooks.is_some() {
            debug!("microlp backend ignores search hooks");
        }
        let start = Instant::now();
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<microlp::Variable> = model
            .vars()
            .iter()
            .map(|v| match v.kind {
                VarKind::Continuous => problem.add_var(v.objective, (v.lower, v.upper)),
                VarKind::Binary if v.lower <= 0.0 && v.upper >= 1.0 => {
                    problem.add_binary_var(v.objective)
                }
                _ => problem.add_integer_var(v.objective, (int_bound(v.lower), int_bound(v.upper))),
            })
            .collect();
        for c in model.constraints() {
            if c.terms.is_empty() {
                if c.violation(&[]) > 1e-9 {
                    return Ok(infeasible(start));
                }
                continue;
            }
            let terms: Vec<(microlp::Variable, f64)> =
                c.terms.iter().map(|(v, k)| (vars[v.0], *k)).collect();
            let op = match c.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Ge => ComparisonOp::Ge,
                Sense::Eq => ComparisonOp::Eq,
            };
            problem.add_constraint(terms.as_slice(), op, c.rhs);
        }

        let mut opts = SolveOptions::default();
        opts.time_limit = params.time_limit;
        opts.node_limit = params.node_limit;
        opts.mip_gap = params.relative_gap;
        if let Some(ws) = &params.warm_start {
            opts.warm_start = Some(vars.iter().copied().zip(ws.iter().copied()).collect());
        }

        let outcome = match problem.solve_with(opts) {
            Ok(o) => o,
            Err(microlp::Error::Infeasible) => return Ok(infeasible(start)),
            Err(microlp::Error::Unbounded) => return Err(BackendError::Unbounded),
            Err(e) => return Err(BackendError::Engine(e.to_string())),
        };
        let mut stats = SearchStats::default();
        match outcome {
            SolveOutcome::Solution(sol) => {
                let s = sol.stats();
                stats.nodes = s.nodes_solved;
                stats.elapsed = start.elapsed();
                let values: Vec<f64> = vars
                    .iter()
                    .zip(model.vars())
                    .map(|(&v, var)| {
                        let x = sol.var_value_raw(v);
                        if var.kind.is_integral() {
                            x.round()
                        } else {
                            x
                        }
                    })
                    .collect();
                let objective = model.objective_value(&values);
                let optimal = matches!(sol.status(), SolutionStatus::Optimal);
                let bound = if optimal {
                    Some(objective)
                } else {
                    s.best_bound.map(|b| b + model.objective_offset())
                };
                let status = match (optimal, bound) {
                    (true, _) => MilpStatus::Optimal,
                    (false, Some(b))
                        if crate::backend::relative_gap(objective, b) <= params.relative_gap =>
                    {
                        MilpStatus::Optimal
                    }
                    _ => MilpStatus::Feasible,
                };
                Ok(MilpOutcome {
                    status,
                    values: Some(values),
                    values_objective: Some(objective),
                    objective: Some(objective),
                    bound,
                    stats,
                })
            }
            SolveOutcome::Interrupted(int) => {
                let s = int.stats();
                stats.nodes = s.nodes_solved;
                stats.elapsed = start.elapsed();
                Ok(MilpOutcome {
                    status: MilpStatus::NoSolution,
                    values: None,
                    values_objective: None,
                    objective: None,
                    bound: s.best_bound.map(|b| b + model.objective_offset()),
                    stats,
                })
            }
        }
    }
}

fn int_bound(x: f64) -> i32 {
    if x.is_finite() {
        x.round().clamp(i32::MIN as f64, i32::MAX as f64) as i32
    } else if x > 0.0 {
        i32::MAX
    } else {
        i32::MIN
    }
}

fn infeasible(start: Instant) -> MilpOutcome {
    MilpOutcome {
        status: MilpStatus::Infeasible,
        values: None,
        values_objective: None,
        objective: None,
        bound: None,
        stats: SearchStats {
            elapsed: start.elapsed(),
            ..SearchStats::default()
        },
    }
}
