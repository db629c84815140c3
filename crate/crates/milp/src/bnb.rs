//! LP-based branch-and-bound with best-first node selection and plunging.
//!
//! LP relaxations are solved by `microlp`; child nodes are warm-started from
//! their parent's simplex state by fixing the branching variable. Parent
//! states are cloned while the memory budget allows, otherwise a node is
//! rebuilt from the root by replaying its branching decisions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use log::{debug, warn};
use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOptions, SolveOutcome};

use crate::backend::{
    relative_gap, BackendError, IncumbentDecision, Injection, MilpBackend, MilpOutcome,
    MilpStatus, SearchHooks, SearchStats, SolveParams,
};
use crate::model::{Constraint, Model, Sense};

#[derive(Debug, Clone)]
pub struct BranchAndBound {
    pub integrality_tol: f64,
    /// Upper limit on `stored parent states * model size` kept in the open
    /// list.
    pub warm_state_budget: usize,
}

impl Default for BranchAndBound {
    fn default() -> Self {
        Self {
            integrality_tol: 1e-6,
            warm_state_budget: 60_000_000,
        }
    }
}

impl MilpBackend for BranchAndBound {
    fn name(&self) -> &'static str {
        "bnb"
    }

    fn supports_hooks(&self) -> bool {
        true
    }

    fn solve(
        &self,
        model: &Model,
        params: &SolveParams,
        hooks: Option<&mut dyn SearchHooks>,
    ) -> Result<MilpOutcome, BackendError> {
        Search::new(self, model, params, hooks).run()
    }
}

#[derive(Debug, Clone, Copy)]
enum Branching {
    Fix(usize, f64),
    Upper(usize, f64),
    Lower(usize, f64),
}

struct Warm {
    solution: microlp::Solution,
    cuts_applied: usize,
}

struct Node {
    bound: f64,
    depth: u32,
    seq: u64,
    branchings: Vec<Branching>,
    /// Parent LP state; the last branching has not been applied yet.
    warm: Option<Box<Warm>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: the "greatest" node is the one with the
    // smallest bound, then the deepest, then the most recent.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

enum Lp {
    Solved(microlp::Solution),
    Infeasible,
    TimedOut,
    Failed(String),
}

enum Stop {
    Exhausted,
    Limit,
    GapClosed,
    FirstSolution,
}

struct Search<'a, 'h> {
    cfg: &'a BranchAndBound,
    model: &'a Model,
    params: &'a SolveParams,
    hooks: Option<&'h mut dyn SearchHooks>,
    start: Instant,
    deadline: Option<Instant>,
    lp_vars: Vec<microlp::Variable>,
    integral_objective: bool,
    best_objective: Option<f64>,
    best_values: Option<(Vec<f64>, f64)>,
    cuts: Vec<Constraint>,
    root: Option<microlp::Solution>,
    stats: SearchStats,
    inexact: bool,
    stored_warm: usize,
    seq: u64,
}

impl<'a, 'h> Search<'a, 'h> {
    fn new(
        cfg: &'a BranchAndBound,
        model: &'a Model,
        params: &'a SolveParams,
        hooks: Option<&'h mut dyn SearchHooks>,
    ) -> Self {
        let start = Instant::now();
        Self {
            cfg,
            model,
            params,
            hooks,
            start,
            deadline: params.time_limit.map(|d| start + d),
            lp_vars: Vec::new(),
            integral_objective: model.has_integral_objective(),
            best_objective: None,
            best_values: None,
            cuts: Vec::new(),
            root: None,
            stats: SearchStats::default(),
            inexact: false,
            stored_warm: 0,
            seq: 0,
        }
    }

    fn remaining(&self) -> Option<Duration> {
        self.deadline
            .map(|d| d.saturating_duration_since(Instant::now()))
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn state_size(&self) -> usize {
        self.model.num_nonzeros() + self.model.num_vars() + self.model.num_constraints()
    }

    fn can_store_warm(&self) -> bool {
        (self.stored_warm + 1) * self.state_size().max(1) <= self.cfg.warm_state_budget
    }

    fn prunable(&self, bound: f64) -> bool {
        match self.best_objective {
            None => false,
            Some(inc) => {
                if self.integral_objective {
                    bound > inc - 1.0 + 1e-6
                } else {
                    bound >= inc - (self.params.relative_gap * inc.abs()).max(1e-9)
                }
            }
        }
    }

    fn gap_closed(&self, bound: f64) -> bool {
        match self.best_objective {
            None => false,
            Some(inc) => {
                if self.integral_objective {
                    (bound - 1e-6).ceil() >= inc - 1e-9
                } else {
                    relative_gap(inc, bound) <= self.params.relative_gap
                }
            }
        }
    }

    fn record_solution(&mut self, objective: f64, values: Option<Vec<f64>>) -> bool {
        let improves = self.best_objective.is_none_or(|b| objective < b - 1e-9);
        if self.stats.first_solution.is_none() {
            self.stats.first_solution = Some(self.start.elapsed());
        }
        if improves {
            self.best_objective = Some(objective);
        }
        if let Some(values) = values {
            if self.best_values.as_ref().is_none_or(|(_, o)| objective < *o - 1e-9) {
                self.best_values = Some((values, objective));
            }
        }
        improves
    }

    fn accept_injection(&mut self, inj: Injection) {
        self.stats.injections += 1;
        let values = match inj.values {
            Some(v) => match self.model.check_feasible(&v, 1e-6) {
                Ok(()) => Some(v),
                Err(e) => {
                    warn!("injected assignment rejected ({e}); keeping its objective as cutoff");
                    None
                }
            },
            None => None,
        };
        let objective = match &values {
            Some(v) => self.model.objective_value(v),
            None => inj.objective,
        };
        self.record_solution(objective, values);
    }

    fn lp_options(&self) -> SolveOptions {
        let mut opts = SolveOptions::default();
        opts.time_limit = self.remaining();
        opts
    }

    fn build_root(&mut self) -> Result<Lp, BackendError> {
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        self.lp_vars = self
            .model
            .vars()
            .iter()
            .map(|v| problem.add_var(v.objective, (v.lower, v.upper)))
            .collect();
        for c in self.model.constraints() {
            if c.terms.is_empty() {
                let ok = match c.sense {
                    Sense::Le => 0.0 <= c.rhs + 1e-9,
                    Sense::Ge => 0.0 >= c.rhs - 1e-9,
                    Sense::Eq => c.rhs.abs() <= 1e-9,
                };
                if !ok {
                    return Ok(Lp::Infeasible);
                }
                continue;
            }
            let terms: Vec<(microlp::Variable, f64)> =
                c.terms.iter().map(|(v, k)| (self.lp_vars[v.0], *k)).collect();
            problem.add_constraint(terms.as_slice(), cmp_op(c.sense), c.rhs);
        }
        self.stats.lp_solves += 1;
        Ok(match problem.solve_with(self.lp_options()) {
            Ok(SolveOutcome::Solution(s)) => Lp::Solved(s),
            Ok(SolveOutcome::Interrupted(_)) => Lp::TimedOut,
            Err(microlp::Error::Infeasible) => Lp::Infeasible,
            Err(microlp::Error::Unbounded) => return Err(BackendError::Unbounded),
            Err(e) => return Err(BackendError::Engine(e.to_string())),
        })
    }

    fn apply_branching(&mut self, sol: microlp::Solution, b: Branching) -> Lp {
        self.stats.lp_solves += 1;
        let res = match b {
            Branching::Fix(i, v) => sol.fix_var(self.lp_vars[i], v),
            Branching::Upper(i, v) => {
                sol.add_constraint([(self.lp_vars[i], 1.0)], ComparisonOp::Le, v)
            }
            Branching::Lower(i, v) => {
                sol.add_constraint([(self.lp_vars[i], 1.0)], ComparisonOp::Ge, v)
            }
        };
        lp_result(res)
    }

    fn apply_cut(&mut self, sol: microlp::Solution, cut: &Constraint) -> Lp {
        self.stats.lp_solves += 1;
        let terms: Vec<(microlp::Variable, f64)> =
            cut.terms.iter().map(|(v, k)| (self.lp_vars[v.0], *k)).collect();
        lp_result(sol.add_constraint(terms, cmp_op(cut.sense), cut.rhs))
    }

    fn apply_missing_cuts(&mut self, mut sol: microlp::Solution, from: usize) -> Lp {
        for i in from..self.cuts.len() {
            let cut = self.cuts[i].clone();
            match self.apply_cut(sol, &cut) {
                Lp::Solved(s) => sol = s,
                other => return other,
            }
        }
        Lp::Solved(sol)
    }

    /// `fix_var` occasionally reports a spurious infeasibility on states that
    /// carry added rows, so such verdicts are double-checked on a rebuild that
    /// expresses every branching as an explicit row.
    fn materialize(&mut self, node: &mut Node) -> Lp {
        let fast = self.materialize_warm(node);
        let has_fix = node.branchings.iter().any(|b| matches!(b, Branching::Fix(..)));
        match fast {
            Lp::Infeasible | Lp::Failed(_) if has_fix => self.materialize_as_rows(node),
            other => other,
        }
    }

    fn materialize_as_rows(&mut self, node: &Node) -> Lp {
        let root = self.root.clone().expect("root solved before branching");
        let mut sol = match self.apply_missing_cuts(root, 0) {
            Lp::Solved(s) => s,
            other => return other,
        };
        for &b in &node.branchings {
            self.stats.lp_solves += 1;
            let (i, op, v) = match b {
                Branching::Fix(i, v) => (i, ComparisonOp::Eq, v),
                Branching::Upper(i, v) => (i, ComparisonOp::Le, v),
                Branching::Lower(i, v) => (i, ComparisonOp::Ge, v),
            };
            match lp_result(sol.add_constraint([(self.lp_vars[i], 1.0)], op, v)) {
                Lp::Solved(s) => sol = s,
                other => return other,
            }
        }
        Lp::Solved(sol)
    }

    fn materialize_warm(&mut self, node: &mut Node) -> Lp {
        match node.warm.take() {
            Some(warm) => {
                self.stored_warm = self.stored_warm.saturating_sub(1);
                let Warm {
                    solution,
                    cuts_applied,
                } = *warm;
                let sol = match self.apply_missing_cuts(solution, cuts_applied) {
                    Lp::Solved(s) => s,
                    other => return other,
                };
                match node.branchings.last() {
                    Some(&b) => self.apply_branching(sol, b),
                    None => Lp::Solved(sol),
                }
            }
            None => {
                let root = self.root.clone().expect("root solved before branching");
                let mut sol = match self.apply_missing_cuts(root, 0) {
                    Lp::Solved(s) => s,
                    other => return other,
                };
                for &b in &node.branchings.clone() {
                    match self.apply_branching(sol, b) {
                        Lp::Solved(s) => sol = s,
                        other => return other,
                    }
                }
                Lp::Solved(sol)
            }
        }
    }

    fn values_of(&self, sol: &microlp::Solution) -> Vec<f64> {
        self.lp_vars.iter().map(|&v| sol.var_value_raw(v)).collect()
    }

    /// Most important fractional variable: highest branching priority, then
    /// closest to one half.
    fn select_branching(&self, values: &[f64]) -> Option<(usize, f64)> {
        let tol = self.cfg.integrality_tol;
        let mut best: Option<(usize, i32, f64)> = None;
        for (i, var) in self.model.vars().iter().enumerate() {
            if !var.kind.is_integral() {
                continue;
            }
            let x = values[i];
            let frac = (x - x.floor()).min(x.ceil() - x);
            if frac <= tol {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, p, f)) => {
                    var.branch_priority > p || (var.branch_priority == p && frac > f + 1e-12)
                }
            };
            if better {
                best = Some((i, var.branch_priority, frac));
            }
        }
        best.map(|(i, _, _)| (i, values[i]))
    }

    fn children(&mut self, parent: &Node, var: usize, value: f64) -> (Node, Node) {
        let kind = self.model.vars()[var].kind;
        let (down, up) = match kind {
            crate::model::VarKind::Binary => (Branching::Fix(var, 0.0), Branching::Fix(var, 1.0)),
            _ => (
                Branching::Upper(var, value.floor()),
                Branching::Lower(var, value.ceil()),
            ),
        };
        let preferred_up = value - value.floor() >= 0.5;
        let (first, second) = if preferred_up { (up, down) } else { (down, up) };
        let mk = |b: Branching, seq: u64| {
            let mut branchings = parent.branchings.clone();
            branchings.push(b);
            Node {
                bound: parent.bound,
                depth: parent.depth + 1,
                seq,
                branchings,
                warm: None,
            }
        };
        self.seq += 2;
        (mk(first, self.seq - 1), mk(second, self.seq))
    }

    fn global_bound(&self, heap: &BinaryHeap<Node>, dive: Option<&Node>) -> Option<f64> {
        let mut bound: Option<f64> = heap.peek().map(|n| n.bound);
        if let Some(d) = dive {
            bound = Some(bound.map_or(d.bound, |b| b.min(d.bound)));
        }
        bound
    }

    fn run(mut self) -> Result<MilpOutcome, BackendError> {
        if let Some(cutoff) = self.params.cutoff {
            self.best_objective = Some(cutoff);
        }
        if let Some(ws) = self.params.warm_start.clone() {
            match self.model.check_feasible(&ws, 1e-6) {
                Ok(()) => {
                    let obj = self.model.objective_value(&ws);
                    self.record_solution(obj, Some(ws));
                }
                Err(e) => debug!("warm start ignored: {e}"),
            }
        }

        let root = match self.build_root()? {
            Lp::Solved(s) => s,
            Lp::Infeasible => return Ok(self.finish(Stop::Exhausted, None)),
            Lp::TimedOut => return Ok(self.finish(Stop::Limit, None)),
            Lp::Failed(msg) => return Err(BackendError::Engine(msg)),
        };
        let root_bound = root.objective() + self.model.objective_offset();
        self.root = Some(root.clone());

        let mut heap: BinaryHeap<Node> = BinaryHeap::new();
        let mut current: Option<(Node, microlp::Solution)> = Some((
            Node {
                bound: root_bound,
                depth: 0,
                seq: 0,
                branchings: Vec::new(),
                warm: None,
            },
            root,
        ));
        let mut dive: Option<Node> = None;
        let mut open_bound_floor = root_bound;

        let stop = loop {
            if self.out_of_time() {
                break Stop::Limit;
            }
            if self.params.node_limit.is_some_and(|l| self.stats.nodes >= l) {
                break Stop::Limit;
            }
            if self.params.stop_at_first_solution && self.best_objective.is_some() {
                break Stop::FirstSolution;
            }
            if let Some(b) = self.global_bound(&heap, dive.as_ref()) {
                open_bound_floor = b;
                if current.is_none() && self.gap_closed(b) {
                    break Stop::GapClosed;
                }
            }

            let (mut node, mut sol) = match current.take() {
                Some(c) => c,
                None => {
                    let mut node = match dive.take() {
                        Some(n) => n,
                        None => match heap.pop() {
                            Some(n) => {
                                if n.warm.is_some() {
                                    self.stored_warm = self.stored_warm.saturating_sub(1);
                                }
                                if self.prunable(n.bound) {
                                    continue;
                                }
                                n
                            }
                            None => break Stop::Exhausted,
                        },
                    };
                    if node.warm.is_some() {
                        // balanced by the decrement in materialize()
                        self.stored_warm += 1;
                    }
                    match self.materialize(&mut node) {
                        Lp::Solved(s) => (node, s),
                        Lp::Infeasible => continue,
                        Lp::TimedOut => break Stop::Limit,
                        Lp::Failed(msg) => {
                            warn!("LP failure at depth {}: {msg}; node dropped", node.depth);
                            self.inexact = true;
                            continue;
                        }
                    }
                }
            };
            self.stats.nodes += 1;

            // Re-solve loop: lazily added cuts keep the node alive.
            let branched = loop {
                node.bound = sol.objective() + self.model.objective_offset();
                if self.prunable(node.bound) {
                    break None;
                }
                let values = self.values_of(&sol);
                match self.select_branching(&values) {
                    None => {
                        let mut cand = values;
                        for (i, var) in self.model.vars().iter().enumerate() {
                            if var.kind.is_integral() {
                                cand[i] = cand[i].round();
                            }
                        }
                        if let Err(e) = self.model.check_feasible(&cand, 1e-5) {
                            warn!("integral LP point failed the model check ({e}); node dropped");
                            self.inexact = true;
                            break None;
                        }
                        let obj = self.model.objective_value(&cand);
                        if self.prunable(obj) {
                            break None;
                        }
                        let decision = match self.hooks.as_deref_mut() {
                            Some(h) => {
                                self.stats.incumbent_hook_calls += 1;
                                h.on_incumbent(&cand, obj)
                            }
                            None => IncumbentDecision::Accept(None),
                        };
                        match decision {
                            IncumbentDecision::Accept(inj) => {
                                self.record_solution(obj, Some(cand));
                                if let Some(inj) = inj {
                                    self.accept_injection(inj);
                                }
                                break None;
                            }
                            IncumbentDecision::Reject(cuts) => {
                                self.stats.rejected_incumbents += 1;
                                if cuts.is_empty() {
                                    self.inexact = true;
                                    break None;
                                }
                                let first_new = self.cuts.len();
                                self.cuts.extend(cuts);
                                match self.apply_missing_cuts(sol, first_new) {
                                    Lp::Solved(s) => {
                                        sol = s;
                                        continue;
                                    }
                                    Lp::Infeasible => break None,
                                    Lp::TimedOut => break None,
                                    Lp::Failed(msg) => {
                                        warn!("LP failure after cut: {msg}");
                                        self.inexact = true;
                                        break None;
                                    }
                                }
                            }
                        }
                    }
                    Some((var, value)) => {
                        if self.best_objective.is_none() {
                            if let Some(h) = self.hooks.as_deref_mut() {
                                self.stats.fractional_hook_calls += 1;
                                if let Some(inj) = h.on_fractional(&values, node.bound) {
                                    self.accept_injection(inj);
                                }
                            }
                            if self.prunable(node.bound) {
                                break None;
                            }
                        }
                        break Some((var, value, sol));
                    }
                }
            };

            let Some((var, value, sol)) = branched else {
                continue;
            };
            if self.params.stop_at_first_solution && self.best_objective.is_some() {
                break Stop::FirstSolution;
            }
            let (mut first, mut second) = self.children(&node, var, value);
            let cuts_applied = self.cuts.len();
            if self.can_store_warm() {
                second.warm = Some(Box::new(Warm {
                    solution: sol.clone(),
                    cuts_applied,
                }));
                self.stored_warm += 1;
            }
            first.warm = Some(Box::new(Warm {
                solution: sol,
                cuts_applied,
            }));
            heap.push(second);
            dive = Some(first);
        };

        let bound = match stop {
            Stop::Exhausted => None,
            _ => Some(
                self.global_bound(&heap, dive.as_ref())
                    .unwrap_or(open_bound_floor),
            ),
        };
        Ok(self.finish(stop, bound))
    }

    fn finish(mut self, stop: Stop, open_bound: Option<f64>) -> MilpOutcome {
        self.stats.elapsed = self.start.elapsed();
        let objective = self.best_objective;
        let mut bound = match (objective, open_bound) {
            (Some(obj), Some(b)) => Some(b.min(obj)),
            (Some(obj), None) => Some(obj),
            (None, b) => b,
        };
        if self.integral_objective {
            bound = bound.map(|b| (b - 1e-6).ceil());
            if let (Some(o), Some(b)) = (objective, bound) {
                bound = Some(b.min(o));
            }
        }
        let status = match (stop, objective) {
            (Stop::Exhausted, Some(_)) if !self.inexact => MilpStatus::Optimal,
            (Stop::Exhausted, None) if !self.inexact => MilpStatus::Infeasible,
            (Stop::GapClosed, Some(_)) => MilpStatus::Optimal,
            (_, Some(obj)) => match bound {
                Some(b) if relative_gap(obj, b) <= self.params.relative_gap && !self.inexact => {
                    MilpStatus::Optimal
                }
                _ => MilpStatus::Feasible,
            },
            (_, None) => MilpStatus::NoSolution,
        };
        let (values, values_objective) = match self.best_values.take() {
            Some((v, o)) => (Some(v), Some(o)),
            None => (None, None),
        };
        MilpOutcome {
            status,
            values,
            values_objective,
            objective,
            bound,
            stats: self.stats,
        }
    }
}

fn cmp_op(sense: Sense) -> ComparisonOp {
    match sense {
        Sense::Le => ComparisonOp::Le,
        Sense::Ge => ComparisonOp::Ge,
        Sense::Eq => ComparisonOp::Eq,
    }
}

fn lp_result(res: Result<SolveOutcome, microlp::Error>) -> Lp {
    match res {
        Ok(SolveOutcome::Solution(s)) => Lp::Solved(s),
        Ok(SolveOutcome::Interrupted(_)) => Lp::TimedOut,
        Err(microlp::Error::Infeasible) => Lp::Infeasible,
        Err(e) => Lp::Failed(e.to_string()),
    }
}
