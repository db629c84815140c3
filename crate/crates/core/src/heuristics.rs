//! Primal heuristics run from fractional relaxations and the improvement
//! heuristic run on every new incumbent.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use hhc_milp::{BranchAndBound, SolveParams};
use log::debug;

use crate::formulation::{plan_splits, plan_value};
use crate::mode::{Objective, SolveMode, SplitPolicy};
use crate::model::{Instance, Plan};
use crate::mtz::build_mtz_model;
use crate::preprocess::{is_empty_window, PreprocessResult};
use crate::routing::RoutingGraph;
use crate::search::run;
use crate::ti_graph::{ArcKind, TiArc, TimeIndexedGraph, SINK, SOURCE};
use crate::ti_model::{build_ti_model, TiModel};
use crate::timing::retime;
use crate::verify::check_plan;

/// Arc values at or below this are treated as zero.
pub const POSITIVE: f64 = 1e-6;

/// Upper limit on a single improvement solve.
pub const CALL_CAP: Duration = Duration::from_secs(10);

/// Wall-clock allowance shared by all heuristic calls of one solve.
#[derive(Debug)]
pub struct HeuristicBudget {
    total: u64,
    consumed: AtomicU64,
}

impl HeuristicBudget {
    pub fn new(total: Duration) -> Self {
        HeuristicBudget { total: total.as_nanos().min(u64::MAX as u128) as u64, consumed: AtomicU64::new(0) }
    }

    pub fn unlimited() -> Self {
        Self::new(Duration::from_secs(365 * 24 * 3600))
    }

    pub fn total(&self) -> Duration {
        Duration::from_nanos(self.total)
    }

    pub fn consumed(&self) -> Duration {
        Duration::from_nanos(self.consumed.load(Ordering::Relaxed))
    }

    pub fn remaining(&self) -> Duration {
        Duration::from_nanos(self.total.saturating_sub(self.consumed.load(Ordering::Relaxed)))
    }

    pub fn exhausted(&self) -> bool {
        self.remaining().is_zero()
    }

    pub fn charge(&self, spent: Duration) {
        let nanos = spent.as_nanos().min(u64::MAX as u128) as u64;
        self.consumed.fetch_add(nanos, Ordering::Relaxed);
    }

    fn slice(&self, cap: Option<Duration>) -> Duration {
        let r = self.remaining();
        cap.map_or(r, |c| r.min(c))
    }
}

/// Charges the elapsed time of `f` to the budget.
fn metered<R>(budget: &HeuristicBudget, f: impl FnOnce() -> R) -> R {
    let start = Instant::now();
    let r = f();
    budget.charge(start.elapsed());
    r
}

/// The subgraph of arcs carrying positive flow, augmented so that every
/// visited visit can be entered, left and performed by a route of its own.
pub fn ti_subgraph(fractional: &[f64], ti: &TiModel, instance: &Instance) -> Option<TimeIndexedGraph> {
    let base = &ti.pre.graph;
    let flow = ti.arc_flow(fractional);
    let mut g = base.clone();
    g.arcs = base.arcs.iter().zip(&flow).filter(|(_, f)| **f > POSITIVE).map(|(a, _)| *a).collect();
    if g.arcs.is_empty() {
        return None;
    }
    let n_nodes = g.node_count();
    let mut included = vec![false; n_nodes];
    let mut out_care = vec![false; n_nodes];
    let mut in_care = vec![false; n_nodes];
    let mut has_start = vec![false; n_nodes];
    let mut has_end = vec![false; n_nodes];
    for a in &g.arcs {
        included[a.tail] = true;
        included[a.head] = true;
        match a.kind {
            ArcKind::Care => {
                out_care[a.tail] = true;
                in_care[a.head] = true;
            }
            ArcKind::Start => has_start[a.head] = true,
            ArcKind::End => has_end[a.tail] = true,
            ArcKind::Wait => {}
        }
    }
    let staffed = instance.staffed_levels();
    let mut extra = Vec::new();
    for v in instance.visit_ids() {
        let nodes: Vec<usize> = base.nodes_of(v).filter(|&i| included[i]).collect();
        let quals = instance.visit(v).quals.intersect(staffed);
        if nodes.is_empty() || quals.is_empty() {
            continue;
        }
        let d = instance.visit(v).duration;
        let start = |node: usize| TiArc { tail: SOURCE, head: node, kind: ArcKind::Start, cost: 0, travel: 0, quals };
        let end = |node: usize| TiArc { tail: node, head: SINK, kind: ArcKind::End, cost: d, travel: 0, quals };
        let mut starts = Vec::new();
        let mut ends = Vec::new();
        if let Some(&i) = nodes.iter().find(|&&i| out_care[i]) {
            starts.push(i);
        }
        if let Some(&i) = nodes.iter().rev().find(|&&i| in_care[i]) {
            ends.push(i);
        }
        for w in nodes.windows(2) {
            let cost = base.node_time[w[1]] - base.node_time[w[0]];
            extra.push(TiArc { tail: w[0], head: w[1], kind: ArcKind::Wait, cost, travel: 0, quals });
        }
        let both = |i: usize| (has_start[i] || starts.contains(&i)) && (has_end[i] || ends.contains(&i));
        if !nodes.iter().any(|&i| both(i)) {
            let pick = nodes
                .iter()
                .copied()
                .find(|&i| out_care[i])
                .or_else(|| nodes.iter().copied().find(|&i| in_care[i]))
                .unwrap_or(nodes[0]);
            starts.push(pick);
            ends.push(pick);
        }
        if instance.has_dependencies(v) {
            starts.push(nodes[0]);
            ends.push(*nodes.last().unwrap());
        }
        extra.extend(starts.into_iter().map(start));
        extra.extend(ends.into_iter().map(end));
    }
    g.arcs.extend(extra);
    g.sort_arcs();
    Some(g)
}

/// Solves the time-indexed model restricted to the support of a fractional
/// solution.
pub fn ti_primal_heuristic(fractional: &[f64], ti: &TiModel, instance: &Instance, budget: &HeuristicBudget) -> Option<Plan> {
    if budget.exhausted() {
        return None;
    }
    metered(budget, || {
        let graph = ti_subgraph(fractional, ti, instance)?;
        let pre = PreprocessResult { graph, ..ti.pre.clone() };
        let sub = build_ti_model(instance, &pre, ti.mode);
        let params = SolveParams::default().with_time_limit(budget.slice(Some(CALL_CAP)));
        let out = run(&sub, instance, &BranchAndBound::default(), &params, Instant::now(), None, None).ok()?;
        debug!("time-indexed heuristic: {:?} after {} nodes", out.outcome.status, out.outcome.stats.nodes);
        out.best.map(|(p, _)| p)
    })
}

/// Routing arcs underlying the positive time-indexed arcs.
pub fn projected_routing_graph(fractional: &[f64], ti: &TiModel, instance: &Instance) -> RoutingGraph {
    let g = &ti.pre.graph;
    let flow = ti.arc_flow(fractional);
    let mut r = RoutingGraph {
        end: instance.end_node(),
        start_arcs: Vec::new(),
        care_arcs: Vec::new(),
        end_arcs: Vec::new(),
        windows: ti.pre.windows.clone(),
    };
    for (a, f) in g.arcs.iter().zip(flow) {
        if f <= POSITIVE {
            continue;
        }
        match a.kind {
            ArcKind::Start => r.start_arcs.push(g.node_visit[a.head]),
            ArcKind::End => r.end_arcs.push(g.node_visit[a.tail]),
            ArcKind::Care => r.care_arcs.push((g.node_visit[a.tail], g.node_visit[a.head])),
            ArcKind::Wait => {}
        }
    }
    r.normalize();
    r
}

/// Two phases: the first feasible solution of the compact model on the
/// projected subgraph, then an improvement run with all route start and end
/// arcs added.
pub fn mtz_primal_heuristic(fractional: &[f64], ti: &TiModel, instance: &Instance, budget: &HeuristicBudget) -> Option<Plan> {
    if budget.exhausted() {
        return None;
    }
    let mode = SolveMode { preprocessed: false, ..ti.mode };
    metered(budget, || {
        let g1 = projected_routing_graph(fractional, ti, instance);
        if g1.arc_count() == 0 {
            return None;
        }
        let m1 = build_mtz_model(instance, &g1, mode);
        let params = SolveParams::default().with_time_limit(budget.slice(None)).first_solution();
        let phase1 = run(&m1, instance, &BranchAndBound::default(), &params, Instant::now(), None, None).ok()?.best?;
        let mut g2 = g1;
        for v in instance.visit_ids() {
            if !is_empty_window(g2.windows[v]) {
                g2.start_arcs.push(v);
                g2.end_arcs.push(v);
            }
        }
        g2.normalize();
        let m2 = build_mtz_model(instance, &g2, mode);
        let mut params = SolveParams::default().with_time_limit(budget.slice(Some(CALL_CAP)));
        params.warm_start = m2.assignment(instance, &phase1.0);
        let phase2 = run(&m2, instance, &BranchAndBound::default(), &params, Instant::now(), None, None).ok().and_then(|r| r.best);
        match phase2 {
            Some((plan, value)) if value < phase1.1 - 1e-9 => Some(plan),
            _ => Some(phase1.0),
        }
    })
}

/// Re-optimizes start times, and route boundaries, on the arcs used by
/// `plan`. Never returns a worse plan.
pub fn improve_timing(plan: &Plan, instance: &Instance, objective: Objective, budget: &HeuristicBudget) -> Plan {
    if budget.exhausted() {
        return plan.clone();
    }
    metered(budget, || {
        let mut best = plan.clone();
        let mut best_value = plan_value(plan, instance, objective);
        let consider = |cand: Plan, best: &mut Plan, best_value: &mut f64| {
            let value = plan_value(&cand, instance, objective);
            if value < *best_value - 1e-9 && check_plan(&cand, instance).is_ok() {
                *best = cand;
                *best_value = value;
            }
        };
        if let Some(cand) = retime(instance, plan) {
            consider(cand, &mut best, &mut best_value);
        }
        if objective == Objective::Travel {
            return best;
        }
        let performed: Vec<usize> = plan.performed().keys().copied().collect();
        let mut g = RoutingGraph {
            end: instance.end_node(),
            start_arcs: performed.clone(),
            care_arcs: plan.active_routes().flat_map(|r| r.stops.windows(2).map(|w| (w[0].visit, w[1].visit))).collect(),
            end_arcs: performed,
            windows: instance.windows(),
        };
        g.normalize();
        let mode = SolveMode { split_policy: SplitPolicy::Optimize, objective, preprocessed: false };
        let mut m = build_mtz_model(instance, &g, mode);
        for (v, split) in plan_splits(instance, plan) {
            if let Some(&s) = m.splits.s.get(&v) {
                let x = if split { 1.0 } else { 0.0 };
                m.model.set_bounds(s, x, x);
            }
        }
        let mut params = SolveParams::default().with_time_limit(budget.slice(Some(CALL_CAP)));
        params.warm_start = m.assignment(instance, &best);
        if let Ok(r) = run(&m, instance, &BranchAndBound::default(), &params, Instant::now(), None, None) {
            if let Some((cand, _)) = r.best {
                consider(cand, &mut best, &mut best_value);
            }
        }
        best
    })
}
