//! Compact formulation on the routing graph with continuous start times.

use std::collections::BTreeMap;

use hhc_milp::{Constraint, Model, Sense, VarId};

use crate::formulation::{no_good_cut, plan_splits, ExtractError, Formulation, FormulationKind, SplitVars};
use crate::mode::{Objective, SolveMode};
use crate::model::{Instance, Plan};
use crate::preprocess::is_empty_window;
use crate::routing::RoutingGraph;
use crate::timing::{Skeleton, TimingProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MtzArc {
    pub tail: usize,
    pub head: usize,
    pub qual: u8,
    pub var: VarId,
}

#[derive(Debug, Clone)]
pub struct MtzModel {
    pub model: Model,
    pub graph: RoutingGraph,
    pub mode: SolveMode,
    pub arcs: Vec<MtzArc>,
    index: BTreeMap<(usize, usize, u8), VarId>,
    pub y: Vec<Option<VarId>>,
    pub b: Vec<Option<VarId>>,
    pub k: BTreeMap<(usize, u8), VarId>,
    pub f: BTreeMap<(usize, u8), VarId>,
    pub splits: SplitVars,
    pub p: BTreeMap<(usize, usize), VarId>,
    /// Windows used for big-M constants; empty windows fall back to the
    /// original ones.
    windows: Vec<(i64, i64)>,
}

pub fn build_mtz_model(instance: &Instance, graph: &RoutingGraph, mode: SolveMode) -> MtzModel {
    let n = instance.n();
    let end = graph.end;
    let t = instance.horizon;
    let staffed = instance.staffed_levels();
    let original = instance.windows();
    let windows: Vec<(i64, i64)> =
        (0..=n).map(|v| if is_empty_window(graph.windows[v]) { original[v] } else { graph.windows[v] }).collect();
    let mut model = Model::new();

    let travel_mode = mode.objective == Objective::Travel;
    let mut arcs = Vec::new();
    let quals_of = |v: usize| if v == 0 || v == end { staffed } else { instance.visit(v).quals.intersect(staffed) };
    for (tail, head) in graph.arcs() {
        for q in quals_of(tail).intersect(quals_of(head)).levels() {
            let cost = if travel_mode && tail != 0 && head != end { instance.travel(tail, head) as f64 } else { 0.0 };
            let var = model.add_binary("x", cost);
            arcs.push(MtzArc { tail, head, qual: q, var });
        }
    }
    let index: BTreeMap<(usize, usize, u8), VarId> = arcs.iter().map(|a| ((a.tail, a.head, a.qual), a.var)).collect();

    let splits = SplitVars::add(&mut model, instance, mode.split_policy);
    let mut y = vec![None; n + 1];
    let mut b = vec![None; n + 1];
    for v in instance.visit_ids() {
        let yv = model.add_binary("y", 0.0);
        let bv = model.add_continuous("b", 0.0, windows[v].1 as f64, 0.0);
        if is_empty_window(graph.windows[v]) {
            model.set_bounds(yv, 0.0, 0.0);
            model.set_bounds(bv, 0.0, 0.0);
        }
        y[v] = Some(yv);
        b[v] = Some(bv);
    }

    // caregivers per level
    for q in staffed.levels() {
        let terms: Vec<(VarId, f64)> = arcs.iter().filter(|a| a.tail == 0 && a.qual == q).map(|a| (a.var, 1.0)).collect();
        if !terms.is_empty() {
            model.constrain("caregivers", terms, Sense::Le, instance.caregiver_count(q) as f64);
        }
    }
    // flow conservation and one departure per performed visit
    let mut flow: BTreeMap<(usize, u8), Vec<(VarId, f64)>> = BTreeMap::new();
    let mut out_of: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n + 1];
    for a in &arcs {
        if a.head != end {
            flow.entry((a.head, a.qual)).or_default().push((a.var, 1.0));
        }
        if a.tail != 0 {
            flow.entry((a.tail, a.qual)).or_default().push((a.var, -1.0));
            out_of[a.tail].push((a.var, 1.0));
        }
    }
    for (_, terms) in flow {
        model.constrain("flow", terms, Sense::Eq, 0.0);
    }
    for v in instance.visit_ids() {
        let mut terms = std::mem::take(&mut out_of[v]);
        terms.push((y[v].unwrap(), -1.0));
        model.constrain("cover", terms, Sense::Eq, 0.0);
        // performed visits follow the split decisions
        let perf = splits.performed(instance, v);
        let mut terms = vec![(y[v].unwrap(), 1.0)];
        terms.extend(perf.terms.iter().map(|&(s, c)| (s, -c)));
        model.constrain("split-cover", terms, Sense::Eq, perf.constant);
    }
    // sequencing
    let mut by_pair: BTreeMap<(usize, usize), Vec<VarId>> = BTreeMap::new();
    for a in arcs.iter().filter(|a| a.tail != 0 && a.head != end) {
        by_pair.entry((a.tail, a.head)).or_default().push(a.var);
    }
    for (&(u, v), vars) in &by_pair {
        let (du, beta_u) = (instance.visit(u).duration, windows[u].1);
        let big = (instance.travel(u, v) + beta_u + du) as f64;
        let mut terms = vec![(b[u].unwrap(), 1.0), (b[v].unwrap(), -1.0)];
        terms.extend(vars.iter().map(|&x| (x, big)));
        model.constrain("sequence", terms, Sense::Le, beta_u as f64);
    }
    // windows
    for v in instance.visit_ids() {
        let (alpha, beta) = windows[v];
        model.constrain("window", vec![(b[v].unwrap(), 1.0), (y[v].unwrap(), -alpha as f64)], Sense::Ge, 0.0);
        model.constrain("window", vec![(b[v].unwrap(), 1.0), (y[v].unwrap(), -beta as f64)], Sense::Le, 0.0);
    }
    // route start and end times
    let mut k = BTreeMap::new();
    let mut f = BTreeMap::new();
    if !travel_mode {
        for a in &arcs {
            if a.tail == 0 {
                let v = a.head;
                let (d, beta) = (instance.visit(v).duration, windows[v].1);
                let wage = instance.wage_f64(a.qual);
                let kv = model.add_continuous("k", 0.0, t as f64, -wage);
                let bv = b[v].unwrap();
                model.constrain("route-start", vec![(kv, 1.0), (bv, -1.0)], Sense::Le, 0.0);
                model.constrain("route-start", vec![(bv, 1.0), (a.var, beta as f64), (kv, -1.0)], Sense::Le, beta as f64);
                model.constrain("route-start", vec![(kv, 1.0), (a.var, -(t - d) as f64)], Sense::Le, 0.0);
                k.insert((v, a.qual), kv);
            }
            if a.head == end {
                let v = a.tail;
                let (d, beta) = (instance.visit(v).duration, windows[v].1);
                let wage = instance.wage_f64(a.qual);
                let fv = model.add_continuous("f", 0.0, t as f64, wage);
                let bv = b[v].unwrap();
                model.constrain("route-end", vec![(fv, 1.0), (bv, -1.0)], Sense::Le, d as f64);
                model.constrain("route-end", vec![(bv, 1.0), (a.var, (beta + d) as f64), (fv, -1.0)], Sense::Le, beta as f64);
                model.constrain("route-end", vec![(fv, 1.0), (a.var, -t as f64)], Sense::Le, 0.0);
                f.insert((v, a.qual), fv);
            }
        }
    }
    // synchronization
    let mut p = BTreeMap::new();
    for dep in &instance.dependencies {
        let (u, v) = (dep.u, dep.v);
        let pv = model.add_binary("p", 0.0);
        model.set_branch_priority(pv, 1);
        p.insert((u, v), pv);
        let (yu, yv, bu, bv) = (y[u].unwrap(), y[v].unwrap(), b[u].unwrap(), b[v].unwrap());
        let ((au, beta_u), (av, beta_v)) = (windows[u], windows[v]);
        let (beta_u, beta_v) = (beta_u as f64, beta_v as f64);
        model.constrain("sync", vec![(pv, 2.0), (yu, -1.0), (yv, -1.0)], Sense::Le, 0.0);
        model.constrain(
            "sync",
            vec![(bv, 1.0), (bu, -1.0), (pv, -dep.dmax_uv as f64), (yu, beta_v), (yv, beta_v)],
            Sense::Le,
            2.0 * beta_v,
        );
        model.constrain(
            "sync",
            vec![(bu, 1.0), (bv, -1.0), (yv, -dep.dmax_vu as f64), (pv, dep.dmax_vu as f64), (yu, beta_u), (yv, beta_u)],
            Sense::Le,
            2.0 * beta_u,
        );
        let m_uv = (beta_u - av as f64).max(0.0);
        model.constrain(
            "sync",
            vec![(bv, 1.0), (bu, -1.0), (pv, -dep.dmin_uv as f64), (yu, -beta_u), (yv, -beta_u), (yu, m_uv), (pv, -m_uv)],
            Sense::Ge,
            -2.0 * beta_u,
        );
        let m_vu = (beta_v - au as f64).max(0.0);
        let big = beta_v + dep.dmin_vu as f64;
        model.constrain(
            "sync",
            vec![(bu, 1.0), (bv, -1.0), (yv, -dep.dmin_vu as f64), (pv, dep.dmin_vu as f64), (yu, -big), (yv, -big), (pv, m_vu)],
            Sense::Ge,
            -2.0 * big,
        );
    }

    MtzModel { model, graph: graph.clone(), mode, arcs, index, y, b, k, f, splits, p, windows }
}

impl MtzModel {
    pub fn arc_var(&self, tail: usize, head: usize, qual: u8) -> Option<VarId> {
        self.index.get(&(tail, head, qual)).copied()
    }

    /// Full assignment representing `plan`, or `None` if the plan uses an
    /// arc missing from the graph.
    pub fn assignment(&self, instance: &Instance, plan: &Plan) -> Option<Vec<f64>> {
        let mut values = vec![0.0; self.model.num_vars()];
        let end = self.graph.end;
        for (v, split) in plan_splits(instance, plan) {
            if let Some(s) = self.splits.s.get(&v) {
                values[s.index()] = if split { 1.0 } else { 0.0 };
            }
        }
        let starts = plan.performed();
        for (&v, &start) in &starts {
            values[self.y[v]?.index()] = 1.0;
            values[self.b[v]?.index()] = start as f64;
        }
        for r in plan.active_routes() {
            let q = r.qual;
            let visits: Vec<usize> = r.stops.iter().map(|s| s.visit).collect();
            let mut path = vec![0];
            path.extend(&visits);
            path.push(end);
            for w in path.windows(2) {
                values[self.arc_var(w[0], w[1], q)?.index()] = 1.0;
            }
            let (first, last) = (r.stops[0], *r.stops.last().unwrap());
            if let Some(kv) = self.k.get(&(first.visit, q)) {
                values[kv.index()] = first.start as f64;
            }
            if let Some(fv) = self.f.get(&(last.visit, q)) {
                values[fv.index()] = (last.start + instance.visit(last.visit).duration) as f64;
            }
        }
        for dep in &instance.dependencies {
            if let (Some(&a), Some(&b)) = (starts.get(&dep.u), starts.get(&dep.v)) {
                let diff = b - a;
                let u_first = diff >= dep.dmin_uv && diff <= dep.dmax_uv;
                values[self.p[&(dep.u, dep.v)].index()] = if u_first { 1.0 } else { 0.0 };
            }
        }
        Some(values)
    }

    fn routes(&self, values: &[f64]) -> Result<Vec<Skeleton>, ExtractError> {
        let end = self.graph.end;
        let mut next: BTreeMap<(usize, u8), Vec<usize>> = BTreeMap::new();
        let mut used = 0usize;
        for a in &self.arcs {
            if values[a.var.index()] > 0.5 {
                next.entry((a.tail, a.qual)).or_default().push(a.head);
                used += 1;
            }
        }
        let mut routes = Vec::new();
        let mut walked = 0usize;
        for (&(tail, q), heads) in &next {
            if tail != 0 {
                continue;
            }
            for &first in heads {
                walked += 1;
                let mut visits = Vec::new();
                let mut cur = first;
                while cur != end {
                    if visits.len() > self.y.len() {
                        return Err(ExtractError::Flow(format!("cycle through visit {cur}")));
                    }
                    visits.push(cur);
                    match next.get(&(cur, q)).map(Vec::as_slice) {
                        Some([h]) => cur = *h,
                        _ => return Err(ExtractError::Flow(format!("visit {cur} has no unique successor for level {q}"))),
                    }
                    walked += 1;
                }
                routes.push(Skeleton { qual: q, visits });
            }
        }
        if walked != used {
            return Err(ExtractError::Flow(format!("{} arcs are not on any route", used - walked)));
        }
        Ok(routes)
    }
}

impl Formulation for MtzModel {
    fn kind(&self) -> FormulationKind {
        FormulationKind::Mtz
    }

    fn model(&self) -> &Model {
        &self.model
    }

    fn objective(&self) -> Objective {
        self.mode.objective
    }

    fn extract(&self, instance: &Instance, values: &[f64]) -> Result<Plan, ExtractError> {
        let routes = self.routes(values)?;
        let mut problem = TimingProblem::new(instance, routes, self.splits.decisions(values));
        problem.bounds = self.windows.clone();
        for (&pair, var) in &self.p {
            problem.preferred.insert(pair, values[var.index()] > 0.5);
        }
        problem.solve().ok_or(ExtractError::Timing)
    }

    fn no_good(&self, values: &[f64]) -> Option<Constraint> {
        no_good_cut(self.arcs.iter().map(|a| a.var), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::routing::build_routing_graph;

    #[test]
    fn i1_variable_families() {
        let inst = fixtures::i1();
        let m = build_mtz_model(&inst, &build_routing_graph(&inst), SolveMode::raw());
        // visit 1 admits levels 1..3 but only level 3 is staffed
        assert_eq!(m.model.count_family("x"), 6);
        assert_eq!(m.model.count_family("k"), 2);
        assert_eq!(m.model.count_family("s"), 0);
        let tt = build_mtz_model(&inst, &build_routing_graph(&inst), SolveMode::raw().with_objective(Objective::Travel));
        assert_eq!(tt.model.count_family("k") + tt.model.count_family("f"), 0);
        assert_eq!(tt.model.count_constraint_family("route-start"), 0);
    }

    #[test]
    fn optimal_plan_assignment_is_feasible() {
        let inst = fixtures::i1();
        let m = build_mtz_model(&inst, &build_routing_graph(&inst), SolveMode::raw());
        let values = m.assignment(&inst, &fixtures::i1_optimal_plan()).unwrap();
        m.model.check_feasible(&values, 1e-6).unwrap();
        assert!((m.model.objective_value(&values) - 180.0).abs() < 1e-9);
        let plan = m.extract(&inst, &values).unwrap();
        assert_eq!(plan.routes, fixtures::i1_optimal_plan().routes);
    }
}
