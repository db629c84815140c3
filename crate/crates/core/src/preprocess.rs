//! Reductions of the time-indexed graph and the dependency bookkeeping they
//! require.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{DependencySpec, ExecClass, Instance};
use crate::sync::predetermined_order;
use crate::ti_graph::{build_ti_graph_with, ArcKind, TiArc, TimeIndexedGraph, SINK, SOURCE};

pub fn is_empty_window(w: (i64, i64)) -> bool {
    w.0 > w.1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tightening {
    /// Windows indexed by visit id; empty windows have start > end.
    pub windows: Vec<(i64, i64)>,
    /// Dependency pairs whose windows could not be reconciled. The execution
    /// class of such a pair cannot be performed.
    pub conflicts: Vec<(usize, usize)>,
}

fn tighten_pair(dep: &DependencySpec, wu: (i64, i64), wv: (i64, i64), horizon: i64) -> ((i64, i64), (i64, i64)) {
    let ((au, bu), (av, bv)) = (wu, wv);
    match predetermined_order(dep, horizon) {
        Some(true) => (
            (au.max(av - dep.dmax_uv), bu.min(bv - dep.dmin_uv)),
            (av.max(au + dep.dmin_uv), bv.min(bu + dep.dmax_uv)),
        ),
        Some(false) => (
            (au.max(av + dep.dmin_vu), bu.min(bv + dep.dmax_vu)),
            (av.max(au - dep.dmax_vu), bv.min(bu - dep.dmin_vu)),
        ),
        None => (
            (au.max(av - dep.dmax_uv), bu.min(bv + dep.dmax_vu)),
            (av.max(au - dep.dmax_vu), bv.min(bu + dep.dmax_uv)),
        ),
    }
}

/// Propagates dependency bands into the windows of co-executed pairs until
/// nothing changes.
pub fn tighten_time_windows(instance: &Instance) -> Tightening {
    let mut windows = instance.windows();
    let mut conflicts = Vec::new();
    let mut dead: Vec<ExecClass> = Vec::new();
    loop {
        let mut changed = false;
        for dep in &instance.dependencies {
            let (u, v) = (dep.u, dep.v);
            if !instance.co_executed(u, v) || is_empty_window(windows[u]) || is_empty_window(windows[v]) {
                continue;
            }
            let (nu, nv) = tighten_pair(dep, windows[u], windows[v], instance.horizon);
            if nu != windows[u] || nv != windows[v] {
                changed = true;
                windows[u] = nu;
                windows[v] = nv;
            }
            if is_empty_window(nu) || is_empty_window(nv) {
                conflicts.push((u, v));
                dead.push(instance.exec_class(u));
            }
        }
        if !changed {
            break;
        }
    }
    for id in instance.visit_ids() {
        if dead.contains(&instance.exec_class(id)) && !is_empty_window(windows[id]) {
            windows[id] = (windows[id].0, windows[id].0 - 1);
        }
    }
    Tightening { windows, conflicts }
}

/// Keeps, for every visit pair, only the latest-departing care arc among the
/// arcs that reach the head at its earliest start.
pub fn remove_redundant_travel_arcs(graph: &TimeIndexedGraph) -> TimeIndexedGraph {
    let mut latest: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for a in &graph.arcs {
        if a.kind == ArcKind::Care && graph.node_time[a.head] == graph.windows[graph.node_visit[a.head]].0 {
            let key = (graph.node_visit[a.tail], graph.node_visit[a.head]);
            let t = graph.node_time[a.tail];
            latest.entry(key).and_modify(|x| *x = (*x).max(t)).or_insert(t);
        }
    }
    let mut g = graph.clone();
    g.arcs.retain(|a| {
        if a.kind != ArcKind::Care {
            return true;
        }
        let hv = graph.node_visit[a.head];
        if graph.node_time[a.head] != graph.windows[hv].0 {
            return true;
        }
        latest[&(graph.node_visit[a.tail], hv)] == graph.node_time[a.tail]
    });
    g
}

/// Drops start arcs into nodes that cannot continue to another visit and end
/// arcs out of nodes that cannot be reached from another visit, for the
/// visits flagged in `sync_free`. A single-visit route option is restored
/// where the removal eliminated it.
pub fn remove_suboptimal_route_arcs(graph: &TimeIndexedGraph, instance: &Instance, sync_free: &[bool]) -> TimeIndexedGraph {
    let n = graph.node_count();
    let mut out_care = vec![false; n];
    let mut in_care = vec![false; n];
    for a in &graph.arcs {
        if a.kind == ArcKind::Care {
            out_care[a.tail] = true;
            in_care[a.head] = true;
        }
    }
    let applies = |node: usize| graph.is_visit_node(node) && sync_free[graph.node_visit[node]];
    let mut g = graph.clone();
    g.arcs.retain(|a| match a.kind {
        ArcKind::Start => !applies(a.head) || out_care[a.head],
        ArcKind::End => !applies(a.tail) || in_care[a.tail],
        _ => true,
    });

    let mut has_start = vec![false; n];
    let mut has_end = vec![false; n];
    for a in &g.arcs {
        match a.kind {
            ArcKind::Start => has_start[a.head] = true,
            ArcKind::End => has_end[a.tail] = true,
            _ => {}
        }
    }
    let staffed = instance.staffed_levels();
    for v in instance.visit_ids() {
        if !sync_free[v] {
            continue;
        }
        let nodes: Vec<usize> = graph.nodes_of(v).collect();
        let quals = instance.visit(v).quals.intersect(staffed);
        if nodes.is_empty() || quals.is_empty() || nodes.iter().any(|&i| has_start[i] && has_end[i]) {
            continue;
        }
        let pick = nodes
            .iter()
            .copied()
            .find(|&i| out_care[i])
            .or_else(|| nodes.iter().copied().find(|&i| in_care[i]))
            .unwrap_or(nodes[0]);
        if !has_start[pick] {
            g.arcs.push(TiArc { tail: SOURCE, head: pick, kind: ArcKind::Start, cost: 0, travel: 0, quals });
        }
        if !has_end[pick] {
            let d = instance.visit(v).duration;
            g.arcs.push(TiArc { tail: pick, head: SINK, kind: ArcKind::End, cost: d, travel: 0, quals });
        }
    }
    g.sort_arcs();
    g
}

/// Collapses maximal runs of nodes whose only arcs are one incoming and one
/// outgoing wait arc into a single wait arc. Nodes left without arcs are
/// marked removed.
pub fn merge_waiting_chains(graph: &TimeIndexedGraph) -> TimeIndexedGraph {
    let (out, inn) = graph.adjacency();
    let is_wait = |i: usize| graph.arcs[i].kind == ArcKind::Wait;
    let internal: Vec<bool> = (0..graph.node_count())
        .map(|m| {
            graph.is_visit_node(m)
                && !graph.removed[m]
                && out[m].len() == 1
                && inn[m].len() == 1
                && is_wait(out[m][0])
                && is_wait(inn[m][0])
        })
        .collect();
    let mut g = graph.clone();
    let mut drop_arc = vec![false; graph.arcs.len()];
    let mut merged = Vec::new();
    let mut m = 0;
    while m < graph.node_count() {
        if !internal[m] {
            m += 1;
            continue;
        }
        let first = m;
        let mut last = m;
        // Follow the wait arcs, which may skip over previously merged nodes.
        loop {
            let next = graph.arcs[out[last][0]].head;
            if internal[next] {
                last = next;
            } else {
                break;
            }
        }
        let pred = graph.arcs[inn[first][0]].tail;
        let succ = graph.arcs[out[last][0]].head;
        let mut k = first;
        loop {
            drop_arc[inn[k][0]] = true;
            drop_arc[out[k][0]] = true;
            g.removed[k] = true;
            if k == last {
                break;
            }
            k = graph.arcs[out[k][0]].head;
        }
        let template = graph.arcs[inn[first][0]];
        merged.push(TiArc {
            tail: pred,
            head: succ,
            kind: ArcKind::Wait,
            cost: graph.node_time[succ] - graph.node_time[pred],
            travel: 0,
            quals: template.quals,
        });
        m = last + 1;
    }
    g.arcs = graph.arcs.iter().enumerate().filter(|(i, _)| !drop_arc[*i]).map(|(_, a)| *a).collect();
    g.arcs.extend(merged);
    g.sort_arcs();
    let (out2, inn2) = g.adjacency();
    for node in 2..g.node_count() {
        if out2[node].is_empty() && inn2[node].is_empty() {
            g.removed[node] = true;
        }
    }
    g
}

/// One row of the induced-dependency table: if `p_uv` and `p_vw` take the
/// given values, `t_w - t_u` must lie in `forward` when `w` starts no earlier
/// than `u`, and `t_u - t_w` in `reverse` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InducedCase {
    pub p_uv: bool,
    pub p_vw: bool,
    pub forward: (i64, i64),
    pub reverse: (i64, i64),
}

/// Interval bound that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Ext {
    NegInf,
    Fin(i64),
    PosInf,
}

impl Ext {
    fn add(self, o: Ext) -> Ext {
        match (self, o) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a + b),
            (Ext::PosInf, _) | (_, Ext::PosInf) => Ext::PosInf,
            _ => Ext::NegInf,
        }
    }

    fn neg(self) -> Ext {
        match self {
            Ext::NegInf => Ext::PosInf,
            Ext::PosInf => Ext::NegInf,
            Ext::Fin(a) => Ext::Fin(-a),
        }
    }
}

/// Start-time difference band of one orientation, or `None` if the
/// orientation is impossible.
fn band(min: i64, max: i64, horizon: i64) -> Option<(Ext, Ext)> {
    if min >= horizon {
        return None;
    }
    let hi = if max >= horizon { Ext::PosInf } else { Ext::Fin(max) };
    Some((Ext::Fin(min), hi))
}

fn clip(lo: Ext, hi: Ext, horizon: i64) -> (i64, i64) {
    let closed = (horizon, horizon);
    let lo = match lo.max(Ext::Fin(0)) {
        Ext::Fin(x) => x,
        _ => return closed,
    };
    let hi = match hi {
        Ext::PosInf => horizon,
        Ext::Fin(x) if x >= 0 => x.min(horizon),
        _ => return closed,
    };
    if lo >= horizon || lo > hi {
        closed
    } else {
        (lo, hi)
    }
}

/// Differences `t_w - t_u` implied by `t_v - t_u` and `t_w - t_v` bands, for
/// all four orientation combinations. Quadruples are oriented `(u, v)` and
/// `(v, w)`. Impossible orientations of `u` and `w` get `(T, T)`.
pub fn induced_dependency_table(quad_uv: [i64; 4], quad_vw: [i64; 4], horizon: i64) -> [InducedCase; 4] {
    let t = horizon;
    let closed = (t, t);
    let mut out = [InducedCase { p_uv: true, p_vw: true, forward: closed, reverse: closed }; 4];
    let combos = [(true, true), (true, false), (false, true), (false, false)];
    for (k, &(p_uv, p_vw)) in combos.iter().enumerate() {
        // x = t_v - t_u, y = t_w - t_v
        let x = if p_uv {
            band(quad_uv[0], quad_uv[1], t)
        } else {
            band(quad_uv[2], quad_uv[3], t).map(|(lo, hi)| (hi.neg(), lo.neg()))
        };
        let y = if p_vw {
            band(quad_vw[0], quad_vw[1], t)
        } else {
            band(quad_vw[2], quad_vw[3], t).map(|(lo, hi)| (hi.neg(), lo.neg()))
        };
        let mut case = InducedCase { p_uv, p_vw, forward: closed, reverse: closed };
        if let (Some((xl, xh)), Some((yl, yh))) = (x, y) {
            let (lo, hi) = (xl.add(yl), xh.add(yh));
            match (p_uv, p_vw) {
                (true, true) => case.forward = clip(lo, hi, t),
                (false, false) => case.reverse = clip(hi.neg(), lo.neg(), t),
                _ => {
                    case.forward = clip(lo, hi, t);
                    case.reverse = clip(hi.neg(), lo.neg(), t);
                }
            }
        }
        out[k] = case;
    }
    out
}

/// Values of stored precedence variables under which an induced constraint
/// is binding. The penalty is the number of mismatches, plus `1 - y` of the
/// optional middle visit when present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Activation {
    /// `(a, b, value)` with `a < b` naming the stored pair `p_ab`.
    pub conditions: Vec<(usize, usize, bool)>,
    pub optional_middle: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InducedRecord {
    /// Pair with `u < w`.
    pub u: usize,
    pub w: usize,
    pub via: usize,
    /// Orientation combination, or `None` for the strict-synchronization
    /// shortcut.
    pub case: Option<(bool, bool)>,
    pub spec: DependencySpec,
    pub activation: Activation,
}

fn stored(a: usize, b: usize, a_first: bool) -> (usize, usize, bool) {
    if a < b {
        (a, b, a_first)
    } else {
        (b, a, !a_first)
    }
}

/// Induced dependencies for every middle visit flagged in `interval` that
/// has at least two dependencies.
pub fn induced_dependencies(instance: &Instance, interval: &[bool]) -> Vec<InducedRecord> {
    let t = instance.horizon;
    let mut records = Vec::new();
    for v in instance.visit_ids() {
        if !interval[v] {
            continue;
        }
        let deps: Vec<&DependencySpec> = instance.dependencies_of(v).collect();
        if deps.len() < 2 {
            continue;
        }
        for i in 0..deps.len() {
            for j in i + 1..deps.len() {
                let (mut du, mut dw) = (deps[i], deps[j]);
                if du.other(v) > dw.other(v) {
                    std::mem::swap(&mut du, &mut dw);
                }
                let (u, w) = (du.other(v), dw.other(v));
                if u == w {
                    continue;
                }
                let quad_uv = du.quad_from(u);
                let quad_vw = dw.quad_from(v);
                let strict_u = du.is_strict() && instance.co_executed(u, v);
                let strict_w = dw.is_strict() && instance.co_executed(w, v);
                if strict_u || strict_w {
                    // The strict partner starts together with v, so it inherits
                    // the other dependency unchanged.
                    let spec = if strict_u {
                        DependencySpec::oriented(u, w, quad_vw, t)
                    } else {
                        DependencySpec::oriented(u, w, quad_uv, t)
                    };
                    records.push(InducedRecord {
                        u,
                        w,
                        via: v,
                        case: None,
                        spec,
                        activation: Activation { conditions: vec![], optional_middle: None },
                    });
                    continue;
                }
                let optional_middle = (instance.exec_class(v) != ExecClass::Always).then_some(v);
                for case in induced_dependency_table(quad_uv, quad_vw, t) {
                    let quad = [case.forward.0, case.forward.1, case.reverse.0, case.reverse.1];
                    records.push(InducedRecord {
                        u,
                        w,
                        via: v,
                        case: Some((case.p_uv, case.p_vw)),
                        spec: DependencySpec::oriented(u, w, quad, t),
                        activation: Activation {
                            conditions: vec![stored(u, v, case.p_uv), stored(v, w, case.p_vw)],
                            optional_middle,
                        },
                    });
                }
            }
        }
    }
    records
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassStats {
    pub pass: String,
    pub nodes_before: usize,
    pub nodes_after: usize,
    pub arcs_before: usize,
    pub arcs_after: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStats {
    pub passes: Vec<PassStats>,
    pub empty_windows: usize,
    pub induced_records: usize,
}

/// Input for the time-indexed model: a graph plus how its arcs are read.
#[derive(Debug, Clone)]
pub struct PreprocessResult {
    pub graph: TimeIndexedGraph,
    pub windows: Vec<(i64, i64)>,
    /// Visits whose start may lie anywhere between arrival and departure.
    pub interval: Vec<bool>,
    pub induced: Vec<InducedRecord>,
    pub conflicts: Vec<(usize, usize)>,
    pub stats: ReductionStats,
    pub preprocessed: bool,
}

impl PreprocessResult {
    /// The unreduced graph on the original windows.
    pub fn raw(instance: &Instance) -> Self {
        let windows = instance.windows();
        let graph = build_ti_graph_with(instance, &windows);
        PreprocessResult {
            graph,
            windows,
            interval: vec![false; instance.n() + 1],
            induced: Vec::new(),
            conflicts: Vec::new(),
            stats: ReductionStats::default(),
            preprocessed: false,
        }
    }

    pub fn is_interval(&self, visit: usize) -> bool {
        self.interval.get(visit).copied().unwrap_or(false)
    }
}

fn record(stats: &mut ReductionStats, pass: &'static str, before: &TimeIndexedGraph, after: &TimeIndexedGraph) {
    stats.passes.push(PassStats {
        pass: pass.to_string(),
        nodes_before: before.live_node_count(),
        nodes_after: after.live_node_count(),
        arcs_before: before.arc_count(),
        arcs_after: after.arc_count(),
    });
}

/// All reductions in their fixed order.
pub fn preprocess(instance: &Instance) -> PreprocessResult {
    let raw = build_ti_graph_with(instance, &instance.windows());
    let tight = tighten_time_windows(instance);
    let mut stats = ReductionStats::default();
    let g0 = build_ti_graph_with(instance, &tight.windows);
    record(&mut stats, "tighten-windows", &raw, &g0);
    let g1 = remove_redundant_travel_arcs(&g0);
    record(&mut stats, "redundant-travel-arcs", &g0, &g1);
    let interval: Vec<bool> = (0..=instance.n()).map(|v| v > 0 && instance.has_dependencies(v)).collect();
    let induced = induced_dependencies(instance, &interval);
    let sync_free: Vec<bool> = interval.iter().enumerate().map(|(v, &i)| v > 0 && !i).collect();
    let g2 = remove_suboptimal_route_arcs(&g1, instance, &sync_free);
    record(&mut stats, "suboptimal-route-arcs", &g1, &g2);
    let g3 = merge_waiting_chains(&g2);
    record(&mut stats, "merge-waiting-chains", &g2, &g3);
    stats.empty_windows = instance.visit_ids().filter(|&v| is_empty_window(tight.windows[v])).count();
    stats.induced_records = induced.len();
    PreprocessResult {
        graph: g3,
        windows: tight.windows,
        interval,
        induced,
        conflicts: tight.conflicts,
        stats,
        preprocessed: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{QualSet, Visit, VisitKind};
    use crate::sync::{dependency, SyncType};
    use crate::ti_graph::build_ti_graph;

    fn two_visits(wu: (i64, i64), wv: (i64, i64)) -> Instance {
        let mut inst = fixtures::i1();
        inst.visits[0].window = wu;
        inst.visits[1].window = wv;
        inst.visits[1].duration = 20;
        inst
    }

    #[test]
    fn ordered_pair_tightening() {
        let mut inst = two_visits((0, 100), (30, 50));
        inst.dependencies.push(dependency(1, 2, SyncType::OrderedLimitUV, 10, 20, 30, 20, 120).unwrap());
        let t = tighten_time_windows(&inst);
        assert_eq!(t.windows[1], (10, 40));
        assert_eq!(t.windows[2], (30, 50));
    }

    #[test]
    fn strict_sync_tightening() {
        let mut inst = two_visits((0, 60), (20, 80));
        inst.dependencies.push(dependency(1, 2, SyncType::Strict, 0, 0, 30, 20, 120).unwrap());
        let t = tighten_time_windows(&inst);
        assert_eq!(t.windows[1], (20, 60));
        assert_eq!(t.windows[2], (20, 60));
    }

    #[test]
    fn no_dependencies_no_change() {
        let inst = fixtures::i1();
        assert_eq!(tighten_time_windows(&inst).windows, inst.windows());
    }

    /// Interval propagation by enumeration over all start pairs.
    fn brute_tighten(dep: &DependencySpec, wu: (i64, i64), wv: (i64, i64)) -> Option<((i64, i64), (i64, i64))> {
        let mut us = Vec::new();
        let mut vs = Vec::new();
        for a in wu.0..=wu.1 {
            for b in wv.0..=wv.1 {
                if dep.satisfied_by(a, b) {
                    us.push(a);
                    vs.push(b);
                }
            }
        }
        if us.is_empty() {
            return None;
        }
        Some((
            (*us.iter().min().unwrap(), *us.iter().max().unwrap()),
            (*vs.iter().min().unwrap(), *vs.iter().max().unwrap()),
        ))
    }

    #[test]
    fn ordered_tightening_is_exact_for_precedence_pairs() {
        for (ty, lo, hi) in [(SyncType::OrderedLimitUV, 10, 20), (SyncType::PrecedenceVU, 0, 0), (SyncType::OrderedLimitVU, 3, 9)] {
            let dep = dependency(1, 2, ty, lo, hi, 30, 20, 120).unwrap();
            let (nu, nv) = tighten_pair(&dep, (0, 60), (25, 50), 120);
            assert_eq!(brute_tighten(&dep, (0, 60), (25, 50)), Some((nu, nv)), "{ty}");
        }
    }

    #[test]
    fn redundant_arcs_keep_latest_departure() {
        let mut inst = two_visits((0, 5), (100, 110));
        inst.visits[0].duration = 30;
        inst.visits[1].quals = QualSet::at_least(1, 3);
        let g = build_ti_graph(&inst);
        let into_100 = |g: &TimeIndexedGraph| -> Vec<i64> {
            let head = g.node(2, 100).unwrap();
            g.arcs.iter().filter(|a| a.kind == ArcKind::Care && a.head == head).map(|a| g.node_time[a.tail]).collect()
        };
        assert_eq!(into_100(&g), vec![0, 1, 2, 3, 4, 5]);
        let r = remove_redundant_travel_arcs(&g);
        assert_eq!(into_100(&r), vec![5]);
        assert_eq!(remove_redundant_travel_arcs(&r).arcs, r.arcs);
    }

    #[test]
    fn single_visit_keeps_one_route_option() {
        let mut inst = fixtures::i1();
        inst.visits.truncate(1);
        inst.visits[0].window = (0, 4);
        inst.travel = vec![vec![0; 3]; 3];
        let g = build_ti_graph(&inst);
        let r = remove_suboptimal_route_arcs(&g, &inst, &[false, true]);
        let both: Vec<usize> = r
            .nodes_of(1)
            .filter(|&i| {
                r.arcs.iter().any(|a| a.kind == ArcKind::Start && a.head == i)
                    && r.arcs.iter().any(|a| a.kind == ArcKind::End && a.tail == i)
            })
            .collect();
        assert_eq!(both.len(), 1);
        assert_eq!(remove_suboptimal_route_arcs(&r, &inst, &[false, true]).arcs, r.arcs);
    }

    #[test]
    fn synchronized_visits_keep_route_arcs() {
        let mut inst = fixtures::i1();
        inst.dependencies.push(dependency(1, 2, SyncType::NoOverlap, 0, 0, 30, 20, 120).unwrap());
        let g = remove_redundant_travel_arcs(&build_ti_graph(&inst));
        let r = remove_suboptimal_route_arcs(&g, &inst, &[false, false, false]);
        assert_eq!(r.arcs, g.arcs);
    }

    #[test]
    fn wait_chain_merges_into_one_arc() {
        let mut inst = fixtures::i1();
        inst.visits.truncate(1);
        inst.visits[0].window = (0, 4);
        inst.travel = vec![vec![0; 3]; 3];
        let mut g = build_ti_graph(&inst);
        // keep only the route through 1@0 .. 1@4
        let (first, last) = (g.node(1, 0).unwrap(), g.node(1, 4).unwrap());
        g.arcs.retain(|a| a.kind == ArcKind::Wait || (a.kind == ArcKind::Start && a.head == first) || (a.kind == ArcKind::End && a.tail == last));
        let m = merge_waiting_chains(&g);
        let waits: Vec<&TiArc> = m.arcs.iter().filter(|a| a.kind == ArcKind::Wait).collect();
        assert_eq!(waits.len(), 1);
        assert_eq!((waits[0].tail, waits[0].head, waits[0].cost), (first, last, 4));
        assert_eq!(m.live_node_count(), 4);
        assert_eq!(merge_waiting_chains(&m).arcs, m.arcs);
    }

    #[test]
    fn induced_table_rows() {
        let t = 100;
        let rows = induced_dependency_table([2, 5, 7, 9], [3, 4, 1, 6], t);
        assert_eq!(rows[0].forward, (5, 9));
        assert_eq!(rows[0].reverse, (t, t));
        assert_eq!(rows[3].forward, (t, t));
        assert_eq!(rows[3].reverse, (1 + 7, 6 + 9));
        // (1,0) with δ_uv = [10,20] and δ_wv = [5,15]
        let rows = induced_dependency_table([10, 20, 0, 0], [0, 0, 5, 15], t);
        assert_eq!(rows[1].forward, (0, 15));
        assert_eq!(rows[1].reverse, (0, 5));
    }

    #[test]
    fn strict_partner_copies_quadruple() {
        let rows = induced_dependency_table([0, 0, 0, 0], [3, 8, 2, 6], 100);
        assert_eq!(rows[0].forward, (3, 8));
    }

    #[test]
    fn induced_records_for_shared_middle() {
        let mut inst = fixtures::i1();
        inst.visits.push(Visit { id: 3, duration: 10, window: (0, 60), quals: QualSet::at_least(1, 3), kind: VisitKind::Unsplittable });
        inst.travel = fixtures::manhattan_travel(&[(0, 0), (1, 0), (2, 0)]);
        inst.dependencies.push(dependency(1, 2, SyncType::Overlap, 0, 0, 30, 20, 120).unwrap());
        inst.dependencies.push(dependency(2, 3, SyncType::LimitDifference, 5, 10, 20, 10, 120).unwrap());
        inst.caregivers.insert(1, 2);
        inst.validate().unwrap();
        let interval = vec![false, true, true, true];
        let recs = induced_dependencies(&inst, &interval);
        assert_eq!(recs.len(), 4);
        assert!(recs.iter().all(|r| (r.u, r.w, r.via) == (1, 3, 2)));
        assert_eq!(recs[0].activation.conditions, vec![(1, 2, true), (2, 3, true)]);

        inst.dependencies[0] = dependency(1, 2, SyncType::Strict, 0, 0, 30, 20, 120).unwrap();
        let recs = induced_dependencies(&inst, &interval);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].case, None);
        assert_eq!(recs[0].spec.quad(), [5, 10, 5, 10]);
    }
}
