//! Time-indexed formulation on a (possibly reduced) time-indexed graph.

use std::collections::BTreeMap;

use hhc_milp::{Constraint, Model, Sense, VarId};

use crate::formulation::{no_good_cut, Affine, ExtractError, Formulation, FormulationKind, SplitVars};
use crate::mode::{Objective, SolveMode};
use crate::model::{DependencySpec, Instance, Plan};
use crate::preprocess::PreprocessResult;
use crate::ti_graph::{ArcKind, SOURCE, SINK};
use crate::timing::{Skeleton, TimingProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcVar {
    pub arc: usize,
    pub qual: u8,
    pub var: VarId,
}

#[derive(Debug, Clone)]
pub struct TiModel {
    pub model: Model,
    pub pre: PreprocessResult,
    pub mode: SolveMode,
    pub x: Vec<ArcVar>,
    pub splits: SplitVars,
    pub p: BTreeMap<(usize, usize), VarId>,
    /// Precedence variables of induced pairs keyed by `(via, u, w)`.
    pub induced_p: BTreeMap<(usize, usize, usize), VarId>,
}

/// Variables on the arcs leaving (performing) and entering (arriving at)
/// every node.
struct NodeTerms {
    perform_out: Vec<Vec<VarId>>,
    arrive_in: Vec<Vec<VarId>>,
}

/// One ordered reading of a dependency: `first` starts no later than
/// `second`, with `second - first` in `[lo, hi]`.
struct Ordered {
    first: usize,
    second: usize,
    lo: i64,
    hi: i64,
    /// The orientation is selected when the precedence variable is 1 (`true`)
    /// or 0 (`false`).
    when: bool,
}

fn orientations(dep: &DependencySpec) -> [Ordered; 2] {
    [
        Ordered { first: dep.u, second: dep.v, lo: dep.dmin_uv, hi: dep.dmax_uv, when: true },
        Ordered { first: dep.v, second: dep.u, lo: dep.dmin_vu, hi: dep.dmax_vu, when: false },
    ]
}

pub fn build_ti_model(instance: &Instance, pre: &PreprocessResult, mode: SolveMode) -> TiModel {
    let g = &pre.graph;
    let mut model = Model::new();
    let staffed = instance.staffed_levels();
    let travel_mode = mode.objective == Objective::Travel;

    let mut x = Vec::new();
    for (i, a) in g.arcs.iter().enumerate() {
        for q in a.quals.intersect(staffed).levels() {
            let cost = if travel_mode { a.travel as f64 } else { instance.wage_f64(q) * a.cost as f64 };
            x.push(ArcVar { arc: i, qual: q, var: model.add_binary("X", cost) });
        }
    }
    let splits = SplitVars::add(&mut model, instance, mode.split_policy);

    let n_nodes = g.node_count();
    let mut terms = NodeTerms { perform_out: vec![Vec::new(); n_nodes], arrive_in: vec![Vec::new(); n_nodes] };
    let mut flow: BTreeMap<(usize, u8), Vec<(VarId, f64)>> = BTreeMap::new();
    for xv in &x {
        let a = &g.arcs[xv.arc];
        if a.kind.performs_tail() {
            terms.perform_out[a.tail].push(xv.var);
        }
        if matches!(a.kind, ArcKind::Start | ArcKind::Care) {
            terms.arrive_in[a.head].push(xv.var);
        }
        if a.tail != SOURCE {
            flow.entry((a.tail, xv.qual)).or_default().push((xv.var, -1.0));
        }
        if a.head != SINK {
            flow.entry((a.head, xv.qual)).or_default().push((xv.var, 1.0));
        }
    }

    // caregivers per level
    for q in staffed.levels() {
        let starts: Vec<(VarId, f64)> =
            x.iter().filter(|xv| xv.qual == q && g.arcs[xv.arc].kind == ArcKind::Start).map(|xv| (xv.var, 1.0)).collect();
        if !starts.is_empty() {
            model.constrain("caregivers", starts, Sense::Le, instance.caregiver_count(q) as f64);
        }
    }
    // flow conservation
    for (_, t) in flow {
        model.constrain("flow", t, Sense::Eq, 0.0);
    }
    // cover
    let performed: Vec<Affine> =
        (0..=instance.n()).map(|v| if v == 0 { Affine::default() } else { splits.performed(instance, v) }).collect();
    for v in instance.visit_ids() {
        let mut row: Vec<(VarId, f64)> = Vec::new();
        for node in g.nodes_of(v) {
            row.extend(terms.perform_out[node].iter().map(|&var| (var, 1.0)));
        }
        let perf = &performed[v];
        row.extend(perf.terms.iter().map(|&(s, c)| (s, -c)));
        model.constrain("cover", row, Sense::Eq, perf.constant);
    }

    let mut ti = TiModel { model, pre: pre.clone(), mode, x, splits, p: BTreeMap::new(), induced_p: BTreeMap::new() };
    let link = |model: &mut Model, pv: VarId, u: usize, v: usize| {
        // precedence only between performed visits
        let mut row = vec![(pv, 2.0)];
        let mut rhs = 0.0;
        for a in [&performed[u], &performed[v]] {
            row.extend(a.terms.iter().map(|&(s, c)| (s, -c)));
            rhs += a.constant;
        }
        model.constrain("precedence-link", row, Sense::Le, rhs);
    };
    for dep in &instance.dependencies {
        let pv = ti.model.add_binary("p", 0.0);
        ti.model.set_branch_priority(pv, 1);
        ti.p.insert((dep.u, dep.v), pv);
        link(&mut ti.model, pv, dep.u, dep.v);
        for o in orientations(dep) {
            ti.sync_rows(instance, &terms, &o, pv, &Affine::default(), "sync");
        }
    }
    for rec in &pre.induced {
        let key = (rec.via, rec.u, rec.w);
        let pv = match ti.induced_p.get(&key) {
            Some(&pv) => pv,
            None => {
                let pv = ti.model.add_binary("p-induced", 0.0);
                ti.model.set_branch_priority(pv, 1);
                link(&mut ti.model, pv, rec.u, rec.w);
                ti.induced_p.insert(key, pv);
                pv
            }
        };
        // Penalty moved to the left-hand side: Σ |p - value| + (1 - y_via).
        let mut penalty = Affine::default();
        let mut known = true;
        for &(a, b, value) in &rec.activation.conditions {
            let Some(&pab) = ti.p.get(&(a, b)) else {
                known = false;
                break;
            };
            if value {
                penalty.constant += 1.0;
                penalty.terms.push((pab, -1.0));
            } else {
                penalty.terms.push((pab, 1.0));
            }
        }
        if !known {
            continue;
        }
        if let Some(mid) = rec.activation.optional_middle {
            let perf = &performed[mid];
            penalty.constant += 1.0 - perf.constant;
            penalty.terms.extend(perf.terms.iter().map(|&(s, c)| (s, -c)));
        }
        for o in orientations(&rec.spec) {
            ti.sync_rows(instance, &terms, &o, pv, &penalty, "induced-sync");
        }
    }
    ti
}

impl TiModel {
    /// Emits `ind + X(A) + Σ X(B) ≤ 2 + penalty` rows for one orientation,
    /// where `ind` is `p` or `1 - p`.
    fn sync_rows(
        &mut self,
        instance: &Instance,
        nt: &NodeTerms,
        o: &Ordered,
        pv: VarId,
        penalty: &Affine,
        family: &'static str,
    ) {
        let g = &self.pre.graph;
        let horizon = instance.horizon;
        let (ind, base) = if o.when { ((pv, 1.0), 2.0) } else { ((pv, -1.0), 1.0) };
        let rhs = base + penalty.constant;
        let first: Vec<usize> = g.nodes_of(o.first).collect();
        let second: Vec<usize> = g.nodes_of(o.second).collect();
        let mut rows: Vec<(Vec<(VarId, f64)>, f64)> = Vec::new();
        let mut push = |own: &[VarId], others: Vec<VarId>| {
            if own.is_empty() || others.is_empty() {
                return;
            }
            let mut row = vec![ind];
            row.extend(own.iter().map(|&v| (v, 1.0)));
            row.extend(others.into_iter().map(|v| (v, 1.0)));
            row.extend(penalty.terms.iter().map(|&(v, c)| (v, -c)));
            rows.push((row, rhs));
        };
        let collect = |pred: &dyn Fn(i64) -> bool, source: &Vec<Vec<VarId>>| -> Vec<VarId> {
            second.iter().filter(|&&nb| pred(g.node_time[nb])).flat_map(|&nb| source[nb].iter().copied()).collect()
        };
        for &na in &first {
            let t = g.node_time[na];
            if self.pre.preprocessed {
                let early = collect(&|l| l < t + o.lo, &nt.perform_out);
                push(&nt.arrive_in[na], early);
                if o.hi < horizon {
                    let late = collect(&|l| l > t + o.hi, &nt.arrive_in);
                    push(&nt.perform_out[na], late);
                }
            } else {
                let outside = collect(&|l| l < t + o.lo || (o.hi < horizon && l > t + o.hi), &nt.perform_out);
                push(&nt.perform_out[na], outside);
            }
        }
        for (row, rhs) in rows {
            self.model.constrain(family, row, Sense::Le, rhs);
        }
    }

    /// Total flow per graph arc, summed over levels.
    pub fn arc_flow(&self, values: &[f64]) -> Vec<f64> {
        let mut flow = vec![0.0; self.pre.graph.arc_count()];
        for xv in &self.x {
            flow[xv.arc] += values[xv.var.index()];
        }
        flow
    }

    /// Routes with the arrival and departure time of every visit.
    pub fn decompose(&self, values: &[f64]) -> Result<Vec<(u8, Vec<(usize, i64, i64)>)>, ExtractError> {
        let g = &self.pre.graph;
        let mut out: BTreeMap<(usize, u8), Vec<usize>> = BTreeMap::new();
        let mut used = 0usize;
        for xv in &self.x {
            if values[xv.var.index()] > 0.5 {
                out.entry((g.arcs[xv.arc].tail, xv.qual)).or_default().push(xv.arc);
                used += 1;
            }
        }
        let mut walked = 0usize;
        let mut routes = Vec::new();
        let starts: Vec<(u8, usize)> =
            out.iter().filter(|((tail, _), _)| *tail == SOURCE).flat_map(|(&(_, q), arcs)| arcs.iter().map(move |&a| (q, a))).collect();
        for (q, start) in starts {
            walked += 1;
            let mut node = g.arcs[start].head;
            let mut arrival = g.node_time[node];
            let mut stops = Vec::new();
            loop {
                let next = match out.get(&(node, q)).map(Vec::as_slice) {
                    Some([a]) => *a,
                    _ => return Err(ExtractError::Flow(format!("node {} has no unique successor", g.label(node)))),
                };
                walked += 1;
                if walked > used {
                    return Err(ExtractError::Flow("arc reused".into()));
                }
                let arc = &g.arcs[next];
                if arc.kind.performs_tail() {
                    stops.push((g.node_visit[node], arrival, g.node_time[node]));
                }
                if arc.kind == ArcKind::End {
                    break;
                }
                node = arc.head;
                if arc.kind != ArcKind::Wait {
                    arrival = g.node_time[node];
                }
            }
            routes.push((q, stops));
        }
        if walked != used {
            return Err(ExtractError::Flow(format!("{} arcs are not on any route", used - walked)));
        }
        Ok(routes)
    }
}

impl Formulation for TiModel {
    fn kind(&self) -> FormulationKind {
        FormulationKind::TimeIndexed
    }

    fn model(&self) -> &Model {
        &self.model
    }

    fn objective(&self) -> Objective {
        self.mode.objective
    }

    fn extract(&self, instance: &Instance, values: &[f64]) -> Result<Plan, ExtractError> {
        let routes = self.decompose(values)?;
        let skeletons = routes.iter().map(|(q, stops)| Skeleton { qual: *q, visits: stops.iter().map(|s| s.0).collect() }).collect();
        let mut problem = TimingProblem::new(instance, skeletons, self.splits.decisions(values));
        for (_, stops) in &routes {
            for &(v, arrival, departure) in stops {
                problem.bounds[v] = if self.pre.preprocessed { (arrival, departure) } else { (departure, departure) };
            }
        }
        for (&pair, var) in &self.p {
            problem.preferred.insert(pair, values[var.index()] > 0.5);
        }
        problem.solve().ok_or(ExtractError::Timing)
    }

    fn no_good(&self, values: &[f64]) -> Option<Constraint> {
        no_good_cut(self.x.iter().map(|xv| xv.var), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::preprocess::preprocess;

    #[test]
    fn i1_model_shape() {
        let inst = fixtures::i1();
        let pre = PreprocessResult::raw(&inst);
        let m = build_ti_model(&inst, &pre, SolveMode::raw());
        assert_eq!(m.model.count_family("X"), pre.graph.arc_count());
        assert_eq!(m.model.count_constraint_family("cover"), 2);
        assert_eq!(m.model.count_constraint_family("caregivers"), 1);
        let red = preprocess(&inst);
        let m2 = build_ti_model(&inst, &red, SolveMode::default());
        assert!(m2.model.num_vars() < m.model.num_vars());
    }
}
