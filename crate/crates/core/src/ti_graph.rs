//! Time-indexed graph: one node per visit and feasible start minute.
//!
//! Node 0 is the source and node 1 the sink; visit nodes follow, grouped by
//! visit and ordered by time.

use std::fmt::Write as _;

use crate::model::{Instance, QualSet};
use crate::routing::care_arc_allowed;

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcKind {
    Start,
    /// Visit to visit.
    Care,
    /// Visit to the sink; also a care arc in the sense that the tail visit is
    /// performed.
    End,
    Wait,
}

impl ArcKind {
    /// Leaving along this arc means the tail visit starts at the tail time.
    pub fn performs_tail(self) -> bool {
        matches!(self, ArcKind::Care | ArcKind::End)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TiArc {
    pub tail: usize,
    pub head: usize,
    pub kind: ArcKind,
    /// Working time spent along the arc.
    pub cost: i64,
    /// Travel time, non-zero only on care arcs.
    pub travel: i64,
    /// Levels allowed to use the arc.
    pub quals: QualSet,
}

#[derive(Debug, Clone)]
pub struct TimeIndexedGraph {
    /// Windows the nodes were generated from, indexed by visit id.
    pub windows: Vec<(i64, i64)>,
    /// Visit id per node; 0 for the source and `n + 1` for the sink.
    pub node_visit: Vec<usize>,
    pub node_time: Vec<i64>,
    /// First node of each visit (indexed by id), valid when the window is
    /// nonempty.
    first_node: Vec<usize>,
    pub arcs: Vec<TiArc>,
    /// Nodes dropped by reductions.
    pub removed: Vec<bool>,
}

impl TimeIndexedGraph {
    pub fn node_count(&self) -> usize {
        self.node_visit.len()
    }

    pub fn live_node_count(&self) -> usize {
        self.removed.iter().filter(|r| !**r).count()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn node(&self, visit: usize, time: i64) -> Option<usize> {
        let (a, b) = *self.windows.get(visit)?;
        if visit == 0 || visit >= self.first_node.len() || time < a || time > b {
            return None;
        }
        Some(self.first_node[visit] + (time - a) as usize)
    }

    /// Live nodes of a visit in time order.
    pub fn nodes_of(&self, visit: usize) -> impl Iterator<Item = usize> + '_ {
        let (a, b) = self.windows[visit];
        let start = self.first_node[visit];
        let count = if a <= b { (b - a + 1) as usize } else { 0 };
        (start..start + count).filter(move |&i| !self.removed[i])
    }

    pub fn is_visit_node(&self, node: usize) -> bool {
        node > SINK
    }

    /// Outgoing and incoming arc indices per node.
    pub fn adjacency(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let mut out = vec![Vec::new(); self.node_count()];
        let mut inn = vec![Vec::new(); self.node_count()];
        for (i, a) in self.arcs.iter().enumerate() {
            out[a.tail].push(i);
            inn[a.head].push(i);
        }
        (out, inn)
    }

    pub fn count_kind(&self, kind: ArcKind) -> usize {
        self.arcs.iter().filter(|a| a.kind == kind).count()
    }

    /// Canonical arc order: by tail, head, kind.
    pub fn sort_arcs(&mut self) {
        self.arcs.sort_by_key(|a| (a.tail, a.head, a.kind));
        self.arcs.dedup_by_key(|a| (a.tail, a.head, a.kind));
    }

    pub fn label(&self, node: usize) -> String {
        match node {
            SOURCE => "0".to_string(),
            SINK => "end".to_string(),
            _ => format!("{}@{}", self.node_visit[node], self.node_time[node]),
        }
    }

    /// Graphviz rendering of the arcs for debugging.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph ti {\n  rankdir=LR;\n");
        for a in &self.arcs {
            let style = match a.kind {
                ArcKind::Start | ArcKind::End => "dashed",
                ArcKind::Care => "solid",
                ArcKind::Wait => "dotted",
            };
            let _ = writeln!(
                s,
                "  \"{}\" -> \"{}\" [label=\"{}\", style={}];",
                self.label(a.tail),
                self.label(a.head),
                a.cost,
                style
            );
        }
        s.push_str("}\n");
        s
    }
}

pub fn build_ti_graph(instance: &Instance) -> TimeIndexedGraph {
    build_ti_graph_with(instance, &instance.windows())
}

/// Builds the graph on the given windows, indexed by visit id. A visit whose
/// levels are all unstaffed keeps its nodes but gets no arcs.
pub fn build_ti_graph_with(instance: &Instance, windows: &[(i64, i64)]) -> TimeIndexedGraph {
    let n = instance.n();
    let staffed = instance.staffed_levels();
    let mut node_visit = vec![0, n + 1];
    let mut node_time = vec![0, instance.horizon];
    let mut first_node = vec![0; n + 1];
    for v in 1..=n {
        first_node[v] = node_visit.len();
        let (a, b) = windows[v];
        for t in a..=b {
            node_visit.push(v);
            node_time.push(t);
        }
    }
    let mut g = TimeIndexedGraph {
        windows: windows.to_vec(),
        node_visit,
        node_time,
        first_node,
        arcs: Vec::new(),
        removed: Vec::new(),
    };
    g.removed = vec![false; g.node_count()];

    let usable: Vec<usize> = (1..=n)
        .filter(|&v| windows[v].0 <= windows[v].1 && !instance.visit(v).quals.intersect(staffed).is_empty())
        .collect();
    for &u in &usable {
        let vu = instance.visit(u);
        let qu = vu.quals.intersect(staffed);
        let (a, b) = windows[u];
        for t in a..=b {
            let node = g.node(u, t).unwrap();
            g.arcs.push(TiArc { tail: SOURCE, head: node, kind: ArcKind::Start, cost: 0, travel: 0, quals: qu });
            g.arcs.push(TiArc { tail: node, head: SINK, kind: ArcKind::End, cost: vu.duration, travel: 0, quals: qu });
            if t < b {
                g.arcs.push(TiArc { tail: node, head: node + 1, kind: ArcKind::Wait, cost: 1, travel: 0, quals: qu });
            }
        }
        for &v in &usable {
            if !care_arc_allowed(instance, windows, u, v) {
                continue;
            }
            let quals = qu.intersect(instance.visit(v).quals);
            let travel = instance.travel(u, v);
            let (av, bv) = windows[v];
            for t in a..=b {
                let l = (t + vu.duration + travel).max(av);
                if l > bv {
                    break;
                }
                g.arcs.push(TiArc {
                    tail: g.node(u, t).unwrap(),
                    head: g.node(v, l).unwrap(),
                    kind: ArcKind::Care,
                    cost: l - t,
                    travel,
                    quals,
                });
            }
        }
    }
    g.sort_arcs();
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn window_nodes_and_waits() {
        let mut inst = fixtures::i1();
        inst.visits[0].window = (10, 12);
        let g = build_ti_graph(&inst);
        let nodes: Vec<i64> = g.nodes_of(1).map(|i| g.node_time[i]).collect();
        assert_eq!(nodes, vec![10, 11, 12]);
        let waits: Vec<(i64, i64)> = g
            .arcs
            .iter()
            .filter(|a| a.kind == ArcKind::Wait && g.node_visit[a.tail] == 1)
            .map(|a| (g.node_time[a.tail], g.node_time[a.head]))
            .collect();
        assert_eq!(waits, vec![(10, 11), (11, 12)]);
    }

    #[test]
    fn i1_arc_costs() {
        let inst = fixtures::i1();
        let g = build_ti_graph(&inst);
        let (a0, b40) = (g.node(1, 0).unwrap(), g.node(2, 40).unwrap());
        let care = g.arcs.iter().find(|a| a.tail == a0 && a.kind == ArcKind::Care).unwrap();
        assert_eq!((care.head, care.cost), (b40, 40));
        let b0 = g.node(2, 0).unwrap();
        let end = g.arcs.iter().find(|a| a.tail == b0 && a.kind == ArcKind::End).unwrap();
        assert_eq!(end.cost, 20);
        assert_eq!(g.node_count(), 2 + 61 + 101);
    }
}
