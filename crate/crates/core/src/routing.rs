//! Routing graph over visits plus the artificial start and end nodes.

use crate::model::Instance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingGraph {
    /// `n + 1`.
    pub end: usize,
    /// Heads of the arcs leaving node 0.
    pub start_arcs: Vec<usize>,
    /// Visit-to-visit arcs.
    pub care_arcs: Vec<(usize, usize)>,
    /// Tails of the arcs entering node `n + 1`.
    pub end_arcs: Vec<usize>,
    /// Windows the arcs were derived from, indexed by visit id.
    pub windows: Vec<(i64, i64)>,
}

impl RoutingGraph {
    pub fn arc_count(&self) -> usize {
        self.start_arcs.len() + self.care_arcs.len() + self.end_arcs.len()
    }

    /// Sorts and deduplicates the arc lists.
    pub fn normalize(&mut self) {
        for list in [&mut self.start_arcs, &mut self.end_arcs] {
            list.sort_unstable();
            list.dedup();
        }
        self.care_arcs.sort_unstable();
        self.care_arcs.dedup();
    }

    pub fn has_care_arc(&self, u: usize, v: usize) -> bool {
        self.care_arcs.binary_search(&(u, v)).is_ok()
    }

    /// All arcs as `(tail, head)` including the artificial nodes.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.start_arcs
            .iter()
            .map(|&v| (0, v))
            .chain(self.care_arcs.iter().copied())
            .chain(self.end_arcs.iter().map(move |&v| (v, self.end)))
    }
}

/// Whether a caregiver may perform `v` directly after `u` given `windows`.
pub fn care_arc_allowed(instance: &Instance, windows: &[(i64, i64)], u: usize, v: usize) -> bool {
    if u == v || instance.same_family(u, v) {
        return false;
    }
    let (vu, vv) = (instance.visit(u), instance.visit(v));
    if vu.quals.intersect(vv.quals).intersect(instance.staffed_levels()).is_empty() {
        return false;
    }
    let (au, bu) = windows[u];
    let (av, bv) = windows[v];
    au <= bu && av <= bv && au + vu.duration + instance.travel(u, v) <= bv
}

pub fn build_routing_graph(instance: &Instance) -> RoutingGraph {
    build_routing_graph_with(instance, &instance.windows())
}

/// Builds the graph on the given (possibly tightened) windows, indexed by
/// visit id. Visits with an empty window get no arcs.
pub fn build_routing_graph_with(instance: &Instance, windows: &[(i64, i64)]) -> RoutingGraph {
    let staffed = instance.staffed_levels();
    let usable: Vec<usize> = instance
        .visit_ids()
        .filter(|&v| windows[v].0 <= windows[v].1 && !instance.visit(v).quals.intersect(staffed).is_empty())
        .collect();
    let mut care_arcs = Vec::new();
    for &u in &usable {
        for &v in &usable {
            if care_arc_allowed(instance, windows, u, v) {
                care_arcs.push((u, v));
            }
        }
    }
    RoutingGraph {
        end: instance.end_node(),
        start_arcs: usable.clone(),
        care_arcs,
        end_arcs: usable,
        windows: windows.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn i1_has_both_directions() {
        let g = build_routing_graph(&fixtures::i1());
        assert!(g.has_care_arc(1, 2));
        assert!(g.has_care_arc(2, 1));
        assert_eq!(g.start_arcs, vec![1, 2]);
        assert_eq!(g.end_arcs, vec![1, 2]);
        assert_eq!(g.arc_count(), 6);
    }

    #[test]
    fn split_family_is_disconnected() {
        let inst = fixtures::split_benefit();
        let g = build_routing_graph(&inst);
        for &(a, b) in &[(1, 4), (4, 1), (1, 5), (5, 1), (4, 5), (5, 4)] {
            assert!(!g.has_care_arc(a, b), "arc ({a},{b})");
        }
        assert!(g.has_care_arc(4, 3));
    }

    #[test]
    fn disjoint_qualifications_have_no_arc() {
        let inst = fixtures::split_benefit();
        let g = build_routing_graph(&inst);
        let mut inst2 = inst.clone();
        inst2.visits[3].quals = crate::model::QualSet::from_levels([1]);
        let g2 = build_routing_graph(&inst2);
        assert!(g.has_care_arc(4, 2));
        assert!(!g2.has_care_arc(4, 2));
        assert!(g2.has_care_arc(4, 3));
    }
}
