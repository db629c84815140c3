//! Problem data: visits, caregivers, dependencies and plans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

/// A set of qualification levels stored as a bitmask (bit `l` = level `l`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct QualSet(u64);

impl QualSet {
    pub const EMPTY: QualSet = QualSet(0);

    pub fn from_levels<I: IntoIterator<Item = u8>>(levels: I) -> Self {
        let mut bits = 0u64;
        for l in levels {
            debug_assert!(l < 64);
            bits |= 1 << l;
        }
        QualSet(bits)
    }

    /// Hierarchical requirement: level `min` or any higher level up to `max`.
    pub fn at_least(min: u8, max: u8) -> Self {
        Self::from_levels(min..=max)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, level: u8) -> bool {
        level < 64 && self.0 & (1 << level) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: QualSet) -> QualSet {
        QualSet(self.0 & other.0)
    }

    pub fn union(self, other: QualSet) -> QualSet {
        QualSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: QualSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn levels(self) -> impl Iterator<Item = u8> {
        let bits = self.0;
        (0u8..64).filter(move |l| bits & (1 << l) != 0)
    }
}

impl fmt::Debug for QualSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.levels()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qualification {
    pub level: u8,
    pub wage: Rational64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VisitKind {
    Unsplittable,
    Splittable,
    /// `part` is 1 or 2.
    SplitPart { parent: usize, part: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Visit {
    pub id: usize,
    pub duration: i64,
    /// Earliest and latest start (α, β).
    pub window: (i64, i64),
    pub quals: QualSet,
    pub kind: VisitKind,
}

impl Visit {
    pub fn is_part(&self) -> bool {
        matches!(self.kind, VisitKind::SplitPart { .. })
    }
}

/// Start-time difference bands for the visit pair `u < v`.
///
/// If `u` starts no later than `v`, then `t_v - t_u` must lie in
/// `[dmin_uv, dmax_uv]`; otherwise `t_u - t_v` must lie in `[dmin_vu, dmax_vu]`.
/// A value equal to the horizon means "unbounded" for a maximum and
/// "impossible" for a minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct DependencySpec {
    pub u: usize,
    pub v: usize,
    pub dmin_uv: i64,
    pub dmax_uv: i64,
    pub dmin_vu: i64,
    pub dmax_vu: i64,
}

impl DependencySpec {
    /// Builds a dependency from a quadruple given for the ordered pair
    /// `(a, b)`, swapping into `u < v` orientation and clamping to `horizon`.
    pub fn oriented(a: usize, b: usize, quad: [i64; 4], horizon: i64) -> Self {
        let clamp = |x: i64| x.clamp(0, horizon);
        let [min_ab, max_ab, min_ba, max_ba] = quad.map(clamp);
        if a < b {
            DependencySpec { u: a, v: b, dmin_uv: min_ab, dmax_uv: max_ab, dmin_vu: min_ba, dmax_vu: max_ba }
        } else {
            DependencySpec { u: b, v: a, dmin_uv: min_ba, dmax_uv: max_ba, dmin_vu: min_ab, dmax_vu: max_ab }
        }
    }

    pub fn quad(&self) -> [i64; 4] {
        [self.dmin_uv, self.dmax_uv, self.dmin_vu, self.dmax_vu]
    }

    /// Quadruple seen from `from` towards the other visit of the pair.
    pub fn quad_from(&self, from: usize) -> [i64; 4] {
        if from == self.u {
            self.quad()
        } else {
            [self.dmin_vu, self.dmax_vu, self.dmin_uv, self.dmax_uv]
        }
    }

    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn involves(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }

    pub fn is_strict(&self) -> bool {
        self.quad() == [0, 0, 0, 0]
    }

    /// Whether the start times `(tu, tv)` satisfy one of the two bands.
    pub fn satisfied_by(&self, tu: i64, tv: i64) -> bool {
        let diff = tv - tu;
        (diff >= 0 && diff >= self.dmin_uv && diff <= self.dmax_uv)
            || (diff <= 0 && -diff >= self.dmin_vu && -diff <= self.dmax_vu)
    }
}

/// Which split decision governs whether a visit is performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExecClass {
    Always,
    /// Performed iff the linked group of splittable visits is not split.
    Original(usize),
    /// Performed iff the linked group is split.
    Parts(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InstanceMeta {
    pub name: Option<String>,
    pub visit_profile: Option<String>,
    pub staff_profile: Option<String>,
    pub seed: Option<u64>,
}

impl InstanceMeta {
    pub fn is_empty(&self) -> bool {
        self.name.is_none() && self.visit_profile.is_none() && self.staff_profile.is_none() && self.seed.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub horizon: i64,
    pub qualifications: Vec<Qualification>,
    pub caregivers: BTreeMap<u8, u32>,
    /// `visits[i].id == i + 1`.
    pub visits: Vec<Visit>,
    /// Indexed `0..=n+1`; row/column 0 and `n+1` are the depot copies.
    pub travel: Vec<Vec<i64>>,
    pub dependencies: Vec<DependencySpec>,
    /// Pairs of splittable visits that must take the same split decision.
    pub split_links: Vec<(usize, usize)>,
    pub meta: InstanceMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> InstanceError {
    InstanceError::Invalid { path: path.into(), message: message.into() }
}

impl Instance {
    pub fn n(&self) -> usize {
        self.visits.len()
    }

    pub fn end_node(&self) -> usize {
        self.visits.len() + 1
    }

    pub fn visit(&self, id: usize) -> &Visit {
        &self.visits[id - 1]
    }

    pub fn get_visit(&self, id: usize) -> Option<&Visit> {
        if id == 0 {
            None
        } else {
            self.visits.get(id - 1)
        }
    }

    pub fn visit_ids(&self) -> impl Iterator<Item = usize> + '_ {
        1..=self.visits.len()
    }

    pub fn travel(&self, from: usize, to: usize) -> i64 {
        self.travel[from][to]
    }

    pub fn wage(&self, level: u8) -> Option<Rational64> {
        self.qualifications.iter().find(|q| q.level == level).map(|q| q.wage)
    }

    pub fn wage_f64(&self, level: u8) -> f64 {
        self.wage(level).and_then(|w| w.to_f64()).unwrap_or(0.0)
    }

    pub fn caregiver_count(&self, level: u8) -> u32 {
        self.caregivers.get(&level).copied().unwrap_or(0)
    }

    pub fn all_levels(&self) -> QualSet {
        QualSet::from_levels(self.qualifications.iter().map(|q| q.level))
    }

    /// Levels with at least one caregiver.
    pub fn staffed_levels(&self) -> QualSet {
        QualSet::from_levels(self.caregivers.iter().filter(|(_, &c)| c > 0).map(|(&l, _)| l))
    }

    pub fn total_caregivers(&self) -> u32 {
        self.caregivers.values().sum()
    }

    pub fn splittable(&self) -> Vec<usize> {
        self.visits.iter().filter(|v| v.kind == VisitKind::Splittable).map(|v| v.id).collect()
    }

    /// Number of originally requested visits (splittable and unsplittable).
    pub fn original_count(&self) -> usize {
        self.visits.iter().filter(|v| !v.is_part()).count()
    }

    pub fn parts_of(&self, parent: usize) -> Option<(usize, usize)> {
        let mut first = None;
        let mut second = None;
        for v in &self.visits {
            if let VisitKind::SplitPart { parent: p, part } = v.kind {
                if p == parent {
                    if part == 1 {
                        first = Some(v.id);
                    } else {
                        second = Some(v.id);
                    }
                }
            }
        }
        first.zip(second)
    }

    /// The splittable original a visit belongs to, or the visit itself.
    pub fn family_root(&self, id: usize) -> usize {
        match self.visit(id).kind {
            VisitKind::SplitPart { parent, .. } => parent,
            _ => id,
        }
    }

    /// Members of the same split family (original and its parts).
    pub fn same_family(&self, a: usize, b: usize) -> bool {
        a != b && self.family_root(a) == self.family_root(b) && {
            let root = self.family_root(a);
            self.visit(root).kind == VisitKind::Splittable
        }
    }

    /// Representative of the split-link group containing splittable `w`.
    pub fn link_root(&self, w: usize) -> usize {
        let mut group: BTreeSet<usize> = BTreeSet::from([w]);
        loop {
            let before = group.len();
            for &(a, b) in &self.split_links {
                if group.contains(&a) || group.contains(&b) {
                    group.insert(a);
                    group.insert(b);
                }
            }
            if group.len() == before {
                break;
            }
        }
        *group.iter().next().unwrap()
    }

    pub fn exec_class(&self, id: usize) -> ExecClass {
        match self.visit(id).kind {
            VisitKind::Unsplittable => ExecClass::Always,
            VisitKind::Splittable => ExecClass::Original(self.link_root(id)),
            VisitKind::SplitPart { parent, .. } => ExecClass::Parts(self.link_root(parent)),
        }
    }

    /// Whether performing one of the two visits implies performing the other.
    pub fn co_executed(&self, a: usize, b: usize) -> bool {
        self.exec_class(a) == self.exec_class(b)
    }

    pub fn dependencies_of(&self, id: usize) -> impl Iterator<Item = &DependencySpec> + '_ {
        self.dependencies.iter().filter(move |d| d.involves(id))
    }

    pub fn has_dependencies(&self, id: usize) -> bool {
        self.dependencies.iter().any(|d| d.involves(id))
    }

    pub fn dependency(&self, a: usize, b: usize) -> Option<&DependencySpec> {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        self.dependencies.iter().find(|d| d.u == u && d.v == v)
    }

    /// Visit windows as a vector indexed by visit id (index 0 unused).
    pub fn windows(&self) -> Vec<(i64, i64)> {
        let mut w = vec![(0, self.horizon)];
        w.extend(self.visits.iter().map(|v| v.window));
        w
    }

    /// Checks every structural invariant of the data model.
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.horizon <= 0 {
            return Err(invalid("horizon", "must be positive"));
        }
        let mut levels = BTreeSet::new();
        for (i, q) in self.qualifications.iter().enumerate() {
            if q.level == 0 || q.level >= 64 {
                return Err(invalid(format!("qualifications[{i}].level"), "must be in 1..=63"));
            }
            if !levels.insert(q.level) {
                return Err(invalid(format!("qualifications[{i}].level"), format!("duplicate level {}", q.level)));
            }
            if q.wage < Rational64::zero() {
                return Err(invalid(format!("qualifications[{i}].wage"), "must be nonnegative"));
            }
        }
        for level in self.caregivers.keys() {
            if !levels.contains(level) {
                return Err(invalid(format!("caregivers.{level}"), "unknown qualification level"));
            }
        }
        let all = self.all_levels();
        let n = self.visits.len();
        for (i, v) in self.visits.iter().enumerate() {
            let path = format!("visits[{i}]");
            if v.id != i + 1 {
                return Err(invalid(format!("{path}.id"), format!("expected id {} (ids must be 1..=n in order)", i + 1)));
            }
            if v.duration <= 0 || v.duration > self.horizon {
                return Err(invalid(format!("{path}.duration"), "must be in 1..=horizon"));
            }
            let (a, b) = v.window;
            if a < 0 || a >= b || b > self.horizon - v.duration {
                return Err(invalid(
                    format!("{path}.window"),
                    format!("need 0 <= start < end <= horizon - duration, got [{a},{b}]"),
                ));
            }
            if v.quals.is_empty() {
                return Err(invalid(format!("{path}.quals"), "must be nonempty"));
            }
            if !v.quals.is_subset(all) {
                return Err(invalid(format!("{path}.quals"), "references an unknown qualification level"));
            }
            if let VisitKind::SplitPart { parent, part } = v.kind {
                if part != 1 && part != 2 {
                    return Err(invalid(format!("{path}.part"), "must be 1 or 2"));
                }
                if parent == 0 || parent > n || self.visits[parent - 1].kind != VisitKind::Splittable {
                    return Err(invalid(format!("{path}.parent"), "must reference a splittable visit"));
                }
            }
        }
        for v in &self.visits {
            if v.kind == VisitKind::Splittable {
                let count = self
                    .visits
                    .iter()
                    .filter(|w| matches!(w.kind, VisitKind::SplitPart { parent, .. } if parent == v.id))
                    .count();
                if count != 2 || self.parts_of(v.id).is_none() {
                    return Err(invalid(
                        format!("visits[{}]", v.id - 1),
                        "a splittable visit needs exactly one part 1 and one part 2",
                    ));
                }
            }
        }
        if self.travel.len() != n + 2 {
            return Err(invalid("travel", format!("expected {} rows, got {}", n + 2, self.travel.len())));
        }
        for (i, row) in self.travel.iter().enumerate() {
            if row.len() != n + 2 {
                return Err(invalid(format!("travel[{i}]"), format!("expected {} entries, got {}", n + 2, row.len())));
            }
            for (j, &t) in row.iter().enumerate() {
                if t < 0 {
                    return Err(invalid(format!("travel[{i}][{j}]"), "must be nonnegative"));
                }
            }
        }
        for j in 0..n + 2 {
            if self.travel[0][j] != 0 {
                return Err(invalid(format!("travel[0][{j}]"), "travel from the depot must be zero"));
            }
            if self.travel[j][n + 1] != 0 {
                return Err(invalid(format!("travel[{j}][{}]", n + 1), "travel to the end depot must be zero"));
            }
        }
        for u in 1..=n {
            for v in 1..=n {
                if u == v {
                    continue;
                }
                for w in 1..=n {
                    if w == u || w == v {
                        continue;
                    }
                    let direct = self.travel[u][v];
                    let detour = self.travel[u][w] + self.travel[w][v];
                    if direct > detour {
                        return Err(invalid(
                            "travel",
                            format!("triangle inequality violated for ({u},{w},{v}): t[{u}][{v}]={direct} > t[{u}][{w}]+t[{w}][{v}]={detour}"),
                        ));
                    }
                }
            }
        }
        let mut seen = BTreeSet::new();
        for (i, d) in self.dependencies.iter().enumerate() {
            let path = format!("dependencies[{i}]");
            if d.u == 0 || d.v == 0 || d.u > n || d.v > n {
                return Err(invalid(path, format!("unknown visit in pair ({},{})", d.u, d.v)));
            }
            if d.u >= d.v {
                return Err(invalid(path, "pairs must satisfy u < v"));
            }
            if !seen.insert((d.u, d.v)) {
                return Err(invalid(path, "duplicate dependency pair"));
            }
            for (name, x) in [("dmin_uv", d.dmin_uv), ("dmax_uv", d.dmax_uv), ("dmin_vu", d.dmin_vu), ("dmax_vu", d.dmax_vu)] {
                if x < 0 || x > self.horizon {
                    return Err(invalid(format!("{path}.{name}"), "must lie in [0, horizon]"));
                }
            }
            if d.dmin_uv > d.dmax_uv || d.dmin_vu > d.dmax_vu {
                return Err(invalid(path, "minimum exceeds maximum"));
            }
        }
        for (i, &(a, b)) in self.split_links.iter().enumerate() {
            for x in [a, b] {
                if x == 0 || x > n || self.visits[x - 1].kind != VisitKind::Splittable {
                    return Err(invalid(format!("split_links[{i}]"), format!("visit {x} is not splittable")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stop {
    pub visit: usize,
    pub start: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub qual: u8,
    pub stops: Vec<Stop>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plan {
    pub routes: Vec<Route>,
    pub splits: BTreeMap<usize, bool>,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub status: Option<String>,
}

impl Plan {
    /// Routes with at least one stop.
    pub fn active_routes(&self) -> impl Iterator<Item = &Route> + '_ {
        self.routes.iter().filter(|r| !r.stops.is_empty())
    }

    pub fn start_of(&self, visit: usize) -> Option<i64> {
        self.routes.iter().flat_map(|r| &r.stops).find(|s| s.visit == visit).map(|s| s.start)
    }

    pub fn performed(&self) -> BTreeMap<usize, i64> {
        self.routes.iter().flat_map(|r| &r.stops).map(|s| (s.visit, s.start)).collect()
    }

    pub fn caregivers_used(&self) -> usize {
        self.active_routes().count()
    }

    /// Routes and split flags only, without status metadata.
    pub fn without_metadata(&self) -> Plan {
        Plan { routes: self.routes.clone(), splits: self.splits.clone(), ..Plan::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("route {route} references unknown visit {visit}")]
    UnknownVisit { route: usize, visit: usize },
    #[error("route {route} uses unknown qualification level {level}")]
    UnknownQualification { route: usize, level: u8 },
}

fn check_route(route_idx: usize, route: &Route, instance: &Instance) -> Result<(), PlanError> {
    if instance.wage(route.qual).is_none() {
        return Err(PlanError::UnknownQualification { route: route_idx, level: route.qual });
    }
    for s in &route.stops {
        if instance.get_visit(s.visit).is_none() {
            return Err(PlanError::UnknownVisit { route: route_idx, visit: s.visit });
        }
    }
    Ok(())
}

/// Working time of a route: end of the last visit minus start of the first.
pub fn route_working_time(route: &Route, instance: &Instance) -> i64 {
    match (route.stops.first(), route.stops.last()) {
        (Some(first), Some(last)) => last.start + instance.visit(last.visit).duration - first.start,
        _ => 0,
    }
}

/// Wage-weighted working time summed over all routes.
pub fn plan_cost(plan: &Plan, instance: &Instance) -> Result<Rational64, PlanError> {
    let mut total = Rational64::zero();
    for (i, route) in plan.routes.iter().enumerate() {
        check_route(i, route, instance)?;
        let wage = instance.wage(route.qual).expect("checked");
        total += wage * Rational64::from_integer(route_working_time(route, instance));
    }
    Ok(total)
}

/// Total travel time between consecutive visits of all routes.
pub fn plan_travel_time(plan: &Plan, instance: &Instance) -> Result<i64, PlanError> {
    let mut total = 0;
    for (i, route) in plan.routes.iter().enumerate() {
        check_route(i, route, instance)?;
        total += route.stops.windows(2).map(|p| instance.travel(p[0].visit, p[1].visit)).sum::<i64>();
    }
    Ok(total)
}

pub fn rational_to_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn qualset_ops() {
        let q = QualSet::at_least(2, 3);
        assert!(q.contains(2) && q.contains(3) && !q.contains(1));
        assert_eq!(q.levels().collect::<Vec<_>>(), vec![2, 3]);
        assert!(q.is_subset(QualSet::at_least(1, 3)));
        assert!(q.intersect(QualSet::from_levels([1])).is_empty());
    }

    #[test]
    fn i1_cost_and_travel() {
        let inst = fixtures::i1();
        let plan = fixtures::i1_optimal_plan();
        assert_eq!(plan_cost(&plan, &inst).unwrap(), Rational64::from_integer(180));
        assert_eq!(plan_travel_time(&plan, &inst).unwrap(), 10);
    }

    #[test]
    fn single_visit_route_costs_wage_times_duration() {
        let inst = fixtures::i1();
        let plan = Plan { routes: vec![Route { qual: 3, stops: vec![Stop { visit: 1, start: 5 }] }], ..Plan::default() };
        assert_eq!(plan_cost(&plan, &inst).unwrap(), Rational64::from_integer(90));
        assert_eq!(plan_travel_time(&plan, &inst).unwrap(), 0);
    }

    #[test]
    fn empty_plan_costs_nothing() {
        let inst = fixtures::i1();
        assert_eq!(plan_cost(&Plan::default(), &inst).unwrap(), Rational64::zero());
    }

    #[test]
    fn unknown_visit_is_rejected() {
        let inst = fixtures::i1();
        let plan = Plan { routes: vec![Route { qual: 3, stops: vec![Stop { visit: 9, start: 0 }] }], ..Plan::default() };
        assert_eq!(plan_cost(&plan, &inst), Err(PlanError::UnknownVisit { route: 0, visit: 9 }));
    }

    #[test]
    fn oriented_dependency_swaps_and_clamps() {
        let d = DependencySpec::oriented(5, 2, [10, 999, 3, 4], 100);
        assert_eq!((d.u, d.v), (2, 5));
        assert_eq!(d.quad(), [3, 4, 10, 100]);
        assert_eq!(d.quad_from(5), [10, 100, 3, 4]);
    }

    #[test]
    fn fixture_instances_validate() {
        for inst in [fixtures::i1(), fixtures::infeasible_medical(), fixtures::split_benefit()] {
            inst.validate().unwrap();
        }
    }

    #[test]
    fn triangle_violation_names_the_triple() {
        let mut inst = fixtures::i1();
        inst.visits.push(Visit { id: 3, duration: 10, window: (0, 50), quals: QualSet::at_least(1, 3), kind: VisitKind::Unsplittable });
        inst.travel = vec![vec![0; 5]; 5];
        inst.travel[1][2] = 50;
        inst.travel[1][3] = 5;
        inst.travel[3][2] = 5;
        let err = inst.validate().unwrap_err().to_string();
        assert!(err.contains("(1,3,2)"), "{err}");
    }
}
