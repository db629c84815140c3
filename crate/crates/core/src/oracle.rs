//! Exhaustive optimum for tiny instances.
//!
//! The search enumerates split decisions, assignments of performed visits to
//! caregivers together with their order, and dependency orientations. For a
//! fixed route structure the timing is a system of difference constraints.
//! Fixing the first start of every multi-visit route makes the componentwise
//! earliest solution minimize every route end at once, so the exact optimum
//! is the minimum over those first starts. They are enumerated over their
//! feasible ranges; long ranges use integer ternary search, which is exact
//! because the optimal value of a difference-constraint LP is convex in its
//! right-hand side and integral at integral data.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::Zero;

use crate::mode::{Objective, SplitPolicy};
use crate::model::{DependencySpec, ExecClass, Instance, Plan, Route, Stop, VisitKind};
use crate::par;
use crate::stn::Stn;

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_originals: usize,
    pub max_horizon: i64,
    pub max_caregivers: u32,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_originals: 6, max_horizon: 120, max_caregivers: 3 }
    }
}

/// How first-start times are searched once a route structure is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimingSearch {
    /// Enumerate short ranges, ternary-search long ones.
    #[default]
    Auto,
    Enumerate,
    Ternary,
}

const ENUMERATE_UP_TO: i64 = 24;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Optimal { value: Rational64, plan: Plan },
    Infeasible,
    TooLarge(String),
}

impl OracleOutcome {
    pub fn value(&self) -> Option<Rational64> {
        match self {
            OracleOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

pub fn brute_force_optimal(instance: &Instance, objective: Objective, policy: SplitPolicy) -> OracleOutcome {
    brute_force_with(instance, objective, policy, OracleLimits::default(), TimingSearch::Auto)
}

pub fn brute_force_with(
    instance: &Instance,
    objective: Objective,
    policy: SplitPolicy,
    limits: OracleLimits,
    timing: TimingSearch,
) -> OracleOutcome {
    if instance.original_count() > limits.max_originals {
        return OracleOutcome::TooLarge(format!("{} original visits (limit {})", instance.original_count(), limits.max_originals));
    }
    if instance.horizon > limits.max_horizon {
        return OracleOutcome::TooLarge(format!("horizon {} (limit {})", instance.horizon, limits.max_horizon));
    }
    if instance.total_caregivers() > limits.max_caregivers {
        return OracleOutcome::TooLarge(format!("{} caregivers (limit {})", instance.total_caregivers(), limits.max_caregivers));
    }

    let mut groups: Vec<usize> = instance.splittable().iter().map(|&w| instance.link_root(w)).collect();
    groups.sort_unstable();
    groups.dedup();
    let vectors: Vec<Vec<bool>> = (0u32..(1u32 << groups.len()))
        .map(|mask| (0..groups.len()).map(|i| mask & (1 << i) != 0).collect::<Vec<bool>>())
        .filter(|v| v.iter().all(|&s| policy.allows(s)))
        .collect();

    let results = par::map(&vectors, |split| {
        let decided: BTreeMap<usize, bool> = groups.iter().copied().zip(split.iter().copied()).collect();
        search_split_vector(instance, objective, timing, &decided)
    });
    let mut best: Option<(Rational64, Plan)> = None;
    for r in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| r.0 < *b) {
            best = Some(r);
        }
    }
    match best {
        Some((value, plan)) => OracleOutcome::Optimal { value, plan },
        None => OracleOutcome::Infeasible,
    }
}

struct Search<'a> {
    inst: &'a Instance,
    objective: Objective,
    timing: TimingSearch,
    /// Performed visit ids.
    perf: Vec<usize>,
    /// Caregiver levels, sorted.
    slots: Vec<u8>,
    wages: Vec<Rational64>,
    /// Cheapest possible cost of each performed visit on its own.
    unit_lb: Vec<Rational64>,
    /// Dependencies between performed visits, as indices into `perf`.
    deps: Vec<(usize, usize, DependencySpec)>,
    splits: BTreeMap<usize, bool>,
    best: Option<(Rational64, Plan)>,
}

fn search_split_vector(
    inst: &Instance,
    objective: Objective,
    timing: TimingSearch,
    decided: &BTreeMap<usize, bool>,
) -> Option<(Rational64, Plan)> {
    let perf: Vec<usize> = inst
        .visit_ids()
        .filter(|&id| match inst.exec_class(id) {
            ExecClass::Always => true,
            ExecClass::Original(r) => !decided[&r],
            ExecClass::Parts(r) => decided[&r],
        })
        .collect();
    let mut slots = Vec::new();
    for (&level, &count) in &inst.caregivers {
        for _ in 0..count {
            slots.push(level);
        }
    }
    let wages: Vec<Rational64> = slots.iter().map(|&l| inst.wage(l).unwrap_or_else(Rational64::zero)).collect();
    let mut unit_lb = Vec::with_capacity(perf.len());
    for &id in &perf {
        let visit = inst.visit(id);
        let cheapest = slots
            .iter()
            .zip(&wages)
            .filter(|(&l, _)| visit.quals.contains(l))
            .map(|(_, &w)| w)
            .min()?;
        unit_lb.push(match objective {
            Objective::Cost => cheapest * Rational64::from_integer(visit.duration),
            Objective::Travel => Rational64::zero(),
        });
    }
    let index: BTreeMap<usize, usize> = perf.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let deps = inst
        .dependencies
        .iter()
        .filter_map(|d| Some((*index.get(&d.u)?, *index.get(&d.v)?, *d)))
        .collect();
    let splits = inst.splittable().into_iter().map(|w| (w, decided[&inst.link_root(w)])).collect();
    let mut search = Search { inst, objective, timing, perf, slots, wages, unit_lb, deps, splits, best: None };
    if search.perf.is_empty() {
        return Some((Rational64::zero(), Plan { splits: search.splits, ..Plan::default() }));
    }
    if search.slots.is_empty() {
        return None;
    }
    let remaining = (1u32 << search.perf.len()) - 1;
    let mut routes = vec![Vec::new()];
    search.dfs(0, &mut routes, remaining, 0, Rational64::zero());
    search.best
}

impl Search<'_> {
    fn dfs(&mut self, slot: usize, routes: &mut Vec<Vec<usize>>, remaining: u32, earliest_last: i64, partial: Rational64) {
        if remaining == 0 {
            self.evaluate(routes, partial);
            return;
        }
        if let Some((best, _)) = &self.best {
            let rest: Rational64 = (0..self.perf.len()).filter(|i| remaining & (1 << i) != 0).map(|i| self.unit_lb[i]).sum();
            if partial + rest >= *best {
                return;
            }
        }
        let level = self.slots[slot];
        let wage = self.wages[slot];
        let last = routes[slot].last().copied();
        for i in 0..self.perf.len() {
            if remaining & (1 << i) == 0 {
                continue;
            }
            let id = self.perf[i];
            let visit = self.inst.visit(id);
            if !visit.quals.contains(level) {
                continue;
            }
            let (start, added) = match last {
                None => {
                    if slot > 0 && self.slots[slot - 1] == level && routes[slot - 1].first().is_some_and(|&f| i < f) {
                        continue;
                    }
                    let added = match self.objective {
                        Objective::Cost => wage * Rational64::from_integer(visit.duration),
                        Objective::Travel => Rational64::zero(),
                    };
                    (visit.window.0, added)
                }
                Some(prev) => {
                    let pid = self.perf[prev];
                    if consecutive_parts(self.inst, pid, id) {
                        continue;
                    }
                    let travel = self.inst.travel(pid, id);
                    let start = visit.window.0.max(earliest_last + self.inst.visit(pid).duration + travel);
                    let added = match self.objective {
                        Objective::Cost => wage * Rational64::from_integer(visit.duration + travel),
                        Objective::Travel => Rational64::from_integer(travel),
                    };
                    (start, added)
                }
            };
            if start > visit.window.1 {
                continue;
            }
            routes[slot].push(i);
            self.dfs(slot, routes, remaining & !(1 << i), start, partial + added);
            routes[slot].pop();
        }
        // Close the current route.
        if routes[slot].is_empty() {
            let next = (slot + 1..self.slots.len()).find(|&k| self.slots[k] != level);
            if let Some(next) = next {
                let pad = next - routes.len();
                for _ in 0..=pad {
                    routes.push(Vec::new());
                }
                self.dfs(next, routes, remaining, 0, partial);
                routes.truncate(slot + 1);
            }
        } else if slot + 1 < self.slots.len() {
            routes.push(Vec::new());
            self.dfs(slot + 1, routes, remaining, 0, partial);
            routes.pop();
        }
    }

    fn base_network(&self, routes: &[Vec<usize>]) -> Stn {
        let mut stn = Stn::new(self.perf.len());
        for (i, &id) in self.perf.iter().enumerate() {
            let (a, b) = self.inst.visit(id).window;
            stn.window(i + 1, a, b);
        }
        for route in routes {
            for pair in route.windows(2) {
                let (p, q) = (self.perf[pair[0]], self.perf[pair[1]]);
                let gap = self.inst.visit(p).duration + self.inst.travel(p, q);
                stn.le(pair[1] + 1, pair[0] + 1, -gap);
            }
        }
        stn
    }

    fn evaluate(&mut self, routes: &[Vec<usize>], partial: Rational64) {
        let base = self.base_network(routes);
        let active: Vec<usize> = (0..routes.len()).filter(|&k| !routes[k].is_empty()).collect();
        let multi: Vec<usize> = active.iter().copied().filter(|&k| routes[k].len() > 1).collect();
        for mask in 0u32..(1u32 << self.deps.len()) {
            let mut stn = base.clone();
            for (j, &(iu, iv, d)) in self.deps.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    stn.diff(iu + 1, iv + 1, d.dmin_uv, d.dmax_uv);
                } else {
                    stn.diff(iv + 1, iu + 1, d.dmin_vu, d.dmax_vu);
                }
            }
            let Some(earliest) = stn.earliest() else { continue };
            let found = match self.objective {
                Objective::Travel => Some((partial, earliest)),
                Objective::Cost => self.min_cost(&mut stn, routes, &active, &multi, 0),
            };
            if let Some((value, times)) = found {
                if self.best.as_ref().is_none_or(|(b, _)| value < *b) {
                    let plan = self.witness(routes, &times);
                    self.best = Some((value, plan));
                }
                if self.objective == Objective::Travel {
                    return;
                }
            }
        }
    }

    fn cost_of(&self, routes: &[Vec<usize>], active: &[usize], times: &[i64]) -> Rational64 {
        let mut total = Rational64::zero();
        for &k in active {
            let (first, last) = (routes[k][0], *routes[k].last().unwrap());
            let end = times[last + 1] + self.inst.visit(self.perf[last]).duration;
            total += self.wages[k] * Rational64::from_integer(end - times[first + 1]);
        }
        total
    }

    fn min_cost(
        &self,
        stn: &mut Stn,
        routes: &[Vec<usize>],
        active: &[usize],
        multi: &[usize],
        depth: usize,
    ) -> Option<(Rational64, Vec<i64>)> {
        if depth == multi.len() {
            let times = stn.earliest()?;
            return Some((self.cost_of(routes, active, &times), times));
        }
        let var = routes[multi[depth]][0] + 1;
        let lo = stn.earliest()?[var];
        let hi = stn.latest()?[var];
        let mut eval = |f: i64| -> Option<(Rational64, Vec<i64>)> {
            let mark = stn.len();
            stn.fix(var, f);
            let r = self.min_cost(stn, routes, active, multi, depth + 1);
            stn.truncate(mark);
            r
        };
        let ternary = match self.timing {
            TimingSearch::Enumerate => false,
            TimingSearch::Ternary => true,
            TimingSearch::Auto => hi - lo > ENUMERATE_UP_TO,
        };
        let (mut a, mut b) = (lo, hi);
        if ternary {
            while b - a > 2 {
                let m1 = a + (b - a) / 3;
                let m2 = b - (b - a) / 3;
                let v1 = eval(m1)?.0;
                let v2 = eval(m2)?.0;
                if v1 < v2 {
                    b = m2 - 1;
                } else if v1 > v2 {
                    a = m1 + 1;
                } else {
                    a = m1;
                    b = m2;
                }
            }
        }
        let mut best: Option<(Rational64, Vec<i64>)> = None;
        for f in a..=b {
            if let Some(r) = eval(f) {
                if best.as_ref().is_none_or(|(v, _)| r.0 < *v) {
                    best = Some(r);
                }
            }
        }
        best
    }

    fn witness(&self, routes: &[Vec<usize>], times: &[i64]) -> Plan {
        let routes = routes
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(|(k, r)| Route {
                qual: self.slots[k],
                stops: r.iter().map(|&i| Stop { visit: self.perf[i], start: times[i + 1] }).collect(),
            })
            .collect();
        Plan { routes, splits: self.splits.clone(), ..Plan::default() }
    }
}

fn consecutive_parts(inst: &Instance, a: usize, b: usize) -> bool {
    matches!(
        (inst.visit(a).kind, inst.visit(b).kind),
        (VisitKind::SplitPart { parent: x, .. }, VisitKind::SplitPart { parent: y, .. }) if x == y
    )
}
