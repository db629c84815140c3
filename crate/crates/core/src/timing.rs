//! Start times for fixed routes.
//!
//! With routes and dependency orientations fixed, the remaining problem is a
//! linear program over difference constraints. Its constraint matrix is
//! totally unimodular, so an integral optimum exists and rounding the LP
//! vertex recovers it.

use std::collections::BTreeMap;

use hhc_milp::{BranchAndBound, MilpBackend, MilpStatus, Model, Sense, SolveParams};

use crate::model::{DependencySpec, Instance, Plan, Route, Stop};
use crate::stn::Stn;

/// A route without times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub qual: u8,
    pub visits: Vec<usize>,
}

impl Skeleton {
    pub fn of(route: &Route) -> Self {
        Skeleton { qual: route.qual, visits: route.stops.iter().map(|s| s.visit).collect() }
    }
}

/// Fixed routes plus the start-time range allowed for every visit.
#[derive(Debug, Clone)]
pub struct TimingProblem<'a> {
    pub instance: &'a Instance,
    pub routes: Vec<Skeleton>,
    pub splits: BTreeMap<usize, bool>,
    /// Start bounds indexed by visit id; visits off the routes are ignored.
    pub bounds: Vec<(i64, i64)>,
    /// Preferred orientation per dependency `(u, v)`: `true` if `u` starts
    /// no later than `v`.
    pub preferred: BTreeMap<(usize, usize), bool>,
}

impl<'a> TimingProblem<'a> {
    pub fn new(instance: &'a Instance, routes: Vec<Skeleton>, splits: BTreeMap<usize, bool>) -> Self {
        TimingProblem { instance, routes, splits, bounds: instance.windows(), preferred: BTreeMap::new() }
    }

    /// Routes, splits and orientations taken from an existing plan.
    pub fn from_plan(instance: &'a Instance, plan: &Plan) -> Self {
        let mut p = Self::new(instance, plan.active_routes().map(Skeleton::of).collect(), plan.splits.clone());
        let starts = plan.performed();
        for dep in &instance.dependencies {
            if let (Some(a), Some(b)) = (starts.get(&dep.u), starts.get(&dep.v)) {
                p.preferred.insert((dep.u, dep.v), a <= b);
            }
        }
        p
    }

    fn performed(&self) -> Vec<usize> {
        self.routes.iter().flat_map(|r| r.visits.iter().copied()).collect()
    }

    fn active_dependencies(&self) -> Vec<DependencySpec> {
        let on_route = self.performed();
        self.instance
            .dependencies
            .iter()
            .filter(|d| on_route.contains(&d.u) && on_route.contains(&d.v))
            .copied()
            .collect()
    }

    fn base_stn(&self) -> Stn {
        let inst = self.instance;
        let mut stn = Stn::new(inst.n());
        for v in self.performed() {
            let (lo, hi) = self.bounds[v];
            stn.window(v, lo, hi);
        }
        for r in &self.routes {
            for w in r.visits.windows(2) {
                let gap = inst.visit(w[0]).duration + inst.travel(w[0], w[1]);
                stn.le(w[1], w[0], -gap);
            }
        }
        stn
    }

    /// Adds the band of `dep` in the given orientation.
    fn orient(&self, stn: &mut Stn, dep: &DependencySpec, u_first: bool) {
        let t = self.instance.horizon;
        let (a, b, lo, hi) = if u_first {
            (dep.u, dep.v, dep.dmin_uv, dep.dmax_uv)
        } else {
            (dep.v, dep.u, dep.dmin_vu, dep.dmax_vu)
        };
        stn.le(b, a, -lo);
        if hi < t {
            stn.le(a, b, hi);
        }
    }

    /// A consistent orientation of all active dependencies, preferring the
    /// stored one.
    pub fn orientation(&self) -> Option<Vec<(DependencySpec, bool)>> {
        let deps = self.active_dependencies();
        let mut stn = self.base_stn();
        if !stn.is_consistent() {
            return None;
        }
        let mut chosen = Vec::with_capacity(deps.len());
        if self.search(&deps, &mut stn, &mut chosen) {
            Some(chosen)
        } else {
            None
        }
    }

    fn search(&self, deps: &[DependencySpec], stn: &mut Stn, chosen: &mut Vec<(DependencySpec, bool)>) -> bool {
        let Some(dep) = deps.get(chosen.len()) else {
            return true;
        };
        let first = self.preferred.get(&(dep.u, dep.v)).copied().unwrap_or(true);
        for u_first in [first, !first] {
            let mark = stn.len();
            self.orient(stn, dep, u_first);
            if stn.is_consistent() {
                chosen.push((*dep, u_first));
                if self.search(deps, stn, chosen) {
                    return true;
                }
                chosen.pop();
            }
            stn.truncate(mark);
        }
        false
    }

    /// Cheapest start times for the routes, or `None` if no timing exists.
    pub fn solve(&self) -> Option<Plan> {
        let orientation = self.orientation()?;
        let mut stn = self.base_stn();
        for (dep, o) in &orientation {
            self.orient(&mut stn, dep, *o);
        }
        // Earliest times are feasible, although not necessarily cheapest.
        let starts = self.optimal_starts(&orientation).filter(|s| self.consistent(&stn, s)).or_else(|| stn.earliest())?;
        let routes = self
            .routes
            .iter()
            .map(|r| Route {
                qual: r.qual,
                stops: r.visits.iter().map(|&v| Stop { visit: v, start: starts[v] }).collect(),
            })
            .collect();
        Some(Plan { routes, splits: self.splits.clone(), ..Plan::default() })
    }

    fn consistent(&self, stn: &Stn, starts: &[i64]) -> bool {
        let mut fixed = stn.clone();
        for v in self.performed() {
            fixed.fix(v, starts[v]);
        }
        fixed.is_consistent()
    }

    fn optimal_starts(&self, orientation: &[(DependencySpec, bool)]) -> Option<Vec<i64>> {
        let inst = self.instance;
        let t = inst.horizon;
        let mut model = Model::new();
        let mut var = vec![None; inst.n() + 1];
        for v in self.performed() {
            let (lo, hi) = self.bounds[v];
            var[v] = Some(model.add_continuous("start", lo as f64, hi as f64, 0.0));
        }
        let mut offset = 0.0;
        for r in &self.routes {
            let wage = inst.wage_f64(r.qual);
            let (first, last) = (r.visits[0], *r.visits.last().unwrap());
            offset += wage * inst.visit(last).duration as f64;
            if first != last {
                model.set_objective(var[first].unwrap(), -wage);
                model.set_objective(var[last].unwrap(), wage);
            }
            for w in r.visits.windows(2) {
                let gap = inst.visit(w[0]).duration + inst.travel(w[0], w[1]);
                model.constrain("sequence", vec![(var[w[1]].unwrap(), 1.0), (var[w[0]].unwrap(), -1.0)], Sense::Ge, gap as f64);
            }
        }
        model.set_objective_offset(offset);
        for (dep, u_first) in orientation {
            let (a, b, lo, hi) = if *u_first {
                (dep.u, dep.v, dep.dmin_uv, dep.dmax_uv)
            } else {
                (dep.v, dep.u, dep.dmin_vu, dep.dmax_vu)
            };
            let terms = vec![(var[b].unwrap(), 1.0), (var[a].unwrap(), -1.0)];
            model.constrain("band", terms.clone(), Sense::Ge, lo as f64);
            if hi < t {
                model.constrain("band", terms, Sense::Le, hi as f64);
            }
        }
        let out = BranchAndBound::default().solve(&model, &SolveParams::default(), None).ok()?;
        if out.status != MilpStatus::Optimal {
            return None;
        }
        let values = out.values?;
        let mut starts = vec![0; inst.n() + 1];
        for v in self.performed() {
            starts[v] = values[var[v].unwrap().index()].round() as i64;
        }
        Some(starts)
    }
}

/// Cheapest timing of the plan's routes with its split decisions kept.
pub fn retime(instance: &Instance, plan: &Plan) -> Option<Plan> {
    TimingProblem::from_plan(instance, plan).solve()
}
