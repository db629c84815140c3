//! Independent feasibility checker for plans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{Instance, Plan, VisitKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationClass {
    /// Unknown visit ids or qualification levels.
    Structure,
    Cover,
    SplitConsistency,
    Qualification,
    Window,
    Timing,
    DependencyBand,
    CaregiverCount,
    ConsecutiveSplitParts,
}

impl fmt::Display for ViolationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationClass::Structure => "structure",
            ViolationClass::Cover => "cover",
            ViolationClass::SplitConsistency => "split-consistency",
            ViolationClass::Qualification => "qualification",
            ViolationClass::Window => "window",
            ViolationClass::Timing => "timing",
            ViolationClass::DependencyBand => "dependency-band",
            ViolationClass::CaregiverCount => "caregiver-count",
            ViolationClass::ConsecutiveSplitParts => "consecutive-split-parts",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub class: ViolationClass,
    pub visits: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn classes(&self) -> BTreeSet<ViolationClass> {
        self.violations.iter().map(|v| v.class).collect()
    }

    fn push(&mut self, class: ViolationClass, visits: Vec<usize>, message: String) {
        self.violations.push(Violation { class, visits, message });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return writeln!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{}: {}", v.class, v.message)?;
        }
        Ok(())
    }
}

/// Checks every feasibility condition of a plan and reports each violation.
pub fn check_plan(plan: &Plan, instance: &Instance) -> VerifyReport {
    let mut report = VerifyReport::default();
    let n = instance.n();

    let mut occurrences: BTreeMap<usize, usize> = BTreeMap::new();
    let mut starts: BTreeMap<usize, i64> = BTreeMap::new();
    for (ri, route) in plan.routes.iter().enumerate() {
        if instance.wage(route.qual).is_none() {
            report.push(ViolationClass::Structure, vec![], format!("route {ri} uses unknown level {}", route.qual));
        }
        for stop in &route.stops {
            if stop.visit == 0 || stop.visit > n {
                report.push(ViolationClass::Structure, vec![stop.visit], format!("route {ri} visits unknown id {}", stop.visit));
                continue;
            }
            *occurrences.entry(stop.visit).or_insert(0) += 1;
            starts.insert(stop.visit, stop.start);
        }
    }
    let count = |id: usize| occurrences.get(&id).copied().unwrap_or(0);

    for (&id, &c) in &occurrences {
        if c > 1 {
            report.push(ViolationClass::Cover, vec![id], format!("visit {id} is performed {c} times"));
        }
    }
    for visit in &instance.visits {
        match visit.kind {
            VisitKind::Unsplittable => {
                if count(visit.id) == 0 {
                    report.push(ViolationClass::Cover, vec![visit.id], format!("visit {} is not performed", visit.id));
                }
            }
            VisitKind::Splittable => {
                let (p1, p2) = instance.parts_of(visit.id).expect("validated instance");
                let original = count(visit.id) > 0;
                let parts = (count(p1) > 0, count(p2) > 0);
                if !original && parts != (true, true) {
                    let missing = match parts {
                        (false, false) => "neither the original nor its parts are performed".to_string(),
                        (true, false) => format!("part {p2} is missing"),
                        _ => format!("part {p1} is missing"),
                    };
                    report.push(ViolationClass::Cover, vec![visit.id], format!("splittable visit {}: {missing}", visit.id));
                }
                let flag = plan.splits.get(&visit.id).copied();
                let any_part = parts.0 || parts.1;
                if original && any_part {
                    report.push(
                        ViolationClass::SplitConsistency,
                        vec![visit.id],
                        format!("visit {} is performed both whole and in parts", visit.id),
                    );
                } else {
                    match flag {
                        None => report.push(
                            ViolationClass::SplitConsistency,
                            vec![visit.id],
                            format!("no split decision recorded for visit {}", visit.id),
                        ),
                        Some(true) if original => report.push(
                            ViolationClass::SplitConsistency,
                            vec![visit.id],
                            format!("visit {} is marked split but performed whole", visit.id),
                        ),
                        Some(false) if any_part => report.push(
                            ViolationClass::SplitConsistency,
                            vec![visit.id],
                            format!("visit {} is marked unsplit but its parts are performed", visit.id),
                        ),
                        _ => {}
                    }
                }
            }
            VisitKind::SplitPart { .. } => {}
        }
    }
    for (&id, _) in &plan.splits {
        if instance.get_visit(id).map(|v| v.kind) != Some(VisitKind::Splittable) {
            report.push(ViolationClass::SplitConsistency, vec![id], format!("split decision for non-splittable visit {id}"));
        }
    }
    for &(a, b) in &instance.split_links {
        if let (Some(x), Some(y)) = (plan.splits.get(&a), plan.splits.get(&b)) {
            if x != y {
                report.push(
                    ViolationClass::SplitConsistency,
                    vec![a, b],
                    format!("linked visits {a} and {b} take different split decisions"),
                );
            }
        }
    }

    let mut per_level: BTreeMap<u8, u32> = BTreeMap::new();
    for (ri, route) in plan.routes.iter().enumerate() {
        if route.stops.is_empty() {
            continue;
        }
        *per_level.entry(route.qual).or_insert(0) += 1;
        let known: Vec<_> = route.stops.iter().filter(|s| s.visit >= 1 && s.visit <= n).collect();
        for stop in &known {
            let visit = instance.visit(stop.visit);
            if !visit.quals.contains(route.qual) {
                report.push(
                    ViolationClass::Qualification,
                    vec![stop.visit],
                    format!("visit {} cannot be performed by level {} (route {ri})", stop.visit, route.qual),
                );
            }
            let (a, b) = visit.window;
            if stop.start < a || stop.start > b {
                report.push(
                    ViolationClass::Window,
                    vec![stop.visit],
                    format!("visit {} starts at {} outside [{a},{b}]", stop.visit, stop.start),
                );
            }
        }
        for pair in known.windows(2) {
            let (prev, next) = (pair[0], pair[1]);
            let ready = prev.start + instance.visit(prev.visit).duration + instance.travel(prev.visit, next.visit);
            if next.start < ready {
                report.push(
                    ViolationClass::Timing,
                    vec![prev.visit, next.visit],
                    format!("visit {} starts at {} before {} (route {ri})", next.visit, next.start, ready),
                );
            }
            let (vp, vn) = (instance.visit(prev.visit), instance.visit(next.visit));
            if let (VisitKind::SplitPart { parent: a, .. }, VisitKind::SplitPart { parent: b, .. }) = (vp.kind, vn.kind) {
                if a == b {
                    report.push(
                        ViolationClass::ConsecutiveSplitParts,
                        vec![a],
                        format!("both parts of visit {a} are performed consecutively in route {ri}"),
                    );
                }
            }
        }
    }
    for (&level, &used) in &per_level {
        let available = instance.caregiver_count(level);
        if used > available {
            report.push(
                ViolationClass::CaregiverCount,
                vec![],
                format!("{used} routes at level {level} but only {available} caregivers"),
            );
        }
    }

    for dep in &instance.dependencies {
        if let (Some(&tu), Some(&tv)) = (starts.get(&dep.u), starts.get(&dep.v)) {
            if !dep.satisfied_by(tu, tv) {
                report.push(
                    ViolationClass::DependencyBand,
                    vec![dep.u, dep.v],
                    format!("starts {tu} and {tv} of visits {} and {} violate their dependency", dep.u, dep.v),
                );
            }
        }
    }
    report
}
