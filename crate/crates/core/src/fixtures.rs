//! Small hand-built and randomized instances shared by tests, benches and
//! the command line.

use std::collections::BTreeMap;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{DependencySpec, Instance, InstanceMeta, Plan, QualSet, Qualification, Route, Stop, Visit, VisitKind};
use crate::sync::{sync_params, SyncType};

fn standard_quals() -> Vec<Qualification> {
    (1..=3).map(|l| Qualification { level: l, wage: Rational64::from_integer(l as i64) }).collect()
}

fn unsplittable(id: usize, duration: i64, window: (i64, i64), min_level: u8) -> Visit {
    Visit { id, duration, window, quals: QualSet::at_least(min_level, 3), kind: VisitKind::Unsplittable }
}

/// Travel matrix from per-visit coordinates using Manhattan distances; depot
/// rows and columns are zero.
pub fn manhattan_travel(points: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let n = points.len();
    let mut travel = vec![vec![0; n + 2]; n + 2];
    for i in 0..n {
        for j in 0..n {
            travel[i + 1][j + 1] = (points[i].0 - points[j].0).abs() + (points[i].1 - points[j].1).abs();
        }
    }
    travel
}

/// Two visits, one level-3 caregiver. Optimal cost 180.
pub fn i1() -> Instance {
    let mut travel = vec![vec![0; 4]; 4];
    travel[1][2] = 10;
    travel[2][1] = 10;
    Instance {
        horizon: 120,
        qualifications: standard_quals(),
        caregivers: BTreeMap::from([(3, 1)]),
        visits: vec![unsplittable(1, 30, (0, 60), 1), unsplittable(2, 20, (0, 100), 3)],
        travel,
        dependencies: vec![],
        split_links: vec![],
        meta: InstanceMeta { name: Some("i1".into()), ..InstanceMeta::default() },
    }
}

pub fn i1_optimal_plan() -> Plan {
    Plan {
        routes: vec![Route { qual: 3, stops: vec![Stop { visit: 1, start: 0 }, Stop { visit: 2, start: 40 }] }],
        ..Plan::default()
    }
}

/// Three simultaneous level-3 visits but only one level-3 caregiver.
pub fn infeasible_medical() -> Instance {
    Instance {
        horizon: 120,
        qualifications: standard_quals(),
        caregivers: BTreeMap::from([(1, 2), (3, 1)]),
        visits: vec![
            unsplittable(1, 40, (0, 10), 3),
            unsplittable(2, 40, (0, 10), 3),
            unsplittable(3, 30, (5, 20), 1),
        ],
        travel: manhattan_travel(&[(0, 0), (5, 0), (0, 5)]),
        dependencies: vec![],
        split_links: vec![],
        meta: InstanceMeta { name: Some("infeasible-medical".into()), ..InstanceMeta::default() },
    }
}

/// A level-3 visit whose first half may be done by a level-1 caregiver.
///
/// Without splitting, the two overlapping level-3 visits need two level-3
/// caregivers and the level-1 visit a third caregiver (cost 300). With
/// splitting, the level-1 caregiver takes the relaxed half before its own
/// visit and a single level-3 caregiver can do the rest (cost 240). Handing
/// the level-3 work to two caregivers costs the same, so optimal plans may
/// still use three. All locations coincide, so travel is zero.
pub fn split_benefit() -> Instance {
    let visits = vec![
        Visit { id: 1, duration: 60, window: (0, 5), quals: QualSet::at_least(3, 3), kind: VisitKind::Splittable },
        unsplittable(2, 30, (30, 40), 3),
        unsplittable(3, 30, (30, 40), 1),
        Visit {
            id: 4,
            duration: 30,
            window: (0, 5),
            quals: QualSet::at_least(1, 3),
            kind: VisitKind::SplitPart { parent: 1, part: 1 },
        },
        Visit {
            id: 5,
            duration: 30,
            window: (0, 5),
            quals: QualSet::at_least(3, 3),
            kind: VisitKind::SplitPart { parent: 1, part: 2 },
        },
    ];
    Instance {
        horizon: 120,
        qualifications: standard_quals(),
        caregivers: BTreeMap::from([(1, 1), (3, 2)]),
        visits,
        travel: manhattan_travel(&[(0, 0); 5]),
        dependencies: vec![],
        split_links: vec![],
        meta: InstanceMeta { name: Some("split-benefit".into()), ..InstanceMeta::default() },
    }
}

#[derive(Debug, Clone)]
pub struct GuardRailOptions {
    pub originals: usize,
    pub splittable: usize,
    pub caregivers: u32,
    pub dependencies: usize,
    /// Type of the first dependency; later ones are drawn at random.
    pub sync_type: Option<SyncType>,
    pub max_window_width: i64,
    pub horizon: i64,
}

impl Default for GuardRailOptions {
    fn default() -> Self {
        Self { originals: 4, splittable: 1, caregivers: 2, dependencies: 1, sync_type: None, max_window_width: 12, horizon: 120 }
    }
}

/// Random instance small enough for the exhaustive oracle.
pub fn guard_rail(seed: u64, opts: &GuardRailOptions) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = opts.horizon;
    let n0 = opts.originals;
    let mut visits = Vec::new();
    let mut points = Vec::new();
    for id in 1..=n0 {
        let splittable = id <= opts.splittable;
        let duration = if splittable { rng.random_range(20..=40) } else { rng.random_range(10..=30) };
        let width = rng.random_range(1..=opts.max_window_width.max(1));
        let start = rng.random_range(0..=(t - 40 - width).max(0));
        let level = if rng.random_bool(0.2) { 3 } else { rng.random_range(1..=2u8) };
        visits.push(Visit {
            id,
            duration,
            window: (start, start + width),
            quals: QualSet::at_least(level, 3),
            kind: if splittable { VisitKind::Splittable } else { VisitKind::Unsplittable },
        });
        points.push((rng.random_range(0..8), rng.random_range(0..8)));
    }
    let mut dependencies = Vec::new();
    let mut next = n0 + 1;
    for parent in 1..=opts.splittable.min(n0) {
        let (d, window, quals, point) = {
            let p = &visits[parent - 1];
            (p.duration, p.window, p.quals, points[parent - 1])
        };
        let d1 = rng.random_range(10..=d - 10);
        let relax = rng.random_range(0..3u8);
        for (part, dur) in [(1u8, d1), (2u8, d - d1)] {
            let mut part_window = window;
            if relax == part {
                part_window.1 = (window.1 + 15).min(t - dur);
            }
            let part_quals = if relax == part { QualSet::at_least(1, 3) } else { quals };
            visits.push(Visit {
                id: next,
                duration: dur,
                window: part_window,
                quals: part_quals,
                kind: VisitKind::SplitPart { parent, part },
            });
            points.push(point);
            next += 1;
        }
        match rng.random_range(0..3) {
            1 => {
                let q = sync_params(SyncType::PrecedenceUV, 0, 0, d1, d - d1, t).unwrap();
                dependencies.push(DependencySpec::oriented(next - 2, next - 1, q, t));
            }
            2 => {
                let q = sync_params(SyncType::NoOverlap, 0, 0, d1, d - d1, t).unwrap();
                dependencies.push(DependencySpec::oriented(next - 2, next - 1, q, t));
            }
            _ => {}
        }
    }
    let n = visits.len();
    let mut attempts = 0;
    let mut added = 0;
    while added < opts.dependencies && attempts < 50 {
        attempts += 1;
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        let (ra, rb) = (root(&visits, a), root(&visits, b));
        if a == b || ra == rb {
            continue;
        }
        let (u, v) = (a.min(b), a.max(b));
        if dependencies.iter().any(|d: &DependencySpec| d.u == u && d.v == v) {
            continue;
        }
        let kind = match (added, opts.sync_type) {
            (0, Some(k)) => k,
            _ => SyncType::ALL[rng.random_range(0..SyncType::ALL.len())],
        };
        let dmin = rng.random_range(0..=10);
        let dmax = dmin + rng.random_range(0..=20);
        let q = sync_params(kind, dmin, dmax, visits[a - 1].duration, visits[b - 1].duration, t).unwrap();
        dependencies.push(DependencySpec::oriented(a, b, q, t));
        added += 1;
    }
    let mut caregivers = BTreeMap::new();
    for _ in 0..opts.caregivers {
        let level = rng.random_range(2..=3u8);
        *caregivers.entry(level).or_insert(0) += 1;
    }
    // Keep at least one level-3 caregiver so that every visit is coverable.
    if !caregivers.contains_key(&3) {
        let (&level, _) = caregivers.iter().next().unwrap();
        let count = caregivers.get_mut(&level).unwrap();
        *count -= 1;
        if *count == 0 {
            caregivers.remove(&level);
        }
        caregivers.insert(3, 1);
    }
    Instance {
        horizon: t,
        qualifications: standard_quals(),
        caregivers,
        visits,
        travel: manhattan_travel(&points),
        dependencies,
        split_links: vec![],
        meta: InstanceMeta { name: Some(format!("guard-rail-{seed}")), seed: Some(seed), ..InstanceMeta::default() },
    }
}

fn root(visits: &[Visit], id: usize) -> usize {
    match visits[id - 1].kind {
        VisitKind::SplitPart { parent, .. } => parent,
        _ => id,
    }
}

/// Random feasible neighbour of `plan`: start times are shifted one stop at
/// a time, keeping only shifts that the verifier accepts.
pub fn jitter_plan(plan: &Plan, instance: &Instance, seed: u64, rounds: usize) -> Plan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = plan.clone();
    let stops: Vec<(usize, usize)> =
        current.routes.iter().enumerate().flat_map(|(r, route)| (0..route.stops.len()).map(move |s| (r, s))).collect();
    if stops.is_empty() {
        return current;
    }
    for _ in 0..rounds {
        let (r, s) = stops[rng.random_range(0..stops.len())];
        let delta = rng.random_range(-15..=15);
        let mut cand = current.clone();
        cand.routes[r].stops[s].start += delta;
        if crate::verify::check_plan(&cand, instance).is_ok() {
            current = cand;
        }
    }
    current
}
