//! Benchmark scenarios: qualification profiles, staff compositions and
//! split-option synthesis on top of a base instance.
//!
//! Split synthesis uses ChaCha8 seeded with the scenario seed. Every
//! splittable visit, in id order, consumes exactly seven draws:
//! duration delta, split point, qualification-relax flag, relaxed part,
//! window-relax flag, relaxed part, part dependency type.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::io::{from_json, to_pretty, IoError};
use crate::model::{DependencySpec, Instance, InstanceMeta, QualSet, Qualification, Visit, VisitKind};
use crate::sync::{sync_params, SyncType};

pub const MIN_SPLITTABLE: i64 = 60;
pub const MIN_PART: i64 = 30;
pub const DELTA_FROM: i64 = 75;
pub const DURATION_DELTA: i64 = 15;
pub const WINDOW_RELAX: i64 = 60;
pub const RELAX_PROBABILITY: f64 = 0.75;
const LEVELS: u8 = 3;

/// The shipped 20-visit base.
pub const BASE20: &str = include_str!("../data/base20.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseVisit {
    pub id: usize,
    pub duration: i64,
    pub window: [i64; 2],
}

/// Locations, durations and windows without qualifications.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseInstance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub horizon: i64,
    pub caregivers: u32,
    pub visits: Vec<BaseVisit>,
    /// Indexed `0..=n+1` like instance travel matrices.
    pub travel: Vec<Vec<i64>>,
    /// Pairs that must start simultaneously.
    #[serde(default)]
    pub sync_pairs: Vec<[usize; 2]>,
}

#[derive(Debug, thiserror::Error)]
pub enum GeneratorError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("base instance: {0}")]
    Base(String),
}

impl BaseInstance {
    pub fn parse(bytes: &[u8]) -> Result<Self, GeneratorError> {
        let base: BaseInstance = from_json(bytes)?;
        base.check()?;
        Ok(base)
    }

    pub fn to_json(&self) -> Vec<u8> {
        to_pretty(self)
    }

    pub fn shipped() -> Self {
        Self::parse(BASE20.as_bytes()).expect("shipped base is valid")
    }

    fn check(&self) -> Result<(), GeneratorError> {
        let n = self.visits.len();
        let bad = |m: String| Err(GeneratorError::Base(m));
        if self.horizon <= 0 {
            return bad("horizon must be positive".into());
        }
        if self.caregivers == 0 {
            return bad("at least one caregiver is needed".into());
        }
        for (i, v) in self.visits.iter().enumerate() {
            if v.id != i + 1 {
                return bad(format!("visits[{i}].id must be {}", i + 1));
            }
            if v.duration <= 0 || v.window[0] > v.window[1] || v.window[0] < 0 || v.window[1] + v.duration > self.horizon {
                return bad(format!("visits[{i}] has an invalid duration or window"));
            }
        }
        if self.travel.len() != n + 2 || self.travel.iter().any(|r| r.len() != n + 2) {
            return bad(format!("travel must be {0}x{0}", n + 2));
        }
        for (i, p) in self.sync_pairs.iter().enumerate() {
            if p[0] == p[1] || p.iter().any(|&x| x == 0 || x > n) {
                return bad(format!("sync_pairs[{i}] names an unknown or repeated visit"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisitProfile {
    General,
    Balanced,
    Medical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StaffProfile {
    Practical,
    Moderate,
    Medical,
    OnlyMedical,
}

impl VisitProfile {
    pub const ALL: [VisitProfile; 3] = [VisitProfile::General, VisitProfile::Balanced, VisitProfile::Medical];

    /// Relative weights of levels 1, 2 and 3.
    pub fn weights(self) -> [u64; 3] {
        match self {
            VisitProfile::General => [2, 1, 1],
            VisitProfile::Balanced => [1, 1, 1],
            VisitProfile::Medical => [1, 1, 2],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VisitProfile::General => "general",
            VisitProfile::Balanced => "balanced",
            VisitProfile::Medical => "medical",
        }
    }
}

impl StaffProfile {
    pub const ALL: [StaffProfile; 4] =
        [StaffProfile::Practical, StaffProfile::Moderate, StaffProfile::Medical, StaffProfile::OnlyMedical];

    pub fn weights(self) -> [u64; 3] {
        match self {
            StaffProfile::Practical => [2, 1, 1],
            StaffProfile::Moderate => [1, 2, 1],
            StaffProfile::Medical => [1, 1, 2],
            StaffProfile::OnlyMedical => [0, 0, 1],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StaffProfile::Practical => "practical",
            StaffProfile::Moderate => "moderate",
            StaffProfile::Medical => "medical",
            StaffProfile::OnlyMedical => "only-medical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown profile `{0}`")]
pub struct UnknownProfile(pub String);

impl FromStr for VisitProfile {
    type Err = UnknownProfile;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|p| p.name() == s.trim()).ok_or_else(|| UnknownProfile(s.into()))
    }
}

impl FromStr for StaffProfile {
    type Err = UnknownProfile;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|p| p.name() == s.trim()).ok_or_else(|| UnknownProfile(s.into()))
    }
}

impl fmt::Display for VisitProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for StaffProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScenarioConfig {
    pub visit_profile: VisitProfile,
    pub staff_profile: StaffProfile,
    pub seed: u64,
}

/// The ten combinations: every visit profile with the first three staff
/// profiles, plus only-medical staff once.
pub fn scenario_grid(seed: u64) -> Vec<ScenarioConfig> {
    let mut grid = Vec::with_capacity(10);
    for visit_profile in VisitProfile::ALL {
        for staff_profile in &StaffProfile::ALL[..3] {
            grid.push(ScenarioConfig { visit_profile, staff_profile: *staff_profile, seed });
        }
    }
    grid.push(ScenarioConfig { visit_profile: VisitProfile::General, staff_profile: StaffProfile::OnlyMedical, seed });
    grid
}

/// Splits `total` proportionally to `weights`; leftover units go to the
/// largest remainders, lower index first on ties.
pub fn largest_remainder(total: u64, weights: &[u64]) -> Vec<u64> {
    let sum: u64 = weights.iter().sum();
    assert!(sum > 0, "weights must not all be zero");
    let mut counts: Vec<u64> = weights.iter().map(|w| total * w / sum).collect();
    let mut rest: Vec<(u64, usize)> = weights.iter().enumerate().map(|(i, w)| (total * w % sum, i)).collect();
    rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let left = total - counts.iter().sum::<u64>();
    for &(_, i) in rest.iter().take(left as usize) {
        counts[i] += 1;
    }
    counts
}

/// Required level per visit (index `id - 1`). Levels come from one seeded
/// ranking of the visits, so the general profile is a fixed reference and
/// every other profile changes as few visits as possible.
pub fn qualification_levels(n: usize, profile: VisitProfile, seed: u64) -> Vec<u8> {
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let reference = largest_remainder(n as u64, &VisitProfile::General.weights());
    let mut levels = vec![0u8; n];
    let mut pos = 0;
    for (l, &c) in reference.iter().enumerate() {
        for &v in &rank[pos..pos + c as usize] {
            levels[v] = l as u8 + 1;
        }
        pos += c as usize;
    }
    let target = largest_remainder(n as u64, &profile.weights());
    // Surplus visits of a level, taken from the end of the ranking.
    let mut pool = Vec::new();
    for l in 1..=LEVELS {
        let have: Vec<usize> = rank.iter().copied().filter(|&v| levels[v] == l).collect();
        let want = target[l as usize - 1] as usize;
        if have.len() > want {
            pool.extend_from_slice(&have[want..]);
        }
    }
    pool.sort_by_key(|&v| rank.iter().position(|&r| r == v));
    let mut pool = pool.into_iter();
    for l in 1..=LEVELS {
        let have = levels.iter().filter(|&&x| x == l).count();
        let want = target[l as usize - 1] as usize;
        for _ in have..want.max(have) {
            let v = pool.next().expect("surplus matches deficit");
            levels[v] = l;
        }
    }
    levels
}

pub fn caregiver_counts(total: u32, profile: StaffProfile) -> BTreeMap<u8, u32> {
    largest_remainder(total as u64, &profile.weights())
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(l, c)| (l as u8 + 1, c as u32))
        .collect()
}

/// Instance for one profile combination, before split synthesis.
pub fn generate_scenario(base: &BaseInstance, config: &ScenarioConfig) -> Instance {
    let n = base.visits.len();
    let levels = qualification_levels(n, config.visit_profile, config.seed);
    let visits = base
        .visits
        .iter()
        .zip(&levels)
        .map(|(v, &l)| Visit {
            id: v.id,
            duration: v.duration,
            window: (v.window[0], v.window[1]),
            quals: QualSet::at_least(l, LEVELS),
            kind: VisitKind::Unsplittable,
        })
        .collect();
    let t = base.horizon;
    let dependencies = base.sync_pairs.iter().map(|p| DependencySpec::oriented(p[0], p[1], [0; 4], t)).collect();
    let name = base.name.as_deref().unwrap_or("base");
    Instance {
        horizon: t,
        qualifications: (1..=LEVELS).map(|l| Qualification { level: l, wage: Rational64::from_integer(l as i64) }).collect(),
        caregivers: caregiver_counts(base.caregivers, config.staff_profile),
        visits,
        travel: base.travel.clone(),
        dependencies,
        split_links: vec![],
        meta: InstanceMeta {
            name: Some(format!("{name}-{}-{}", config.visit_profile, config.staff_profile)),
            visit_profile: Some(config.visit_profile.name().into()),
            staff_profile: Some(config.staff_profile.name().into()),
            seed: Some(config.seed),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartDependency {
    None,
    Precedence,
    Disjunction,
}

/// Random choices for one splittable visit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDraw {
    pub delta: i64,
    /// Raw split-point draw in `[0, 1)`, mapped onto the valid durations.
    pub split_point: f64,
    pub qual_relax: Option<u8>,
    pub window_relax: Option<u8>,
    pub dependency: PartDependency,
}

impl SplitDraw {
    pub fn draw(rng: &mut impl Rng) -> Self {
        let delta = [-DURATION_DELTA, 0, DURATION_DELTA][rng.random_range(0..3)];
        let split_point = rng.random::<f64>();
        let qual_flag = rng.random_bool(RELAX_PROBABILITY);
        let qual_part = rng.random_range(1..=2u8);
        let window_flag = rng.random_bool(RELAX_PROBABILITY);
        let window_part = rng.random_range(1..=2u8);
        let dependency = [PartDependency::None, PartDependency::Precedence, PartDependency::Disjunction][rng.random_range(0..3)];
        SplitDraw {
            delta,
            split_point,
            qual_relax: qual_flag.then_some(qual_part),
            window_relax: window_flag.then_some(window_part),
            dependency,
        }
    }

    /// Combined part duration for a visit of length `d`.
    pub fn combined(&self, d: i64) -> i64 {
        if d >= DELTA_FROM {
            d + self.delta
        } else {
            d
        }
    }

    /// First part duration, uniform over `MIN_PART..=total - MIN_PART`.
    pub fn first_part(&self, total: i64) -> i64 {
        let choices = total - 2 * MIN_PART + 1;
        MIN_PART + ((self.split_point * choices as f64) as i64).min(choices - 1)
    }
}

pub fn is_splittable_duration(d: i64) -> bool {
    d >= MIN_SPLITTABLE
}

/// Adds two parts to every visit of at least an hour. Strictly synchronized
/// splittable pairs share all draws except the qualification relaxation,
/// take the same split decision, and have their parts synchronized.
pub fn synthesize_splits(instance: &Instance, seed: u64) -> Instance {
    let t = instance.horizon;
    let n0 = instance.visits.len();
    assert!(instance.visits.iter().all(|v| v.kind == VisitKind::Unsplittable), "instance already has split options");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);

    let strict: Vec<(usize, usize)> =
        instance.dependencies.iter().filter(|d| d.is_strict()).map(|d| (d.u, d.v)).collect();
    let splittable = |v: usize| is_splittable_duration(instance.visit(v).duration);
    // Follower -> leader for linked pairs.
    let mut leader: BTreeMap<usize, usize> = BTreeMap::new();
    for &(u, v) in &strict {
        if splittable(u) && splittable(v) && !leader.contains_key(&u) && !leader.contains_key(&v) {
            leader.insert(v, u);
        }
    }

    let mut out = instance.clone();
    let mut location: Vec<usize> = (0..=n0).collect();
    let mut draws: BTreeMap<usize, SplitDraw> = BTreeMap::new();
    let mut parts: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut split_deps = Vec::new();
    for v in 1..=n0 {
        if !splittable(v) {
            continue;
        }
        let own = SplitDraw::draw(&mut rng);
        let d = match leader.get(&v) {
            Some(l) => SplitDraw { qual_relax: own.qual_relax, ..draws[l] },
            None => own,
        };
        draws.insert(v, d);
        let orig = instance.visit(v).clone();
        let total = d.combined(orig.duration);
        let d1 = match leader.get(&v) {
            Some(l) => {
                let lead = instance.visit(*l).duration;
                d.first_part(d.combined(lead)).clamp(MIN_PART, total - MIN_PART)
            }
            None => d.first_part(total),
        };
        let ids = (out.visits.len() + 1, out.visits.len() + 2);
        for (part, dur, id) in [(1u8, d1, ids.0), (2u8, total - d1, ids.1)] {
            let latest_cap = t - dur;
            let mut window = (orig.window.0.min(latest_cap), orig.window.1.min(latest_cap));
            if d.window_relax == Some(part) {
                window.1 = (window.1 + WINDOW_RELAX).min(latest_cap);
            }
            let quals = if d.qual_relax == Some(part) { QualSet::at_least(1, LEVELS) } else { orig.quals };
            out.visits.push(Visit { id, duration: dur, window, quals, kind: VisitKind::SplitPart { parent: v, part } });
            location.push(v);
        }
        out.visits[v - 1].kind = VisitKind::Splittable;
        let kind = match d.dependency {
            PartDependency::None => None,
            PartDependency::Precedence => Some(SyncType::PrecedenceUV),
            PartDependency::Disjunction => Some(SyncType::NoOverlap),
        };
        if let Some(kind) = kind {
            let q = sync_params(kind, 0, 0, d1, total - d1, t).expect("valid durations");
            split_deps.push(DependencySpec::oriented(ids.0, ids.1, q, t));
        }
        parts.insert(v, ids);
    }

    for (&f, &l) in &leader {
        out.split_links.push((l.min(f), l.max(f)));
        let (a, b) = (parts[&l], parts[&f]);
        split_deps.push(DependencySpec::oriented(a.0, b.0, [0; 4], t));
        split_deps.push(DependencySpec::oriented(a.1, b.1, [0; 4], t));
    }
    // A split visit synchronized with an unsplittable one hands the
    // synchronization to its first part.
    for &(u, v) in &strict {
        for (s, other) in [(u, v), (v, u)] {
            if parts.contains_key(&s) && !parts.contains_key(&other) {
                split_deps.push(DependencySpec::oriented(parts[&s].0, other, [0; 4], t));
            }
        }
    }
    out.dependencies.extend(split_deps);
    out.dependencies.sort_by_key(|d| (d.u, d.v));
    let mut seen = BTreeSet::new();
    out.dependencies.retain(|d| seen.insert((d.u, d.v)));

    let n = out.visits.len();
    location.push(n0 + 1);
    out.travel = (0..n + 2).map(|i| (0..n + 2).map(|j| instance.travel[location[i]][location[j]]).collect()).collect();
    out
}

/// A scenario with split options, ready to solve.
pub fn scenario(base: &BaseInstance, config: &ScenarioConfig) -> Instance {
    synthesize_splits(&generate_scenario(base, config), config.seed)
}

/// File stem for a scenario instance.
pub fn scenario_file_name(base: &BaseInstance, config: &ScenarioConfig) -> String {
    format!("{}-{}-{}-s{}.json", base.name.as_deref().unwrap_or("base"), config.visit_profile, config.staff_profile, config.seed)
}
