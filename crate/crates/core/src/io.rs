//! JSON encoding of instances and plans.
//!
//! Output is pretty-printed with object keys in sorted order so that files
//! are byte-stable across runs.

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::model::{
    DependencySpec, Instance, InstanceError, InstanceMeta, Plan, QualSet, Qualification, Route, Stop, Visit,
    VisitKind,
};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum WageRepr {
    Int(i64),
    Text(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QualFile {
    level: u8,
    wage: WageRepr,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VisitFile {
    id: usize,
    duration: i64,
    window: [i64; 2],
    quals: Vec<u8>,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    part: Option<u8>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DependencyFile {
    u: usize,
    v: usize,
    dmin_uv: i64,
    dmax_uv: i64,
    dmin_vu: i64,
    dmax_vu: i64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    visit_profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    staff_profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    horizon: i64,
    qualifications: Vec<QualFile>,
    caregivers: BTreeMap<String, u32>,
    visits: Vec<VisitFile>,
    travel: Vec<Vec<i64>>,
    #[serde(default)]
    dependencies: Vec<DependencyFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    split_links: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<MetaFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StopFile {
    visit: usize,
    start: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteFile {
    qual: u8,
    stops: Vec<StopFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    routes: Vec<RouteFile>,
    #[serde(default)]
    splits: BTreeMap<String, bool>,
    #[serde(default)]
    objective: Option<f64>,
    #[serde(default)]
    bound: Option<f64>,
    #[serde(default)]
    gap: Option<f64>,
    #[serde(default)]
    status: Option<String>,
}

pub(crate) fn from_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, IoError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path.is_empty() || path == "." { "$".to_string() } else { path }, e.into_inner().to_string())
    })
}

fn parse_wage(repr: &WageRepr, path: &str) -> Result<Rational64, IoError> {
    match repr {
        WageRepr::Int(x) => Ok(Rational64::from_integer(*x)),
        WageRepr::Text(s) => {
            let parsed = match s.split_once('/') {
                Some((p, q)) => p.trim().parse::<i64>().ok().zip(q.trim().parse::<i64>().ok()),
                None => s.trim().parse::<i64>().ok().map(|p| (p, 1)),
            };
            match parsed {
                Some((_, 0)) | None => Err(schema(path, format!("expected an integer or \"p/q\", got {s:?}"))),
                Some((p, q)) => Ok(Rational64::new(p, q)),
            }
        }
    }
}

fn wage_repr(w: Rational64) -> WageRepr {
    if w.is_integer() {
        WageRepr::Int(*w.numer())
    } else {
        WageRepr::Text(format!("{}/{}", w.numer(), w.denom()))
    }
}

pub(crate) fn to_pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let value = serde_json::to_value(value).expect("serializable");
    let mut out = serde_json::to_string_pretty(&value).expect("serializable").into_bytes();
    out.push(b'\n');
    out
}

/// Re-encodes arbitrary JSON with sorted keys and the crate's layout.
pub fn canonical_json(bytes: &[u8]) -> Result<Vec<u8>, IoError> {
    let value: serde_json::Value = from_json(bytes)?;
    Ok(to_pretty(&value))
}

pub fn parse_instance(bytes: &[u8]) -> Result<Instance, IoError> {
    let file: InstanceFile = from_json(bytes)?;
    let mut qualifications = Vec::with_capacity(file.qualifications.len());
    for (i, q) in file.qualifications.iter().enumerate() {
        let wage = parse_wage(&q.wage, &format!("qualifications[{i}].wage"))?;
        qualifications.push(Qualification { level: q.level, wage });
    }
    let mut caregivers = BTreeMap::new();
    for (key, &count) in &file.caregivers {
        let level: u8 = key.trim().parse().map_err(|_| schema(format!("caregivers.{key}"), "key must be a level number"))?;
        caregivers.insert(level, count);
    }
    let mut visits = Vec::with_capacity(file.visits.len());
    for (i, v) in file.visits.iter().enumerate() {
        let path = format!("visits[{i}]");
        let kind = match v.kind.as_str() {
            "unsplittable" => VisitKind::Unsplittable,
            "splittable" => VisitKind::Splittable,
            "split-part" => match (v.parent, v.part) {
                (Some(parent), Some(part)) => VisitKind::SplitPart { parent, part },
                _ => return Err(schema(format!("{path}.kind"), "split-part needs `parent` and `part`")),
            },
            other => {
                return Err(schema(
                    format!("{path}.kind"),
                    format!("unknown kind {other:?} (expected unsplittable, splittable or split-part)"),
                ))
            }
        };
        if !matches!(kind, VisitKind::SplitPart { .. }) && (v.parent.is_some() || v.part.is_some()) {
            return Err(schema(path, "`parent`/`part` only allowed on split-part visits"));
        }
        if v.quals.iter().any(|&l| l == 0 || l >= 64) {
            return Err(schema(format!("{path}.quals"), "levels must be in 1..=63"));
        }
        visits.push(Visit {
            id: v.id,
            duration: v.duration,
            window: (v.window[0], v.window[1]),
            quals: QualSet::from_levels(v.quals.iter().copied()),
            kind,
        });
    }
    let dependencies = file
        .dependencies
        .iter()
        .map(|d| DependencySpec { u: d.u, v: d.v, dmin_uv: d.dmin_uv, dmax_uv: d.dmax_uv, dmin_vu: d.dmin_vu, dmax_vu: d.dmax_vu })
        .collect();
    let meta = file
        .meta
        .map(|m| InstanceMeta { name: m.name, visit_profile: m.visit_profile, staff_profile: m.staff_profile, seed: m.seed })
        .unwrap_or_default();
    let instance = Instance {
        horizon: file.horizon,
        qualifications,
        caregivers,
        visits,
        travel: file.travel,
        dependencies,
        split_links: file.split_links.iter().map(|l| (l[0], l[1])).collect(),
        meta,
    };
    instance.validate()?;
    Ok(instance)
}

pub fn serialize_instance(instance: &Instance) -> Vec<u8> {
    let file = InstanceFile {
        horizon: instance.horizon,
        qualifications: instance.qualifications.iter().map(|q| QualFile { level: q.level, wage: wage_repr(q.wage) }).collect(),
        caregivers: instance.caregivers.iter().map(|(l, c)| (l.to_string(), *c)).collect(),
        visits: instance
            .visits
            .iter()
            .map(|v| {
                let (kind, parent, part) = match v.kind {
                    VisitKind::Unsplittable => ("unsplittable", None, None),
                    VisitKind::Splittable => ("splittable", None, None),
                    VisitKind::SplitPart { parent, part } => ("split-part", Some(parent), Some(part)),
                };
                VisitFile {
                    id: v.id,
                    duration: v.duration,
                    window: [v.window.0, v.window.1],
                    quals: v.quals.levels().collect(),
                    kind: kind.to_string(),
                    parent,
                    part,
                }
            })
            .collect(),
        travel: instance.travel.clone(),
        dependencies: instance
            .dependencies
            .iter()
            .map(|d| DependencyFile { u: d.u, v: d.v, dmin_uv: d.dmin_uv, dmax_uv: d.dmax_uv, dmin_vu: d.dmin_vu, dmax_vu: d.dmax_vu })
            .collect(),
        split_links: instance.split_links.iter().map(|&(a, b)| [a, b]).collect(),
        meta: (!instance.meta.is_empty()).then(|| MetaFile {
            name: instance.meta.name.clone(),
            visit_profile: instance.meta.visit_profile.clone(),
            staff_profile: instance.meta.staff_profile.clone(),
            seed: instance.meta.seed,
        }),
    };
    to_pretty(&file)
}

fn plan_file(plan: &Plan) -> PlanFile {
    PlanFile {
        routes: plan
            .routes
            .iter()
            .map(|r| RouteFile { qual: r.qual, stops: r.stops.iter().map(|s| StopFile { visit: s.visit, start: s.start }).collect() })
            .collect(),
        splits: plan.splits.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        objective: plan.objective,
        bound: plan.bound,
        gap: plan.gap,
        status: plan.status.clone(),
    }
}

fn plan_from_file(file: PlanFile) -> Result<Plan, IoError> {
    let mut splits = BTreeMap::new();
    for (key, value) in file.splits {
        let id: usize = key.trim().parse().map_err(|_| schema(format!("splits.{key}"), "key must be a visit id"))?;
        splits.insert(id, value);
    }
    Ok(Plan {
        routes: file
            .routes
            .into_iter()
            .map(|r| Route { qual: r.qual, stops: r.stops.into_iter().map(|s| Stop { visit: s.visit, start: s.start }).collect() })
            .collect(),
        splits,
        objective: file.objective,
        bound: file.bound,
        gap: file.gap,
        status: file.status,
    })
}

pub fn plan_to_value(plan: &Plan) -> serde_json::Value {
    serde_json::to_value(plan_file(plan)).expect("serializable")
}

pub fn plan_from_value(value: serde_json::Value) -> Result<Plan, IoError> {
    let bytes = serde_json::to_vec(&value).expect("serializable");
    parse_plan(&bytes)
}

pub fn serialize_plan(plan: &Plan) -> Vec<u8> {
    to_pretty(&plan_file(plan))
}

pub fn parse_plan(bytes: &[u8]) -> Result<Plan, IoError> {
    plan_from_file(from_json(bytes)?)
}
