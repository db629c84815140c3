//! Summary tables over solve results.
//!
//! Every CSV row starts with `schema_version`; columns are documented in the
//! README and only change together with [`SCHEMA_VERSION`].

use std::collections::{BTreeMap, BTreeSet};

use hhc_core::solve::{SolveResult, SolveStatus};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Gap thresholds of the gap-distribution table, in percent.
pub const GAP_THRESHOLDS: [f64; 8] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0];

const UNKNOWN: &str = "-";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub file: String,
    pub instance: String,
    pub visit_profile: String,
    pub staff_profile: String,
    pub variant: String,
    pub split_policy: String,
    pub objective_mode: String,
    pub preprocessed: bool,
    pub status: String,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap_percent: Option<f64>,
    pub cost: Option<f64>,
    pub travel_time: Option<i64>,
    pub caregivers_used: Option<usize>,
    pub care_share: Option<f64>,
    pub utilized_splits: Option<f64>,
    pub elapsed_seconds: f64,
    pub first_solution_seconds: Option<f64>,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityRow {
    pub schema_version: u32,
    pub visit_profile: String,
    pub staff_profile: String,
    pub split_policy: String,
    pub instances: usize,
    pub feasible: usize,
    pub infeasible: usize,
    pub unknown: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CareShareRow {
    pub schema_version: u32,
    pub visit_profile: String,
    pub staff_profile: String,
    pub split_policy: String,
    pub instances: usize,
    pub mean_care_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostDecreaseRow {
    pub schema_version: u32,
    pub visit_profile: String,
    pub staff_profile: String,
    pub pairs: usize,
    pub mean_cost_decrease: f64,
    pub mean_utilized_splits: Option<f64>,
    pub mean_caregivers_saved: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelShareRow {
    pub schema_version: u32,
    pub visit_profile: String,
    pub staff_profile: String,
    pub split_policy: String,
    pub level: u8,
    pub instances: usize,
    pub mean_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub schema_version: u32,
    pub split_policy: String,
    pub threshold_percent: f64,
    pub instances: usize,
    pub within: usize,
    pub share_percent: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub results: Vec<ResultRow>,
    pub feasibility: Vec<FeasibilityRow>,
    pub care_share: Vec<CareShareRow>,
    pub cost_decrease: Vec<CostDecreaseRow>,
    pub level_shares: Vec<LevelShareRow>,
    pub gap_distribution: Vec<GapRow>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn profile(p: &Option<String>) -> String {
    p.clone().unwrap_or_else(|| UNKNOWN.into())
}

/// Results solved under the same conditions except the split policy.
type PairKey = (String, String, String, bool);

fn pair_key(r: &SolveResult) -> PairKey {
    (r.instance.clone().unwrap_or_default(), r.variant.name().into(), r.objective_mode.clone(), r.preprocessed)
}

fn has_plan(r: &SolveResult) -> bool {
    matches!(r.status, SolveStatus::Optimal | SolveStatus::Feasible) && r.metrics.is_some()
}

pub fn build(files: &[(String, SolveResult)]) -> Report {
    let v = SCHEMA_VERSION;
    let results = files
        .iter()
        .map(|(file, r)| ResultRow {
            schema_version: v,
            file: file.clone(),
            instance: r.instance.clone().unwrap_or_else(|| UNKNOWN.into()),
            visit_profile: profile(&r.visit_profile),
            staff_profile: profile(&r.staff_profile),
            variant: r.variant.name().into(),
            split_policy: r.split_policy.clone(),
            objective_mode: r.objective_mode.clone(),
            preprocessed: r.preprocessed,
            status: r.status.name().into(),
            objective: r.objective,
            bound: r.bound,
            gap_percent: r.gap.filter(|g| g.is_finite()).map(|g| 100.0 * g),
            cost: r.cost,
            travel_time: r.travel_time,
            caregivers_used: r.metrics.as_ref().map(|m| m.caregivers_used),
            care_share: r.metrics.as_ref().and_then(|m| m.care_share),
            utilized_splits: r.metrics.as_ref().and_then(|m| m.utilized_splits),
            elapsed_seconds: r.stats.elapsed_seconds,
            first_solution_seconds: r.stats.first_solution_seconds,
            nodes: r.stats.nodes,
        })
        .collect();

    type Group = (String, String, String);
    let mut groups: BTreeMap<Group, Vec<&SolveResult>> = BTreeMap::new();
    for (_, r) in files {
        groups.entry((profile(&r.visit_profile), profile(&r.staff_profile), r.split_policy.clone())).or_default().push(r);
    }

    let feasibility = groups
        .iter()
        .map(|((vp, sp, policy), rs)| {
            let count = |s: &[SolveStatus]| rs.iter().filter(|r| s.contains(&r.status)).count();
            FeasibilityRow {
                schema_version: v,
                visit_profile: vp.clone(),
                staff_profile: sp.clone(),
                split_policy: policy.clone(),
                instances: rs.len(),
                feasible: count(&[SolveStatus::Optimal, SolveStatus::Feasible]),
                infeasible: count(&[SolveStatus::Infeasible]),
                unknown: count(&[SolveStatus::NoSolution, SolveStatus::Error]),
            }
        })
        .collect();

    // Staff schedules are compared on instances that have a plan without
    // splitting, when such results exist.
    let baseline_feasible: BTreeSet<PairKey> =
        files.iter().map(|(_, r)| r).filter(|r| r.split_policy == "forbid" && has_plan(r)).map(pair_key).collect();
    let any_baseline = files.iter().any(|(_, r)| r.split_policy == "forbid");
    let in_scope = |r: &SolveResult| has_plan(r) && (!any_baseline || baseline_feasible.contains(&pair_key(r)));

    let mut care_share = Vec::new();
    let mut level_shares = Vec::new();
    for ((vp, sp, policy), rs) in &groups {
        let scoped: Vec<&SolveResult> = rs.iter().copied().filter(|r| in_scope(r)).collect();
        let shares: Vec<f64> = scoped.iter().filter_map(|r| r.metrics.as_ref()?.care_share).collect();
        if let Some(m) = mean(&shares) {
            care_share.push(CareShareRow {
                schema_version: v,
                visit_profile: vp.clone(),
                staff_profile: sp.clone(),
                split_policy: policy.clone(),
                instances: shares.len(),
                mean_care_share: m,
            });
        }
        let mut by_level: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
        for r in &scoped {
            for (&level, &share) in &r.metrics.as_ref().expect("in scope").level_shares {
                by_level.entry(level).or_default().push(share);
            }
        }
        for (level, shares) in by_level {
            level_shares.push(LevelShareRow {
                schema_version: v,
                visit_profile: vp.clone(),
                staff_profile: sp.clone(),
                split_policy: policy.clone(),
                level,
                instances: shares.len(),
                mean_share: mean(&shares).unwrap_or(0.0),
            });
        }
    }

    let mut pairs: BTreeMap<PairKey, (Option<&SolveResult>, Option<&SolveResult>)> = BTreeMap::new();
    for (_, r) in files {
        let slot = pairs.entry(pair_key(r)).or_default();
        match r.split_policy.as_str() {
            "forbid" => slot.0 = Some(r),
            "optimize" => slot.1 = Some(r),
            _ => {}
        }
    }
    let mut decreases: BTreeMap<(String, String), Vec<hhc_core::metrics::Comparison>> = BTreeMap::new();
    for (base, split) in pairs.values() {
        if let (Some(b), Some(s)) = (base, split) {
            if has_plan(b) && has_plan(s) {
                let c = hhc_core::metrics::compare_metrics(b.metrics.as_ref(), s.metrics.as_ref());
                decreases.entry((profile(&s.visit_profile), profile(&s.staff_profile))).or_default().push(c);
            }
        }
    }
    let cost_decrease = decreases
        .into_iter()
        .map(|((vp, sp), cs)| {
            let dec: Vec<f64> = cs.iter().filter_map(|c| c.cost_decrease).collect();
            let used: Vec<f64> = cs.iter().filter_map(|c| c.utilized_splits).collect();
            let saved: Vec<f64> = cs.iter().filter_map(|c| c.caregivers_saved).map(|x| x as f64).collect();
            CostDecreaseRow {
                schema_version: v,
                visit_profile: vp,
                staff_profile: sp,
                pairs: cs.len(),
                mean_cost_decrease: mean(&dec).unwrap_or(0.0),
                mean_utilized_splits: mean(&used),
                mean_caregivers_saved: mean(&saved).unwrap_or(0.0),
            }
        })
        .collect();

    let mut by_policy: BTreeMap<String, Vec<&SolveResult>> = BTreeMap::new();
    for (_, r) in files {
        if r.status != SolveStatus::Infeasible {
            by_policy.entry(r.split_policy.clone()).or_default().push(r);
        }
    }
    let mut gap_distribution = Vec::new();
    for (policy, rs) in &by_policy {
        for threshold in GAP_THRESHOLDS {
            let within = rs
                .iter()
                .filter(|r| has_plan(r) && r.gap.is_some_and(|g| 100.0 * g <= threshold + 1e-9))
                .count();
            gap_distribution.push(GapRow {
                schema_version: v,
                split_policy: policy.clone(),
                threshold_percent: threshold,
                instances: rs.len(),
                within,
                share_percent: 100.0 * within as f64 / rs.len() as f64,
            });
        }
    }

    Report { results, feasibility, care_share, cost_decrease, level_shares, gap_distribution }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(w.into_inner()?)
}

impl Report {
    /// Table name and CSV body, in output order.
    pub fn tables(&self) -> anyhow::Result<Vec<(&'static str, Vec<u8>)>> {
        Ok(vec![
            ("results", to_csv(&self.results)?),
            ("feasibility", to_csv(&self.feasibility)?),
            ("care_share", to_csv(&self.care_share)?),
            ("cost_decrease", to_csv(&self.cost_decrease)?),
            ("level_shares", to_csv(&self.level_shares)?),
            ("gap_distribution", to_csv(&self.gap_distribution)?),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hhc_core::fixtures::split_benefit;
    use hhc_core::solve::{solve, SolveConfig, Variant};
    use hhc_core::{SolveMode, SplitPolicy};

    fn results() -> Vec<(String, SolveResult)> {
        let inst = split_benefit();
        [SplitPolicy::Forbid, SplitPolicy::Optimize, SplitPolicy::Force]
            .into_iter()
            .map(|p| {
                let cfg = SolveConfig { backend: Some("bnb".into()), ..SolveConfig::new(Variant::Ti, SolveMode::default().with_split(p)) };
                (format!("{p}.json"), solve(&inst, &cfg))
            })
            .collect()
    }

    #[test]
    fn split_fixture_tables() {
        let report = build(&results());
        assert_eq!(report.results.len(), 3);
        assert!(report.results.iter().all(|r| r.status == "optimal"));
        assert_eq!(report.feasibility.len(), 3);
        let dec = &report.cost_decrease[0];
        assert_eq!(dec.pairs, 1);
        // 300 down to 240.
        assert!((dec.mean_cost_decrease - 20.0).abs() < 1e-9);
        assert_eq!(dec.mean_utilized_splits, Some(100.0));
        let zero_gap: Vec<&GapRow> = report.gap_distribution.iter().filter(|g| g.threshold_percent == 0.0).collect();
        assert!(zero_gap.iter().all(|g| g.within == 1 && g.share_percent == 100.0));
    }

    #[test]
    fn csv_rows_carry_schema_version() {
        let report = build(&results());
        for (_, body) in report.tables().unwrap() {
            let text = String::from_utf8(body).unwrap();
            let mut lines = text.lines();
            assert!(lines.next().unwrap().starts_with("schema_version,"));
            assert!(lines.all(|l| l.starts_with(&format!("{SCHEMA_VERSION},"))));
        }
    }

    #[test]
    fn empty_input_gives_empty_tables() {
        let report = build(&[]);
        assert_eq!(report, Report::default());
    }
}
