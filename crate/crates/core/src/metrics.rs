//! Managerial metrics of plans and of split versus no-split comparisons.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{plan_cost, plan_travel_time, rational_to_f64, route_working_time, Instance, Plan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanMetrics {
    pub cost: f64,
    pub travel_time: i64,
    pub working_time: i64,
    pub care_time: i64,
    pub caregivers_used: usize,
    /// Care time over working time, in percent.
    pub care_share: Option<f64>,
    /// Working time per caregiver level, in percent of the total.
    pub level_shares: BTreeMap<u8, f64>,
    pub splittable: usize,
    pub splits_used: usize,
    /// Split visits over splittable visits, in percent.
    pub utilized_splits: Option<f64>,
}

fn percent(part: f64, whole: f64) -> Option<f64> {
    (whole > 0.0).then(|| 100.0 * part / whole)
}

/// Metrics of a plan that already passed the verifier.
pub fn plan_metrics(plan: &Plan, instance: &Instance) -> PlanMetrics {
    let mut working_time = 0;
    let mut care_time = 0;
    let mut by_level: BTreeMap<u8, i64> = instance.caregivers.keys().map(|&l| (l, 0)).collect();
    for route in plan.active_routes() {
        let w = route_working_time(route, instance);
        working_time += w;
        *by_level.entry(route.qual).or_default() += w;
        care_time += route.stops.iter().map(|s| instance.visit(s.visit).duration).sum::<i64>();
    }
    let splittable = instance.splittable().len();
    let splits_used = instance.splittable().iter().filter(|&&v| plan.splits.get(&v).copied().unwrap_or(false)).count();
    PlanMetrics {
        cost: plan_cost(plan, instance).map(rational_to_f64).unwrap_or(f64::NAN),
        travel_time: plan_travel_time(plan, instance).unwrap_or(0),
        working_time,
        care_time,
        caregivers_used: plan.caregivers_used(),
        care_share: percent(care_time as f64, working_time as f64),
        level_shares: by_level
            .into_iter()
            .filter_map(|(l, w)| Some((l, percent(w as f64, working_time as f64)?)))
            .collect(),
        splittable,
        splits_used,
        utilized_splits: percent(splits_used as f64, splittable as f64),
    }
}

/// Baseline versus split comparison; fields are `None` when either side
/// lacks the needed plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline_cost: Option<f64>,
    pub split_cost: Option<f64>,
    /// Relative objective decrease from baseline to split, in percent.
    pub cost_decrease: Option<f64>,
    pub travel_decrease: Option<f64>,
    pub caregivers_saved: Option<i64>,
    pub utilized_splits: Option<f64>,
    pub baseline_care_share: Option<f64>,
    pub split_care_share: Option<f64>,
    pub baseline_level_shares: BTreeMap<u8, f64>,
    pub split_level_shares: BTreeMap<u8, f64>,
}

pub fn compare_metrics(baseline: Option<&PlanMetrics>, split: Option<&PlanMetrics>) -> Comparison {
    let both = baseline.zip(split);
    Comparison {
        baseline_cost: baseline.map(|m| m.cost),
        split_cost: split.map(|m| m.cost),
        cost_decrease: both.and_then(|(b, s)| percent(b.cost - s.cost, b.cost)),
        travel_decrease: both.and_then(|(b, s)| percent((b.travel_time - s.travel_time) as f64, b.travel_time as f64)),
        caregivers_saved: both.map(|(b, s)| b.caregivers_used as i64 - s.caregivers_used as i64),
        utilized_splits: split.and_then(|m| m.utilized_splits),
        baseline_care_share: baseline.and_then(|m| m.care_share),
        split_care_share: split.and_then(|m| m.care_share),
        baseline_level_shares: baseline.map(|m| m.level_shares.clone()).unwrap_or_default(),
        split_level_shares: split.map(|m| m.level_shares.clone()).unwrap_or_default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{i1, i1_optimal_plan, split_benefit};
    use crate::model::{Route, Stop};

    #[test]
    fn i1_metrics() {
        let m = plan_metrics(&i1_optimal_plan(), &i1());
        assert_eq!((m.working_time, m.care_time, m.travel_time), (60, 50, 10));
        assert!((m.care_share.unwrap() - 500.0 / 6.0).abs() < 1e-9);
        assert_eq!(m.level_shares[&3], 100.0);
        assert_eq!(m.cost, 180.0);
        assert_eq!(m.utilized_splits, None);
    }

    #[test]
    fn identical_plans_show_no_change() {
        let m = plan_metrics(&i1_optimal_plan(), &i1());
        let c = compare_metrics(Some(&m), Some(&m));
        assert_eq!(c.cost_decrease, Some(0.0));
        assert_eq!(c.caregivers_saved, Some(0));
    }

    #[test]
    fn missing_plan_is_unavailable() {
        let m = plan_metrics(&i1_optimal_plan(), &i1());
        let c = compare_metrics(None, Some(&m));
        assert_eq!(c.cost_decrease, None);
        assert_eq!(c.split_cost, Some(180.0));
    }

    #[test]
    fn unused_splits_count_zero() {
        let inst = split_benefit();
        let plan = Plan {
            routes: vec![
                Route { qual: 3, stops: vec![Stop { visit: 1, start: 0 }] },
                Route { qual: 3, stops: vec![Stop { visit: 2, start: 30 }] },
                Route { qual: 1, stops: vec![Stop { visit: 3, start: 30 }] },
            ],
            splits: BTreeMap::from([(1, false)]),
            ..Plan::default()
        };
        let m = plan_metrics(&plan, &inst);
        assert_eq!(m.utilized_splits, Some(0.0));
        assert_eq!(m.splits_used, 0);
    }
}
