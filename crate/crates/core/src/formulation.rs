//! Pieces shared by the MILP formulations.

use std::collections::BTreeMap;

use hhc_milp::{Constraint, Model, Sense, VarId};

use crate::mode::{Objective, SplitPolicy};
use crate::model::{plan_cost, plan_travel_time, rational_to_f64, ExecClass, Instance, Plan, VisitKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulationKind {
    Mtz,
    TimeIndexed,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("flow decomposition failed: {0}")]
    Flow(String),
    #[error("no start times satisfy the extracted routes and dependencies")]
    Timing,
}

pub trait Formulation {
    fn kind(&self) -> FormulationKind;
    fn model(&self) -> &Model;
    fn objective(&self) -> Objective;
    fn extract(&self, instance: &Instance, values: &[f64]) -> Result<Plan, ExtractError>;
    /// A cut excluding the routing part of `values`.
    fn no_good(&self, values: &[f64]) -> Option<Constraint>;
}

/// Value of a plan under the given objective.
pub fn plan_value(plan: &Plan, instance: &Instance, objective: Objective) -> f64 {
    match objective {
        Objective::Cost => plan_cost(plan, instance).map(rational_to_f64).unwrap_or(f64::INFINITY),
        Objective::Travel => plan_travel_time(plan, instance).map(|t| t as f64).unwrap_or(f64::INFINITY),
    }
}

/// Affine expression `constant + Σ coef·var`.
#[derive(Debug, Clone, Default)]
pub struct Affine {
    pub constant: f64,
    pub terms: Vec<(VarId, f64)>,
}

impl Affine {
    pub fn value(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(v, c)| c * values[v.index()]).sum::<f64>()
    }
}

/// One `s` variable per splittable visit.
#[derive(Debug, Clone, Default)]
pub struct SplitVars {
    pub s: BTreeMap<usize, VarId>,
}

impl SplitVars {
    pub fn add(model: &mut Model, instance: &Instance, policy: SplitPolicy) -> Self {
        let mut s = BTreeMap::new();
        for v in instance.splittable() {
            let var = model.add_binary("s", 0.0);
            model.set_branch_priority(var, 2);
            match policy {
                SplitPolicy::Optimize => {}
                SplitPolicy::Forbid => model.set_bounds(var, 0.0, 0.0),
                SplitPolicy::Force => model.set_bounds(var, 1.0, 1.0),
            }
            s.insert(v, var);
        }
        for &(a, b) in &instance.split_links {
            if let (Some(&sa), Some(&sb)) = (s.get(&a), s.get(&b)) {
                model.constrain("split-link", vec![(sa, 1.0), (sb, -1.0)], Sense::Eq, 0.0);
            }
        }
        SplitVars { s }
    }

    /// Whether visit `v` is performed, as an expression in the split variables.
    pub fn performed(&self, instance: &Instance, v: usize) -> Affine {
        match instance.exec_class(v) {
            ExecClass::Always => Affine { constant: 1.0, terms: vec![] },
            ExecClass::Original(_) => Affine { constant: 1.0, terms: vec![(self.s[&v], -1.0)] },
            ExecClass::Parts(_) => {
                let VisitKind::SplitPart { parent, .. } = instance.visit(v).kind else { unreachable!() };
                Affine { constant: 0.0, terms: vec![(self.s[&parent], 1.0)] }
            }
        }
    }

    pub fn decisions(&self, values: &[f64]) -> BTreeMap<usize, bool> {
        self.s.iter().map(|(&v, var)| (v, values[var.index()] > 0.5)).collect()
    }
}

/// Split flags of a plan, filled in from the performed visits where the plan
/// does not state them.
pub fn plan_splits(instance: &Instance, plan: &Plan) -> BTreeMap<usize, bool> {
    let performed = plan.performed();
    instance
        .splittable()
        .into_iter()
        .map(|v| {
            let split = plan.splits.get(&v).copied().unwrap_or_else(|| !performed.contains_key(&v));
            (v, split)
        })
        .collect()
}

/// No-good cut over binary variables: at least one variable set in `values`
/// must drop to zero.
pub fn no_good_cut(vars: impl Iterator<Item = VarId>, values: &[f64]) -> Option<Constraint> {
    let ones: Vec<(VarId, f64)> = vars.filter(|v| values[v.index()] > 0.5).map(|v| (v, 1.0)).collect();
    if ones.is_empty() {
        return None;
    }
    let rhs = ones.len() as f64 - 1.0;
    Some(Constraint::new("no-good", ones, Sense::Le, rhs))
}
