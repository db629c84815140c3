//! Backend-agnostic description of a mixed-integer linear program.

use std::fmt;

/// Dense index of a variable inside a [`Model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone)]
pub struct Variable {
    /// Variable family, e.g. `"x"` or `"b"`. Used for statistics and debugging.
    pub family: &'static str,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
    /// Higher priority variables are branched on first.
    pub branch_priority: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "==",
        })
    }
}

/// A linear constraint `sum(coef * var) <sense> rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    /// Constraint family, e.g. `"flow"` or `"sync_uv"`.
    pub family: &'static str,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(family: &'static str, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> Self {
        Self {
            family,
            terms,
            sense,
            rhs,
        }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violate the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization MILP.
#[derive(Debug, Clone, Default)]
pub struct Model {
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective_offset: f64,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        family: &'static str,
        kind: VarKind,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        self.vars.push(Variable {
            family,
            kind,
            lower,
            upper,
            objective,
            branch_priority: 0,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, family: &'static str, objective: f64) -> VarId {
        self.add_var(family, VarKind::Binary, 0.0, 1.0, objective)
    }

    pub fn add_continuous(&mut self, family: &'static str, lower: f64, upper: f64, objective: f64) -> VarId {
        self.add_var(family, VarKind::Continuous, lower, upper, objective)
    }

    pub fn add_constraint(&mut self, constraint: Constraint) {
        self.constraints.push(constraint);
    }

    /// Adds `terms <sense> rhs`, merging duplicate variables and dropping
    /// zero coefficients.
    pub fn constrain(&mut self, family: &'static str, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        let terms = normalize_terms(terms);
        self.constraints.push(Constraint::new(family, terms, sense, rhs));
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        let v = &mut self.vars[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn set_objective(&mut self, var: VarId, coef: f64) {
        self.vars[var.0].objective = coef;
    }

    pub fn set_branch_priority(&mut self, var: VarId, priority: i32) {
        self.vars[var.0].branch_priority = priority;
    }

    pub fn set_objective_offset(&mut self, offset: f64) {
        self.objective_offset = offset;
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Copy with every integrality requirement dropped.
    pub fn relaxation(&self) -> Model {
        let mut m = self.clone();
        for v in &mut m.vars {
            v.kind = VarKind::Continuous;
        }
        m
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.terms.len()).sum()
    }

    pub fn count_family(&self, family: &str) -> usize {
        self.vars.iter().filter(|v| v.family == family).count()
    }

    pub fn count_constraint_family(&self, family: &str) -> usize {
        self.constraints.iter().filter(|c| c.family == family).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset
            + self
                .vars
                .iter()
                .zip(values)
                .map(|(v, x)| v.objective * x)
                .sum::<f64>()
    }

    /// True when every feasible solution has an integral objective value:
    /// all objective weight sits on integral variables with integral
    /// coefficients.
    pub fn has_integral_objective(&self) -> bool {
        self.objective_offset.fract() == 0.0
            && self.vars.iter().all(|v| {
                v.objective == 0.0 || (v.kind.is_integral() && v.objective.fract() == 0.0)
            })
    }

    /// Checks bounds, integrality and every constraint at tolerance `tol`.
    pub fn check_feasible(&self, values: &[f64], tol: f64) -> Result<(), Infeasibility> {
        if values.len() != self.vars.len() {
            return Err(Infeasibility::Length {
                expected: self.vars.len(),
                got: values.len(),
            });
        }
        for (i, (v, &x)) in self.vars.iter().zip(values).enumerate() {
            if !x.is_finite() || x < v.lower - tol || x > v.upper + tol {
                return Err(Infeasibility::Bound { var: VarId(i), value: x });
            }
            if v.kind.is_integral() && (x - x.round()).abs() > tol {
                return Err(Infeasibility::Integrality { var: VarId(i), value: x });
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let viol = c.violation(values);
            if viol > tol * (1.0 + c.rhs.abs()) {
                return Err(Infeasibility::Constraint {
                    index: i,
                    family: c.family,
                    violation: viol,
                });
            }
        }
        Ok(())
    }
}

/// Sorts terms by variable, merges duplicates and drops zeros.
pub fn normalize_terms(mut terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    for (v, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += c,
            _ => out.push((v, c)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Infeasibility {
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("variable {var:?} = {value} violates its bounds")]
    Bound { var: VarId, value: f64 },
    #[error("variable {var:?} = {value} is not integral")]
    Integrality { var: VarId, value: f64 },
    #[error("constraint #{index} ({family}) violated by {violation}")]
    Constraint {
        index: usize,
        family: &'static str,
        violation: f64,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_merges_and_drops() {
        let t = normalize_terms(vec![(VarId(2), 1.0), (VarId(0), 2.0), (VarId(2), -1.0), (VarId(1), 0.5)]);
        assert_eq!(t, vec![(VarId(0), 2.0), (VarId(1), 0.5)]);
    }

    #[test]
    fn relaxation_accepts_fractional_points() {
        let mut m = Model::new();
        let x = m.add_binary("x", 1.0);
        let y = m.add_binary("x", 1.0);
        m.constrain("cover", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 1.0);
        assert!(m.relaxation().check_feasible(&[0.5, 0.5], 1e-9).is_ok());
        assert_eq!(m.relaxation().vars()[1].upper, 1.0);
    }

    #[test]
    fn feasibility_check_reports_constraint_family() {
        let mut m = Model::new();
        let x = m.add_binary("x", 1.0);
        let y = m.add_binary("x", 1.0);
        m.constrain("cover", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 1.0);
        assert!(m.check_feasible(&[1.0, 0.0], 1e-9).is_ok());
        match m.check_feasible(&[0.0, 0.0], 1e-9) {
            Err(Infeasibility::Constraint { family, .. }) => assert_eq!(family, "cover"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            m.check_feasible(&[0.5, 0.5], 1e-9),
            Err(Infeasibility::Integrality { .. })
        ));
    }

    #[test]
    fn integral_objective_detection() {
        let mut m = Model::new();
        m.add_binary("x", 3.0);
        m.add_continuous("b", 0.0, 10.0, 0.0);
        assert!(m.has_integral_objective());
        m.add_continuous("f", 0.0, 10.0, 1.0);
        assert!(!m.has_integral_objective());
    }
}
