use std::time::Duration;

use hhc_milp::{
    BranchAndBound, Constraint, IncumbentDecision, Injection, MicrolpMip, MilpBackend, MilpStatus,
    Model, SearchHooks, Sense, SolveParams, VarId, VarKind,
};
use proptest::prelude::*;

/// Exhaustive minimum over all 0/1 assignments.
fn brute_force(model: &Model) -> Option<f64> {
    let n = model.num_vars();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|i| ((mask >> i) & 1) as f64).collect();
        if model.check_feasible(&x, 1e-9).is_ok() {
            let obj = model.objective_value(&x);
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best
}

fn random_binary_program(
    costs: &[i32],
    rows: &[(Vec<i32>, i32, u8)],
) -> Model {
    let mut m = Model::new();
    let vars: Vec<VarId> = costs.iter().map(|&c| m.add_binary("x", c as f64)).collect();
    for (coefs, rhs, sense) in rows {
        let terms = vars.iter().zip(coefs).map(|(&v, &c)| (v, c as f64)).collect();
        let sense = match sense % 3 {
            0 => Sense::Le,
            1 => Sense::Ge,
            _ => Sense::Eq,
        };
        m.constrain("row", terms, sense, *rhs as f64);
    }
    m
}

fn knapsack() -> Model {
    // max 10a + 13b + 7c + 8d  s.t. 4a + 6b + 3c + 5d <= 10, as a minimization
    let mut m = Model::new();
    let w = [4.0, 6.0, 3.0, 5.0];
    let p = [10.0, 13.0, 7.0, 8.0];
    let vars: Vec<VarId> = p.iter().map(|&pi| m.add_binary("x", -pi)).collect();
    m.constrain(
        "cap",
        vars.iter().zip(w).map(|(&v, wi)| (v, wi)).collect(),
        Sense::Le,
        10.0,
    );
    m
}

#[test]
fn knapsack_optimum() {
    let m = knapsack();
    let expected = brute_force(&m).unwrap();
    assert_eq!(expected, -23.0);
    for backend in [&BranchAndBound::default() as &dyn MilpBackend, &MicrolpMip] {
        let out = backend.solve(&m, &SolveParams::default(), None).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal, "{}", backend.name());
        assert!((out.objective.unwrap() - expected).abs() < 1e-6);
        assert!(m.check_feasible(out.values.as_ref().unwrap(), 1e-6).is_ok());
    }
}

#[test]
fn infeasible_model_is_reported() {
    let mut m = Model::new();
    let x = m.add_binary("x", 1.0);
    let y = m.add_binary("x", 1.0);
    m.constrain("c", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.0);
    for backend in [&BranchAndBound::default() as &dyn MilpBackend, &MicrolpMip] {
        let out = backend.solve(&m, &SolveParams::default(), None).unwrap();
        assert_eq!(out.status, MilpStatus::Infeasible, "{}", backend.name());
    }
}

#[test]
fn integer_variables_and_offset() {
    // min 3z - 2w + 5  s.t. z + w <= 7.5, w - z <= 2.5, z,w integer in [0, 10]
    let mut m = Model::new();
    let z = m.add_var("z", VarKind::Integer, 0.0, 10.0, 3.0);
    let w = m.add_var("w", VarKind::Integer, 0.0, 10.0, -2.0);
    m.constrain("a", vec![(z, 1.0), (w, 1.0)], Sense::Le, 7.5);
    m.constrain("b", vec![(w, 1.0), (z, -1.0)], Sense::Le, 2.5);
    m.set_objective_offset(5.0);
    let out = BranchAndBound::default()
        .solve(&m, &SolveParams::default(), None)
        .unwrap();
    assert_eq!(out.status, MilpStatus::Optimal);
    // w <= z + 2 => best is z=0, w=2: 5 - 4 = 1
    assert!((out.objective.unwrap() - 1.0).abs() < 1e-6);
    assert!((out.bound.unwrap() - 1.0).abs() < 1e-6);
}

struct Injector {
    fractional_calls: usize,
    incumbent_calls: usize,
    inject: Option<Vec<f64>>,
}

impl SearchHooks for Injector {
    fn on_fractional(&mut self, _values: &[f64], _bound: f64) -> Option<Injection> {
        self.fractional_calls += 1;
        self.inject.take().map(|v| Injection {
            objective: 0.0,
            values: Some(v),
        })
    }

    fn on_incumbent(&mut self, _values: &[f64], _objective: f64) -> IncumbentDecision {
        self.incumbent_calls += 1;
        IncumbentDecision::Accept(None)
    }
}

#[test]
fn fractional_hook_injection_counts_as_incumbent() {
    let m = knapsack();
    let mut hooks = Injector {
        fractional_calls: 0,
        incumbent_calls: 0,
        inject: Some(vec![1.0, 1.0, 0.0, 0.0]),
    };
    let params = SolveParams::default().first_solution();
    let out = BranchAndBound::default()
        .solve(&m, &params, Some(&mut hooks))
        .unwrap();
    assert!(hooks.fractional_calls >= 1);
    assert_eq!(out.stats.injections, 1);
    // the injected assignment is re-evaluated, not taken at its claimed value
    assert_eq!(out.objective, Some(-23.0));
    assert_eq!(out.values.unwrap(), vec![1.0, 1.0, 0.0, 0.0]);
}

/// Vetoes every incumbent that uses item 1 by adding `x1 <= 0`.
struct Veto;

impl SearchHooks for Veto {
    fn on_incumbent(&mut self, values: &[f64], _objective: f64) -> IncumbentDecision {
        if values[1] > 0.5 {
            IncumbentDecision::Reject(vec![Constraint::new(
                "veto",
                vec![(VarId(1), 1.0)],
                Sense::Le,
                0.0,
            )])
        } else {
            IncumbentDecision::Accept(None)
        }
    }
}

#[test]
fn rejected_incumbents_add_lazy_cuts() {
    let m = knapsack();
    let out = BranchAndBound::default()
        .solve(&m, &SolveParams::default(), Some(&mut Veto))
        .unwrap();
    let mut restricted = knapsack();
    restricted.set_bounds(VarId(1), 0.0, 0.0);
    let expected = brute_force(&restricted).unwrap();
    assert_eq!(out.status, MilpStatus::Optimal);
    assert_eq!(out.objective, Some(expected));
    assert!(out.values.unwrap()[1] < 0.5);
}

/// Replaces every incumbent by an external improvement known only by value.
struct Improver;

impl SearchHooks for Improver {
    fn on_incumbent(&mut self, _values: &[f64], objective: f64) -> IncumbentDecision {
        IncumbentDecision::Accept(Some(Injection {
            objective: objective - 100.0,
            values: None,
        }))
    }
}

#[test]
fn value_less_injection_acts_as_cutoff() {
    let m = knapsack();
    let out = BranchAndBound::default()
        .solve(&m, &SolveParams::default(), Some(&mut Improver))
        .unwrap();
    let obj = out.objective.unwrap();
    assert!(obj <= -100.0);
    // the stored assignment is the search's own, with its own objective
    let vo = out.values_objective.unwrap();
    assert!(vo > obj);
    assert_eq!(out.status, MilpStatus::Optimal);
}

#[test]
fn cutoff_without_better_solution_yields_infeasible_search() {
    let m = knapsack();
    let params = SolveParams {
        cutoff: Some(-23.0),
        ..SolveParams::default()
    };
    let out = BranchAndBound::default().solve(&m, &params, None).unwrap();
    assert_eq!(out.objective, Some(-23.0));
    assert!(out.values.is_none());
}

#[test]
fn warm_start_is_used_as_incumbent() {
    let m = knapsack();
    let params = SolveParams {
        warm_start: Some(vec![0.0, 0.0, 1.0, 0.0]),
        node_limit: Some(0),
        ..SolveParams::default()
    };
    let out = BranchAndBound::default().solve(&m, &params, None).unwrap();
    assert_eq!(out.status, MilpStatus::Feasible);
    assert_eq!(out.objective, Some(-7.0));
}

#[test]
fn zero_time_limit_never_errors() {
    let m = knapsack();
    let params = SolveParams::default().with_time_limit(Duration::ZERO);
    let out = BranchAndBound::default().solve(&m, &params, None).unwrap();
    assert!(matches!(
        out.status,
        MilpStatus::NoSolution | MilpStatus::Feasible | MilpStatus::Optimal
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matches_enumeration_on_small_binary_programs(
        costs in proptest::collection::vec(-9i32..10, 1..8),
        raw_rows in proptest::collection::vec(
            (proptest::collection::vec(-4i32..5, 8), -6i32..10, 0u8..3), 0..5),
    ) {
        let n = costs.len();
        let rows: Vec<(Vec<i32>, i32, u8)> = raw_rows
            .into_iter()
            .map(|(c, r, s)| (c[..n].to_vec(), r, s))
            .collect();
        let m = random_binary_program(&costs, &rows);
        let expected = brute_force(&m);
        let out = BranchAndBound::default().solve(&m, &SolveParams::default(), None).unwrap();
        match expected {
            None => prop_assert_eq!(out.status, MilpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(out.status, MilpStatus::Optimal);
                prop_assert!((out.objective.unwrap() - best).abs() < 1e-6);
                prop_assert!(m.check_feasible(out.values.as_ref().unwrap(), 1e-6).is_ok());
            }
        }
    }
}
