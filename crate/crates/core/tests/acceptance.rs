//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use hhc_core::fixtures::{i1, jitter_plan, split_benefit};
use hhc_core::formulation::{plan_value, Formulation};
use hhc_core::generator::{
    generate_scenario, scenario, scenario_grid, synthesize_splits, BaseInstance, BaseVisit, ScenarioConfig, StaffProfile,
    VisitProfile,
};
use hhc_core::heuristics::{improve_timing, mtz_primal_heuristic, ti_primal_heuristic, HeuristicBudget};
use hhc_core::model::Route;
use hhc_core::oracle::{brute_force_optimal, OracleOutcome};
use hhc_core::preprocess::{induced_dependency_table, preprocess, PreprocessResult};
use hhc_core::solve::{solve, SolveConfig, SolveResult, SolveStatus, Variant};
use hhc_core::ti_model::build_ti_model;
use hhc_core::timing::retime;
use hhc_core::{
    check_plan, plan_cost, plan_travel_time, Instance, Objective, Plan, QualSet, SolveMode, SplitPolicy, SyncType,
    ViolationClass, VisitKind,
};
use hhc_milp::{BranchAndBound, MilpBackend, MilpStatus, SolveParams};
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Guard-rail candidates generated for criteria 1, 2, 4, 5, 8 and 9.
const CANDIDATES: usize = 72;
const MIN_FEASIBLE: usize = 25;
const ORACLE_RUNTIME_LIMIT: Duration = Duration::from_secs(600);
const TABLE_CASES: usize = 1000;
const TABLE_HORIZON: i64 = 12;
const HEURISTIC_INCUMBENTS: usize = 100;
const GENERATOR_DRAWS: u64 = 10_000;
const FREQUENCY_TOLERANCE: f64 = 0.02;
const SCALED_SEEDS: std::ops::Range<u64> = 0..4;
const SCALED_WALL: Duration = Duration::from_secs(60);
const TIE_RELATIVE: f64 = 0.10;
const TIE_ABSOLUTE: f64 = 0.10;
const TRAVEL_CASES: usize = 15;
const EPS: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

struct Case {
    instance: Instance,
    kind: SyncType,
    oracle: Option<(Rational64, Plan)>,
}

fn oracle(instance: &Instance, objective: Objective, policy: SplitPolicy) -> Option<(Rational64, Plan)> {
    match brute_force_optimal(instance, objective, policy) {
        OracleOutcome::Optimal { value, plan } => Some((value, plan)),
        OracleOutcome::Infeasible => None,
        OracleOutcome::TooLarge(m) => panic!("guard rails exceeded: {m}"),
    }
}

fn config(variant: Variant, mode: SolveMode) -> SolveConfig {
    SolveConfig { backend: Some("bnb".into()), ..SolveConfig::new(variant, mode).with_wall_limit(Duration::from_secs(120)) }
}

fn exact_cost(r: &SolveResult, instance: &Instance) -> Option<Rational64> {
    r.plan.as_ref().and_then(|p| plan_cost(p, instance).ok())
}

/// Optimal exact cost, `None` for a proven infeasible instance, and an error
/// message for anything else.
fn proven(r: &SolveResult, instance: &Instance) -> Result<Option<Rational64>, String> {
    match r.status {
        SolveStatus::Optimal => exact_cost(r, instance).map(Some).ok_or_else(|| "optimal without plan".into()),
        SolveStatus::Infeasible => Ok(None),
        s => Err(format!("status {s} {:?}", r.error)),
    }
}

fn show(v: Option<Rational64>) -> String {
    v.map_or("infeasible".into(), |x| x.to_string())
}

fn criterion_1_and_2(cases: &[Case]) -> (Verdict, Verdict) {
    let start = Instant::now();
    let runs = hhc_core::par::map(cases, |c| {
        let ti = solve(&c.instance, &config(Variant::Ti, SolveMode::default()));
        let raw = solve(&c.instance, &config(Variant::Ti, SolveMode::raw()));
        let mtz = solve(&c.instance, &config(Variant::Mtz, SolveMode::default()));
        (proven(&ti, &c.instance), proven(&raw, &c.instance), proven(&mtz, &c.instance))
    });
    let elapsed = start.elapsed();
    let mut mismatches_1 = Vec::new();
    let mut mismatches_2 = Vec::new();
    for (i, (c, (ti, raw, mtz))) in cases.iter().zip(&runs).enumerate() {
        let expected = c.oracle.as_ref().map(|o| o.0);
        match (ti, mtz) {
            (Ok(a), Ok(b)) if *a == expected && *b == expected => {}
            _ => mismatches_1.push(format!("#{i}: oracle {} TI {ti:?} MTZ {mtz:?}", show(expected))),
        }
        match (ti, raw) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => mismatches_2.push(format!("#{i}: preprocessed {ti:?} raw {raw:?}")),
        }
    }
    let feasible: Vec<&Case> = cases.iter().filter(|c| c.oracle.is_some()).collect();
    let kinds: BTreeSet<SyncType> = feasible.iter().map(|c| c.kind).collect();
    let with_split = feasible.iter().filter(|c| !c.instance.splittable().is_empty()).count();
    let max_visits = cases.iter().map(|c| c.instance.n()).max().unwrap_or(0);
    let pass_1 = mismatches_1.is_empty()
        && feasible.len() >= MIN_FEASIBLE
        && kinds.len() == SyncType::ALL.len()
        && with_split > 0
        && with_split < feasible.len()
        && max_visits <= 6
        && elapsed < ORACLE_RUNTIME_LIMIT;
    let d1 = format!(
        "{} instances ({} feasible, {} with splittable visits, {} of {} sync types, <= {} visits), {} mismatches, {:.1}s{}",
        cases.len(),
        feasible.len(),
        with_split,
        kinds.len(),
        SyncType::ALL.len(),
        max_visits,
        mismatches_1.len(),
        elapsed.as_secs_f64(),
        first(&mismatches_1)
    );
    let d2 = format!("{} instances, {} mismatches{}", cases.len(), mismatches_2.len(), first(&mismatches_2));
    (verdict(pass_1, d1), verdict(mismatches_2.is_empty(), d2))
}

fn first(list: &[String]) -> String {
    list.first().map(|m| format!("; first: {m}")).unwrap_or_default()
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = TABLE_HORIZON;
    let mut bad = Vec::new();
    for _ in 0..TABLE_CASES {
        let (quv, qvw) = (common::random_quad(&mut rng, t), common::random_quad(&mut rng, t));
        for case in induced_dependency_table(quv, qvw, t) {
            let diff = common::row_mismatches(quv, qvw, &case, t);
            if !diff.is_empty() {
                bad.push(format!("{quv:?} {qvw:?} ({},{}) at {diff:?}", case.p_uv as u8, case.p_vw as u8));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("{TABLE_CASES} quadruple pairs x 4 rows on T={t}, {} mismatching rows{}", bad.len(), first(&bad)),
    )
}

fn criterion_4(cases: &[Case]) -> Verdict {
    let mode = SolveMode::default();
    let runs = hhc_core::par::map(cases, |c| {
        let inst = &c.instance;
        let get = |p| proven(&solve(inst, &config(Variant::Ti, mode.with_split(p))), inst);
        (get(SplitPolicy::Optimize), get(SplitPolicy::Forbid), get(SplitPolicy::Force))
    });
    let mut violations = Vec::new();
    let mut checked = 0;
    let inf = |v: &Option<Rational64>| v.unwrap_or(Rational64::from_integer(i64::MAX));
    for (i, run) in runs.iter().enumerate() {
        match run {
            (Ok(opt), Ok(none), Ok(all)) => {
                checked += 1;
                if inf(opt) > inf(none).min(inf(all)) {
                    violations.push(format!("#{i}: optimize {} forbid {} force {}", show(*opt), show(*none), show(*all)));
                }
            }
            other => violations.push(format!("#{i}: not solved to optimality {other:?}")),
        }
    }
    let inst = split_benefit();
    let with = solve(&inst, &config(Variant::Ti, mode));
    let without = solve(&inst, &config(Variant::Ti, mode.with_split(SplitPolicy::Forbid)));
    let crew = |r: &SolveResult| r.plan.as_ref().map_or(0, |p| p.caregivers_used());
    let (cw, cn) = (exact_cost(&with, &inst), exact_cost(&without, &inst));
    let phenomenon = with.is_optimal() && without.is_optimal() && (cw < cn || crew(&with) < crew(&without));
    verdict(
        violations.is_empty() && phenomenon,
        format!(
            "{checked} instances dominated, {} violations; split fixture: cost {} vs {}, caregivers {} vs {}{}",
            violations.len(),
            show(cw),
            show(cn),
            crew(&with),
            crew(&without),
            first(&violations)
        ),
    )
}

fn relaxation(model: &hhc_milp::Model) -> Option<Vec<f64>> {
    let out = BranchAndBound::default().solve(&model.relaxation(), &SolveParams::default(), None).ok()?;
    (out.status == MilpStatus::Optimal).then_some(out.values?)
}

fn criterion_5(cases: &[Case]) -> Verdict {
    let feasible: Vec<&Case> = cases.iter().filter(|c| c.oracle.is_some()).collect();
    // Direct calls on root relaxations.
    let direct = hhc_core::par::map(&feasible, |c| {
        let inst = &c.instance;
        let mut emitted = 0;
        let mut failures = Vec::new();
        for mode in [SolveMode::default(), SolveMode::raw()] {
            let pre = if mode.preprocessed { preprocess(inst) } else { PreprocessResult::raw(inst) };
            let ti = build_ti_model(inst, &pre, mode);
            let Some(values) = relaxation(ti.model()) else { continue };
            let budget = HeuristicBudget::unlimited();
            let plans = [
                ("ti_primal_heuristic", ti_primal_heuristic(&values, &ti, inst, &budget)),
                ("mtz_primal_heuristic", mtz_primal_heuristic(&values, &ti, inst, &budget)),
            ];
            for (name, plan) in plans {
                if let Some(plan) = plan {
                    emitted += 1;
                    let report = check_plan(&plan, inst);
                    if !report.is_ok() {
                        failures.push(format!("{name}: {:?}", report.classes()));
                    }
                }
            }
        }
        (emitted, failures)
    });
    // Heuristics inside full solves; the guard counts every rejected plan.
    let inside = hhc_core::par::map(&feasible, |c| {
        [Variant::TiHti, Variant::TiHmtz].map(|v| {
            let r = solve(&c.instance, &config(v, SolveMode::default()));
            (r.stats.heuristic_successes + r.stats.improvement_calls, r.stats.verifier_rejections)
        })
    });
    let mut emitted: usize = direct.iter().map(|d| d.0).sum();
    let mut failures: Vec<String> = direct.into_iter().flat_map(|d| d.1).collect();
    for runs in inside {
        for (n, rejected) in runs {
            emitted += n as usize;
            if rejected > 0 {
                failures.push(format!("{rejected} heuristic plans rejected inside a solve"));
            }
        }
    }

    let mut monotone = 0;
    let mut idempotent = 0;
    let mut improved = 0;
    for k in 0..HEURISTIC_INCUMBENTS {
        let c = feasible[k % feasible.len()];
        let inst = &c.instance;
        let plan = &c.oracle.as_ref().expect("feasible").1;
        let incumbent = jitter_plan(plan, inst, k as u64, 60);
        let budget = HeuristicBudget::unlimited();
        let once = improve_timing(&incumbent, inst, Objective::Cost, &budget);
        let twice = improve_timing(&once, inst, Objective::Cost, &budget);
        emitted += 2;
        for p in [&once, &twice] {
            let report = check_plan(p, inst);
            if !report.is_ok() {
                failures.push(format!("improve_timing: {:?}", report.classes()));
            }
        }
        let v0 = plan_value(&incumbent, inst, Objective::Cost);
        let v1 = plan_value(&once, inst, Objective::Cost);
        let v2 = plan_value(&twice, inst, Objective::Cost);
        monotone += usize::from(v1 <= v0 + EPS);
        idempotent += usize::from((v2 - v1).abs() <= EPS);
        improved += usize::from(v1 < v0 - EPS);
    }
    verdict(
        failures.is_empty() && monotone == HEURISTIC_INCUMBENTS && idempotent == HEURISTIC_INCUMBENTS && emitted > 0,
        format!(
            "{emitted} heuristic plans checked, {} rejected; improve_timing on {HEURISTIC_INCUMBENTS} incumbents: {monotone} monotone, {idempotent} idempotent, {improved} improved{}",
            failures.len(),
            first(&failures)
        ),
    )
}

fn criterion_6() -> Verdict {
    let base = BaseInstance {
        name: None,
        horizon: 540,
        caregivers: 1,
        visits: vec![BaseVisit { id: 1, duration: 90, window: [0, 30] }],
        travel: vec![vec![0; 3]; 3],
        sync_pairs: vec![],
    };
    let cfg = ScenarioConfig { visit_profile: VisitProfile::Medical, staff_profile: StaffProfile::Medical, seed: 0 };
    let plain = generate_scenario(&base, &cfg);
    let t = plain.horizon;
    let mut combined: BTreeMap<i64, u64> = BTreeMap::new();
    let (mut qual, mut window) = (0u64, 0u64);
    let mut dependency = [0u64; 3];
    let mut short_parts = 0;
    for seed in 0..GENERATOR_DRAWS {
        let inst = synthesize_splits(&plain, seed);
        let (p1, p2) = (inst.visit(2), inst.visit(3));
        *combined.entry(p1.duration + p2.duration).or_default() += 1;
        short_parts += usize::from(p1.duration < 30 || p2.duration < 30);
        qual += u64::from([p1, p2].iter().any(|p| p.quals == QualSet::at_least(1, 3)));
        window += u64::from([p1, p2].iter().any(|p| p.window.1 > 30));
        let kind = match inst.dependency(2, 3) {
            None => 0,
            Some(d) if d.dmin_vu >= t => 1,
            Some(_) => 2,
        };
        dependency[kind] += 1;
    }
    let share = |x: u64| x as f64 / GENERATOR_DRAWS as f64;
    let mut checks: Vec<(String, f64, f64)> = Vec::new();
    for d in [75, 90, 105] {
        checks.push((format!("duration {d}"), share(combined.get(&d).copied().unwrap_or(0)), 1.0 / 3.0));
    }
    checks.push(("qualification relaxed".into(), share(qual), 0.75));
    checks.push(("window relaxed".into(), share(window), 0.75));
    for (name, n) in ["no dependency", "precedence", "disjunction"].iter().zip(dependency) {
        checks.push(((*name).into(), share(n), 1.0 / 3.0));
    }
    let off: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > FREQUENCY_TOLERANCE)
        .map(|(n, got, want)| format!("{n} {got:.4} vs {want:.4}"))
        .collect();

    // Structural rules on the shipped base and on random durations.
    let mut rule_breaks = 0;
    let mut instances = Vec::new();
    for seed in 0..20 {
        for cfg in scenario_grid(seed) {
            instances.push(scenario(&BaseInstance::shipped(), &cfg));
        }
        let mut b = BaseInstance::shipped();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut b.visits {
            v.duration = rand::Rng::random_range(&mut rng, 20..=150);
            v.window = [0, 20];
        }
        instances.push(scenario(&b, &ScenarioConfig { seed, ..scenario_grid(seed)[0] }));
    }
    for inst in &instances {
        for v in &inst.visits {
            match v.kind {
                VisitKind::Unsplittable if v.duration >= 60 => rule_breaks += 1,
                VisitKind::Splittable if v.duration < 60 => rule_breaks += 1,
                VisitKind::SplitPart { .. } if v.duration < 30 => rule_breaks += 1,
                _ => {}
            }
        }
        rule_breaks += usize::from(inst.validate().is_err());
    }
    let summary: Vec<String> = checks.iter().map(|(n, got, _)| format!("{n} {got:.3}")).collect();
    verdict(
        off.is_empty() && rule_breaks == 0 && short_parts == 0,
        format!(
            "{GENERATOR_DRAWS} draws: {}; {} instances checked, {rule_breaks} splittability/part-length breaks{}",
            summary.join(", "),
            instances.len(),
            first(&off)
        ),
    )
}

fn criterion_7() -> Verdict {
    let base = BaseInstance::shipped();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for seed in SCALED_SEEDS {
        for cfg in scenario_grid(seed) {
            let inst = scenario(&base, &cfg);
            let run = |v| {
                let c = SolveConfig { backend: Some("bnb".into()), ..SolveConfig::new(v, SolveMode::default()) };
                solve(&inst, &c.with_wall_limit(SCALED_WALL))
            };
            let ti = run(Variant::Ti);
            if ti.status == SolveStatus::Infeasible {
                continue;
            }
            let hm = run(Variant::TiHmtz);
            let (a, b) = (ti.stats.first_solution_seconds, hm.stats.first_solution_seconds);
            let ok = match (a, b) {
                (Some(a), Some(b)) => b <= a * (1.0 + TIE_RELATIVE) + TIE_ABSOLUTE,
                (None, _) => true,
                (Some(_), None) => false,
            };
            let fmt = |x: Option<f64>| x.map_or("-".to_string(), |s| format!("{s:.2}"));
            let name = inst.meta.name.clone().unwrap_or_default();
            rows.push(format!("    {name:<36} s{seed}  TI {:>7}  TI+HMTZ {:>7}  ({} / {})", fmt(a), fmt(b), ti.status, hm.status));
            if !ok {
                failures.push(name);
            }
        }
    }
    println!("    first-solution seconds, 20-visit scenarios, {}s wall limit", SCALED_WALL.as_secs());
    for r in &rows {
        println!("{r}");
    }
    verdict(
        failures.is_empty() && !rows.is_empty(),
        format!("{} feasible scenarios, {} where TI+HMTZ was later than TI{}", rows.len(), failures.len(), first(&failures)),
    )
}

fn criterion_8(cases: &[Case]) -> Verdict {
    let mut instances = vec![i1()];
    instances.extend(cases.iter().filter(|c| c.oracle.is_some()).take(TRAVEL_CASES).map(|c| c.instance.clone()));
    let mode = SolveMode::default().with_objective(Objective::Travel);
    let runs = hhc_core::par::map(&instances, |inst| {
        let expected = oracle(inst, Objective::Travel, SplitPolicy::Optimize);
        let mut problems = Vec::new();
        if let Some((_, plan)) = &expected {
            if let Some(re) = retime(inst, plan) {
                if plan_travel_time(&re, inst).ok() != plan_travel_time(plan, inst).ok() {
                    problems.push("retime changed travel time of the oracle plan".to_string());
                }
            }
        }
        for variant in [Variant::Ti, Variant::Mtz] {
            let r = solve(inst, &config(variant, mode));
            let got = r.plan.as_ref().and_then(|p| plan_travel_time(p, inst).ok());
            let want = expected.as_ref().map(|(v, _)| v.to_integer());
            let status_ok = if want.is_some() { r.is_optimal() } else { r.status == SolveStatus::Infeasible };
            if !status_ok || got != want {
                problems.push(format!("{variant}: {} travel {got:?}, oracle {want:?}", r.status));
            }
            if r.objective.map(|o| o.round() as i64) != got {
                problems.push(format!("{variant}: reported objective {:?} differs from plan travel {got:?}", r.objective));
            }
        }
        problems
    });
    let problems: Vec<String> = runs.into_iter().flatten().collect();
    let i1_ok = oracle(&i1(), Objective::Travel, SplitPolicy::Optimize).map(|o| o.0) == Some(Rational64::from_integer(10));
    verdict(
        problems.is_empty() && i1_ok,
        format!("{} instances (I1 travel optimum 10: {i1_ok}), {} problems{}", instances.len(), problems.len(), first(&problems)),
    )
}

/// Candidate single edits of a plan, tagged with the class they aim at.
fn mutations(plan: &Plan, inst: &Instance) -> Vec<(ViolationClass, Plan)> {
    let mut out = Vec::new();
    let ready = |r: &Route, k: usize| {
        let (a, b) = (&r.stops[k - 1], &r.stops[k]);
        a.start + inst.visit(a.visit).duration + inst.travel(a.visit, b.visit)
    };
    for (ri, route) in plan.routes.iter().enumerate() {
        for (si, stop) in route.stops.iter().enumerate() {
            let visit = inst.visit(stop.visit);
            if visit.kind == VisitKind::Unsplittable {
                let mut p = plan.clone();
                p.routes[ri].stops.remove(si);
                out.push((ViolationClass::Cover, p));
            }
            for start in [visit.window.1 + 1, visit.window.0 - 1] {
                let mut p = plan.clone();
                p.routes[ri].stops[si].start = start;
                out.push((ViolationClass::Window, p));
            }
            for shift in (-15..=15).filter(|&s| s != 0) {
                let mut p = plan.clone();
                p.routes[ri].stops[si].start += shift;
                out.push((ViolationClass::DependencyBand, p));
            }
            if si > 0 {
                let mut p = plan.clone();
                p.routes[ri].stops[si].start = ready(route, si) - 1;
                out.push((ViolationClass::Timing, p));
            }
        }
        for &level in inst.caregivers.keys() {
            if level != route.qual {
                let mut p = plan.clone();
                p.routes[ri].qual = level;
                out.push((ViolationClass::Qualification, p));
            }
        }
        for l in 1..=3u8 {
            let mut p = plan.clone();
            p.routes.push(Route { qual: l, stops: vec![] });
            if let Some(stop) = p.routes[ri].stops.pop() {
                let last = p.routes.len() - 1;
                p.routes[last].stops.push(stop);
                out.push((ViolationClass::CaregiverCount, p));
            }
        }
    }
    for (&v, &split) in &plan.splits {
        let mut p = plan.clone();
        p.splits.insert(v, !split);
        out.push((ViolationClass::SplitConsistency, p));
        if let (true, Some((a, b))) = (split, inst.parts_of(v)) {
            for (x, y) in [(a, b), (b, a)] {
                let mut p = plan.clone();
                let Some(y_stop) = p.routes.iter_mut().find_map(|r| {
                    let k = r.stops.iter().position(|s| s.visit == y)?;
                    Some(r.stops.remove(k))
                }) else {
                    continue;
                };
                for r in &mut p.routes {
                    if let Some(k) = r.stops.iter().position(|s| s.visit == x) {
                        let ready = r.stops[k].start + inst.visit(x).duration;
                        let start = ready.max(inst.visit(y).window.0);
                        r.stops.insert(k + 1, hhc_core::Stop { visit: y, start: start.max(y_stop.start) });
                        break;
                    }
                }
                out.push((ViolationClass::ConsecutiveSplitParts, p));
            }
        }
    }
    out
}

fn criterion_9(cases: &[Case]) -> Verdict {
    let targets = [
        ViolationClass::Cover,
        ViolationClass::SplitConsistency,
        ViolationClass::Qualification,
        ViolationClass::Window,
        ViolationClass::Timing,
        ViolationClass::DependencyBand,
        ViolationClass::CaregiverCount,
        ViolationClass::ConsecutiveSplitParts,
    ];
    let mut plans: Vec<(Instance, Plan)> = Vec::new();
    let sb = split_benefit();
    if let Some((_, p)) = oracle(&sb, Objective::Cost, SplitPolicy::Optimize) {
        plans.push((sb, p));
    }
    plans.extend(cases.iter().filter_map(|c| Some((c.instance.clone(), c.oracle.as_ref()?.1.clone()))));
    let mut detected: BTreeMap<ViolationClass, usize> = BTreeMap::new();
    let mut clean_bases = 0;
    for (inst, plan) in &plans {
        if !check_plan(plan, inst).is_ok() {
            continue;
        }
        clean_bases += 1;
        for (class, mutated) in mutations(plan, inst) {
            if check_plan(&mutated, inst).classes() == BTreeSet::from([class]) {
                *detected.entry(class).or_default() += 1;
            }
        }
    }
    let missing: Vec<String> = targets.iter().filter(|c| !detected.contains_key(c)).map(|c| c.to_string()).collect();
    let counts: Vec<String> = targets.iter().map(|c| format!("{c} {}", detected.get(c).copied().unwrap_or(0))).collect();
    verdict(
        missing.is_empty() && clean_bases == plans.len(),
        format!(
            "{}/{} classes isolated over {clean_bases} oracle plans ({}){}",
            targets.len() - missing.len(),
            targets.len(),
            counts.join(", "),
            missing.first().map(|m| format!("; missing {m}")).unwrap_or_default()
        ),
    )
}

fn main() {
    let started = Instant::now();
    let candidates = common::guard_rail_candidates(CANDIDATES);
    let cases: Vec<Case> = hhc_core::par::map(&candidates, |(inst, kind)| Case {
        instance: inst.clone(),
        kind: *kind,
        oracle: oracle(inst, Objective::Cost, SplitPolicy::Optimize),
    });

    let mut results: Vec<(u8, &str, Verdict)> = Vec::new();
    let (c1, c2) = criterion_1_and_2(&cases);
    results.push((1, "oracle equivalence", c1));
    results.push((2, "preprocessing preserves optimum", c2));
    results.push((3, "induced dependency table", criterion_3()));
    results.push((4, "split dominance", criterion_4(&cases)));
    results.push((5, "heuristic soundness", criterion_5(&cases)));
    results.push((6, "generator distributions", criterion_6()));
    results.push((7, "scaled first-solution comparison", criterion_7()));
    results.push((8, "travel-time objective", criterion_8(&cases)));
    results.push((9, "verifier mutation classes", criterion_9(&cases)));

    let mut failed = 0;
    for (id, name, v) in &results {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!("criterion {id} [{tag}] {name}: {}", v.detail);
    }
    println!("acceptance: {}/{} passed in {:.1}s", results.len() - failed, results.len(), started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
