//! `hhc`: generate scenarios, solve, validate, compare and report.

mod files;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hhc_core::generator::{scenario, scenario_file_name, scenario_grid, BaseInstance, StaffProfile, VisitProfile};
use hhc_core::io::serialize_instance;
use hhc_core::metrics::compare_metrics;
use hhc_core::solve::{batch_solve, SolveConfig, SolveResult, Variant};
use hhc_core::{check_plan, Objective, SolveMode, SplitPolicy};

use crate::files::{input_error, is_input_error, render_csv, to_json, write_atomic};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser)]
#[command(name = "hhc", version, about = "Home healthcare routing and scheduling with task-splitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the ten scenario instances of a base instance.
    Generate(GenerateArgs),
    /// Solve one or more instances.
    Solve(SolveArgs),
    /// Check a plan against an instance.
    Validate(ValidateArgs),
    /// Compare a baseline result with a split result.
    Compare(CompareArgs),
    /// Summary tables over result files.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Base instance JSON; defaults to the shipped 20-visit base.
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// Only scenarios with this visit profile.
    #[arg(long)]
    visit_profile: Option<VisitProfile>,
    /// Only scenarios with this staff profile.
    #[arg(long)]
    staff_profile: Option<StaffProfile>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    /// TI, TI+HTI, TI+HMTZ or MTZ.
    #[arg(long, default_value = "TI+HMTZ")]
    variant: Variant,
    /// Split policy: optimize, forbid or force.
    #[arg(long, default_value = "optimize")]
    mode: SplitPolicy,
    /// Skip the time-indexed graph reductions.
    #[arg(long)]
    raw: bool,
    /// cost or travel.
    #[arg(long, default_value = "cost")]
    objective: Objective,
    /// Wall-clock limit per instance, in seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0.1)]
    heuristic_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// MILP backend (bnb or microlp); overrides HHC_MILP_BACKEND.
    #[arg(long)]
    backend: Option<String>,
    /// Worker threads for several instances.
    #[arg(long)]
    jobs: Option<usize>,
    /// Result file, or a directory when several instances are given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of the text summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    /// Plan file or result file.
    plan: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Result without splitting.
    baseline: PathBuf,
    /// Result with splitting.
    split: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Glob patterns of result files.
    #[arg(required = true)]
    patterns: Vec<String>,
    /// Directory for the CSV tables and summary.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Print summary JSON instead of text tables.
    #[arg(long)]
    json: bool,
}

/// JSON goes to `out` when given; stdout shows either JSON or the text form.
fn emit(out: Option<&Path>, json: &[u8], as_json: bool, text: &str) -> Result<()> {
    if let Some(path) = out {
        write_atomic(path, json)?;
    }
    if as_json {
        print!("{}", String::from_utf8_lossy(json));
    } else {
        print!("{text}");
    }
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<u8> {
    let base = match &args.base {
        Some(path) => BaseInstance::parse(&files::read(path)?)
            .with_context(|| format!("invalid base instance {}", path.display()))
            .map_err(input_error)?,
        None => BaseInstance::shipped(),
    };
    let grid = scenario_grid(args.seed).into_iter().filter(|c| {
        args.visit_profile.is_none_or(|p| p == c.visit_profile) && args.staff_profile.is_none_or(|p| p == c.staff_profile)
    });
    let mut written = 0;
    for cfg in grid {
        let inst = scenario(&base, &cfg);
        inst.validate().with_context(|| format!("generated scenario {} is invalid", cfg.visit_profile))?;
        let path = args.out_dir.join(scenario_file_name(&base, &cfg));
        write_atomic(&path, &serialize_instance(&inst))?;
        println!("{}", path.display());
        written += 1;
    }
    if written == 0 {
        return Err(input_error(anyhow::anyhow!("no scenario matches the profile filters")));
    }
    Ok(EXIT_OK)
}

fn summary_line(path: &Path, r: &SolveResult) -> String {
    let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2}"));
    format!(
        "{}: {} {} status={} objective={} bound={} gap={} time={:.2}s\n",
        path.display(),
        r.variant,
        r.split_policy,
        r.status,
        f(r.objective),
        f(r.bound),
        r.gap.map_or("-".to_string(), |g| format!("{:.2}%", 100.0 * g)),
        r.stats.elapsed_seconds
    )
}

fn solve(args: &SolveArgs) -> Result<u8> {
    if !(args.time_limit > 0.0 && args.time_limit.is_finite()) {
        return Err(input_error(anyhow::anyhow!("--time-limit must be positive")));
    }
    if !(0.0..=1.0).contains(&args.heuristic_fraction) {
        return Err(input_error(anyhow::anyhow!("--heuristic-fraction must lie in [0, 1]")));
    }
    if let Some(name) = &args.backend {
        hhc_milp::backend_by_name(name).map_err(input_error)?;
    }
    let instances = args.instances.iter().map(|p| files::read_instance(p)).collect::<Result<Vec<_>>>()?;
    let mode = SolveMode { split_policy: args.mode, objective: args.objective, preprocessed: !args.raw };
    let cfg = SolveConfig {
        heuristic_fraction: args.heuristic_fraction,
        backend: args.backend.clone(),
        seed: args.seed,
        ..SolveConfig::new(args.variant, mode).with_wall_limit(Duration::from_secs_f64(args.time_limit))
    };
    let results = batch_solve(&instances, &cfg, args.jobs);
    if results.len() == 1 {
        let r = &results[0];
        emit(args.out.as_deref(), &r.to_json(), args.json, &summary_line(&args.instances[0], r))?;
    } else {
        for (path, r) in args.instances.iter().zip(&results) {
            if let Some(dir) = &args.out {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
                write_atomic(&dir.join(format!("{stem}.result.json")), &r.to_json())?;
            }
            if args.json {
                print!("{}", String::from_utf8_lossy(&r.to_json()));
            } else {
                print!("{}", summary_line(path, r));
            }
        }
    }
    for r in &results {
        if let Some(e) = &r.error {
            log::error!("{e}");
        }
    }
    Ok(results.iter().map(|r| r.status.exit_code() as u8).max().unwrap_or(EXIT_OK))
}

fn validate(args: &ValidateArgs) -> Result<u8> {
    let instance = files::read_instance(&args.instance)?;
    let plan = files::read_plan(&args.plan)?;
    let report = check_plan(&plan, &instance);
    let json = to_json(&serde_json::json!({ "ok": report.is_ok(), "violations": report.violations }));
    emit(args.out.as_deref(), &json, args.json, &report.to_string())?;
    Ok(if report.is_ok() { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.2}"))
}

fn compare(args: &CompareArgs) -> Result<u8> {
    let baseline = files::read_result(&args.baseline)?;
    let split = files::read_result(&args.split)?;
    let c = compare_metrics(baseline.metrics.as_ref(), split.metrics.as_ref());
    let rows = [
        ("cost", opt(c.baseline_cost), opt(c.split_cost), opt(c.cost_decrease)),
        (
            "travel time",
            opt(baseline.travel_time.map(|t| t as f64)),
            opt(split.travel_time.map(|t| t as f64)),
            opt(c.travel_decrease),
        ),
        (
            "caregivers",
            baseline.metrics.as_ref().map_or("-".into(), |m| m.caregivers_used.to_string()),
            split.metrics.as_ref().map_or("-".into(), |m| m.caregivers_used.to_string()),
            c.caregivers_saved.map_or("-".into(), |s| s.to_string()),
        ),
        ("care share %", opt(c.baseline_care_share), opt(c.split_care_share), "-".into()),
        ("utilized splits %", "-".into(), opt(c.utilized_splits), "-".into()),
    ];
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "baseline", "split", "decrease"])?;
    for (name, b, s, d) in &rows {
        w.write_record([*name, b.as_str(), s.as_str(), d.as_str()])?;
    }
    let text = render_csv(&w.into_inner()?);
    emit(args.out.as_deref(), &to_json(&c), args.json, &text)?;
    Ok(EXIT_OK)
}

fn run_report(args: &ReportArgs) -> Result<u8> {
    let mut paths = Vec::new();
    for pattern in &args.patterns {
        let matches = glob::glob(pattern).with_context(|| format!("bad pattern {pattern}")).map_err(input_error)?;
        for entry in matches {
            paths.push(entry.map_err(input_error)?);
        }
    }
    paths.sort();
    paths.dedup();
    if paths.is_empty() {
        bail!(input_error(anyhow::anyhow!("no result files match {:?}", args.patterns)));
    }
    let results = paths
        .iter()
        .map(|p| Ok((p.display().to_string(), files::read_result(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let report = report::build(&results);
    let tables = report.tables()?;
    if let Some(dir) = &args.out_dir {
        for (name, body) in &tables {
            write_atomic(&dir.join(format!("{name}.csv")), body)?;
        }
        write_atomic(&dir.join("summary.json"), &to_json(&report))?;
    }
    if args.json {
        print!("{}", String::from_utf8_lossy(&to_json(&report)));
    } else {
        for (name, body) in &tables {
            println!("== {name} (schema v{})", report::SCHEMA_VERSION);
            print!("{}", render_csv(body));
            println!();
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    let outcome = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Validate(a) => validate(a),
        Command::Compare(a) => compare(a),
        Command::Report(a) => run_report(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_input_error(&err) { EXIT_INPUT } else { EXIT_INTERNAL })
        }
    }
}
