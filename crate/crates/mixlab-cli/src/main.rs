//! Batch front-end: load problem specs, dispatch analyses, emit CSV/JSON.
//!
//! Exit codes: 0 success, 1 validation error (bad flags, malformed specs,
//! violated preconditions), 2 infeasible or diagnostic outcome (infeasible
//! moment instance, non-unique minimizer, failed bound prerequisite).

mod output;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mixlab_core::diagnostics::diagnose;
use mixlab_core::erm::{
    bound_violation_rate, simulate, BoundKind, ErmError, RateFit, SimConfig, TieBreak,
};
use mixlab_core::mixability::{
    bernstein_constant, check_weak_mixability, eta_star, EtaResult, MixabilityError,
};
use mixlab_core::moment::{
    dual_certificate, grid_lp_solve, verify_certificate, LpStatus, MomentError, MomentInstance,
    Sense,
};
use mixlab_core::problem::LearningProblem;

use output::{json_num, num, Format, Sink};

#[derive(Parser)]
#[command(name = "mixlab", version, about = "Stochastic mixability, moment-problem, and ERM rate toolkit", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Stochastic mixability analyses.
    #[command(subcommand)]
    Mix(MixCommand),
    /// Moment-problem LP and dual certificates.
    #[command(subcommand)]
    Moment(MomentCommand),
    /// Monte Carlo ERM studies.
    #[command(subcommand)]
    Erm(ErmCommand),
    /// Closed-form bound evaluators.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Effective-convexity diagnostic over an ε grid.
    Diagnose(DiagnoseArgs),
}

#[derive(Subcommand)]
enum MixCommand {
    /// Per-hypothesis mixability roots and the class constant η*.
    Eta(ProblemArg),
    /// (κ, η₀)-weak stochastic mixability check.
    Weak(WeakArgs),
    /// Bernstein constant B at exponent β.
    Bernstein(BernsteinArgs),
}

#[derive(Args)]
struct ProblemArg {
    /// Problem spec (JSON).
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Args)]
struct WeakArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    eta0: f64,
}

#[derive(Args)]
struct BernsteinArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    beta: f64,
}

#[derive(Subcommand)]
enum MomentCommand {
    /// Solve the grid-discretized moment problem.
    Solve(MomentSolveArgs),
    /// Emit and verify the closed-form dual certificate at η.
    Certify(MomentCertifyArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct MomentSolveArgs {
    #[arg(long)]
    eta: f64,
    /// Target mean (−a/n in the concentration application).
    #[arg(long)]
    mean: f64,
    /// Support bound V (capped at 100).
    #[arg(long, default_value_t = 1.0)]
    support: f64,
    /// Grid size (points, both endpoints included).
    #[arg(long, default_value_t = 2001)]
    grid: usize,
    /// Objective sense: max (exponential moment) or min (its negation).
    #[arg(long, default_value = "max", value_parser = parse_sense)]
    sense: Sense,
}

#[derive(Args)]
struct MomentCertifyArgs {
    #[arg(long)]
    eta: f64,
    /// Verification grid on [−1, 1].
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
}

#[derive(Subcommand)]
enum ErmCommand {
    /// Replicated ERM excess-risk statistics with a log-log rate fit.
    Simulate(SimulateArgs),
    /// Frequency of excess-risk bound violations.
    Violations(ViolationsArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Comma-separated strictly increasing sample sizes.
    #[arg(long = "n-list", value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Master seed (default: MIXLAB_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "first_by_name", value_parser = parse_tiebreak)]
    tiebreak: TieBreak,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Fixed ε for the ε-good rate (default: finite-class bound at δ = 0.05).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Worker threads; results are independent of this value.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ViolationsArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Bound to test: finite_thm4 or weak_cor1.
    #[arg(long)]
    bound: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// κ for weak_cor1.
    #[arg(long)]
    kappa: Option<f64>,
    /// η₀ for weak_cor1.
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "first_by_name", value_parser = parse_tiebreak)]
    tiebreak: TieBreak,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Finite-class excess-risk bound.
    Finite(FiniteArgs),
    /// Weak-mixability bound.
    Weak(WeakBoundArgs),
    /// Parametric (covering-number) class bound with branch report.
    Vc(VcArgs),
    /// Localization term.
    Local(LocalArgs),
}

#[derive(Args)]
struct FiniteArgs {
    #[arg(long = "V")]
    v: f64,
    #[arg(long = "eta-star")]
    eta_star: f64,
    #[arg(long = "N")]
    n_class: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct WeakBoundArgs {
    #[arg(long = "V", default_value_t = 1.0)]
    v: f64,
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    eta0: f64,
    #[arg(long = "N")]
    n_class: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct VcArgs {
    #[arg(long = "V")]
    v: f64,
    #[arg(long = "eta-star")]
    eta_star: f64,
    #[arg(long = "C")]
    c: f64,
    #[arg(long = "K")]
    k: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct LocalArgs {
    #[arg(long = "C")]
    c: f64,
    #[arg(long = "K")]
    k: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    n: usize,
    #[arg(long = "V")]
    v: f64,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Comma-separated positive ε values.
    #[arg(long = "eps-list", value_delimiter = ',', required = true)]
    eps_list: Vec<f64>,
}

fn parse_tiebreak(s: &str) -> Result<TieBreak, String> {
    match s {
        "first_by_name" => Ok(TieBreak::FirstByName),
        "lowest_risk" => Ok(TieBreak::LowestRisk),
        other => Err(format!("unknown tiebreak `{other}` (expected first_by_name or lowest_risk)")),
    }
}

fn parse_sense(s: &str) -> Result<Sense, String> {
    match s {
        "max" => Ok(Sense::MaxMgf),
        "min" => Ok(Sense::MinH),
        other => Err(format!("unknown sense `{other}` (expected max or min)")),
    }
}

/// Loss-bound cap for problems and instances accepted on the command line.
const SUPPORT_CAP: f64 = 100.0;
/// Largest grid a CLI invocation may request.
const GRID_CAP: usize = 1_000_001;

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2 on usage errors; the contract here is 1 for
            // every validation failure.
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            classify(&err)
        }
    }
}

fn classify(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<MixabilityError>() {
            return match e {
                MixabilityError::NonUniqueMinimizer { .. }
                | MixabilityError::UnboundedBernstein { .. } => 2,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<ErmError>() {
            return match e {
                ErmError::Prerequisite { .. } => 2,
                ErmError::Mixability(MixabilityError::NonUniqueMinimizer { .. }) => 2,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<MomentError>() {
            return match e {
                MomentError::BoundaryCase { .. } => 2,
                _ => 1,
            };
        }
    }
    1
}

fn load_problem(path: &Path) -> Result<LearningProblem> {
    let problem = LearningProblem::from_path(path)
        .with_context(|| format!("loading problem spec {}", path.display()))?;
    if problem.loss_bound() > SUPPORT_CAP {
        anyhow::bail!(
            "loss bound {} exceeds the supported cap {SUPPORT_CAP}",
            problem.loss_bound()
        );
    }
    Ok(problem)
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("MIXLAB_SEED").ok().and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .context("building worker pool")?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let mut sink = Sink::open(cli.out.as_ref())?;
    let format = cli.format;
    match &cli.command {
        Command::Mix(MixCommand::Eta(args)) => mix_eta(args, &mut sink, format),
        Command::Mix(MixCommand::Weak(args)) => mix_weak(args, &mut sink, format),
        Command::Mix(MixCommand::Bernstein(args)) => mix_bernstein(args, &mut sink, format),
        Command::Moment(MomentCommand::Solve(args)) => moment_solve(args, &mut sink, format),
        Command::Moment(MomentCommand::Certify(args)) => moment_certify(args, &mut sink, format),
        Command::Erm(ErmCommand::Simulate(args)) => erm_simulate(args, &mut sink, format),
        Command::Erm(ErmCommand::Violations(args)) => erm_violations(args, &mut sink, format),
        Command::Bounds(cmd) => bounds_cmd(cmd, &mut sink, format),
        Command::Diagnose(args) => diagnose_cmd(args, &mut sink, format),
    }
}

fn mix_eta(args: &ProblemArg, sink: &mut Sink, format: Format) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let profile = eta_star(&problem)?;
    match format {
        Format::Csv => {
            sink.csv_row(&["function".into(), "status".into(), "value".into()])?;
            sink.csv_row(&[profile.f_star.clone(), "optimal".into(), String::new()])?;
            for (name, result) in &profile.per_function {
                let (status, value) = match result {
                    EtaResult::Root { eta } => ("root", num(*eta)),
                    EtaResult::HyperConcentrated { limit } => ("hyper_concentrated", num(*limit)),
                    EtaResult::ZeroMean => ("zero_mean", String::new()),
                    EtaResult::NegativeMean => ("negative_mean", String::new()),
                };
                sink.csv_row(&[name.clone(), status.into(), value])?;
            }
            sink.csv_row(&["eta_star".into(), String::new(), num(profile.eta_star)])?;
        }
        Format::Json => {
            let per: serde_json::Map<String, serde_json::Value> = profile
                .per_function
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::to_value(v).unwrap()))
                .collect();
            sink.json_line(&serde_json::json!({
                "f_star": profile.f_star,
                "eta_star": json_num(profile.eta_star),
                "witness": profile.witness,
                "per_function": per,
            }))?;
        }
    }
    Ok(0)
}

fn mix_weak(args: &WeakArgs, sink: &mut Sink, format: Format) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let report = check_weak_mixability(&problem, args.kappa, args.eta0)?;
    match format {
        Format::Csv => {
            sink.csv_row(&[
                "kappa".into(),
                "eta0".into(),
                "holds".into(),
                "witness_function".into(),
                "witness_level".into(),
                "witness_eta".into(),
                "witness_cgf".into(),
            ])?;
            let w = report.witness.as_ref();
            sink.csv_row(&[
                num(report.kappa),
                num(report.eta0),
                report.holds.to_string(),
                w.map(|w| w.function.clone()).unwrap_or_default(),
                w.map(|w| num(w.level)).unwrap_or_default(),
                w.map(|w| num(w.eta_level)).unwrap_or_default(),
                w.map(|w| num(w.cgf_value)).unwrap_or_default(),
            ])?;
        }
        Format::Json => sink.json_line(&serde_json::to_value(&report)?)?,
    }
    Ok(0)
}

fn mix_bernstein(args: &BernsteinArgs, sink: &mut Sink, format: Format) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let fit = bernstein_constant(&problem, args.beta)?;
    match format {
        Format::Csv => {
            sink.csv_row(&["beta".into(), "B".into()])?;
            sink.csv_row(&[num(fit.beta), num(fit.b)])?;
        }
        Format::Json => sink.json_line(&serde_json::json!({"beta": fit.beta, "B": fit.b}))?,
    }
    Ok(0)
}

fn moment_solve(args: &MomentSolveArgs, sink: &mut Sink, format: Format) -> Result<i32> {
    if !(args.support > 0.0 && args.support <= SUPPORT_CAP) {
        anyhow::bail!("--support must be in (0, {SUPPORT_CAP}], got {}", args.support);
    }
    if !(3..=GRID_CAP).contains(&args.grid) {
        anyhow::bail!("--grid must be in [3, {GRID_CAP}], got {}", args.grid);
    }
    let instance = MomentInstance::new(args.eta, args.mean, args.support)?;
    let solution = grid_lp_solve(&instance, args.grid, args.sense);
    match format {
        Format::Csv => {
            sink.csv_row(&["x".into(), "p".into()])?;
            for (x, p) in &solution.support {
                sink.csv_row(&[num(*x), num(*p)])?;
            }
        }
        Format::Json => sink.json_line(&serde_json::to_value(&solution)?)?,
    }
    if solution.status == LpStatus::Infeasible {
        eprintln!(
            "infeasible: no distribution on [{}, {}] matches mean {} with unit exponential moment at eta {}",
            -args.support, args.support, args.mean, args.eta
        );
        return Ok(2);
    }
    eprintln!("value = {}", solution.value);
    Ok(0)
}

fn moment_certify(args: &MomentCertifyArgs, sink: &mut Sink, format: Format) -> Result<i32> {
    // Negated so a NaN --eta fails closed.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(args.eta > 0.0) {
        anyhow::bail!("--eta must be positive, got {}", args.eta);
    }
    if !(1000..=GRID_CAP).contains(&args.grid) {
        anyhow::bail!("--grid must be in [1000, {GRID_CAP}], got {}", args.grid);
    }
    let cert = dual_certificate(args.eta);
    let check = verify_certificate(&cert, args.eta, args.grid);
    match format {
        Format::Csv => {
            sink.csv_row(&[
                "c0".into(),
                "c1".into(),
                "c2".into(),
                "min_u".into(),
                "u_at_minus_1".into(),
            ])?;
            sink.csv_row(&[
                num(cert.c0),
                num(cert.c1),
                num(cert.c2),
                num(check.min_u),
                num(check.u_at_minus_one),
            ])?;
        }
        Format::Json => {
            sink.json_line(&serde_json::json!({
                "c0": cert.c0,
                "c1": cert.c1,
                "c2": cert.c2,
                "min_u": json_num(check.min_u),
                "u_at_minus_1": check.u_at_minus_one,
                "argmin": check.argmin,
                "valid": check.valid,
            }))?;
        }
    }
    if check.valid {
        Ok(0)
    } else {
        eprintln!("certificate rejected: grid minimum {} below -1e-9", check.min_u);
        Ok(2)
    }
}

fn erm_simulate(args: &SimulateArgs, sink: &mut Sink, format: Format) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let config = SimConfig {
        n_values: args.n_list.clone(),
        trials: args.trials,
        seed: resolve_seed(args.seed),
        tiebreak: args.tiebreak,
        delta: args.delta,
        epsilon: args.epsilon,
    };
    let report = in_pool(args.workers, || simulate(&problem, &config))??;
    let fit_json = match &report.rate_fit {
        RateFit::Fitted { slope, intercept, r2 } => serde_json::json!({
            "slope": slope, "intercept": intercept, "r2": r2,
        }),
        RateFit::Unavailable { usable_points } => serde_json::json!({
            "slope": null, "intercept": null, "r2": null, "usable_points": usable_points,
        }),
    };
    match format {
        Format::Csv => {
            sink.csv_row(&[
                "n".into(),
                "mean_excess_risk".into(),
                "q50".into(),
                "q90".into(),
                "q_1_minus_delta".into(),
                "epsilon_good_rate".into(),
            ])?;
            for row in &report.per_n {
                sink.csv_row(&[
                    row.n.to_string(),
                    num(row.mean_excess_risk),
                    num(row.q50),
                    num(row.q90),
                    num(row.q_high),
                    num(row.epsilon_good_rate),
                ])?;
            }
            sink.json_line(&fit_json)?;
        }
        Format::Json => {
            sink.json_line(&serde_json::json!({
                "f_star": report.f_star,
                "delta": report.delta,
                "per_n": serde_json::to_value(&report.per_n)?,
                "rate_fit": fit_json,
            }))?;
        }
    }
    Ok(0)
}

fn erm_violations(args: &ViolationsArgs, sink: &mut Sink, format: Format) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let kind = match args.bound.as_str() {
        "finite_thm4" => BoundKind::FiniteThm4,
        "weak_cor1" => {
            let kappa = args
                .kappa
                .ok_or_else(|| anyhow::anyhow!("--kappa is required for weak_cor1"))?;
            let eta0 = args
                .eta0
                .ok_or_else(|| anyhow::anyhow!("--eta0 is required for weak_cor1"))?;
            BoundKind::WeakCor1 { kappa, eta0 }
        }
        other => anyhow::bail!("unknown bound `{other}` (expected finite_thm4 or weak_cor1)"),
    };
    let seed = resolve_seed(args.seed);
    let report = in_pool(args.workers, || {
        bound_violation_rate(&problem, args.n, args.delta, args.trials, kind, seed, args.tiebreak)
    })??;
    match format {
        Format::Csv => {
            sink.csv_row(&[
                "kind".into(),
                "n".into(),
                "delta".into(),
                "trials".into(),
                "bound".into(),
                "rate".into(),
                "three_sigma".into(),
            ])?;
            sink.csv_row(&[
                report.kind.name().into(),
                report.n.to_string(),
                num(report.delta),
                report.trials.to_string(),
                num(report.bound),
                num(report.rate),
                num(report.three_sigma),
            ])?;
        }
        Format::Json => sink.json_line(&serde_json::to_value(&report)?)?,
    }
    Ok(0)
}

fn bounds_cmd(cmd: &BoundsCommand, sink: &mut Sink, format: Format) -> Result<i32> {
    use mixlab_core::bounds as b;
    match cmd {
        BoundsCommand::Finite(a) => {
            let value = b::finite_class_bound(a.v, a.eta_star, a.n_class, a.delta, a.n)?;
            match format {
                Format::Csv => {
                    sink.csv_row(&[
                        "V".into(),
                        "eta_star".into(),
                        "N".into(),
                        "delta".into(),
                        "n".into(),
                        "value".into(),
                    ])?;
                    sink.csv_row(&[
                        num(a.v),
                        num(a.eta_star),
                        a.n_class.to_string(),
                        num(a.delta),
                        a.n.to_string(),
                        num(value),
                    ])?;
                }
                Format::Json => sink.json_line(&serde_json::json!({
                    "V": a.v, "eta_star": json_num(a.eta_star), "N": a.n_class,
                    "delta": a.delta, "n": a.n, "value": value,
                }))?,
            }
        }
        BoundsCommand::Weak(a) => {
            let value = b::weak_mix_bound(a.v, a.kappa, a.eta0, a.n_class, a.delta, a.n)?;
            match format {
                Format::Csv => {
                    sink.csv_row(&[
                        "V".into(),
                        "kappa".into(),
                        "eta0".into(),
                        "N".into(),
                        "delta".into(),
                        "n".into(),
                        "value".into(),
                    ])?;
                    sink.csv_row(&[
                        num(a.v),
                        num(a.kappa),
                        num(a.eta0),
                        a.n_class.to_string(),
                        num(a.delta),
                        a.n.to_string(),
                        num(value),
                    ])?;
                }
                Format::Json => sink.json_line(&serde_json::json!({
                    "V": a.v, "kappa": a.kappa, "eta0": a.eta0, "N": a.n_class,
                    "delta": a.delta, "n": a.n, "value": value,
                }))?,
            }
        }
        BoundsCommand::Vc(a) => {
            let bound = b::vc_type_bound(a.v, a.eta_star, a.c, a.k, a.delta, a.n)?;
            let branch = match bound.branch {
                b::VcBranch::Mixability => "mixability",
                b::VcBranch::Localization => "localization",
            };
            match format {
                Format::Csv => {
                    sink.csv_row(&[
                        "V".into(),
                        "eta_star".into(),
                        "C".into(),
                        "K".into(),
                        "delta".into(),
                        "n".into(),
                        "value".into(),
                        "branch".into(),
                        "mixability_branch".into(),
                        "localization_branch".into(),
                    ])?;
                    sink.csv_row(&[
                        num(a.v),
                        num(a.eta_star),
                        num(a.c),
                        num(a.k),
                        num(a.delta),
                        a.n.to_string(),
                        num(bound.value),
                        branch.into(),
                        num(bound.mixability_branch),
                        num(bound.localization_branch),
                    ])?;
                }
                Format::Json => sink.json_line(&serde_json::to_value(bound)?)?,
            }
        }
        BoundsCommand::Local(a) => {
            let value = b::localization_bound(a.c, a.k, a.delta, a.n, a.v)?;
            match format {
                Format::Csv => {
                    sink.csv_row(&[
                        "C".into(),
                        "K".into(),
                        "delta".into(),
                        "n".into(),
                        "V".into(),
                        "value".into(),
                    ])?;
                    sink.csv_row(&[
                        num(a.c),
                        num(a.k),
                        num(a.delta),
                        a.n.to_string(),
                        num(a.v),
                        num(value),
                    ])?;
                }
                Format::Json => sink.json_line(&serde_json::json!({
                    "C": a.c, "K": a.k, "delta": a.delta, "n": a.n, "V": a.v, "value": value,
                }))?,
            }
        }
    }
    Ok(0)
}

fn diagnose_cmd(args: &DiagnoseArgs, sink: &mut Sink, format: Format) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let report = diagnose(&problem, &args.eps_list)?;
    match format {
        Format::Csv => {
            sink.csv_row(&[
                "eps".into(),
                "mixable".into(),
                "eta_star".into(),
                "minimizer_multiplicity".into(),
                "far_set_size".into(),
                "min_excess_risk_on_far_set".into(),
            ])?;
            for row in &report.rows {
                sink.csv_row(&[
                    num(row.eps),
                    row.mixable.to_string(),
                    num(row.eta_star),
                    row.minimizer_multiplicity.to_string(),
                    row.far_set_size.to_string(),
                    row.min_excess_risk_on_far_set.map(num).unwrap_or_default(),
                ])?;
            }
        }
        Format::Json => {
            sink.json_line(&serde_json::json!({
                "f_star": report.f_star,
                "effectively_unique_on_grid": report.effectively_unique_on_grid,
                "rows": serde_json::to_value(&report.rows)?,
            }))?;
        }
    }
    Ok(0)
}
