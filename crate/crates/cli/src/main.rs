use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jpc_core::bench::{run_convergence, run_method, run_timing, BuiltinProblem, Method};
use jpc_core::{
    gauss_lobatto_rule, mittag_leffler, parse, Error, JacobiWeight, MLQuery, ProblemSpec, SolveStatus,
    SolverConfig, SplitConfig, StarterConfig,
};

const EXIT_CONFIG: u8 = 1;
const EXIT_DIVERGED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "jpc", version, about = "Jacobi predictor-corrector solver for Caputo fractional ODEs")]
struct Cli {
    /// File of `key=value` lines naming long flags of the subcommand; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a Jacobi-Gauss-Lobatto rule as `node,weight` CSV.
    Quad(QuadArgs),
    /// Solve one problem and print `t,x`.
    Solve(SolveArgs),
    /// Error and observed order over a list of steps.
    Converge(ConvergeArgs),
    /// Wall time and work counts for growing horizons.
    Bench(BenchArgs),
    /// Evaluate the Mittag-Leffler function.
    Mlf(MlfArgs),
}

#[derive(Args, Debug)]
struct QuadArgs {
    #[arg(long)]
    alpha: f64,
    /// The rule has `jn + 1` points.
    #[arg(long, default_value_t = 26)]
    jn: usize,
    /// Use the constant weight instead of `(1-s)^(alpha-1)`.
    #[arg(long)]
    legendre: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    /// Built-in problem: poly8 or ml_linear.
    #[arg(long, conflicts_with = "rhs")]
    problem: Option<String>,
    /// Right-hand side `f(t, x)`, e.g. "-x + sin(t)"; `alpha` is bound to --alpha.
    #[arg(long, allow_hyphen_values = true)]
    rhs: Option<String>,
    /// Exact solution in `t` for user-defined problems.
    #[arg(long, requires = "rhs", allow_hyphen_values = true)]
    exact: Option<String>,
    /// Initial values `x(0)[,x'(0)]`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    init: Option<Vec<f64>>,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct SchemeArgs {
    /// Interpolation points IN.
    #[arg(long = "in", default_value_t = 3)]
    interp_points: usize,
    #[arg(long, default_value_t = 26)]
    jn: usize,
    /// `exact` or `refined:k`; defaults to exact when an exact solution is known.
    #[arg(long)]
    starter: Option<String>,
    /// Split point T0; enables the split-domain solver.
    #[arg(long)]
    split_t0: Option<f64>,
    /// Disable the split that ml_linear uses by default.
    #[arg(long, conflicts_with = "split_t0")]
    no_split: bool,
    #[arg(long)]
    aux_jn: Option<usize>,
    #[arg(long)]
    fine_factor: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Step, as a decimal or a fraction like 1/40.
    #[arg(long)]
    h: String,
    #[arg(long, default_value = "jpc")]
    method: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Comma-separated steps, e.g. 1/10,1/20,1/40.
    #[arg(long, value_delimiter = ',', default_value = "1/10,1/20,1/40,1/80,1/160,1/320")]
    h_list: Vec<String>,
    #[arg(long, default_value = "jpc")]
    method: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    h: String,
    /// Comma-separated horizons.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    t_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "jpc,adams")]
    methods: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MlfArgs {
    #[arg(long)]
    alpha: f64,
    /// Argument z; with --t, evaluates `E_alpha(-t^alpha)` instead.
    #[arg(long, allow_negative_numbers = true, required_unless_present = "t")]
    z: Option<f64>,
    #[arg(long, conflicts_with = "z")]
    t: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

fn parse_step(s: &str) -> Result<f64, Error> {
    let s = s.trim();
    let bad = || Error::Config(format!("invalid step `{s}`"));
    let v = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            num / den
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

struct Resolved {
    problem: ProblemSpec,
    id: String,
    builtin: Option<BuiltinProblem>,
}

fn build_problem(args: &ProblemArgs) -> Result<Resolved, Error> {
    if let Some(id) = &args.problem {
        let builtin: BuiltinProblem = id.parse()?;
        let t_end = args.t_end.unwrap_or(builtin.default_t_end());
        let problem = builtin.problem(args.alpha, t_end)?;
        if let Some(init) = &args.init {
            if init.as_slice() != problem.init() {
                return Err(Error::Config(format!("{id} fixes its initial values to {:?}", problem.init())));
            }
        }
        return Ok(Resolved { problem, id: builtin.id().to_string(), builtin: Some(builtin) });
    }
    let source = args
        .rhs
        .as_ref()
        .ok_or_else(|| Error::Config("either --problem or --rhs is required".into()))?;
    let t_end = args.t_end.ok_or_else(|| Error::Config("--t-end is required with --rhs".into()))?;
    let init = args.init.clone().unwrap_or_else(|| vec![0.0; args.alpha.ceil().max(1.0) as usize]);
    let mut problem = ProblemSpec::from_expr(args.alpha, init, t_end, parse(source)?)?;
    if let Some(exact) = &args.exact {
        let expr = parse(exact)?;
        let alpha = args.alpha;
        problem = problem.with_exact_solution(move |t| expr.evaluate(t, 0.0, alpha).unwrap_or(f64::NAN));
    }
    Ok(Resolved { problem, id: "rhs".to_string(), builtin: None })
}

fn build_config(scheme: &SchemeArgs, h: f64, builtin: Option<BuiltinProblem>) -> Result<SolverConfig, Error> {
    let mut cfg = SolverConfig::new(scheme.interp_points, h).with_quad_index(scheme.jn);
    if let Some(s) = &scheme.starter {
        cfg = cfg.with_starter(s.parse::<StarterConfig>()?);
    }
    let split = match scheme.split_t0 {
        Some(t0) => Some(SplitConfig::new(t0)),
        None if scheme.no_split => None,
        None => builtin.and_then(|b| b.default_split()),
    };
    if let Some(mut split) = split {
        if let Some(aux) = scheme.aux_jn {
            split = split.with_aux_index(aux);
        }
        if let Some(ff) = scheme.fine_factor {
            split = split.with_fine_factor(ff);
        }
        cfg = cfg.with_split(split);
    } else if scheme.aux_jn.is_some() || scheme.fine_factor.is_some() {
        return Err(Error::Config("--aux-jn and --fine-factor need a split".into()));
    }
    Ok(cfg)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

enum Outcome {
    Done,
    Diverged(String),
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Quad(a) => {
            let weight = if a.legendre { JacobiWeight::legendre() } else { JacobiWeight::fractional(a.alpha)? };
            let rule = gauss_lobatto_rule(&weight, a.jn + 1)?;
            emit(a.output.as_deref(), &rule.to_csv())?;
        }
        Command::Solve(a) => {
            let r = build_problem(&a.problem)?;
            let h = parse_step(&a.h)?;
            let cfg = build_config(&a.scheme, h, r.builtin)?;
            let traj = run_method(&r.problem, a.method.parse()?, &cfg)?;
            let mut text = String::from("t,x\n");
            if let Some(head) = traj.head() {
                for (t, x) in head.points().take(head.len().saturating_sub(1)) {
                    text += &format!("{t:.16e},{x:.16e}\n");
                }
            }
            for (t, x) in traj.points() {
                text += &format!("{t:.16e},{x:.16e}\n");
            }
            emit(a.output.as_deref(), &text)?;
            if traj.status() == SolveStatus::Diverged {
                return Ok(Outcome::Diverged(format!("solution diverged after t = {}", traj.grid().end())));
            }
        }
        Command::Converge(a) => {
            let r = build_problem(&a.problem)?;
            let hs = a.h_list.iter().map(|s| parse_step(s)).collect::<Result<Vec<_>, _>>()?;
            let cfg = build_config(&a.scheme, hs.first().copied().unwrap_or(0.1), r.builtin)?;
            let report = run_convergence(&r.problem, &r.id, a.method.parse()?, &cfg, &hs)?;
            let text = match a.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json() + "\n",
            };
            emit(a.output.as_deref(), &text)?;
            if report.unstable {
                eprintln!("warning: error does not decrease monotonically; the run is flagged unstable");
            }
            if report.rows.iter().any(|row| row.status == SolveStatus::Diverged) {
                return Ok(Outcome::Diverged("a solve in the sweep diverged".into()));
            }
        }
        Command::Bench(a) => {
            let r = build_problem(&a.problem)?;
            let h = parse_step(&a.h)?;
            let cfg = build_config(&a.scheme, h, r.builtin)?;
            let methods = a.methods.iter().map(|m| m.parse::<Method>()).collect::<Result<Vec<_>, _>>()?;
            let report = run_timing(&r.problem, &methods, &a.t_list, &cfg)?;
            let text = match a.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json() + "\n",
            };
            emit(a.output.as_deref(), &text)?;
        }
        Command::Mlf(a) => {
            let z = match (a.z, a.t) {
                (Some(z), _) => z,
                (None, Some(t)) => -t.powf(a.alpha),
                (None, None) => return Err(Error::Config("--z or --t is required".into())),
            };
            let v = mittag_leffler(MLQuery::new(a.alpha, z).with_tol(a.tol))?;
            println!("{v:.16e}");
        }
    }
    Ok(Outcome::Done)
}

/// Appends `--key value` for each config entry whose flag is not already on the command line.
fn merge_config(mut argv: Vec<OsString>, path: &Path) -> Result<Vec<OsString>, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let given: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            msg: format!("line {}: expected key=value", i + 1),
        })?;
        let flag = format!("--{}", key.trim().replace('_', "-"));
        let present = given.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !present {
            let value = value.trim();
            if value == "true" {
                argv.push(flag.into());
            } else if value != "false" {
                argv.push(format!("{flag}={value}").into());
            }
        }
    }
    Ok(argv)
}

/// The `--config` value, looked up before clap runs so that required flags may come from the file.
fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().map(|a| a.to_string_lossy());
    while let Some(arg) = it.next() {
        if arg == "--config" {
            return it.next().map(|v| PathBuf::from(v.as_ref()));
        }
        if let Some(v) = arg.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

fn main() -> ExitCode {
    let mut argv: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config_path(&argv) {
        argv = match merge_config(argv, &path) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        };
    }
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Diverged(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DIVERGED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Diverged { .. } => EXIT_DIVERGED,
                _ => EXIT_CONFIG,
            })
        }
    }
}
