//! `hardy`: command-line front end.
//!
//! Every subcommand prints canonical JSON (or CSV for tables) to stdout, or
//! to `--out`. Failures print `{"error": {"code": ..., "message": ...}}` to
//! stderr and exit with a code per error class.

mod reports;
mod selftest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardy_core::json::{polytorus_to_json, to_canonical_string};
use hardy_core::multipliers::{SymbolRef, SymbolRegistry};
use hardy_core::norms::NormConfig;
use hardy_core::{primes, AnyPolynomial};
use serde_json::{json, Value};

use reports::{require, Bound, TransferArgs};

#[derive(Parser, Debug)]
#[command(name = "hardy", version, about = "Hardy spaces of Dirichlet series", args_override_self = true)]
struct Cli {
    /// JSON object of flag values; its entries override the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the main artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "HARDY_SEED", default_value_t = 0)]
    seed: u64,
    /// Point budget for grid and lattice norms.
    #[arg(long, global = true, env = "HARDY_BUDGET", default_value_t = 100_000_000)]
    budget: u64,
    /// Number of primes available to factorizations and lifts.
    #[arg(long = "prime-cap", global = true)]
    prime_cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// L^p norm of a polynomial.
    Norm(NormArgs),
    /// Apply a multiplier, bound it, or estimate its norm from below.
    Mult(MultArgs),
    /// Littlewood-Paley blocks, square function ratio, random signs.
    Lp(LpArgs),
    /// Forward or backward transference verification.
    Transfer(TransferCmd),
    /// Partial sums, order projection, Hilbert transform, truncation bench.
    Proj(ProjArgs),
    /// Desk-scale invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct NormOpts {
    #[arg(long, default_value = "auto")]
    method: String,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long = "T-schedule", value_delimiter = ',')]
    t_schedule: Vec<f64>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct NormArgs {
    /// Polynomial file.
    #[arg(long)]
    poly: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[command(flatten)]
    norm: NormOpts,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundKind {
    Marcinkiewicz,
    Hm,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct MultArgs {
    /// Symbol descriptor: inline JSON or a file holding it.
    #[arg(long)]
    symbol: String,
    /// Polynomial file to apply the multiplier to.
    #[arg(long)]
    apply: Option<PathBuf>,
    #[arg(long, value_enum)]
    bound: Option<BoundKind>,
    #[arg(long, default_value = "2")]
    eta: String,
    /// Intervals `I_k` with `|k| <= K` enter the Marcinkiewicz scan.
    #[arg(long = "k-range", default_value_t = 40)]
    k_range: i64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long = "ensemble-size", default_value_t = 0)]
    ensemble_size: usize,
    #[command(flatten)]
    norm: NormOpts,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct LpArgs {
    #[arg(long)]
    poly: Option<PathBuf>,
    #[arg(long, default_value = "2")]
    eta: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Random sign samples for the Khintchine average.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    /// Directory receiving one JSON file per block.
    #[arg(long = "emit-blocks")]
    emit_blocks: Option<PathBuf>,
    /// CSV file with one row per polynomial.
    #[arg(long = "ratio-table")]
    ratio_table: Option<PathBuf>,
    #[arg(long = "ensemble-size", default_value_t = 0)]
    ensemble_size: usize,
    #[command(flatten)]
    norm: NormOpts,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Direction {
    Forward,
    Backward,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct TransferCmd {
    #[arg(long, value_enum)]
    direction: Direction,
    #[arg(long, default_value = r#"{"kind":"constant","value":1}"#)]
    symbol: String,
    #[arg(long)]
    poly: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long = "Qmax", default_value_t = 10)]
    q_max: i64,
    #[arg(long = "emit-report")]
    emit_report: Option<PathBuf>,
    #[command(flatten)]
    norm: NormOpts,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum ProjOp {
    Partial,
    Riesz,
    Hilbert,
    IdentityCheck,
    Bench,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct ProjArgs {
    #[arg(long, value_enum)]
    op: ProjOp,
    #[arg(long)]
    poly: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long = "N-schedule", value_delimiter = ',')]
    n_schedule: Vec<u64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long = "ensemble-size", default_value_t = 8)]
    ensemble_size: usize,
    /// Longest member of the bench ensemble (defaults to the largest N).
    #[arg(long = "max-index")]
    max_index: Option<u64>,
    #[command(flatten)]
    norm: NormOpts,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SelftestArgs {
    /// Directory for the CSV artifacts of the suite.
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

enum Failure {
    Core(hardy_core::Error),
    Io(String),
    Usage(String),
    Selftest,
}

impl From<hardy_core::Error> for Failure {
    fn from(e: hardy_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) => match e.code() {
                "malformed_input" => 2,
                "unattainable_tolerance" => 3,
                "budget_exhausted" => 4,
                "invalid_argument" => 5,
                "overflow" => 6,
                _ => 1,
            },
            Failure::Io(_) => 7,
            Failure::Usage(_) => 5,
            Failure::Selftest => 1,
        }
    }

    fn to_json(&self) -> Value {
        let (code, message) = match self {
            Failure::Core(e) => (e.code(), e.to_string()),
            Failure::Io(m) => ("io", m.clone()),
            Failure::Usage(m) => ("invalid_argument", m.clone()),
            Failure::Selftest => ("selftest_failed", "one or more invariants failed".to_string()),
        };
        json!({"error": {"code": code, "message": message}})
    }
}

type Out<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Out<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Out<()> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_poly(path: &Path) -> Out<AnyPolynomial> {
    Ok(reports::parse_polynomial(&read(path)?)?)
}

fn load_symbol(s: &str) -> Out<SymbolRef> {
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        read(Path::new(s))?
    };
    Ok(SymbolRegistry::default().parse_str(&text)?)
}

/// Append the config file's entries as flags so they win over earlier ones.
fn expand_config(mut argv: Vec<OsString>) -> Out<Vec<OsString>> {
    let Some(pos) = argv.iter().position(|a| a == "--config") else {
        return Ok(argv);
    };
    let path = argv
        .get(pos + 1)
        .ok_or_else(|| Failure::Usage("--config needs a file".into()))?
        .clone();
    let v: Value = serde_json::from_str(&read(Path::new(&path))?)
        .map_err(|e| Failure::Core(hardy_core::Error::MalformedInput(format!("config: {e}"))))?;
    let obj = v
        .as_object()
        .ok_or_else(|| Failure::Core(hardy_core::Error::MalformedInput("config must be an object".into())))?;
    for (k, val) in obj {
        let flag = format!("--{k}");
        let text = match val {
            Value::Bool(true) => {
                argv.push(flag.into());
                continue;
            }
            Value::Bool(false) | Value::Null => continue,
            Value::String(s) => s.clone(),
            Value::Array(xs) => xs
                .iter()
                .map(|x| x.as_str().map_or_else(|| x.to_string(), str::to_string))
                .collect::<Vec<_>>()
                .join(","),
            other => other.to_string(),
        };
        argv.push(flag.into());
        argv.push(text.into());
    }
    Ok(argv)
}

fn norm_config(cli: &Cli, o: &NormOpts) -> NormConfig {
    let mut cfg = NormConfig {
        seed: cli.seed,
        budget: cli.budget,
        resolution: o.resolution,
        ..NormConfig::default()
    };
    if !o.t_schedule.is_empty() {
        cfg.t_schedule = o.t_schedule.clone();
    }
    cfg
}

fn emit(cli: &Cli, text: &str) -> Out<()> {
    match &cli.out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(cli: &Cli, v: &Value) -> Out<()> {
    emit(cli, &to_canonical_string(v))
}

fn run(cli: &Cli) -> Out<()> {
    if let Some(c) = cli.prime_cap {
        primes::raise_cap(c);
    }
    match &cli.command {
        Command::Norm(a) => {
            let f = load_poly(&a.poly)?;
            let v = reports::norm_report(&f, a.p, &a.norm.method, &norm_config(cli, &a.norm))?;
            emit_json(cli, &v)
        }
        Command::Mult(a) => {
            let m = load_symbol(&a.symbol)?;
            let f = a.apply.as_deref().map(load_poly).transpose()?;
            let bound = a.bound.map(|b| match b {
                BoundKind::Marcinkiewicz => Bound::Marcinkiewicz,
                BoundKind::Hm => Bound::Hm,
            });
            let v = reports::mult_report(
                m.as_ref(),
                f.as_ref(),
                bound,
                &a.eta,
                a.k_range,
                a.p,
                a.ensemble_size,
                &a.norm.method,
                &norm_config(cli, &a.norm),
            )?;
            emit_json(cli, &v)
        }
        Command::Lp(a) => {
            let cfg = norm_config(cli, &a.norm);
            let f = a.poly.as_deref().map(load_poly).transpose()?;
            if f.is_none() && a.ratio_table.is_none() {
                return Err(Failure::Usage("lp needs --poly or --ratio-table".into()));
            }
            if let Some(path) = &a.ratio_table {
                let e = (a.ensemble_size > 0)
                    .then(|| reports::lp_ensemble(cli.seed, a.ensemble_size))
                    .transpose()?;
                let csv = reports::lp_ratio_table(f.as_ref(), e.as_ref(), &a.eta, a.p, &a.norm.method, &cfg)?;
                write(path, &csv)?;
            }
            let Some(f) = f else { return Ok(()) };
            let out = reports::lp_report(&f, &a.eta, a.p, &a.norm.method, a.samples, &cfg)?;
            if let Some(dir) = &a.emit_blocks {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
                for (k, b) in &out.blocks {
                    let v = json!({"k": k, "block": polytorus_to_json(b)});
                    write(&dir.join(format!("block_{k}.json")), &to_canonical_string(&v))?;
                }
            }
            emit_json(cli, &out.report)
        }
        Command::Transfer(a) => {
            let m = load_symbol(&a.symbol)?;
            let f = load_poly(&a.poly)?;
            let args = TransferArgs {
                forward: matches!(a.direction, Direction::Forward),
                p: a.p,
                epsilon: a.epsilon,
                delta: a.delta,
                gamma: a.gamma,
                q_max: a.q_max,
                method: &a.norm.method,
            };
            let r = reports::transfer_report(m.as_ref(), &f, &args, &norm_config(cli, &a.norm))?;
            let mut v = r.to_json();
            v["seed"] = cli.seed.into();
            let text = to_canonical_string(&v);
            if let Some(p) = &a.emit_report {
                write(p, &text)?;
            }
            emit(cli, &text)
        }
        Command::Proj(a) => {
            let cfg = norm_config(cli, &a.norm);
            let poly = || -> Out<AnyPolynomial> { load_poly(&require(a.poly.clone(), "--poly")?) };
            let v = match a.op {
                ProjOp::Partial => reports::proj_partial(&poly()?, require(a.n, "--N")?)?,
                ProjOp::Riesz => reports::proj_riesz(&poly()?, false)?,
                ProjOp::Hilbert => reports::proj_riesz(&poly()?, true)?,
                ProjOp::IdentityCheck => reports::proj_identity(&poly()?, require(a.n, "--N")?)?,
                ProjOp::Bench => {
                    let schedule = if a.n_schedule.is_empty() {
                        vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]
                    } else {
                        a.n_schedule.clone()
                    };
                    let b = reports::proj_bench(a.p, &schedule, a.ensemble_size, a.max_index, &a.norm.method, &cfg)?;
                    return emit(cli, &b.to_csv());
                }
            };
            emit_json(cli, &v)
        }
        Command::Selftest(a) => {
            let report = selftest::run(cli.seed)?;
            if let Some(dir) = &a.artifacts {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
                for (name, text) in &report.artifacts {
                    write(&dir.join(name), text)?;
                }
            }
            for line in &report.lines {
                println!("{line}");
            }
            if let Some(p) = &cli.out {
                write(p, &to_canonical_string(&report.json))?;
            }
            if report.pass {
                Ok(())
            } else {
                Err(Failure::Selftest)
            }
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let result = expand_config(argv).and_then(|argv| match Cli::try_parse_from(argv) {
        Ok(cli) => run(&cli),
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            Ok(())
        }
        Err(e) => Err(Failure::Usage(e.to_string())),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", to_canonical_string(&f.to_json()).trim_end());
            ExitCode::from(f.exit_code())
        }
    }
}
