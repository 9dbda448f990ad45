//! `zmw`: batch front end for the identity checks and moment experiments.
//!
//! Exit codes: 0 success, 1 invalid input or failed run, 2 a check ran but
//! breached its threshold (the report is still written).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use zmw_core::config::{parse_h_list, parse_shift_list, parse_shift_pair, Format, RunConfig, ShiftValue};
use zmw_core::correlation::{run_correlation, CorrelationJob};
use zmw_core::identities::{check_dirichlet_series, run_suite, SuiteConfig};
use zmw_core::moments::{i_empirical, i_report, MomentJob};
use zmw_core::recipe::recipe_r;
use zmw_core::special::SmoothWeight;
use zmw_core::{Complex64, Error, ShiftSet, ShiftedTauTable, VERSION};

const THREADS_ENV: &str = "ZMW_THREADS";

#[derive(Parser)]
#[command(name = "zmw", version, about = "Shifted divisor sums, Euler-product identities and moment experiments")]
struct Cli {
    /// Worker threads (the ZMW_THREADS environment variable takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report destination (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Random-draw verification of the prime-local identities.
    Identities {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        draws: Option<u64>,
        /// Largest prime-power exponent in the term-by-term checks.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Truncated Dirichlet series against its Euler product.
    DirichletCheck {
        #[command(flatten)]
        common: Common,
        /// Shift sets as "a1,a2;b1,b2".
        #[arg(long, allow_hyphen_values = true)]
        shifts: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Shifted convolution sums against their conjectured main term (CSV by default).
    Correlation {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        u: Option<u64>,
        /// Shifts h, e.g. "1..8" or "1,2,5".
        #[arg(long)]
        h: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        shifts: Option<String>,
        #[arg(long)]
        q_cutoff: Option<usize>,
        /// Largest relative deviation before exit code 2.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Smoothed mean square of the Dirichlet polynomial.
    Moment {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        shifts: Option<String>,
        #[arg(long = "T")]
        big_t: Option<f64>,
        #[arg(long = "X")]
        x: Option<u64>,
        #[arg(long = "P")]
        p: Option<u64>,
        /// Also evaluate the conjectured value and the deviation.
        #[arg(long)]
        conjecture: bool,
        /// Largest relative deviation before exit code 2 (needs --conjecture).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// The recipe sum over swap terms.
    Recipe {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        shifts: Option<String>,
        #[arg(long = "T")]
        big_t: Option<f64>,
        #[arg(long = "P")]
        p: Option<u64>,
        #[arg(long)]
        max_swaps: Option<usize>,
    },
    /// Writes a binary table of tau_A(n), n <= N.
    TableBuild {
        #[command(flatten)]
        common: Common,
        /// A single shift list "a1,a2,...".
        #[arg(long, allow_hyphen_values = true)]
        shifts: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        /// Table file to write.
        #[arg(long)]
        table: PathBuf,
    },
}

/// Why a run did not succeed.
enum Failure {
    Invalid(String),
    Breach,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Breach) => ExitCode::from(2),
        Err(Failure::Invalid(msg)) => {
            eprintln!("zmw: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(),
    };
    if let Some(path) = &common.output {
        cfg.output = Some(path.display().to_string());
    }
    if let Some(f) = common.format {
        cfg.format = Some(match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        });
    }
    Ok(cfg)
}

fn set_shifts(cfg: &mut RunConfig, shifts: &Option<String>) -> Result<(), Failure> {
    if let Some(text) = shifts {
        let (a, b) = parse_shift_pair(text)?;
        cfg.a = Some(a);
        cfg.b = Some(b);
    }
    Ok(())
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn threads(flag: Option<usize>, cfg: &RunConfig) -> Result<usize, Failure> {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        return match text.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::Invalid(format!("{THREADS_ENV}={text:?} is not a positive integer"))),
        };
    }
    Ok(flag.or(cfg.threads).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Invalid(format!("missing parameter {name} (flag or config field)")))
}

fn sets(cfg: &RunConfig) -> Result<(ShiftSet, ShiftSet), Failure> {
    let a = cfg.shifts_a()?.ok_or_else(|| Failure::Invalid("missing shift set A".into()))?;
    let b = cfg.shifts_b()?.ok_or_else(|| Failure::Invalid("missing shift set B".into()))?;
    Ok((a, b))
}

/// Report envelope. Everything except `runtime` is the reproducible payload.
#[derive(Serialize)]
struct Report<'a> {
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    passed: Option<bool>,
    result: Value,
    runtime: Value,
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Outcome {
    match &cfg.output {
        Some(path) => write_file(Path::new(path), bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| Failure::Invalid(e.to_string()))
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    std::fs::write(path, bytes).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn emit_json(cfg: &RunConfig, command: &str, passed: Option<bool>, result: Value, runtime: Value) -> Outcome {
    let mut echo = cfg.clone();
    // Output location and thread count do not change the payload.
    echo.output = None;
    echo.threads = None;
    let report = Report {
        version: VERSION,
        command,
        config: &echo,
        passed,
        result,
        runtime,
    };
    let mut text = serde_json::to_vec_pretty(&report).map_err(|e| Failure::Invalid(e.to_string()))?;
    text.push(b'\n');
    emit(cfg, &text)?;
    match passed {
        Some(false) => Err(Failure::Breach),
        _ => Ok(()),
    }
}

fn json_only(cfg: &RunConfig, command: &str) -> Outcome {
    if cfg.format == Some(Format::Csv) {
        return Err(Failure::Invalid(format!("{command} writes JSON only")));
    }
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Invalid(e.to_string()))
}

fn run(cli: Cli) -> Outcome {
    let command_name = match &cli.command {
        Command::Identities { .. } => "identities",
        Command::DirichletCheck { .. } => "dirichlet-check",
        Command::Correlation { .. } => "correlation",
        Command::Moment { .. } => "moment",
        Command::Recipe { .. } => "recipe",
        Command::TableBuild { .. } => "table-build",
    };
    let mut cfg = match &cli.command {
        Command::Identities {
            common,
            seed,
            draws,
            depth,
            tolerance,
        } => {
            let mut cfg = load(common)?;
            set(&mut cfg.seed, *seed);
            set(&mut cfg.draws, *draws);
            set(&mut cfg.depth, *depth);
            set(&mut cfg.tolerance, *tolerance);
            cfg
        }
        Command::DirichletCheck { common, shifts, s, n, p } => {
            let mut cfg = load(common)?;
            set_shifts(&mut cfg, shifts)?;
            if let Some(s) = s {
                cfg.s = Some(ShiftValue::Text(s.clone()));
            }
            set(&mut cfg.n, *n);
            set(&mut cfg.p, *p);
            cfg
        }
        Command::Correlation {
            common,
            u,
            h,
            shifts,
            q_cutoff,
            tolerance,
        } => {
            let mut cfg = load(common)?;
            set(&mut cfg.u_max, *u);
            if let Some(h) = h {
                cfg.h_list = Some(parse_h_list(h)?);
            }
            set_shifts(&mut cfg, shifts)?;
            set(&mut cfg.q_cutoff, *q_cutoff);
            set(&mut cfg.tolerance, *tolerance);
            cfg
        }
        Command::Moment {
            common,
            shifts,
            big_t,
            x,
            p,
            tolerance,
            ..
        } => {
            let mut cfg = load(common)?;
            set_shifts(&mut cfg, shifts)?;
            set(&mut cfg.big_t, *big_t);
            set(&mut cfg.x, *x);
            set(&mut cfg.p, *p);
            set(&mut cfg.tolerance, *tolerance);
            cfg
        }
        Command::Recipe {
            common,
            shifts,
            big_t,
            p,
            max_swaps,
        } => {
            let mut cfg = load(common)?;
            set_shifts(&mut cfg, shifts)?;
            set(&mut cfg.big_t, *big_t);
            set(&mut cfg.p, *p);
            set(&mut cfg.max_swaps, *max_swaps);
            cfg
        }
        Command::TableBuild { common, shifts, n, .. } => {
            let mut cfg = load(common)?;
            if let Some(text) = shifts {
                cfg.a = Some(parse_shift_list(text)?);
            }
            set(&mut cfg.n, *n);
            cfg
        }
    };
    cfg.validate()?;
    let n_threads = threads(cli.threads, &cfg)?;
    cfg.threads = Some(n_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n_threads)
        .build()
        .map_err(|e| Failure::Invalid(format!("cannot start {n_threads} worker threads: {e}")))?;
    let clock = Instant::now();
    let runtime = |clock: Instant| json!({ "threads": n_threads, "seconds": clock.elapsed().as_secs_f64() });

    pool.install(|| match &cli.command {
        Command::Identities { .. } => {
            json_only(&cfg, command_name)?;
            let defaults = SuiteConfig::default();
            let mut suite = SuiteConfig {
                seed: cfg.seed.unwrap_or(defaults.seed),
                draws: cfg.draws.unwrap_or(defaults.draws),
                tolerance: cfg.tolerance.unwrap_or(defaults.tolerance),
                ..defaults
            };
            if let Some(d) = cfg.depth {
                suite.options.depth = d;
            }
            let report = run_suite(&suite)?;
            emit_json(&cfg, command_name, Some(report.passed), to_value(&report)?, runtime(clock))
        }
        Command::DirichletCheck { .. } => {
            json_only(&cfg, command_name)?;
            let (a, b) = sets(&cfg)?;
            let s = match &cfg.s {
                Some(v) => v.to_complex()?,
                None => Complex64::new(1.0, 0.0),
            };
            cfg.s = Some(s.into());
            let n = cfg.n.unwrap_or(1_000_000);
            let p = cfg.p.unwrap_or(100_000);
            let report = check_dirichlet_series(&a, &b, s, n, p)?;
            emit_json(&cfg, command_name, Some(report.within_estimates), to_value(&report)?, runtime(clock))
        }
        Command::Correlation { .. } => {
            let (a, b) = sets(&cfg)?;
            let job = CorrelationJob {
                a,
                b,
                u_max: require(cfg.u_max, "u_max (--u)")?,
                h_list: cfg.h_list.clone().unwrap_or_else(|| (1..=8).collect()),
                q_cutoff: cfg.q_cutoff.unwrap_or(100),
                quadrature_points: cfg.quadrature_points.unwrap_or(8),
            };
            job.validate()?;
            let result = run_correlation(&job)?;
            let passed = cfg.tolerance.map(|tol| result.rows.iter().all(|r| r.rel_dev <= tol));
            if cfg.format == Some(Format::Json) {
                return emit_json(&cfg, command_name, passed, to_value(&result)?, runtime(clock));
            }
            let mut buf = Vec::new();
            result.write_csv(&mut buf)?;
            emit(&cfg, &buf)?;
            match passed {
                Some(false) => Err(Failure::Breach),
                _ => Ok(()),
            }
        }
        Command::Moment { conjecture, .. } => {
            json_only(&cfg, command_name)?;
            let (a, b) = sets(&cfg)?;
            let big_t = require(cfg.big_t, "T")?;
            let x = require(cfg.x, "X")?;
            let weight = SmoothWeight::standard();
            if *conjecture {
                let job = MomentJob {
                    a,
                    b,
                    big_t,
                    x,
                    prime_bound: cfg.p.unwrap_or(10_000),
                };
                let report = i_report(&job, weight)?;
                let passed = cfg.tolerance.map(|tol| report.rel_dev <= tol);
                let mut rt = runtime(clock);
                rt["phases"] = to_value(&report.timing)?;
                emit_json(&cfg, command_name, passed, report.payload(), rt)
            } else {
                if cfg.tolerance.is_some() {
                    return Err(Failure::Invalid("--tolerance needs --conjecture".into()));
                }
                let ta = ShiftedTauTable::build(&a, x as usize)?;
                let tb = ShiftedTauTable::build(&b, x as usize)?;
                let value = i_empirical(&ta, &tb, big_t, x, weight)?;
                emit_json(&cfg, command_name, None, to_value(&value)?, runtime(clock))
            }
        }
        Command::Recipe { .. } => {
            json_only(&cfg, command_name)?;
            let (a, b) = sets(&cfg)?;
            let big_t = require(cfg.big_t, "T")?;
            let max_swaps = cfg.max_swaps.unwrap_or(a.len().min(b.len()));
            let value = recipe_r(&a, &b, big_t, SmoothWeight::standard(), cfg.p.unwrap_or(10_000), max_swaps)?;
            emit_json(&cfg, command_name, None, to_value(&value)?, runtime(clock))
        }
        Command::TableBuild { table, .. } => {
            json_only(&cfg, command_name)?;
            let a = cfg.shifts_a()?.ok_or_else(|| Failure::Invalid("missing shift list (--shifts)".into()))?;
            let n = require(cfg.n, "N")?;
            let t = ShiftedTauTable::build(&a, n as usize)?;
            let mut bytes = Vec::new();
            t.write_to(&mut bytes)?;
            write_file(table, &bytes)?;
            let result = json!({ "table": table.display().to_string(), "entries": n, "bytes": bytes.len() });
            emit_json(&cfg, command_name, None, result, runtime(clock))
        }
    })
}
