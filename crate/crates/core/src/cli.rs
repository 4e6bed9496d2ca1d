//! The `cubepart` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::Error;
use crate::optimize::{
    certificates, parse_system, solve_z2, system_to_polynomial, BoundCertificate, SolveConfig,
};
use crate::oracle::{exact_max_with, exact_partition_with, OracleConfig};
use crate::poly::{parse_polynomial, CubePolynomial};
use crate::rounding::{greedy_value, round_to_point, ConditioningTrace, RoundingConfig, VariableOrder};
use crate::selftest::{run_selftest, Tier};
use crate::taylor::{approx_partition_with, ApproxConfig, MomentConfig, PartitionEstimate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const ENV_ORACLE_CAP: &str = "CUBEPART_ORACLE_CAP";
pub const ENV_MAX_TERMS: &str = "CUBEPART_MAX_TERMS";

#[derive(Debug, Parser)]
#[command(
    name = "cubepart",
    version,
    about = "Partition functions and maxima of polynomials on the Boolean cube"
)]
struct Cli {
    /// Print a single JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for internal parallelism.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// E e^{λf} by exhaustive enumeration.
    Exact {
        file: PathBuf,
        /// `re[,im]`.
        #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
        lambda: Complex64,
        /// Split the enumeration across threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Taylor approximation of E e^{λf} with its error bound.
    Approx {
        file: PathBuf,
        #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Taylor order, overriding the automatic choice.
        #[arg(long)]
        m: Option<usize>,
        /// Evaluate outside the working disk (no error bound).
        #[arg(long)]
        force: bool,
        /// Drop terms with |coefficient| at or below this value from every power.
        #[arg(long, default_value_t = 0.0)]
        prune: f64,
    },
    /// Round to a cube point by successive conditioning.
    Round {
        file: PathBuf,
        /// Real and positive.
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Facets with at most this many active variables are enumerated.
        #[arg(long, default_value_t = crate::rounding::DEFAULT_EXACT_THRESHOLD)]
        exact_threshold: usize,
        /// Fix x_1 first instead of x_n.
        #[arg(long)]
        ascending: bool,
    },
    /// Maximise the number of satisfied equations of a system over Z2.
    #[command(name = "solve-z2")]
    SolveZ2 {
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Overrides the default λ.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = crate::rounding::DEFAULT_EXACT_THRESHOLD)]
        exact_threshold: usize,
    },
    /// Lower bounds on E e^{λf} for the polynomial of a system over Z2.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// Oracle-backed invariant suites.
    Selftest {
        #[arg(long, default_value = "small")]
        tier: Tier,
    },
}

fn parse_lambda(s: &str) -> Result<Complex64, String> {
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (a, b),
        None => (s, "0"),
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("bad number `{t}` in `{s}`"))
    };
    Ok(Complex64::new(num(re)?, num(im)?))
}

struct Env {
    oracle: OracleConfig,
    moments: MomentConfig,
}

fn read_env() -> Result<Env, String> {
    let mut oracle = OracleConfig::default();
    let mut moments = MomentConfig::default();
    if let Ok(v) = std::env::var(ENV_ORACLE_CAP) {
        oracle.cap = v.trim().parse().map_err(|_| format!("{ENV_ORACLE_CAP}: bad value `{v}`"))?;
    }
    if let Ok(v) = std::env::var(ENV_MAX_TERMS) {
        moments.max_terms = v.trim().parse().map_err(|_| format!("{ENV_MAX_TERMS}: bad value `{v}`"))?;
    }
    Ok(Env { oracle, moments })
}

enum Failure {
    Lib(Error),
    Io(String),
    Selftest(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OutsideDisk { .. }
        | Error::HypothesisViolated(_)
        | Error::OracleCapExceeded { .. }
        | Error::EpsilonTooSmall { .. }
        | Error::TooFewVariables(_)
        | Error::UncertifiableStep { .. }
        | Error::TermLimitExceeded { .. }
        | Error::NotSignCoefficient { .. }
        | Error::NegativeCoefficient { .. }
        | Error::ComplexCoefficients => EXIT_HYPOTHESIS,
        _ => EXIT_FAILURE,
    }
}

/// Runs the binary on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let env = match read_env() {
        Ok(e) => e,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let json = cli.json;
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, &env, json)),
            Err(e) => Err(Failure::Io(format!("thread pool: {e}"))),
        },
        None => dispatch(cli.command, &env, json),
    };
    match result {
        Ok(text) => {
            let _ = write!(out, "{text}");
            EXIT_OK
        }
        Err(Failure::Selftest(text)) => {
            let _ = write!(out, "{text}");
            EXIT_FAILURE
        }
        Err(f) => {
            let (code, msg) = match f {
                Failure::Lib(e) => (exit_code(&e), e.to_string()),
                Failure::Io(m) => (EXIT_FAILURE, m),
                Failure::Selftest(_) => unreachable!(),
            };
            if json {
                let _ = writeln!(out, "{}", json!({ "error": msg, "exit": code }));
            }
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_poly(path: &Path) -> Result<CubePolynomial, Failure> {
    Ok(parse_polynomial(&read_file(path)?)?)
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn cplx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn dispatch(cmd: Command, env: &Env, json: bool) -> Result<String, Failure> {
    match cmd {
        Command::Exact { file, lambda, parallel } => {
            let f = read_poly(&file)?;
            let cfg = OracleConfig { parallel, ..env.oracle.clone() };
            let z = exact_partition_with(&f, lambda, &cfg)?;
            Ok(if json {
                format!("{}\n", json!({ "partition": cplx(z) }))
            } else {
                format!("partition = {} {}\n", sci(z.re), sci(z.im))
            })
        }
        Command::Approx { file, lambda, eps, m, force, prune } => {
            let f = read_poly(&file)?;
            let cfg = ApproxConfig {
                m,
                force,
                dim: None,
                moments: MomentConfig { prune_threshold: prune, ..env.moments.clone() },
            };
            let est = approx_partition_with(&f, lambda, eps, &cfg)?;
            Ok(if json { format!("{}\n", estimate_json(&est)) } else { est.to_kv() })
        }
        Command::Round { file, lambda, eps, exact_threshold, ascending } => {
            let f = read_poly(&file)?;
            let cfg = RoundingConfig {
                exact_threshold,
                order: if ascending { VariableOrder::Ascending } else { VariableOrder::Descending },
                oracle: env.oracle.clone(),
                moments: env.moments.clone(),
            };
            let trace = round_to_point(&f, lambda, eps, &cfg)?;
            let g = greedy_value(&trace, &f)?;
            if json {
                let mut v = trace_json(&trace);
                v["value"] = json!(g.value);
                v["certified_lower"] = g.certified_lower.map_or(Value::Null, |x| json!(x));
                return Ok(format!("{v}\n"));
            }
            let mut text = trace.to_log();
            text.push_str(&format!("value = {}\n", sci(g.value)));
            if let Some(l) = g.certified_lower {
                text.push_str(&format!("certified_lower = {}\n", sci(l)));
            }
            Ok(text)
        }
        Command::SolveZ2 { file, eps, lambda, exact_threshold } => {
            let sys = parse_system(&read_file(&file)?)?;
            let cfg = SolveConfig {
                lambda,
                rounding: RoundingConfig {
                    exact_threshold,
                    oracle: env.oracle.clone(),
                    moments: env.moments.clone(),
                    ..Default::default()
                },
            };
            let s = solve_z2(&sys, eps, &cfg)?;
            let z: Vec<String> = s.assignment.iter().map(u8::to_string).collect();
            if json {
                let v = json!({
                    "z": s.assignment,
                    "satisfied": s.satisfied,
                    "total": s.total,
                    "lambda": s.lambda,
                    "value": s.value,
                    "exact_max": s.exact_max,
                    "certified_satisfied": s.certified_satisfied,
                    "certificates": s.certificates.iter().map(cert_json).collect::<Vec<_>>(),
                });
                return Ok(format!("{v}\n"));
            }
            let mut text = format!("z = {}\nsatisfied = {}\ntotal = {}\n", z.join(" "), s.satisfied, s.total);
            text.push_str(&format!("lambda = {}\nvalue = {}\n", sci(s.lambda), sci(s.value)));
            if let Some(m) = s.exact_max {
                text.push_str(&format!("exact_max = {}\n", sci(m)));
            }
            if let Some(c) = s.certified_satisfied {
                text.push_str(&format!("certified_satisfied = {}\n", sci(c)));
            }
            for c in &s.certificates {
                text.push('\n');
                text.push_str(&c.to_kv());
            }
            Ok(text)
        }
        Command::Bounds { file, lambda } => {
            let sys = parse_system(&read_file(&file)?)?;
            let f = system_to_polynomial(&sys);
            let (best_value, best) = match exact_max_with(&f, &env.oracle) {
                Ok(r) => r,
                Err(Error::OracleCapExceeded { .. }) => {
                    let cfg = RoundingConfig {
                        oracle: env.oracle.clone(),
                        moments: env.moments.clone(),
                        ..Default::default()
                    };
                    let solved = solve_z2(&sys, 0.5, &SolveConfig { lambda: None, rounding: cfg })?;
                    (solved.value, solved.trace.point)
                }
                Err(e) => return Err(e.into()),
            };
            let certs = certificates(&f, lambda, &best, best_value)?;
            if json {
                let v = json!({ "certificates": certs.iter().map(cert_json).collect::<Vec<_>>() });
                return Ok(format!("{v}\n"));
            }
            Ok(certs.iter().map(BoundCertificate::to_kv).collect::<Vec<_>>().join("\n"))
        }
        Command::Selftest { tier } => {
            let rep = run_selftest(tier)?;
            let text = if json {
                let suites: Vec<Value> = rep
                    .suites
                    .iter()
                    .map(|s| json!({ "name": s.name, "cases": s.cases, "failures": s.failures, "counterexample": s.counterexample }))
                    .collect();
                format!("{}\n", json!({ "tier": tier.name(), "passed": rep.passed(), "suites": suites }))
            } else {
                rep.to_text()
            };
            if rep.passed() {
                Ok(text)
            } else {
                Err(Failure::Selftest(text))
            }
        }
    }
}

fn estimate_json(e: &PartitionEstimate) -> Value {
    json!({
        "lambda": cplx(e.lambda),
        "m": e.m,
        "t_m": cplx(e.t_m),
        "estimate": cplx(e.estimate),
        "error_bound": finite_or_null(e.error_bound),
        "within_disk": e.within_disk,
        "prune": e.prune_threshold,
    })
}

fn trace_json(t: &ConditioningTrace) -> Value {
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| {
            json!({
                "var": s.var + 1,
                "sign": s.sign,
                "est_plus": s.est_plus,
                "est_minus": s.est_minus,
                "bound": s.bound,
                "exact": s.exact,
            })
        })
        .collect();
    json!({ "steps": steps, "point": t.point.coords() })
}

fn cert_json(c: &BoundCertificate) -> Value {
    let p = &c.params;
    json!({
        "bound": c.which.name(),
        "hypotheses_met": c.hypotheses_met,
        "reasons": c.reasons,
        "value": finite_or_null(c.value),
        "lambda": p.lambda,
        "delta": p.delta,
        "k": p.k,
        "F": p.f_count,
        "G": p.g_count,
        "H": p.h_count,
    })
}
