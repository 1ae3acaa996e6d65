mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use goodcodes::ack::{self, LambdaIndex};
use goodcodes::bipartite::{self, BipartiteError, DisperserParams, DEFAULT_SUBSET_BUDGET};
use goodcodes::bounds::{self, BoundsError, ChainConfig, LowerBoundParams};
use goodcodes::builders::{self, BoosterParams, BuildError, BuildOptions, Built};
use goodcodes::circuit::LinearCircuit;
use goodcodes::codeprops::{self, CodeError, PgcParams, RangeDetectorParams};
use goodcodes::gf::Matrix;
use goodcodes::ledger::{upper_bound_ledger, ConstantTable, LedgerNode};
use goodcodes::seed::derive_seed;
use goodcodes::superconc::{self, LayeredDag, ScError};

use report::{CheckReport, Counters, RunReport};

const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Parser, Debug)]
#[command(
    name = "goodcodes",
    version,
    about = "Linear-circuit encoders, verifiers and size/depth calculators"
)]
struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Enumeration budget for exhaustive checks.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Primary output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Where to write the run report.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Use the desk-scale parameter regime instead of the literal one.
    #[arg(long, global = true)]
    scaled_constants: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inverse-Ackermann hierarchy.
    #[command(subcommand)]
    Ack(AckCmd),
    /// Linear circuit utilities.
    #[command(subcommand)]
    Circuit(CircuitCmd),
    /// Bipartite dispersers.
    #[command(subcommand)]
    Disperser(DisperserCmd),
    /// Randomized constructions.
    Build(BuildArgs),
    /// Exhaustive property checks.
    Check(CheckArgs),
    /// Superconcentrators.
    #[command(subcommand)]
    Sc(ScCmd),
    /// Size and depth bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
}

#[derive(Subcommand, Debug)]
enum AckCmd {
    Lambda {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u64,
    },
    Alpha {
        #[arg(long)]
        n: u64,
    },
    /// Ackermann function `A(i, j)`, printing HUGE past 2^63.
    #[command(name = "A")]
    A {
        #[arg(long)]
        i: u64,
        #[arg(long)]
        j: u64,
    },
    Table {
        #[arg(long, value_delimiter = ',', required = true)]
        ds: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<u64>,
    },
}

#[derive(Subcommand, Debug)]
enum CircuitCmd {
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        /// Input vector, comma separated field elements.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<u64>,
    },
    Matrix {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Sum of the outputs of several circuits on the same inputs.
    Compose {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Per-circuit output coefficients as JSON; all ones when absent.
        #[arg(long)]
        coeffs: Option<String>,
    },
    /// Feeds the outputs of the first circuit into the second.
    Stack {
        #[arg(long = "in", required = true, num_args = 2)]
        inputs: Vec<PathBuf>,
    },
    Collapse {
        #[arg(long = "in")]
        input: PathBuf,
    },
    ExportDot {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum DisperserCmd {
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 50)]
        max_trials: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BuildKind {
    Booster,
    Amplifier,
    Condenser,
    Pgc,
    Goodcode,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(value_enum)]
    kind: BuildKind,
    /// JSON object, inline or as a file path.
    #[arg(long)]
    params: String,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CheckKind {
    Pgc,
    Rd,
    Dist,
    Mds,
    Scind,
    Mindist,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(value_enum)]
    kind: CheckKind,
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    params: Option<String>,
}

#[derive(Subcommand, Debug)]
enum ScCmd {
    Verify {
        #[arg(long)]
        graph: PathBuf,
    },
    Tocode {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 10)]
        trials: u64,
    },
}

#[derive(Subcommand, Debug)]
enum BoundsCmd {
    Upper {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u32,
        /// Constant table as JSON; unit constants when absent.
        #[arg(long)]
        constants: Option<String>,
    },
    Lower {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        r: u64,
        /// Exact value such as `1/4` or `0.25`.
        #[arg(long)]
        eps: String,
        #[arg(long)]
        delta: String,
    },
    Depthlb {
        #[arg(long)]
        n: u64,
    },
    Fstar {
        #[arg(long)]
        max_n: u64,
    },
    Frontier {
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<u64>,
    },
}

/// What a command produced, before the report is assembled.
#[derive(Default)]
struct Outcome {
    params: Value,
    /// Primary output, written to `--out` or stdout.
    output: String,
    verdicts: Vec<Value>,
    counters: Counters,
    refuted: bool,
}

impl Outcome {
    fn new(params: Value, output: String) -> Self {
        Outcome {
            params,
            output,
            ..Default::default()
        }
    }
}

struct Ctx {
    seed: u64,
    budget: Option<u64>,
    format: Format,
    scaled: bool,
}

impl Ctx {
    fn budget_or(&self, default: u64) -> u64 {
        self.budget.unwrap_or(default)
    }

    fn build_options(&self, params: &Value) -> BuildOptions {
        let mut opts = if self.scaled {
            BuildOptions::scaled()
        } else {
            BuildOptions::literal()
        };
        if let Some(b) = self.budget {
            opts.budget = b;
        }
        if let Some(t) = params.get("max_trials").and_then(Value::as_u64) {
            opts.max_trials = t;
        }
        opts
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let code = run(cli);
    ExitCode::from(code)
}

fn run(cli: Cli) -> u8 {
    let start = Instant::now();
    let ctx = Ctx {
        seed: cli.seed,
        budget: cli.budget,
        format: cli.format,
        scaled: cli.scaled_constants,
    };
    let name = command_name(&cli.command);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let result = match builder.build() {
        Ok(pool) => pool.install(|| dispatch(&cli.command, &ctx)),
        Err(e) => Err(anyhow!(e)),
    };
    let (code, outcome) = match result {
        Ok(o) => (if o.refuted { 2 } else { 0 }, o),
        Err(e) => {
            eprintln!("error: {e:#}");
            let mut o = Outcome::default();
            o.verdicts.push(json!({ "error": format!("{e:#}") }));
            (exit_code_for(&e), o)
        }
    };
    let mut artifacts = Vec::new();
    if code == 0 || code == 2 {
        match &cli.out {
            Some(path) => {
                if let Err(e) = fs::write(path, &outcome.output) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return 1;
                }
                artifacts.push(path.display().to_string());
            }
            None => print!("{}", outcome.output),
        }
    }
    if let Some(path) = &cli.report {
        let report = RunReport {
            command: name,
            params: outcome.params,
            seed: cli.seed,
            mode: if cli.scaled_constants {
                "scaled"
            } else {
                "literal"
            },
            verdicts: outcome.verdicts,
            counters: outcome.counters,
            elapsed_ms: start.elapsed().as_millis() as u64,
            artifacts,
            exit_code: code as i32,
        };
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = fs::write(path, text + "\n") {
            eprintln!("error: writing {}: {e}", path.display());
            return 1;
        }
    }
    code
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    let exhausted = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<BuildError>(),
            Some(BuildError::TrialsExhausted { .. } | BuildError::BudgetExceeded { .. })
        ) || matches!(
            c.downcast_ref::<CodeError>(),
            Some(CodeError::BudgetExceeded { .. })
        ) || matches!(
            c.downcast_ref::<BipartiteError>(),
            Some(BipartiteError::BudgetExceeded { .. } | BipartiteError::TrialsExhausted { .. })
        ) || matches!(
            c.downcast_ref::<ScError>(),
            Some(ScError::BudgetExceeded { .. })
        ) || c.downcast_ref::<Exhausted>().is_some()
    });
    if exhausted {
        3
    } else {
        1
    }
}

/// A command-level search that ran out of trials.
#[derive(Debug)]
struct Exhausted(String);

impl std::error::Error for Exhausted {}

impl std::fmt::Display for Exhausted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn command_name(c: &Command) -> String {
    let s = match c {
        Command::Ack(a) => match a {
            AckCmd::Lambda { .. } => "ack lambda",
            AckCmd::Alpha { .. } => "ack alpha",
            AckCmd::A { .. } => "ack A",
            AckCmd::Table { .. } => "ack table",
        },
        Command::Circuit(c) => match c {
            CircuitCmd::Eval { .. } => "circuit eval",
            CircuitCmd::Matrix { .. } => "circuit matrix",
            CircuitCmd::Compose { .. } => "circuit compose",
            CircuitCmd::Stack { .. } => "circuit stack",
            CircuitCmd::Collapse { .. } => "circuit collapse",
            CircuitCmd::ExportDot { .. } => "circuit export-dot",
        },
        Command::Disperser(_) => "disperser sample",
        Command::Build(b) => {
            return format!(
                "build {}",
                b.kind.to_possible_value().expect("named").get_name()
            );
        }
        Command::Check(c) => {
            return format!(
                "check {}",
                c.kind.to_possible_value().expect("named").get_name()
            );
        }
        Command::Sc(ScCmd::Verify { .. }) => "sc verify",
        Command::Sc(ScCmd::Tocode { .. }) => "sc tocode",
        Command::Bounds(b) => match b {
            BoundsCmd::Upper { .. } => "bounds upper",
            BoundsCmd::Lower { .. } => "bounds lower",
            BoundsCmd::Depthlb { .. } => "bounds depthlb",
            BoundsCmd::Fstar { .. } => "bounds fstar",
            BoundsCmd::Frontier { .. } => "bounds frontier",
        },
    };
    s.to_string()
}

fn dispatch(cmd: &Command, ctx: &Ctx) -> Result<Outcome> {
    match cmd {
        Command::Ack(a) => run_ack(a, ctx),
        Command::Circuit(c) => run_circuit(c, ctx),
        Command::Disperser(DisperserCmd::Sample {
            n,
            m,
            k,
            eps,
            max_trials,
        }) => run_disperser(*n, *m, *k, *eps, *max_trials, ctx),
        Command::Build(b) => run_build(b, ctx),
        Command::Check(c) => run_check(c, ctx),
        Command::Sc(s) => run_sc(s, ctx),
        Command::Bounds(b) => run_bounds(b, ctx),
    }
}

fn line(v: impl std::fmt::Display) -> String {
    format!("{v}\n")
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Inline JSON when the argument looks like an object, otherwise a file.
fn json_arg(arg: &str) -> Result<Value> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return serde_json::from_str(arg).context("parsing inline JSON");
    }
    read_json(Path::new(arg))
}

fn get_f64(p: &Value, key: &str) -> Result<f64> {
    p.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| anyhow!("params: missing number {key:?}"))
}

fn get_usize(p: &Value, key: &str) -> Result<usize> {
    p.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| anyhow!("params: missing integer {key:?}"))
}

/// Parses `a/b`, a decimal, or an integer into an exact rational.
fn parse_exact(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || anyhow!("not a rational number: {s:?}");
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            bail!("zero denominator in {s:?}");
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(digits, scale));
    }
    Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
}

fn run_ack(cmd: &AckCmd, ctx: &Ctx) -> Result<Outcome> {
    Ok(match cmd {
        AckCmd::Lambda { d, n } => {
            let v = ack::lambda(LambdaIndex::new(*d)?, *n)?;
            Outcome::new(json!({ "d": d, "n": n }), line(v))
        }
        AckCmd::Alpha { n } => Outcome::new(json!({ "n": n }), line(ack::alpha(*n)?)),
        AckCmd::A { i, j } => {
            Outcome::new(json!({ "i": i, "j": j }), line(ack::ackermann(*i, *j)?))
        }
        AckCmd::Table { ds, ns } => {
            let mut rows = Vec::with_capacity(ns.len());
            for &n in ns {
                let vals = ds
                    .iter()
                    .map(|&d| ack::lambda_d(d, n))
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push((n, vals));
            }
            let out = match ctx.format {
                Format::Csv => {
                    let mut s = String::from("n");
                    for d in ds {
                        s += &format!(",lambda_{d}");
                    }
                    s.push('\n');
                    for (n, vals) in &rows {
                        s += &n.to_string();
                        for v in vals {
                            s += &format!(",{v}");
                        }
                        s.push('\n');
                    }
                    s
                }
                _ => {
                    let v: Vec<Value> = rows
                        .iter()
                        .map(|(n, vals)| {
                            let mut o = serde_json::Map::new();
                            o.insert("n".into(), json!(n));
                            for (d, v) in ds.iter().zip(vals) {
                                o.insert(format!("lambda_{d}"), json!(v));
                            }
                            Value::Object(o)
                        })
                        .collect();
                    pretty(&v)?
                }
            };
            Outcome::new(json!({ "ds": ds, "ns": ns }), out)
        }
    })
}

fn circuit_counters(c: &LinearCircuit) -> Counters {
    Counters {
        wires: c.size() as u64,
        depth: c.depth() as u64,
        ..Default::default()
    }
}

fn emit_circuit(c: &LinearCircuit, format: Format) -> Result<String> {
    match format {
        Format::Dot => Ok(c.to_dot()),
        _ => pretty(c),
    }
}

fn run_circuit(cmd: &CircuitCmd, ctx: &Ctx) -> Result<Outcome> {
    let paths = |ps: &[PathBuf]| {
        json!(ps
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>())
    };
    Ok(match cmd {
        CircuitCmd::Eval { input, x } => {
            let c: LinearCircuit = read_json(input)?;
            let y = c.eval(x)?;
            let out = match ctx.format {
                Format::Csv => line(y.iter().map(u64::to_string).collect::<Vec<_>>().join(",")),
                _ => line(serde_json::to_string(&y)?),
            };
            let mut o = Outcome::new(json!({ "in": input.display().to_string(), "x": x }), out);
            o.counters = circuit_counters(&c);
            o
        }
        CircuitCmd::Matrix { input } => {
            let c: LinearCircuit = read_json(input)?;
            let m = c.generator_matrix();
            let out = match ctx.format {
                Format::Csv => m
                    .to_rows()
                    .iter()
                    .map(|r| line(r.iter().map(u64::to_string).collect::<Vec<_>>().join(",")))
                    .collect(),
                _ => pretty(&m)?,
            };
            let mut o = Outcome::new(json!({ "in": input.display().to_string() }), out);
            o.counters = circuit_counters(&c);
            o
        }
        CircuitCmd::Compose { inputs, coeffs } => {
            let cs = inputs
                .iter()
                .map(|p| read_json(p))
                .collect::<Result<Vec<LinearCircuit>>>()?;
            let coeffs: Vec<Vec<u64>> = match coeffs {
                Some(s) => serde_json::from_value(json_arg(s)?)
                    .context("coefficients must be a list of lists")?,
                None => cs.iter().map(|c| vec![1; c.num_outputs()]).collect(),
            };
            let c = LinearCircuit::merge_outputs(&cs, &coeffs)?;
            let mut o = Outcome::new(
                json!({ "in": paths(inputs), "coeffs": coeffs }),
                emit_circuit(&c, ctx.format)?,
            );
            o.counters = circuit_counters(&c);
            o
        }
        CircuitCmd::Stack { inputs } => {
            let top: LinearCircuit = read_json(&inputs[0])?;
            let bottom: LinearCircuit = read_json(&inputs[1])?;
            let c = LinearCircuit::stack(&top, &bottom)?;
            let mut o = Outcome::new(
                json!({ "in": paths(inputs) }),
                emit_circuit(&c, ctx.format)?,
            );
            o.counters = circuit_counters(&c);
            o
        }
        CircuitCmd::Collapse { input } => {
            let c: LinearCircuit = read_json(input)?;
            let c = c.collapse_last_layer()?;
            let mut o = Outcome::new(
                json!({ "in": input.display().to_string() }),
                emit_circuit(&c, ctx.format)?,
            );
            o.counters = circuit_counters(&c);
            o
        }
        CircuitCmd::ExportDot { input } => {
            let c: LinearCircuit = read_json(input)?;
            let mut o = Outcome::new(json!({ "in": input.display().to_string() }), c.to_dot());
            o.counters = circuit_counters(&c);
            o
        }
    })
}

fn run_disperser(
    n: usize,
    m: usize,
    k: usize,
    eps: f64,
    max_trials: u64,
    ctx: &Ctx,
) -> Result<Outcome> {
    let p = DisperserParams::new(n, m, k, eps)?;
    let s = bipartite::sample_verified_disperser(
        &p,
        ctx.seed,
        max_trials,
        ctx.budget_or(DEFAULT_SUBSET_BUDGET),
    )?;
    let params = json!({ "n": n, "m": m, "k": k, "eps": eps, "max_trials": max_trials });
    let mut o = Outcome::new(params, pretty(&s.graph)?);
    o.verdicts
        .push(json!({ "ok": true, "degree": s.degree, "trial_seed": s.seed }));
    o.counters = Counters {
        trials: s.trials,
        enumerated: s.enumerated,
        wires: s.graph.edge_count() as u64,
        depth: 1,
    };
    Ok(o)
}

fn run_build(b: &BuildArgs, ctx: &Ctx) -> Result<Outcome> {
    let p = json_arg(&b.params)?;
    let opts = ctx.build_options(&p);
    let seed = ctx.seed;
    let built: Built = match b.kind {
        BuildKind::Booster => {
            let bp = BoosterParams::new(
                get_f64(&p, "delta")?,
                get_f64(&p, "c")?,
                get_f64(&p, "gamma")?,
            )?;
            builders::build_rate_booster(&bp, get_usize(&p, "n")?, seed, &opts)?
        }
        BuildKind::Amplifier => {
            builders::build_amplifier(get_usize(&p, "n")?, get_usize(&p, "m")?, seed, &opts)?
        }
        BuildKind::Condenser => builders::search_condenser(
            get_usize(&p, "n")?,
            get_f64(&p, "r")?,
            get_f64(&p, "s")?,
            seed,
            &opts,
        )?,
        BuildKind::Pgc => {
            let n = get_usize(&p, "n")?;
            match p.get("kind").and_then(Value::as_str).unwrap_or("depth2") {
                "depth2" => {
                    let pp = opts.regime.pgc(n, get_f64(&p, "r")?, get_f64(&p, "s")?)?;
                    builders::sample_depth2_pgc(&pp, seed, &opts)?
                }
                "reduced" => builders::build_reduced(
                    n,
                    get_f64(&p, "r")?,
                    get_f64(&p, "s")?,
                    get_f64(&p, "t")?,
                    seed,
                    &opts,
                )?,
                "handy" => builders::build_handy(n, get_usize(&p, "r")? as u64, seed, &opts)?,
                other => bail!("params: unknown pgc kind {other:?} (depth2, reduced, handy)"),
            }
        }
        BuildKind::Goodcode => builders::build_good_code(
            get_usize(&p, "n")?,
            get_f64(&p, "rate")?,
            get_f64(&p, "delta")?,
            get_usize(&p, "depth")?,
            seed,
            &opts,
        )?,
    };
    let r = &built.report;
    let mut o = Outcome::new(p.clone(), emit_circuit(&built.circuit, ctx.format)?);
    o.verdicts.push(serde_json::to_value(r)?);
    o.counters = Counters {
        trials: total_trials(r),
        enumerated: r.enumerated,
        wires: r.size as u64,
        depth: r.depth as u64,
    };
    Ok(o)
}

fn total_trials(r: &builders::BuildReport) -> u64 {
    r.trials + r.children.iter().map(total_trials).sum::<u64>()
}

fn check_outcome<W: Serialize>(
    params: Value,
    verdict: goodcodes::Verdict<W>,
    start: Instant,
    extra: Option<Value>,
) -> Result<Outcome> {
    let report = CheckReport {
        ok: verdict.is_ok(),
        counterexample: serde_json::to_value(&verdict.counterexample)?,
        enumerated: verdict.enumerated,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    let mut o = Outcome::new(params, pretty(&report)?);
    let mut v = json!({ "ok": report.ok, "counterexample": report.counterexample });
    if let Some(Value::Object(extra)) = extra {
        v.as_object_mut().expect("object").extend(extra);
    }
    o.verdicts.push(v);
    o.counters.enumerated = verdict.enumerated;
    o.refuted = !report.ok;
    Ok(o)
}

fn run_check(c: &CheckArgs, ctx: &Ctx) -> Result<Outcome> {
    let start = Instant::now();
    let params = match &c.params {
        Some(s) => json_arg(s)?,
        None => json!({}),
    };
    let circuit = || -> Result<LinearCircuit> {
        read_json(
            c.circuit
                .as_deref()
                .ok_or_else(|| anyhow!("--circuit is required"))?,
        )
    };
    let matrix = || -> Result<Matrix> {
        read_json(
            c.matrix
                .as_deref()
                .ok_or_else(|| anyhow!("--matrix is required"))?,
        )
    };
    let mut shown = params.clone();
    if let Some(p) = &c.circuit {
        shown["circuit"] = json!(p.display().to_string());
    }
    if let Some(p) = &c.matrix {
        shown["matrix"] = json!(p.display().to_string());
    }
    match c.kind {
        CheckKind::Pgc => {
            let ckt = circuit()?;
            let w_min = match params.get("w_min").and_then(Value::as_f64) {
                Some(w) => w,
                None => get_f64(&params, "w")?,
            };
            let pp = PgcParams::new(
                ckt.num_inputs(),
                ckt.num_outputs(),
                get_f64(&params, "r")?,
                get_f64(&params, "s")?,
                w_min,
            )?;
            let v =
                codeprops::check_pgc(&ckt, &pp, ctx.budget_or(codeprops::DEFAULT_VECTOR_BUDGET))?;
            check_outcome(shown, v, start, None)
        }
        CheckKind::Rd => {
            let ckt = circuit()?;
            let rp = RangeDetectorParams::new(
                ckt.num_inputs(),
                ckt.num_outputs(),
                get_f64(&params, "ell")?,
                get_f64(&params, "k")?,
                get_f64(&params, "r")?,
                params.get("s").and_then(Value::as_f64),
            )?;
            let v = codeprops::check_range_detector(
                &ckt,
                &rp,
                ctx.budget_or(codeprops::DEFAULT_VECTOR_BUDGET),
            )?;
            check_outcome(shown, v, start, None)
        }
        CheckKind::Dist => {
            let v = codeprops::dist_definition_check(
                &matrix()?,
                ctx.budget_or(codeprops::DEFAULT_VECTOR_BUDGET),
            )?;
            check_outcome(shown, v, start, None)
        }
        CheckKind::Mds => {
            let v = codeprops::is_mds(&matrix()?, ctx.budget_or(codeprops::DEFAULT_MINOR_BUDGET))?;
            check_outcome(shown, v, start, None)
        }
        CheckKind::Scind => {
            let v = codeprops::is_sc_induced_code(
                &matrix()?,
                ctx.budget_or(codeprops::DEFAULT_MINOR_BUDGET),
            )?;
            check_outcome(shown, v, start, None)
        }
        CheckKind::Mindist => {
            let md = codeprops::min_distance(
                &circuit()?,
                ctx.budget_or(codeprops::DEFAULT_VECTOR_BUDGET),
            )?;
            let want = params.get("d").and_then(Value::as_u64).unwrap_or(0) as usize;
            let verdict = if md.distance >= want {
                goodcodes::Verdict::ok(md.enumerated)
            } else {
                goodcodes::Verdict::refuted(md.witness.clone(), md.enumerated)
            };
            check_outcome(
                shown,
                verdict,
                start,
                Some(json!({ "distance": md.distance })),
            )
        }
    }
}

fn read_graph(path: &Path) -> Result<LayeredDag> {
    if path.extension().is_some_and(|e| e == "txt") {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(LayeredDag::from_edge_list(&text)?);
    }
    read_json(path)
}

fn run_sc(cmd: &ScCmd, ctx: &Ctx) -> Result<Outcome> {
    match cmd {
        ScCmd::Verify { graph } => {
            let start = Instant::now();
            let g = read_graph(graph)?;
            let v = superconc::is_superconcentrator(&g, ctx.budget_or(DEFAULT_BUDGET))?;
            let mut o = check_outcome(
                json!({ "graph": graph.display().to_string() }),
                v,
                start,
                None,
            )?;
            o.counters.depth = g.longest_path() as u64;
            o.counters.wires = g.edges().len() as u64;
            Ok(o)
        }
        ScCmd::Tocode { graph, q, trials } => {
            let g = read_graph(graph)?;
            let params = json!({ "graph": graph.display().to_string(), "q": q, "trials": trials });
            let budget = ctx.budget_or(codeprops::DEFAULT_MINOR_BUDGET);
            let mut enumerated = 0;
            for t in 0..*trials {
                let s = derive_seed(ctx.seed, "sc-tocode", t);
                let rep = superconc::sc_code_attempt(&g, *q, s, budget)?;
                enumerated += rep.minors_checked;
                if rep.success {
                    let c = superconc::sc_to_circuit(&g, *q, s)?;
                    let mut o = Outcome::new(params, emit_circuit(&c, ctx.format)?);
                    o.verdicts.push(serde_json::to_value(&rep)?);
                    o.counters = Counters {
                        trials: t + 1,
                        enumerated,
                        wires: c.size() as u64,
                        depth: c.depth() as u64,
                    };
                    return Ok(o);
                }
            }
            Err(Exhausted(format!(
                "no assignment over GF({q}) gave a code in {trials} trials"
            ))
            .into())
        }
    }
}

fn rational_json(r: &BigRational) -> Value {
    if r.is_integer() {
        if let Some(v) = r.to_integer().to_u64() {
            return json!(v);
        }
    }
    json!(r.to_string())
}

fn ledger_node_json(node: &LedgerNode<BigRational>) -> Value {
    json!({
        "step": node.step.to_string(),
        "params": node.params.to_string(),
        "wires": rational_json(&node.wires),
        "total": rational_json(&node.total),
        "claim": node.claim.as_ref().map(rational_json),
        "conditions": node.conditions.iter().map(|(k, v)| json!({ "condition": k, "holds": v })).collect::<Vec<_>>(),
        "children": node.children.iter().map(ledger_node_json).collect::<Vec<_>>(),
    })
}

fn bounds_err(e: BoundsError) -> anyhow::Error {
    anyhow!(e)
}

fn run_bounds(cmd: &BoundsCmd, ctx: &Ctx) -> Result<Outcome> {
    match cmd {
        BoundsCmd::Upper { n, d, constants } => {
            let ct = match constants {
                Some(s) => ConstantTable::<BigRational>::from_json(&json_arg(s)?)?,
                None => ConstantTable::unit(),
            };
            let ledger = upper_bound_ledger(*n, *d, &ct)?;
            let out = match ctx.format {
                Format::Csv => ledger.to_csv(),
                _ => pretty(&json!({
                    "n": ledger.n,
                    "d": ledger.d,
                    "c": rational_json(&ledger.c),
                    "fanin": rational_json(&ledger.fanin),
                    "constraints_hold": ledger.constraints_hold,
                    "total": rational_json(ledger.total()),
                    "root": ledger_node_json(&ledger.root),
                }))?,
            };
            let mut o = Outcome::new(json!({ "n": n, "d": d, "constants": constants }), out);
            o.verdicts.push(json!({
                "total": rational_json(ledger.total()),
                "claims_hold": ledger.all_claims_hold(),
                "constraints_hold": ledger.constraints_hold,
            }));
            o.counters.wires = ledger.total().to_integer().to_u64().unwrap_or(u64::MAX);
            o.counters.depth = u64::from(*d);
            Ok(o)
        }
        BoundsCmd::Lower {
            n,
            d,
            r,
            eps,
            delta,
        } => {
            let (e, dl) = (parse_exact(eps)?, parse_exact(delta)?);
            let p = LowerBoundParams::with_default_omega(*n, *d, *r, e.clone(), dl.clone())
                .map_err(bounds_err)?;
            let refined = bounds::lb_refined(&p);
            let pf = LowerBoundParams::with_default_omega(
                *n,
                *d,
                *r,
                e.to_f64().unwrap_or(f64::NAN),
                dl.to_f64().unwrap_or(f64::NAN),
            )
            .map_err(bounds_err)?;
            let mut v = json!({
                "refined": rational_json(&refined),
                "refined_f64": refined.to_f64(),
                "closed_form_f64": bounds::lb_closed_form(&pf),
            });
            if *d == 1 {
                v["depth1"] = rational_json(&bounds::lb_depth1(*n, *r, e, dl).map_err(bounds_err)?);
            }
            let mut o = Outcome::new(
                json!({ "n": n, "d": d, "r": r, "eps": eps, "delta": delta }),
                pretty(&v)?,
            );
            o.verdicts.push(v);
            Ok(o)
        }
        BoundsCmd::Depthlb { n } => {
            let v = bounds::depth_lower_bound(*n).map_err(bounds_err)?;
            let cert =
                bounds::depth_chain_certificate(*n, &ChainConfig::default()).map_err(bounds_err)?;
            let mut o = Outcome::new(json!({ "n": n }), line(v));
            o.verdicts.push(json!({ "depth_lower_bound": v, "alpha": cert.alpha, "chain_holds": cert.all_hold }));
            o.refuted = !cert.all_hold;
            Ok(o)
        }
        BoundsCmd::Fstar { max_n } => {
            let rep = bounds::check_fstar_lemma(*max_n).map_err(bounds_err)?;
            let mut o = Outcome::new(json!({ "max_n": max_n }), pretty(&rep)?);
            o.refuted = rep.violation.is_some();
            o.counters.enumerated = rep.checked_pairs;
            o.verdicts
                .push(json!({ "ok": !o.refuted, "counterexample": rep.violation }));
            Ok(o)
        }
        BoundsCmd::Frontier { ns } => {
            let rows = ns
                .iter()
                .map(|&n| {
                    Ok((
                        n,
                        bounds::depth_lower_bound(n).map_err(bounds_err)?,
                        ack::alpha(n)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let out = match ctx.format {
                Format::Csv => {
                    let mut s = String::from("n,depth_lb,alpha\n");
                    for (n, lb, a) in &rows {
                        s += &format!("{n},{lb},{a}\n");
                    }
                    s
                }
                _ => pretty(
                    &rows
                        .iter()
                        .map(|(n, lb, a)| json!({ "n": n, "depth_lb": lb, "alpha": a }))
                        .collect::<Vec<_>>(),
                )?,
            };
            Ok(Outcome::new(json!({ "ns": ns }), out))
        }
    }
}
