mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, RunConfig};
use gensub::densities::{catalog, DensityLaw};
use gensub::hfox::{h_eval, representations, HParams};
use gensub::mellin;
use gensub::samplers::{sample_process, ProcessExpr};
use gensub::verify::{self, RunOptions, Suite, SuiteReport, Summary, VerificationReport};
use output::{num, to_json};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gensub", version, about = "Generalized Gamma subordination toolkit")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML configuration merged under the command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form densities.
    #[command(subcommand)]
    Density(DensityCmd),
    /// Draw marginal samples of a process expression as CSV.
    Sample(SampleArgs),
    /// Fox H-function evaluation.
    #[command(subcommand)]
    Hfox(HfoxCmd),
    /// Symbolic Mellin comparisons.
    #[command(subcommand)]
    Mellin(MellinCmd),
    /// Verification suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Merge JSON verification reports into one CSV table.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum DensityCmd {
    /// Print the catalog of laws with example parameters.
    List,
    /// Evaluate a density at one point.
    Eval(DensityEvalArgs),
}

#[derive(Args)]
struct DensityEvalArgs {
    #[arg(long)]
    law: String,
    #[arg(long)]
    x: Option<f64>,
    /// Comma-separated coordinates for laws on ℝⁿ or on the quadrant.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    /// Clock of `gg`: raw, tilde or affine.
    #[arg(long)]
    clock: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
}

#[derive(Args)]
struct SampleArgs {
    /// Process expression, e.g. `compose(ggt(2, 0.5), ggt(-2, 0.5))`.
    #[arg(long)]
    expr: String,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum HfoxCmd {
    /// Evaluate H^{m,n}_{p,q} at `x`, or a named density representation at `(x, t)`.
    Eval(HfoxEvalArgs),
    /// List the density representations.
    List,
}

#[derive(Args)]
struct HfoxEvalArgs {
    #[arg(long)]
    x: f64,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Upper parameters as `a:alpha` pairs separated by commas.
    #[arg(long, allow_hyphen_values = true)]
    upper: Option<String>,
    /// Lower parameters as `b:beta` pairs separated by commas.
    #[arg(long, allow_hyphen_values = true)]
    lower: Option<String>,
    /// Label of a density representation (see `hfox list`).
    #[arg(long)]
    rep: Option<String>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum MellinCmd {
    /// Compare the two sides of a registry identity on the strip grid.
    Prove { case_id: String },
    /// List registry identities.
    List,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Run a suite and report.
    Run(VerifyRunArgs),
}

#[derive(Args)]
struct VerifyRunArgs {
    /// mellin, mc, pde, cov or all.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    case: Option<String>,
    /// Seeds as a comma list or an inclusive range `a..b`.
    #[arg(long = "seed-set")]
    seed_set: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    covariance_samples: Option<usize>,
    /// Write the full JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output CSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Verification(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Verification(_) => 1,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Verification(m) | Failure::Io(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn io_err<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn emit(text: &str, path: Option<&Path>) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, text).map_err(io_err(p)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn density_eval(a: &DensityEvalArgs) -> Outcome {
    let mut p = BTreeMap::new();
    let named = [
        ("mu", a.mu),
        ("gamma", a.gamma),
        ("mu1", a.mu1),
        ("mu2", a.mu2),
        ("nu", a.nu),
        ("rho", a.rho),
        ("hurst", a.hurst),
        ("n", a.n),
        ("alpha", a.alpha),
        ("beta", a.beta),
    ];
    for (k, v) in named {
        if let Some(v) = v {
            p.insert(k.to_string(), v);
        }
    }
    if let Some(c) = &a.clock {
        let code = match c.as_str() {
            "raw" => 0.0,
            "tilde" => 1.0,
            "affine" => 2.0,
            other => return Err(Failure::Usage(format!("unknown clock `{other}`"))),
        };
        p.insert("clock".into(), code);
    }
    let law = DensityLaw::from_params(&a.law, &p).map_err(usage)?;
    let value = match (&a.point, a.x) {
        (Some(pt), None) => law.eval_point(pt, a.t),
        (None, Some(x)) => law.eval(x, a.t),
        _ => return Err(Failure::Usage("give exactly one of --x and --point".into())),
    }
    .map_err(usage)?;
    #[derive(Serialize)]
    struct Out {
        value: f64,
    }
    emit(&to_json(&Out { value }), None)
}

fn sample(a: &SampleArgs, cfg: &RunConfig) -> Outcome {
    let expr = ProcessExpr::parse(&a.expr).map_err(usage)?;
    let t = a.t.or(cfg.sample.t).ok_or_else(|| Failure::Usage("missing --t".into()))?;
    let n = a.n.or(cfg.sample.n).ok_or_else(|| Failure::Usage("missing --n".into()))?;
    let seed = a.seed.or(cfg.sample.seed).unwrap_or(0);
    if n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let batch = sample_process(&expr, t, n, seed).map_err(usage)?;
    let mut text = format!("# expr_digest={} t={} seed={}\n", batch.expr_digest, num(t), seed);
    for v in &batch.values {
        text.push_str(&num(*v));
        text.push('\n');
    }
    emit(&text, a.out.as_deref())
}

fn parse_pairs(s: &str) -> Result<Vec<(f64, f64)>, Failure> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| {
            let (a, b) = item.split_once(':').ok_or_else(|| Failure::Usage(format!("expected `value:weight`, got `{item}`")))?;
            let f = |v: &str| v.trim().parse::<f64>().map_err(|e| Failure::Usage(format!("`{v}`: {e}")));
            Ok((f(a)?, f(b)?))
        })
        .collect()
}

fn hfox_eval(a: &HfoxEvalArgs, cfg: &RunConfig) -> Outcome {
    let tol = a.tol.or(cfg.hfox.tol).unwrap_or(1e-10);
    if let Some(label) = &a.rep {
        let rep = representations()
            .into_iter()
            .find(|r| &r.label == label)
            .ok_or_else(|| Failure::Usage(format!("unknown representation `{label}`")))?;
        let t = a.t.ok_or_else(|| Failure::Usage("--rep needs --t".into()))?;
        let value = rep.eval(a.x, t, tol).map_err(usage)?;
        let closed = rep.law.eval(a.x, t).map_err(usage)?;
        #[derive(Serialize)]
        struct Out {
            label: String,
            value: f64,
            closed_form: f64,
        }
        return emit(&to_json(&Out { label: rep.label, value, closed_form: closed }), None);
    }
    let lower = parse_pairs(a.lower.as_deref().ok_or_else(|| Failure::Usage("missing --lower".into()))?)?;
    let upper = parse_pairs(a.upper.as_deref().unwrap_or(""))?;
    let m = a.m.unwrap_or(lower.len());
    let n = a.n.unwrap_or(0);
    let params = HParams::new(m, n, upper, lower).map_err(usage)?;
    let v = h_eval(&params, a.x, tol).map_err(usage)?;
    emit(&to_json(&v), None)
}

fn mellin_prove(id: &str) -> Outcome {
    let case = verify::find_case(id).map_err(usage)?;
    let (Some(f), Some(g)) = (case.lhs.mellin_form(), case.rhs.mellin_form()) else {
        return Err(Failure::Usage(format!("`{id}` has a side outside the Gamma-product family")));
    };
    let cmp = mellin::equal_on_strip(&f, &g).map_err(usage)?;
    let report = verify::mellin_check(&case).map_err(usage)?;
    #[derive(Serialize)]
    struct Out<'a> {
        case_id: &'a str,
        statement: &'a str,
        lhs: String,
        rhs: String,
        lhs_form: &'a mellin::MellinForm,
        rhs_form: &'a mellin::MellinForm,
        comparison: &'a mellin::StripComparison,
        negative_control: bool,
        passed: bool,
    }
    let out = Out {
        case_id: &case.id,
        statement: &case.statement,
        lhs: case.lhs.to_string(),
        rhs: case.rhs.to_string(),
        lhs_form: &f,
        rhs_form: &g,
        comparison: &cmp,
        negative_control: case.negative_control,
        passed: report.passed,
    };
    emit(&to_json(&out), None)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{id}: max relative deviation {}", num(cmp.max_rel_dev))))
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Failure> {
    let p = |v: &str| v.trim().parse::<u64>().map_err(|e| Failure::Usage(format!("seed `{v}`: {e}")));
    let seeds = match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (p(a)?, p(b)?);
            if a > b {
                return Err(Failure::Usage(format!("empty seed range {s}")));
            }
            (a..=b).collect()
        }
        None => s.split(',').map(p).collect::<Result<Vec<_>, _>>()?,
    };
    Ok(seeds)
}

fn print_table(reports: &[VerificationReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&format!(
            "{:<6} {:<40} {:<10} statistic={} threshold={}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.case_id,
            format!("{:?}", r.method).to_lowercase(),
            num(r.statistic),
            num(r.threshold)
        ));
    }
    s
}

fn verify_run(a: &VerifyRunArgs, cfg: &RunConfig) -> Outcome {
    let v = &cfg.verify;
    let mut opts = RunOptions::default();
    if let Some(s) = a.suite.as_deref().or(v.suite.as_deref()) {
        opts.suite = s.parse::<Suite>().map_err(usage)?;
    }
    opts.case = a.case.clone();
    if let Some(s) = &a.seed_set {
        opts.seeds = parse_seeds(s)?;
    } else if let Some(s) = &v.seeds {
        opts.seeds = s.clone();
    }
    if let Some(n) = a.samples.or(v.samples) {
        opts.samples = n;
    }
    if let Some(x) = a.alpha.or(v.alpha) {
        opts.alpha = x;
    }
    if let Some(n) = a.covariance_samples.or(v.covariance_samples) {
        opts.covariance_samples = n;
    }
    let report: SuiteReport = verify::run(&opts).map_err(usage)?;
    if let Some(path) = a.json.as_ref().or(v.json.as_ref()) {
        std::fs::write(path, to_json(&report)).map_err(io_err(path))?;
    }
    let s = report.summary;
    let text = format!("{}total={} passed={} failed={}\n", print_table(&report.reports), s.total, s.passed, s.failed);
    emit(&text, None)?;
    if s.failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} of {} checks failed", s.failed, s.total)))
    }
}

fn report(a: &ReportArgs) -> Outcome {
    let mut all: Vec<VerificationReport> = Vec::new();
    for path in &a.inputs {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let r: SuiteReport = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        all.extend(r.reports);
    }
    let mut csv = String::from("case_id,method,statistic,threshold,bound,passed\n");
    for r in &all {
        let method = serde_json::to_value(r.method).map_err(usage)?;
        let bound = serde_json::to_value(r.bound).map_err(usage)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.case_id,
            method.as_str().unwrap_or_default(),
            num(r.statistic),
            num(r.threshold),
            bound.as_str().unwrap_or_default(),
            r.passed
        ));
    }
    let s = Summary::of(&all);
    csv.push_str(&format!("# total={} passed={} failed={}\n", s.total, s.passed, s.failed));
    emit(&csv, a.out.as_deref())
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Outcome {
    match &cli.command {
        Command::Density(DensityCmd::List) => {
            let laws: Vec<_> = catalog().into_iter().map(|l| serde_json::json!({"id": l.id(), "law": l})).collect();
            emit(&to_json(&laws), None)
        }
        Command::Density(DensityCmd::Eval(a)) => density_eval(a),
        Command::Sample(a) => sample(a, cfg),
        Command::Hfox(HfoxCmd::Eval(a)) => hfox_eval(a, cfg),
        Command::Hfox(HfoxCmd::List) => {
            let reps: Vec<_> = representations().into_iter().map(|r| serde_json::json!({"label": r.label, "law": r.law.id()})).collect();
            emit(&to_json(&reps), None)
        }
        Command::Mellin(MellinCmd::Prove { case_id }) => mellin_prove(case_id),
        Command::Mellin(MellinCmd::List) => {
            let cases: Vec<_> = verify::registry()
                .into_iter()
                .map(|c| serde_json::json!({"id": c.id, "statement": c.statement, "mellin_provable": c.mellin_provable, "negative_control": c.negative_control}))
                .collect();
            emit(&to_json(&cases), None)
        }
        Command::Verify(VerifyCmd::Run(a)) => verify_run(a, cfg),
        Command::Report(a) => report(a),
    }
}

fn run() -> Outcome {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 { Ok(()) } else { Err(Failure::Usage(String::new())) };
        }
    };
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            ConfigError::Io(m) => Failure::Io(m),
            ConfigError::Invalid(m) => Failure::Usage(m),
        })?,
        None => RunConfig::default(),
    };
    if let Some(j) = cli.jobs.or(cfg.jobs) {
        if j == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().map_err(usage)?;
    }
    dispatch(&cli, &cfg)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message().is_empty() {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
