//! Command-line front end: `analyze`, `verify` and `jsr`.
//!
//! Exit codes are stable: analyze returns 0 (existence or necessary condition
//! feasible), 10 (nonexistence proven), 20 (inconclusive); verify returns 0
//! (pass) or 1 (fail); every command returns 2 on input errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::conditions::{analyze, AnalyzeOptions};
use crate::error::{Error, Result};
use crate::jsr::{bounds, JsrBounds};
use crate::model::{Analysis, Certificate, Outcome, PolytopicSystem, Verdict, SCHEMA_VERSION};
use crate::verify::{verify, Tolerances, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONEXISTENCE: i32 = 10;
pub const EXIT_INCONCLUSIVE: i32 = 20;

/// Environment variable holding the log filter.
pub const LOG_ENV: &str = "CONE_LPV_LOG";

#[derive(Debug, Parser)]
#[command(name = "cone-lpv", version, about = "Poly-quadratic Lyapunov certificates and certificates of nonexistence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide an analysis and write the resulting certificate.
    Analyze(AnalyzeArgs),
    /// Re-check a certificate file against a system.
    Verify(VerifyArgs),
    /// Brute-force joint spectral radius bounds.
    Jsr(JsrArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnalysisArg {
    Stability,
    Detectability,
    Stabilizability,
    CtCqlf,
}

impl From<AnalysisArg> for Analysis {
    fn from(a: AnalysisArg) -> Self {
        match a {
            AnalysisArg::Stability => Analysis::Stability,
            AnalysisArg::Detectability => Analysis::Detectability,
            AnalysisArg::Stabilizability => Analysis::Stabilizability,
            AnalysisArg::CtCqlf => Analysis::CtCqlf,
        }
    }
}

#[derive(Debug, Args)]
pub struct ToleranceArgs {
    /// Relative tolerance for semidefinite checks.
    #[arg(long)]
    pub tol_psd: Option<f64>,
    /// Relative tolerance for equality checks.
    #[arg(long)]
    pub tol_eq: Option<f64>,
}

impl ToleranceArgs {
    fn resolve(&self) -> Result<Tolerances> {
        let d = Tolerances::default();
        let t = Tolerances { psd: self.tol_psd.unwrap_or(d.psd), eq: self.tol_eq.unwrap_or(d.eq) };
        if !(t.psd >= 0.0 && t.eq >= 0.0 && t.psd.is_finite() && t.eq.is_finite()) {
            return Err(Error::contract("tolerances must be finite and non-negative"));
        }
        Ok(t)
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// System JSON file.
    pub system: PathBuf,
    #[arg(long, value_enum, default_value = "stability")]
    pub analysis: AnalysisArg,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    /// Strictness demanded of primal candidates.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Iteration cap for each side of the engine.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Where to write the certificate; defaults to `<system>.<analysis>.certificate.json`
    /// in the working directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub system: PathBuf,
    pub certificate: PathBuf,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct JsrArgs {
    pub system: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
    #[arg(long)]
    pub json: bool,
}

pub fn exit_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::ExistenceProven | Outcome::NecessaryConditionFeasible => EXIT_OK,
        Outcome::NonexistenceProven => EXIT_NONEXISTENCE,
        Outcome::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Installs the logger once; later calls are ignored.
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Jsr(a) => cmd_jsr(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            report_error(&e, err);
            EXIT_INPUT
        }
    }
}

fn report_error(e: &Error, err: &mut dyn Write) {
    match e {
        Error::InvalidSystem(findings) => {
            let _ = writeln!(err, "error: invalid system file");
            for f in findings {
                let _ = writeln!(err, "  - {f}");
            }
        }
        other => {
            let _ = writeln!(err, "error: {other}");
        }
    }
}

fn default_output(system: &Path, analysis: Analysis) -> PathBuf {
    let stem = system.file_stem().and_then(|s| s.to_str()).unwrap_or("system");
    PathBuf::from(format!("{stem}.{}.certificate.json", analysis.name()))
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32> {
    let system = PolytopicSystem::load(&args.system)?;
    let analysis = Analysis::from(args.analysis);
    let mut opts = AnalyzeOptions { tolerances: args.tolerances.resolve()?, ..AnalyzeOptions::default() };
    if let Some(eps) = args.epsilon {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::contract("--epsilon must be positive"));
        }
        opts.solve.strictness = eps;
    }
    if let Some(n) = args.max_iters {
        opts.solve.max_iters = n;
    }

    let verdict = analyze(&system, analysis, &opts)?;
    let report = verdict.certificate.as_ref().map(|c| verify(&system, c, &opts.tolerances)).transpose()?;
    let path = match &verdict.certificate {
        Some(cert) => {
            let path = args.output.clone().unwrap_or_else(|| default_output(&args.system, analysis));
            cert.save(&path)?;
            Some(path)
        }
        None => None,
    };
    let code = exit_code(verdict.outcome);

    if args.json {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "analyze",
            "analysis": analysis,
            "outcome": verdict.outcome,
            "exit_code": code,
            "certificate_path": path,
            "certificate": verdict.certificate.as_ref().map(Certificate::to_file),
            "verification": report,
            "diagnostics": verdict.diagnostics,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        write_verdict(out, &verdict, path.as_deref(), report.as_ref())?;
    }
    Ok(code)
}

fn write_verdict(
    out: &mut dyn Write,
    v: &Verdict,
    path: Option<&Path>,
    report: Option<&VerificationReport>,
) -> Result<()> {
    let outcome = match v.outcome {
        Outcome::ExistenceProven => "existence proven",
        Outcome::NecessaryConditionFeasible => "necessary condition feasible (stabilizability not proven)",
        Outcome::NonexistenceProven => "nonexistence proven",
        Outcome::Inconclusive => "inconclusive",
    };
    writeln!(out, "analysis: {}", v.analysis)?;
    writeln!(out, "outcome:  {outcome}")?;
    if let Some(p) = path {
        writeln!(out, "certificate: {}", p.display())?;
    }
    if let Some(r) = report {
        write_report(out, r)?;
    }
    let d = &v.diagnostics;
    writeln!(
        out,
        "engine: primal {} iterations (residual {:.2e}), dual {} iterations (residual {:.2e}), {:.3} s",
        d.primal_iterations,
        d.primal_residual,
        d.dual_iterations,
        d.dual_residual,
        d.wall_time.as_secs_f64()
    )?;
    Ok(())
}

fn write_report(out: &mut dyn Write, r: &VerificationReport) -> Result<()> {
    writeln!(out, "{:<44} {:>13} {:>13}  ok", "constraint", "λ_min", "threshold")?;
    for m in &r.margins {
        writeln!(out, "{:<44} {:>13.6e} {:>13.6e}  {}", m.label, m.min_eigenvalue, m.threshold, mark(m.passed))?;
    }
    for e in &r.equalities {
        writeln!(
            out,
            "{:<44} {:>13.6e} {:>13.6e}  {}",
            format!("{} = 0", e.label),
            e.residual,
            e.threshold,
            mark(e.passed)
        )?;
    }
    if let Some(t) = r.trace_ratio {
        writeln!(out, "{:<44} {:>13.6e} {:>13.6e}  {}", "trace / normalization", t, 0.5, mark(t >= 0.5))?;
    }
    writeln!(out, "verification: {}", if r.passed { "PASS" } else { "FAIL" })?;
    Ok(())
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "yes"
    } else {
        "NO"
    }
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let system = PolytopicSystem::load(&args.system)?;
    let cert = Certificate::load(&args.certificate, system.num_vertices())?;
    let tol = args.tolerances.resolve()?;
    let report = verify(&system, &cert, &tol)?;
    let code = if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED };
    if args.json {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            "exit_code": code,
            "tolerances": tol,
            "report": report,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        writeln!(out, "analysis: {} ({:?} certificate)", report.analysis, report.kind)?;
        write_report(out, &report)?;
    }
    Ok(code)
}

pub fn cmd_jsr(args: &JsrArgs, out: &mut dyn Write) -> Result<i32> {
    let system = PolytopicSystem::load(&args.system)?;
    let b: JsrBounds = bounds(&system, args.max_depth)?;
    if args.json {
        let doc = json!({ "schema_version": SCHEMA_VERSION, "command": "jsr", "bounds": b });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        writeln!(out, "{:>5} {:>14} {:>14}", "depth", "lower", "upper")?;
        for l in &b.levels {
            writeln!(out, "{:>5} {:>14.10} {:>14.10}", l.depth, l.lower, l.upper)?;
        }
        writeln!(out, "lower bound: {:.10}", b.lower)?;
        writeln!(out, "upper bound: {:.10}", b.upper)?;
        let word: Vec<String> = b.witness_word.iter().map(|i| (i + 1).to_string()).collect();
        writeln!(out, "witness word: {}", word.join(" "))?;
    }
    Ok(EXIT_OK)
}
