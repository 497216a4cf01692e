// A two-vertex system that is uniformly exponentially stable under arbitrary
// switching yet has no poly-quadratic Lyapunov function. The engine returns a
// certificate of nonexistence, the verifier replays it, and brute-force joint
// spectral radius bounds confirm stability.
//
//     cargo run --release --example poly_qs_counterexample

use cone_lpv::jsr::{bounds, JsrBounds};
use cone_lpv::{analyze, verify, Analysis, AnalyzeOptions, Outcome, PolytopicSystem, Verdict, VerificationReport};

const SYSTEM: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/switching_counterexample.json");

pub struct Findings {
    pub verdict: Verdict,
    pub report: VerificationReport,
    pub jsr: JsrBounds,
}

pub fn run_example() -> cone_lpv::Result<Findings> {
    let system = PolytopicSystem::load(SYSTEM)?;
    let opts = AnalyzeOptions::default();
    let verdict = analyze(&system, Analysis::Stability, &opts)?;
    let cert = verdict.certificate.as_ref().expect("a conclusive verdict carries a certificate");
    let report = verify(&system, cert, &opts.tolerances)?;
    let jsr = bounds(&system, 12)?;
    Ok(Findings { verdict, report, jsr })
}

fn main() -> cone_lpv::Result<()> {
    let f = run_example()?;
    println!("poly-quadratic stability: {:?}", f.verdict.outcome);
    assert_eq!(f.verdict.outcome, Outcome::NonexistenceProven);
    for m in &f.report.margins {
        println!("  {:<36} λ_min {:+.3e}", m.label, m.min_eigenvalue);
    }
    println!("  verifier: {}", if f.report.passed { "PASS" } else { "FAIL" });
    println!("joint spectral radius in [{:.6}, {:.6}] (depth {})", f.jsr.lower, f.jsr.upper, f.jsr.depth);
    if f.jsr.upper < 1.0 {
        println!("stable under arbitrary switching, but not poly-quadratically stable");
    }
    Ok(())
}
