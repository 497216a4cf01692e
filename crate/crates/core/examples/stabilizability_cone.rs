// The necessary LMI condition for poly-quadratic stabilizability fails for a
// lifted system with a single input. The engine's certificate and the
// published one are both replayed by the verifier.
//
//     cargo run --release --example stabilizability_cone

use cone_lpv::{
    analyze, verify, Analysis, AnalyzeOptions, Certificate, Outcome, PolytopicSystem, Verdict, VerificationReport,
};

const SYSTEM: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/lifted_single_input.json");
const PUBLISHED: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/lifted_single_input_cone.json");

pub struct Findings {
    pub verdict: Verdict,
    pub fresh: VerificationReport,
    pub published: VerificationReport,
}

pub fn run_example() -> cone_lpv::Result<Findings> {
    let system = PolytopicSystem::load(SYSTEM)?;
    let opts = AnalyzeOptions::default();
    let verdict = analyze(&system, Analysis::Stabilizability, &opts)?;
    let cert = verdict.certificate.as_ref().expect("a conclusive verdict carries a certificate");
    let fresh = verify(&system, cert, &opts.tolerances)?;
    let published = verify(&system, &Certificate::load(PUBLISHED, system.num_vertices())?, &opts.tolerances)?;
    Ok(Findings { verdict, fresh, published })
}

fn main() -> cone_lpv::Result<()> {
    let f = run_example()?;
    println!("stabilizability necessary condition: {:?}", f.verdict.outcome);
    assert_eq!(f.verdict.outcome, Outcome::NonexistenceProven);
    println!(
        "engine certificate: {} (worst slack {:.3e}, {} dual iterations)",
        if f.fresh.passed { "PASS" } else { "FAIL" },
        f.fresh.worst_margin(),
        f.verdict.diagnostics.dual_iterations
    );
    for e in &f.fresh.equalities {
        println!("  {} = 0: residual {:.2e}", e.label, e.residual);
    }
    println!(
        "published certificate: {} (worst slack {:.3e})",
        if f.published.passed { "PASS" } else { "FAIL" },
        f.published.worst_margin()
    );
    Ok(())
}
