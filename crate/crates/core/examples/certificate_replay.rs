// Certificates are plain JSON and can be re-checked without the solver.
// Analyze, write the certificate to disk, load it back and verify it; then
// show that the same file is rejected for a perturbed system.
//
//     cargo run --release --example certificate_replay

use cone_lpv::{
    analyze, verify, Analysis, AnalyzeOptions, Certificate, PolytopicSystem, Tolerances, VerificationReport,
};

const SYSTEM: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/switching_counterexample.json");

pub fn run_example() -> cone_lpv::Result<(VerificationReport, VerificationReport)> {
    let system = PolytopicSystem::load(SYSTEM)?;
    let verdict = analyze(&system, Analysis::Stability, &AnalyzeOptions::default())?;
    let cert = verdict.certificate.expect("a conclusive verdict carries a certificate");

    let path = std::env::temp_dir().join(format!("cone_lpv_replay_{}.json", std::process::id()));
    cert.save(&path)?;
    let loaded = Certificate::load(&path, system.num_vertices())?;
    std::fs::remove_file(&path)?;
    assert_eq!(loaded, cert);

    let tol = Tolerances::default();
    let original = verify(&system, &loaded, &tol)?;
    let mut vertices = system.vertices().to_vec();
    vertices[0] = vertices[0].scale(0.5);
    let perturbed = verify(&PolytopicSystem::autonomous(vertices)?, &loaded, &tol)?;
    Ok((original, perturbed))
}

fn main() -> cone_lpv::Result<()> {
    let (original, perturbed) = run_example()?;
    println!("replay against the original system:  {}", if original.passed { "PASS" } else { "FAIL" });
    println!("replay against A_1 halved:           {}", if perturbed.passed { "PASS" } else { "FAIL" });
    for f in perturbed.failures() {
        println!("  {f}");
    }
    assert!(original.passed && !perturbed.passed);
    Ok(())
}
