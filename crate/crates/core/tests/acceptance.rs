//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{data, mat, random_blocks, random_map, random_system};
use cone_lpv::cli;
use cone_lpv::conditions::{analyze, build, AnalyzeOptions};
use cone_lpv::engine::solve;
use cone_lpv::jsr::bounds;
use cone_lpv::linalg::inner_product;
use cone_lpv::model::{flat_to_pair, pair_to_flat};
use cone_lpv::{
    verify, verify_nonexistence, Analysis, Certificate, Matrix, NonexistenceCertificate, Outcome, PolytopicSystem,
    Side, SymMatrix, Tolerances,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const RANDOM_SEED: u64 = 20_240_601;
const RANDOM_COUNT: usize = 200;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || format!("took {:.2} s, limit {limit} s", elapsed.as_secs_f64()))
}

fn counterexample() -> PolytopicSystem {
    PolytopicSystem::load(data("switching_counterexample.json")).unwrap()
}

fn psd_tolerance(psd: f64) -> Tolerances {
    Tolerances { psd, ..Tolerances::default() }
}

/// Reorders flat-listed blocks as if the list had used `k = N(i−1)+j`.
fn transposed_convention(cert: &NonexistenceCertificate) -> NonexistenceCertificate {
    let n = cert.num_vertices;
    let mut blocks = cert.blocks.clone();
    for (k, b) in cert.blocks.iter().enumerate() {
        let (i, j) = flat_to_pair(k + 1, n).unwrap();
        blocks[pair_to_flat(j, i, n).unwrap() - 1] = b.clone();
    }
    NonexistenceCertificate { blocks, ..cert.clone() }
}

fn published(name: &str, n: usize) -> NonexistenceCertificate {
    match Certificate::load(data(name), n).unwrap() {
        Certificate::Nonexistence(c) => c,
        Certificate::Existence(_) => panic!("{name} is not a nonexistence certificate"),
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let system = counterexample();
    let cert = published("switching_counterexample_cone.json", 2);
    let tol = psd_tolerance(0.15);
    let flat = verify_nonexistence(&system, &cert, &tol).unwrap();
    let swapped = verify_nonexistence(&system, &transposed_convention(&cert), &tol).unwrap();
    within(start.elapsed(), 1.0)?;
    if flat.passed {
        return Ok(format!("passes under k = N(j-1)+i, worst margin {:.3e}", flat.worst_margin()));
    }
    if swapped.passed {
        return Ok(format!("passes under k = N(i-1)+j, worst margin {:.3e}", swapped.worst_margin()));
    }
    // Informational: the same matrices against the unscaled vertices.
    let unscaled = system.scaled(1.19).unwrap();
    let raw = verify_nonexistence(&unscaled, &cert, &tol).unwrap();
    Err(format!(
        "fails both conventions at tol_psd 0.15 (worst slack {:.3e} / {:.3e}); against the unscaled vertices it {} with slack {:.3e}",
        flat.worst_margin(),
        swapped.worst_margin(),
        if raw.passed { "passes" } else { "fails" },
        raw.worst_margin()
    ))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let system = counterexample();
    let verdict = analyze(&system, Analysis::Stability, &AnalyzeOptions::default()).unwrap();
    let elapsed = start.elapsed();
    ensure(verdict.outcome == Outcome::NonexistenceProven, || format!("outcome {:?}", verdict.outcome))?;
    let Some(Certificate::Nonexistence(cert)) = &verdict.certificate else {
        return Err("no nonexistence certificate".into());
    };
    let report = verify_nonexistence(&system, cert, &psd_tolerance(1e-6)).unwrap();
    ensure(report.passed, || format!("verification failed: {:?}", report.failures()))?;
    let trace = cert.total().trace();
    ensure((trace - 1.0).abs() <= 1e-9, || format!("trace of the blocks is {trace}"))?;
    ensure((cert.normalization - 1.0).abs() <= 1e-9, || format!("normalization {}", cert.normalization))?;
    within(elapsed, 30.0)?;
    Ok(format!(
        "CoNE with worst margin {:.3e}, trace {trace:.12}, {:.2} s",
        report.worst_margin(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let system = PolytopicSystem::load(data("lifted_single_input.json")).unwrap();
    let cert = published("lifted_single_input_cone.json", 2);
    let report = verify_nonexistence(&system, &cert, &psd_tolerance(0.15)).unwrap();
    let b = system.input_matrix().unwrap();
    let btrb = cert.total().congruence(&b.transpose());
    let residual = btrb.as_matrix().max_abs();
    within(start.elapsed(), 1.0)?;
    ensure(report.passed, || format!("verification failed: {:?}", report.failures()))?;
    ensure(residual <= 1e-12, || format!("B'(sum R)B = {residual:e}"))?;
    Ok(format!("worst margin {:.3e}, B'(sum R)B = {residual:e}", report.worst_margin()))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let system = counterexample();
    let b = bounds(&system, 16).unwrap();
    let depth1 = b.levels[0].upper;
    let verdict = analyze(&system, Analysis::Stability, &AnalyzeOptions::default()).unwrap();
    let elapsed = start.elapsed();
    ensure((0.825..=0.9796).contains(&b.lower), || format!("lower bound {}", b.lower))?;
    ensure((depth1 - 1.2957).abs() <= 1e-3, || format!("depth-1 upper bound {depth1}"))?;
    ensure(verdict.outcome == Outcome::NonexistenceProven, || format!("stability outcome {:?}", verdict.outcome))?;
    within(elapsed, 60.0)?;
    Ok(format!(
        "JSR in [{:.6}, {:.6}] at depth 16 (depth-1 upper {depth1:.6}), stability has a CoNE, {:.2} s",
        b.lower,
        b.upper,
        elapsed.as_secs_f64()
    ))
}

fn random_systems() -> Vec<PolytopicSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    (0..RANDOM_COUNT).map(|_| random_system(&mut rng)).collect()
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let opts = AnalyzeOptions::default();
    let tol = Tolerances::default();
    let (mut conclusive, mut exist, mut cone) = (0, 0, 0);
    for (k, system) in random_systems().iter().enumerate() {
        let verdict = analyze(system, Analysis::Stability, &opts).unwrap();
        // Run the side analyze did not settle on to completion as well.
        let other = match verdict.outcome {
            Outcome::ExistenceProven => {
                exist += 1;
                Some(Side::Dual)
            }
            Outcome::NonexistenceProven => {
                cone += 1;
                Some(Side::Primal)
            }
            _ => None,
        };
        if let Some(side) = other {
            conclusive += 1;
            let problem = build(system, Analysis::Stability, side).unwrap();
            let result = solve(&problem, opts.solve).unwrap();
            if let Some(sol) = result.solution {
                let cert = match side {
                    Side::Primal => Certificate::Existence(cone_lpv::ExistenceCertificate {
                        analysis: Analysis::Stability,
                        matrices: sol.into_blocks(),
                    }),
                    Side::Dual => Certificate::Nonexistence(
                        NonexistenceCertificate::new(Analysis::Stability, 2, sol.into_blocks()[..4].to_vec(), None)
                            .unwrap(),
                    ),
                };
                let report = verify(system, &cert, &tol).unwrap();
                ensure(!report.passed, || format!("system {k} has verified certificates on both sides"))?;
            }
        }
    }
    let elapsed = start.elapsed();
    let rate = conclusive as f64 / RANDOM_COUNT as f64;
    ensure(rate >= 0.95, || format!("only {conclusive}/{RANDOM_COUNT} conclusive"))?;
    within(elapsed, 300.0)?;
    Ok(format!(
        "{conclusive}/{RANDOM_COUNT} conclusive ({exist} existence, {cone} nonexistence), never both, {:.1} s",
        elapsed.as_secs_f64()
    ))
}

fn scalar(a: f64) -> PolytopicSystem {
    PolytopicSystem::autonomous(vec![Matrix::scalar(a)]).unwrap()
}

fn rotation() -> PolytopicSystem {
    PolytopicSystem::autonomous(vec![mat(&[&[0.0, 1.0], &[-1.0, 0.0]])]).unwrap()
}

/// The analytic cases shared by criteria 6 and 8.
fn analytic_cases() -> Vec<(String, PolytopicSystem, Analysis, Outcome)> {
    let mut cases = Vec::new();
    for a in [0.0, 0.5, -0.5, 0.99] {
        cases.push((format!("a={a} stability"), scalar(a), Analysis::Stability, Outcome::ExistenceProven));
    }
    for a in [1.0, 1.1, -1.2] {
        cases.push((format!("a={a} stability"), scalar(a), Analysis::Stability, Outcome::NonexistenceProven));
    }
    let zero_c = scalar(1.1).with_output(Matrix::scalar(0.0)).unwrap();
    cases.push(("a=1.1 C=0 detectability".into(), zero_c, Analysis::Detectability, Outcome::NonexistenceProven));
    for a in [0.5, 1.1, -2.0, 3.0] {
        let sys = scalar(a).with_output(Matrix::identity(1)).unwrap();
        cases.push((format!("a={a} C=I detectability"), sys, Analysis::Detectability, Outcome::ExistenceProven));
    }
    cases.push(("rotation ct_cqlf".into(), rotation(), Analysis::CtCqlf, Outcome::NonexistenceProven));
    cases
}

fn criterion_6() -> Check {
    let opts = AnalyzeOptions::default();
    for (name, system, analysis, expected) in analytic_cases() {
        let v = analyze(&system, analysis, &opts).unwrap();
        ensure(v.outcome == expected, || format!("{name}: expected {expected:?}, got {:?}", v.outcome))?;
    }
    let unit = NonexistenceCertificate::new(Analysis::Stability, 1, vec![SymMatrix::scalar(1.0)], None).unwrap();
    let r = verify_nonexistence(&scalar(1.0), &unit, &Tolerances::default()).unwrap();
    ensure(r.passed && r.worst_margin() >= 0.0, || "Q=1 is not admissible for a=1".into())?;
    let ct = NonexistenceCertificate::new(Analysis::CtCqlf, 1, vec![SymMatrix::identity(2)], Some(SymMatrix::zeros(2)))
        .unwrap();
    let r = verify_nonexistence(&rotation(), &ct, &Tolerances::default()).unwrap();
    ensure(r.passed, || format!("R=I, R0=0 rejected: {:?}", r.failures()))?;
    Ok(format!("{} analytic cases match; Q=1 (a=1) and R=I, R0=0 admissible", analytic_cases().len()))
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED + 7);
    let mut worst = 0.0_f64;
    for k in 0..1000 {
        let map = random_map(&mut rng);
        let x = random_blocks(&mut rng, map.input_dims());
        let r = random_blocks(&mut rng, map.output_dims());
        let lhs = inner_product(&map.apply(&x).unwrap(), &r).unwrap();
        let rhs = inner_product(&x, &map.adjoint(&r).unwrap()).unwrap();
        let bound = 1e-10 * (1.0 + x.frobenius_norm() * r.frobenius_norm());
        let gap = (lhs - rhs).abs();
        worst = worst.max(gap / bound);
        ensure(gap <= bound, || format!("triple {k}: gap {gap:e} > {bound:e}"))?;
    }
    Ok(format!("1000 triples, worst gap {worst:.2e} of the allowed bound"))
}

fn cli_code(args: &[&str]) -> i32 {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["cone-lpv"];
    full.extend_from_slice(args);
    cli::run(full, &mut out, &mut err)
}

fn criterion_8() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let mut systems: Vec<(String, PolytopicSystem, Analysis)> =
        vec![("counterexample".into(), counterexample(), Analysis::Stability)];
    systems
        .extend(random_systems().into_iter().enumerate().map(|(k, s)| (format!("random{k}"), s, Analysis::Stability)));
    systems.extend(analytic_cases().into_iter().map(|(name, s, a, _)| (name, s, a)));

    let mut emitted = 0;
    for (k, (name, system, analysis)) in systems.iter().enumerate() {
        let sys_path = dir.path().join(format!("system{k}.json"));
        std::fs::write(&sys_path, serde_json::to_string(&system.to_file()).unwrap()).unwrap();
        let cert_path = dir.path().join(format!("cert{k}.json"));
        let flag = match analysis {
            Analysis::Stability => "stability",
            Analysis::Detectability => "detectability",
            Analysis::Stabilizability => "stabilizability",
            Analysis::CtCqlf => "ct-cqlf",
        };
        let (s, c) = (sys_path.to_str().unwrap(), cert_path.to_str().unwrap());
        let code = cli_code(&["analyze", s, "--analysis", flag, "--output", c]);
        if code == cli::EXIT_INCONCLUSIVE {
            continue;
        }
        ensure(code == cli::EXIT_OK || code == cli::EXIT_NONEXISTENCE, || format!("{name}: analyze exit {code}"))?;
        emitted += 1;
        let code = cli_code(&["verify", s, c]);
        ensure(code == cli::EXIT_OK, || format!("{name}: verify exit {code}"))?;
    }
    Ok(format!("{emitted} emitted certificates all pass verify with exit 0"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("published stability CoNE replays", criterion_1),
        ("fresh stability CoNE", criterion_2),
        ("published stabilizability CoNE replays", criterion_3),
        ("GUAS but not poly-QS", criterion_4),
        ("strong alternative exclusivity", criterion_5),
        ("analytic oracles", criterion_6),
        ("adjoint identity", criterion_7),
        ("analyze/verify round trip", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.ends_with(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        match check() {
            Ok(detail) => println!("PASS {id}: {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id}: {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
