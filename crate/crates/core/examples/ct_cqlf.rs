// Common quadratic Lyapunov functions for continuous-time modes. Two Hurwitz
// modes sharing a Lyapunov function get `P`; two Hurwitz modes whose switching
// can destabilise get a certificate of nonexistence `R_0, R_1, R_2`.
//
//     cargo run --release --example ct_cqlf

use cone_lpv::{analyze, Analysis, AnalyzeOptions, Certificate, Matrix, Outcome, PolytopicSystem, Verdict};

fn system(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> cone_lpv::Result<PolytopicSystem> {
    let m = |x: [[f64; 2]; 2]| Matrix::from_rows(x.iter().map(|r| r.to_vec()).collect());
    PolytopicSystem::autonomous(vec![m(a)?, m(b)?])
}

pub fn run_example() -> cone_lpv::Result<(Verdict, Verdict)> {
    let opts = AnalyzeOptions::default();
    let shared = system([[-1.0, 0.0], [0.0, -2.0]], [[-2.0, 1.0], [0.0, -1.0]])?;
    let clashing = system([[-0.1, 1.0], [-2.0, -0.1]], [[-0.1, 2.0], [-1.0, -0.1]])?;
    Ok((analyze(&shared, Analysis::CtCqlf, &opts)?, analyze(&clashing, Analysis::CtCqlf, &opts)?))
}

fn main() -> cone_lpv::Result<()> {
    let (shared, clashing) = run_example()?;
    println!("triangular pair: {:?}", shared.outcome);
    if let Some(Certificate::Existence(c)) = &shared.certificate {
        println!("  P = {:?}", c.matrices[0].to_rows());
    }
    println!("rotating pair:   {:?}", clashing.outcome);
    if let Some(Certificate::Nonexistence(c)) = &clashing.certificate {
        for (i, r) in c.blocks.iter().enumerate() {
            println!("  R_{} = {:?}", i + 1, r.to_rows());
        }
    }
    assert_eq!(shared.outcome, Outcome::ExistenceProven);
    assert_eq!(clashing.outcome, Outcome::NonexistenceProven);
    Ok(())
}
