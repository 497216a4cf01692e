// Detectability of a two-vertex system with one unstable mode, measured
// through two different outputs. Seeing the unstable state gives an observer
// certificate; hiding it gives a certificate of nonexistence.
//
//     cargo run --release --example detectability

use cone_lpv::{analyze, Analysis, AnalyzeOptions, Matrix, Outcome, PolytopicSystem, Verdict};

fn vertices() -> cone_lpv::Result<Vec<Matrix>> {
    Ok(vec![
        Matrix::from_rows(vec![vec![1.2, 0.0], vec![0.3, 0.5]])?,
        Matrix::from_rows(vec![vec![1.1, 0.0], vec![-0.2, 0.4]])?,
    ])
}

pub fn run_example() -> cone_lpv::Result<(Verdict, Verdict)> {
    let opts = AnalyzeOptions::default();
    let seen = PolytopicSystem::new(vertices()?, None, Some(Matrix::from_rows(vec![vec![1.0, 0.0]])?))?;
    let hidden = PolytopicSystem::new(vertices()?, None, Some(Matrix::from_rows(vec![vec![0.0, 1.0]])?))?;
    Ok((analyze(&seen, Analysis::Detectability, &opts)?, analyze(&hidden, Analysis::Detectability, &opts)?))
}

fn main() -> cone_lpv::Result<()> {
    let (seen, hidden) = run_example()?;
    println!("C = [1 0]: {:?}", seen.outcome);
    println!("C = [0 1]: {:?}", hidden.outcome);
    assert_eq!(seen.outcome, Outcome::ExistenceProven);
    assert_eq!(hidden.outcome, Outcome::NonexistenceProven);
    if let Some(cone_lpv::Certificate::Existence(c)) = &seen.certificate {
        for (i, p) in c.matrices.iter().enumerate() {
            println!("  P_{} = {:?}", i + 1, p.to_rows());
        }
    }
    Ok(())
}
