// The feasibility engine works on any linear matrix map, not only the
// built-in analyses. Here it solves the Lyapunov inequality
// `P ≻ 0, P − AᵀPA ≻ 0` for one matrix, then the alternative for an unstable
// one, without going through `analyze`.
//
//     cargo run --release --example custom_engine

use cone_lpv::engine::{solve, LinearConstraint, SolveResult};
use cone_lpv::{BlockDiagSym, FeasibilityProblem, LinearMatrixMap, Matrix, SolveOptions, SymMatrix};

/// Output blocks `P` and `P − AᵀPA` of the single variable `P`.
fn lyapunov_map(a: &Matrix) -> cone_lpv::Result<LinearMatrixMap> {
    let n = a.rows();
    let mut map = LinearMatrixMap::new(vec![n], vec![n, n]);
    // each term contributes s·(L X R + Rᵀ X Lᵀ), hence the factors 1/2
    map.term(0, 0, 0.5, Matrix::identity(n), Matrix::identity(n))?;
    map.term(1, 0, 0.5, Matrix::identity(n), Matrix::identity(n))?;
    map.term(1, 0, -0.5, a.transpose(), a.clone())?;
    Ok(map)
}

pub fn run_example() -> cone_lpv::Result<(SolveResult, SolveResult)> {
    let stable = Matrix::from_rows(vec![vec![0.5, 1.0], vec![0.0, 0.7]])?;
    let primal = FeasibilityProblem::primal(lyapunov_map(&stable)?);
    let p = solve(&primal, SolveOptions::default())?;

    let unstable = Matrix::from_rows(vec![vec![1.05, 0.2], vec![0.0, 0.3]])?;
    let map = lyapunov_map(&unstable)?;
    let trace = LinearConstraint {
        coefficients: BlockDiagSym::new(vec![SymMatrix::identity(2), SymMatrix::identity(2)]),
        target: 1.0,
    };
    let dual = FeasibilityProblem::dual(map, vec![trace])?;
    let r = solve(&dual, SolveOptions::default())?;
    Ok((p, r))
}

fn main() -> cone_lpv::Result<()> {
    let (p, r) = run_example()?;
    println!("primal: {:?} after {} iterations", p.status, p.iterations);
    if let Some(x) = &p.solution {
        println!("  P = {:?}", x.block(0).to_rows());
    }
    println!("dual:   {:?} after {} iterations", r.status, r.iterations);
    if let Some(y) = &r.solution {
        for (k, b) in y.blocks().iter().enumerate() {
            println!("  R_{k} = {:?}", b.to_rows());
        }
    }
    assert!(p.is_feasible() && r.is_feasible());
    Ok(())
}
