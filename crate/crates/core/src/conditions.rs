//! Builders turning a [`PolytopicSystem`] into primal and dual feasibility
//! problems, and the [`analyze`] driver that runs both sides.
//!
//! Output-block layout of every discrete-time map: the first `N²` blocks are
//! paired with the dual blocks `Q_{i,j}` in flat order (block `N*j + i`,
//! zero-based), followed by one block per vertex holding the primal matrix
//! itself. With that pairing the dual conditions read, for every `i`,
//!
//! * stability / detectability: `Σ_j A_j Q_{i,j} A_jᵀ − Q_{j,i} ⪰ 0`,
//! * stabilizability: `Σ_j A_iᵀ Q_{i,j} A_i − Q_{j,i} ⪰ 0`,
//!
//! the left-hand side being the trailing slack block of the dual variable.

use std::time::Instant;

use log::{debug, warn};

use crate::engine::{FeasibilityProblem, LinearConstraint, LinearMatrixMap, Side, SolveOptions, SolveResult, Solver};
use crate::error::{Error, Result};
use crate::linalg::{BlockDiagSym, Matrix, SymMatrix};
use crate::model::{
    Analysis, Certificate, Diagnostics, ExistenceCertificate, NonexistenceCertificate, Outcome, PolytopicSystem,
    Verdict,
};
use crate::verify::{verify, Tolerances};

fn require_input(system: &PolytopicSystem) -> Result<&Matrix> {
    system.input_matrix().ok_or_else(|| Error::contract("stabilizability analysis requires an input matrix B"))
}

fn require_output(system: &PolytopicSystem) -> Result<&Matrix> {
    system.output_matrix().ok_or_else(|| Error::contract("detectability analysis requires an output matrix C"))
}

fn primal_map(system: &PolytopicSystem, analysis: Analysis) -> Result<LinearMatrixMap> {
    let n = system.state_dim();
    let nv = system.num_vertices();
    let eye = Matrix::identity(n);

    if analysis == Analysis::CtCqlf {
        // Blocks: −(A_iᵀP + PA_i) for each mode, then P.
        let mut map = LinearMatrixMap::new(vec![n], vec![n; nv + 1]);
        for (i, a) in system.vertices().iter().enumerate() {
            map.term(i, 0, -1.0, a.transpose(), eye.clone())?;
        }
        map.term(nv, 0, 0.5, eye.clone(), eye)?;
        return Ok(map);
    }

    let mut map = LinearMatrixMap::new(vec![n; nv], vec![n; nv * nv + nv]);
    for k in 0..nv * nv {
        let (i, j) = (k % nv, k / nv);
        match analysis {
            Analysis::Stability | Analysis::Detectability => {
                // Paired with Q_{i,j}: P_j − A_jᵀ P_i A_j.
                let a = system.vertex(j);
                map.term(k, j, 0.5, eye.clone(), eye.clone())?;
                map.term(k, i, -0.5, a.transpose(), a.clone())?;
            }
            Analysis::Stabilizability => {
                // Paired with Q_{i,j}: S_j − A_i S_i A_iᵀ.
                let a = system.vertex(i);
                map.term(k, j, 0.5, eye.clone(), eye.clone())?;
                map.term(k, i, -0.5, a.clone(), a.transpose())?;
            }
            Analysis::CtCqlf => unreachable!(),
        }
    }
    for i in 0..nv {
        map.term(nv * nv + i, i, 0.5, eye.clone(), eye.clone())?;
    }

    let constant = match analysis {
        Analysis::Detectability => {
            Some(SymMatrix::new(require_output(system)?.transpose().matmul(require_output(system)?))?)
        }
        Analysis::Stabilizability => {
            let b = require_input(system)?;
            Some(SymMatrix::new(b.matmul(&b.transpose()))?)
        }
        _ => None,
    };
    if let Some(c) = constant {
        let blocks = (0..nv * nv + nv).map(|k| if k < nv * nv { c.clone() } else { SymMatrix::zeros(n) }).collect();
        map = map.with_offset(BlockDiagSym::new(blocks))?;
    }
    Ok(map)
}

/// Functional that is `G` on each of the first `count` blocks and zero elsewhere.
fn on_leading_blocks(dims: &[usize], count: usize, g: &SymMatrix) -> BlockDiagSym {
    BlockDiagSym::new(
        dims.iter().enumerate().map(|(k, &d)| if k < count { g.clone() } else { SymMatrix::zeros(d) }).collect(),
    )
}

/// One equality per upper-triangular entry of `Fᵀ (ΣQ) F`, `F` given by its columns.
fn annihilation_constraints(dims: &[usize], count: usize, f: &Matrix) -> Result<Vec<LinearConstraint>> {
    let cols: Vec<Vec<f64>> = (0..f.cols()).map(|c| f.column(c)).collect();
    let n = f.rows();
    let mut out = Vec::new();
    for r in 0..cols.len() {
        for c in r..cols.len() {
            let outer = Matrix::from_fn(n, n, |p, q| cols[r][p] * cols[c][q]);
            let g = SymMatrix::new(outer)?;
            out.push(LinearConstraint { coefficients: on_leading_blocks(dims, count, &g), target: 0.0 });
        }
    }
    Ok(out)
}

/// Builds the feasibility problem for one side of one analysis.
pub fn build(system: &PolytopicSystem, analysis: Analysis, side: Side) -> Result<FeasibilityProblem> {
    let map = primal_map(system, analysis)?;
    if side == Side::Primal {
        return Ok(FeasibilityProblem::primal(map));
    }

    let n = system.state_dim();
    let dims = map.output_dims().to_vec();
    let count = analysis.dual_count(system.num_vertices());
    let mut equalities =
        vec![LinearConstraint { coefficients: on_leading_blocks(&dims, count, &SymMatrix::identity(n)), target: 1.0 }];
    match analysis {
        Analysis::Detectability => {
            // C (ΣQ) Cᵀ = 0: the columns of Cᵀ annihilate ΣQ.
            equalities.extend(annihilation_constraints(&dims, count, &require_output(system)?.transpose())?);
        }
        Analysis::Stabilizability => {
            equalities.extend(annihilation_constraints(&dims, count, require_input(system)?)?);
        }
        _ => {}
    }
    // The constant only enters through the equalities above.
    let map = map.with_offset(BlockDiagSym::zeros(&dims))?;
    FeasibilityProblem::dual(map, equalities)
}

fn existence_certificate(analysis: Analysis, solution: BlockDiagSym) -> ExistenceCertificate {
    ExistenceCertificate { analysis, matrices: solution.into_blocks() }
}

fn nonexistence_certificate(
    system: &PolytopicSystem,
    analysis: Analysis,
    solution: BlockDiagSym,
) -> Result<NonexistenceCertificate> {
    let nv = system.num_vertices();
    let count = analysis.dual_count(nv);
    let mut blocks = solution.into_blocks();
    let r0 = match analysis {
        Analysis::CtCqlf => Some(blocks[count].clone()),
        _ => None,
    };
    blocks.truncate(count);
    NonexistenceCertificate::new(analysis, nv, blocks, r0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyzeOptions {
    pub solve: SolveOptions,
    pub tolerances: Tolerances,
    /// Iterations each side runs before handing over to the other.
    pub round: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { solve: SolveOptions::default(), tolerances: Tolerances::default(), round: 500 }
    }
}

/// Decides one analysis by running the primal and dual engines in
/// alternating rounds (primal first in each round) until one of them
/// produces a certificate that passes [`verify`], or both give up.
pub fn analyze(system: &PolytopicSystem, analysis: Analysis, opts: &AnalyzeOptions) -> Result<Verdict> {
    let started = Instant::now();
    let primal = build(system, analysis, Side::Primal)?;
    let dual = build(system, analysis, Side::Dual)?;
    let mut sides = [Solver::new(&primal, opts.solve)?, Solver::new(&dual, opts.solve)?];
    let mut finished = [false, false];
    let mut diagnostics = Diagnostics::default();

    let verdict = loop {
        let mut found = None;
        for (k, solver) in sides.iter_mut().enumerate() {
            if finished[k] {
                continue;
            }
            let Some(result) = solver.run(opts.round.max(1))? else { continue };
            finished[k] = true;
            if let Some(cert) = certificate_from(system, analysis, k, result)? {
                let report = verify(system, &cert, &opts.tolerances)?;
                if report.passed {
                    diagnostics.certificate_margin = Some(report.worst_margin());
                    found = Some(cert);
                    break;
                }
                warn!("{analysis}: engine candidate rejected by the verifier (margin {:.3e})", report.worst_margin());
            }
        }
        if let Some(cert) = found {
            let outcome = match (&cert, analysis) {
                (Certificate::Existence(_), Analysis::Stabilizability) => Outcome::NecessaryConditionFeasible,
                (Certificate::Existence(_), _) => Outcome::ExistenceProven,
                (Certificate::Nonexistence(_), _) => Outcome::NonexistenceProven,
            };
            break (outcome, Some(cert));
        }
        if finished.iter().all(|&f| f) {
            break (Outcome::Inconclusive, None);
        }
    };

    diagnostics.primal_iterations = sides[0].iterations();
    diagnostics.dual_iterations = sides[1].iterations();
    diagnostics.primal_residual = sides[0].residual();
    diagnostics.dual_residual = sides[1].residual();
    diagnostics.wall_time = started.elapsed();
    debug!("{analysis}: {:?} in {:?}", verdict.0, diagnostics.wall_time);
    Ok(Verdict { analysis, outcome: verdict.0, certificate: verdict.1, diagnostics })
}

fn certificate_from(
    system: &PolytopicSystem,
    analysis: Analysis,
    side: usize,
    result: SolveResult,
) -> Result<Option<Certificate>> {
    let Some(solution) = result.solution else { return Ok(None) };
    Ok(Some(if side == 0 {
        Certificate::Existence(existence_certificate(analysis, solution))
    } else {
        Certificate::Nonexistence(nonexistence_certificate(system, analysis, solution)?)
    }))
}
