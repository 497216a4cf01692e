//! Block-diagonal linear matrix maps, their adjoints, and a convex
//! feasibility engine for both sides of the alternative:
//!
//! * primal: find `x` with `𝒜(x) + A₀ ≻ 0`;
//! * dual: find `R ⪰ 0` with `𝒜^adj(R) = 0` and a set of linear equalities
//!   (trace normalization, output/input annihilation).
//!
//! Both are solved by a projection splitting between the PSD cone
//! (eigenvalue clipping) and an affine set handled in svec coordinates:
//! Douglas–Rachford by default, Dykstra's alternating projections on request
//! ([`Method`]).
//!
//! The primal is homogenized: with `v = (x, t)` the engine looks for
//! `𝒜(x) + t·A₀ ⪰ I` and `t ≥ 1`, then returns `x / t`. Any strictly
//! feasible point can be rescaled into that set, so this is equivalent to
//! the strict LMI while keeping a unit floor in the projections.

use log::debug;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, pinv_sym, project_psd, BlockDiagSym, Matrix, SymMatrix};

const PINV_CUTOFF: f64 = 1e-12;
/// Eigenvalues of an exposing matrix below this fraction of its largest count as zero.
const NULL_SPACE_CUTOFF: f64 = 1e-6;
/// Relative change of the Douglas–Rachford displacement below which it counts as settled.
const DRIFT_SETTLED: f64 = 1e-9;
/// Consecutive settled steps after which the sets count as disjoint.
const DRIFT_STREAK: usize = 500;

/// One summand `s·(L·X·R + Rᵀ·X·Lᵀ)` of an output block, `X` being a variable block.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub out_block: usize,
    pub var_block: usize,
    pub scale: f64,
    /// `out_dim × var_dim`
    pub left: Matrix,
    /// `var_dim × out_dim`
    pub right: Matrix,
}

/// Linear map between spaces of block-diagonal symmetric matrices, together
/// with the constant `A₀` on the output space.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMatrixMap {
    input_dims: Vec<usize>,
    output_dims: Vec<usize>,
    terms: Vec<Term>,
    offset: BlockDiagSym,
}

impl LinearMatrixMap {
    pub fn new(input_dims: Vec<usize>, output_dims: Vec<usize>) -> Self {
        let offset = BlockDiagSym::zeros(&output_dims);
        LinearMatrixMap { input_dims, output_dims, terms: Vec::new(), offset }
    }

    pub fn input_dims(&self) -> &[usize] {
        &self.input_dims
    }

    pub fn output_dims(&self) -> &[usize] {
        &self.output_dims
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn offset(&self) -> &BlockDiagSym {
        &self.offset
    }

    pub fn add_term(&mut self, term: Term) -> Result<()> {
        let (Some(&no), Some(&nv)) = (self.output_dims.get(term.out_block), self.input_dims.get(term.var_block)) else {
            return Err(Error::contract(format!(
                "term references block out={} var={} outside the map structure",
                term.out_block, term.var_block
            )));
        };
        if (term.left.rows(), term.left.cols()) != (no, nv) || (term.right.rows(), term.right.cols()) != (nv, no) {
            return Err(Error::contract(format!(
                "term factors {}x{} and {}x{} do not fit variable dim {nv} and output dim {no}",
                term.left.rows(),
                term.left.cols(),
                term.right.rows(),
                term.right.cols()
            )));
        }
        if !term.scale.is_finite() || !term.left.is_finite() || !term.right.is_finite() {
            return Err(Error::contract("term has non-finite entries"));
        }
        self.terms.push(term);
        Ok(())
    }

    /// Convenience for `add_term`.
    pub fn term(&mut self, out_block: usize, var_block: usize, scale: f64, left: Matrix, right: Matrix) -> Result<()> {
        self.add_term(Term { out_block, var_block, scale, left, right })
    }

    pub fn with_offset(mut self, offset: BlockDiagSym) -> Result<Self> {
        offset.check_structure(&self.output_dims, "offset")?;
        self.offset = offset;
        Ok(self)
    }

    /// `𝒜(x)`, without the offset.
    pub fn apply(&self, x: &BlockDiagSym) -> Result<BlockDiagSym> {
        x.check_structure(&self.input_dims, "apply_map input")?;
        let mut acc: Vec<Matrix> = self.output_dims.iter().map(|&n| Matrix::zeros(n, n)).collect();
        for t in &self.terms {
            let lxr = t.left.matmul(x.block(t.var_block).as_matrix()).matmul(&t.right);
            let contrib = lxr.add(&lxr.transpose()).scale(t.scale);
            acc[t.out_block] = acc[t.out_block].add(&contrib);
        }
        Ok(BlockDiagSym::new(acc.into_iter().map(SymMatrix::new).collect::<Result<_>>()?))
    }

    /// `𝒜(x) + A₀`.
    pub fn apply_affine(&self, x: &BlockDiagSym) -> Result<BlockDiagSym> {
        self.apply(x)?.add(&self.offset)
    }

    /// `𝒜^adj(r)`: for each term, `s·(R·r_out·L + (R·r_out·L)ᵀ)` lands on its variable block.
    pub fn adjoint(&self, r: &BlockDiagSym) -> Result<BlockDiagSym> {
        r.check_structure(&self.output_dims, "apply_adjoint input")?;
        let mut acc: Vec<Matrix> = self.input_dims.iter().map(|&n| Matrix::zeros(n, n)).collect();
        for t in &self.terms {
            let ryl = t.right.matmul(r.block(t.out_block).as_matrix()).matmul(&t.left);
            let contrib = ryl.add(&ryl.transpose()).scale(t.scale);
            acc[t.var_block] = acc[t.var_block].add(&contrib);
        }
        Ok(BlockDiagSym::new(acc.into_iter().map(SymMatrix::new).collect::<Result<_>>()?))
    }

    /// Dense matrix of `𝒜` in svec coordinates (output svec × input svec).
    pub fn svec_matrix(&self) -> Result<Matrix> {
        let nin = BlockDiagSym::svec_len(&self.input_dims);
        let nout = BlockDiagSym::svec_len(&self.output_dims);
        let mut m = Matrix::zeros(nout, nin);
        let mut e = vec![0.0; nin];
        for k in 0..nin {
            e[k] = 1.0;
            let col = self.apply(&BlockDiagSym::from_svec(&self.input_dims, &e))?.to_svec();
            e[k] = 0.0;
            for (r, v) in col.into_iter().enumerate() {
                m[(r, k)] = v;
            }
        }
        Ok(m)
    }

    /// Dense matrix of `𝒜^adj` in svec coordinates (input svec × output svec).
    pub fn adjoint_svec_matrix(&self) -> Result<Matrix> {
        let nin = BlockDiagSym::svec_len(&self.input_dims);
        let nout = BlockDiagSym::svec_len(&self.output_dims);
        let mut m = Matrix::zeros(nin, nout);
        let mut e = vec![0.0; nout];
        for k in 0..nout {
            e[k] = 1.0;
            let col = self.adjoint(&BlockDiagSym::from_svec(&self.output_dims, &e))?.to_svec();
            e[k] = 0.0;
            for (r, v) in col.into_iter().enumerate() {
                m[(r, k)] = v;
            }
        }
        Ok(m)
    }
}

pub fn apply_map(map: &LinearMatrixMap, x: &BlockDiagSym) -> Result<BlockDiagSym> {
    map.apply(x)
}

pub fn apply_adjoint(map: &LinearMatrixMap, r: &BlockDiagSym) -> Result<BlockDiagSym> {
    map.adjoint(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Primal,
    Dual,
}

/// `⟨coefficients, X⟩ = target` on the variable blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub coefficients: BlockDiagSym,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityProblem {
    side: Side,
    map: LinearMatrixMap,
    equalities: Vec<LinearConstraint>,
}

impl FeasibilityProblem {
    /// Find `x` with `𝒜(x) + A₀ ≻ 0`.
    pub fn primal(map: LinearMatrixMap) -> Self {
        FeasibilityProblem { side: Side::Primal, map, equalities: Vec::new() }
    }

    /// Find `R ⪰ 0` on the output structure of `map` with `𝒜^adj(R) = 0` and the given equalities.
    pub fn dual(map: LinearMatrixMap, equalities: Vec<LinearConstraint>) -> Result<Self> {
        for (k, eq) in equalities.iter().enumerate() {
            eq.coefficients.check_structure(map.output_dims(), &format!("equality {k}"))?;
            if !eq.target.is_finite() {
                return Err(Error::contract(format!("equality {k} has a non-finite target")));
            }
        }
        Ok(FeasibilityProblem { side: Side::Dual, map, equalities })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn map(&self) -> &LinearMatrixMap {
        &self.map
    }

    pub fn equalities(&self) -> &[LinearConstraint] {
        &self.equalities
    }

    pub fn psd_on_variables(&self) -> bool {
        self.side == Side::Dual
    }

    pub fn variable_structure(&self) -> &[usize] {
        match self.side {
            Side::Primal => self.map.input_dims(),
            Side::Dual => self.map.output_dims(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Allowed relative PSD violation of a dual point.
    pub tol_feas: f64,
    /// Required relative margin `λ_min ≥ ε(1 + ‖·‖_F)` of a primal point.
    pub strictness: f64,
    /// Successive iterates closer than this (relative) end the run.
    pub stall_tol: f64,
    pub check_every: usize,
    /// Eigenvalue floor of the dual PSD projection; aims the iterates at a
    /// slightly interior point so feasibility shows up before the limit.
    pub dual_floor: f64,
    /// Dual iterations after which facial reduction is tried once; `None` disables it.
    pub facial_reduction_after: Option<usize>,
    /// Iteration cap of each auxiliary solve during facial reduction.
    pub facial_reduction_iters: usize,
    pub method: Method,
}

/// Projection scheme used by both sides of the engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    /// Dykstra's alternating projections.
    Dykstra,
    /// Douglas–Rachford (averaged alternating reflections).
    #[default]
    DouglasRachford,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 200_000,
            tol_feas: 1e-9,
            strictness: 1e-6,
            stall_tol: 1e-12,
            check_every: 10,
            dual_floor: 0.0,
            facial_reduction_after: Some(20_000),
            facial_reduction_iters: 20_000,
            method: Method::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    /// Iterates stopped moving without reaching feasibility.
    Stalled,
    IterationCap,
    /// The affine constraints alone are inconsistent.
    AffineInfeasible,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Variable blocks; present iff `status == Feasible`.
    pub solution: Option<BlockDiagSym>,
    pub iterations: usize,
    /// Last measured infeasibility (relative PSD violation).
    pub residual: f64,
}

impl SolveResult {
    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Feasible
    }
}

/// Resumable solver; [`Solver::run`] advances by a bounded number of iterations.
pub struct Solver {
    state: Option<State>,
    opts: SolveOptions,
    iterations: usize,
    residual: f64,
    done: Option<SolveResult>,
}

enum State {
    Primal(PrimalState),
    Dual(DualState),
}

struct PrimalState {
    map: LinearMatrixMap,
    // (x, t) from a point of the range
    recover: Matrix,
    core: Splitting,
}

/// Projection splitting between the shifted PSD blocks `{λ_min ≥ floor}` and
/// the affine set `{proj·v + shift}`. `z` always lies in the affine set.
struct Splitting {
    dims: Vec<usize>,
    proj: Matrix,
    shift: Vec<f64>,
    floor: f64,
    method: Method,
    z: Vec<f64>,
    // Dykstra correction, or the governing sequence of Douglas–Rachford
    aux: Vec<f64>,
    // last Douglas–Rachford displacement of `aux`
    drift: Vec<f64>,
    settled_streak: usize,
}

/// Dual problem in (possibly face-reduced) coordinates `y`, with `z = lift·y`.
struct DualState {
    e: Matrix,
    h: Vec<f64>,
    orig_dims: Vec<usize>,
    lift: Option<Matrix>,
    core: Splitting,
    searched: bool,
}

enum Reduction {
    Unchanged,
    Reduced,
    /// The face left no room for the affine constraints.
    Empty,
}

fn project_blocks(dims: &[usize], v: &[f64], floor: f64) -> Result<Vec<f64>> {
    let blocks = BlockDiagSym::from_svec(dims, v);
    let projected = blocks.blocks().iter().map(|b| project_psd(b, floor)).collect::<Result<Vec<_>>>()?;
    Ok(BlockDiagSym::new(projected).to_svec())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl PrimalState {
    fn new(map: &LinearMatrixMap, method: Method) -> Result<Self> {
        let mut out_dims = map.output_dims().to_vec();
        out_dims.push(1);
        let a = map.svec_matrix()?;
        let nin = a.cols();
        let nout = a.rows();
        let offset = map.offset().to_svec();
        // Homogenized operator v = (x, t) -> (𝒜(x) + t·A₀, t).
        let lift = Matrix::from_fn(nout + 1, nin + 1, |r, c| match (r < nout, c < nin) {
            (true, true) => a[(r, c)],
            (true, false) => offset[r],
            (false, true) => 0.0,
            (false, false) => 1.0,
        });
        let gram = SymMatrix::new(lift.transpose().matmul(&lift))?;
        let recover = pinv_sym(&gram, PINV_CUTOFF)?.as_matrix().matmul(&lift.transpose());
        let range_proj = lift.matmul(&recover);
        let m = nout + 1;
        let core = Splitting::new(out_dims, range_proj, vec![0.0; m], 1.0, method, vec![0.0; m]);
        Ok(PrimalState { map: map.clone(), recover, core })
    }

    /// Returns the candidate `x` and its infeasibility (0 when it meets the margin).
    fn candidate(&self, strictness: f64) -> Result<(Option<BlockDiagSym>, f64)> {
        let y = &self.core.z;
        let v = self.recover.matvec(y);
        let (xs, t) = v.split_at(v.len() - 1);
        let t = t[0];
        let residual = {
            let blocks = BlockDiagSym::from_svec(&self.core.dims, y);
            let mut worst = 0.0_f64;
            for b in blocks.blocks() {
                let lmin = eig_sym(b)?.min();
                worst = worst.max((1.0 - lmin).max(0.0) / (1.0 + b.frobenius_norm()));
            }
            worst
        };
        if t <= 0.0 || !t.is_finite() {
            return Ok((None, residual.max(1.0)));
        }
        let x_svec: Vec<f64> = xs.iter().map(|v| v / t).collect();
        let x = BlockDiagSym::from_svec(self.map.input_dims(), &x_svec);
        let m = self.map.apply_affine(&x)?;
        for b in m.blocks() {
            let lmin = eig_sym(b)?.min();
            if lmin < strictness * (1.0 + b.frobenius_norm()) {
                return Ok((None, residual));
            }
        }
        Ok((Some(x), 0.0))
    }
}

fn identity_start(dims: &[usize]) -> Vec<f64> {
    BlockDiagSym::new(dims.iter().map(|&n| SymMatrix::identity(n)).collect()).to_svec()
}

fn affine_step(proj: &Matrix, shift: &[f64], v: &[f64]) -> Vec<f64> {
    proj.matvec(v).iter().zip(shift).map(|(a, b)| a + b).collect()
}

/// Projector and shift onto `{v : E v = h}`, or `None` when it is empty.
fn affine_projector(e: &Matrix, h: &[f64]) -> Result<Option<(Matrix, Vec<f64>)>> {
    let nvar = e.cols();
    let gram = SymMatrix::new(e.matmul(&e.transpose()))?;
    let solve_map = e.transpose().matmul(pinv_sym(&gram, PINV_CUTOFF)?.as_matrix());
    let shift = solve_map.matvec(h);
    let mismatch = dist(&e.matvec(&shift), h);
    if mismatch > 1e-8 * (1.0 + norm(h)) {
        debug!("dual affine constraints inconsistent (mismatch {mismatch:.3e})");
        return Ok(None);
    }
    let pe = solve_map.matmul(e);
    let proj = Matrix::from_fn(nvar, nvar, |r, c| if r == c { 1.0 } else { 0.0 } - pe[(r, c)]);
    Ok(Some((proj, shift)))
}

impl Splitting {
    fn new(dims: Vec<usize>, proj: Matrix, shift: Vec<f64>, floor: f64, method: Method, start: Vec<f64>) -> Self {
        let z = affine_step(&proj, &shift, &start);
        let aux = match method {
            Method::Dykstra => vec![0.0; z.len()],
            Method::DouglasRachford => start,
        };
        let drift = vec![0.0; z.len()];
        Splitting { dims, proj, shift, floor, method, z, aux, drift, settled_streak: 0 }
    }

    fn disjoint(&self) -> bool {
        self.settled_streak >= DRIFT_STREAK
    }

    /// One iteration; returns how far the state moved.
    fn step(&mut self) -> Result<f64> {
        match self.method {
            Method::Dykstra => {
                let w: Vec<f64> = self.z.iter().zip(&self.aux).map(|(a, b)| a + b).collect();
                let c = project_blocks(&self.dims, &w, self.floor)?;
                let aux: Vec<f64> = w.iter().zip(&c).map(|(a, b)| a - b).collect();
                let z_new = affine_step(&self.proj, &self.shift, &c);
                // the iterate can stand still while the correction moves
                let moved = dist(&z_new, &self.z) + dist(&aux, &self.aux);
                self.z = z_new;
                self.aux = aux;
                Ok(moved)
            }
            Method::DouglasRachford => {
                let reflected: Vec<f64> = self.z.iter().zip(&self.aux).map(|(z, x)| 2.0 * z - x).collect();
                let c = project_blocks(&self.dims, &reflected, self.floor)?;
                let drift: Vec<f64> = c.iter().zip(&self.z).map(|(c, z)| c - z).collect();
                for (x, d) in self.aux.iter_mut().zip(&drift) {
                    *x += d;
                }
                let moved = norm(&drift);
                // A displacement that stops changing while staying nonzero is
                // the signature of two disjoint sets.
                if moved > 0.0 && dist(&drift, &self.drift) <= DRIFT_SETTLED * moved {
                    self.settled_streak += 1;
                } else {
                    self.settled_streak = 0;
                }
                self.drift = drift;
                self.z = affine_step(&self.proj, &self.shift, &self.aux);
                Ok(moved)
            }
        }
    }

    fn residual(&self) -> Result<f64> {
        let blocks = BlockDiagSym::from_svec(&self.dims, &self.z);
        let mut worst = 0.0_f64;
        for b in blocks.blocks() {
            let lmin = eig_sym(b)?.min();
            worst = worst.max((-lmin).max(0.0) / (1.0 + b.frobenius_norm()));
        }
        Ok(worst)
    }

    /// Runs to feasibility, a stall, or `max_iters`; true when feasible.
    fn run(&mut self, opts: &SolveOptions, max_iters: usize) -> Result<bool> {
        let every = opts.check_every.max(1);
        for k in 1..=max_iters {
            let moved = self.step()?;
            if !moved.is_finite() {
                return Err(Error::numerical("facial reduction", "non-finite iterate"));
            }
            let stalled = moved <= opts.stall_tol * (1.0 + norm(&self.z)) || self.disjoint();
            if stalled || k.is_multiple_of(every) {
                if self.residual()? <= opts.tol_feas {
                    return Ok(true);
                }
                if stalled {
                    return Ok(false);
                }
            }
        }
        Ok(false)
    }
}

/// Matrix of `svec(Y) ↦ svec(V Y Vᵀ)` for orthonormal columns `V`.
fn congruence_svec(v: &Matrix) -> Result<Matrix> {
    let (n, k) = (v.rows(), v.cols());
    let (rows, cols) = (n * (n + 1) / 2, k * (k + 1) / 2);
    let mut out = Matrix::zeros(rows, cols);
    let mut unit = vec![0.0; cols];
    let mut buf = Vec::with_capacity(rows);
    for c in 0..cols {
        unit[c] = 1.0;
        let y = SymMatrix::from_svec(k, &unit);
        buf.clear();
        y.congruence(v).write_svec(&mut buf);
        for (r, val) in buf.iter().enumerate() {
            out[(r, c)] = *val;
        }
        unit[c] = 0.0;
    }
    Ok(out)
}

impl DualState {
    fn new(problem: &FeasibilityProblem, opts: &SolveOptions) -> Result<Option<Self>> {
        let map = problem.map();
        let dims = map.output_dims().to_vec();
        let adj = map.adjoint_svec_matrix()?;
        let nvar = adj.cols();
        let neq = problem.equalities().len();
        let rows = adj.rows() + neq;
        let mut e = Matrix::zeros(rows, nvar);
        let mut h = vec![0.0; rows];
        for r in 0..adj.rows() {
            for c in 0..nvar {
                e[(r, c)] = adj[(r, c)];
            }
        }
        for (k, eq) in problem.equalities().iter().enumerate() {
            for (c, v) in eq.coefficients.to_svec().into_iter().enumerate() {
                e[(adj.rows() + k, c)] = v;
            }
            h[adj.rows() + k] = eq.target;
        }
        let Some((proj, shift)) = affine_projector(&e, &h)? else { return Ok(None) };
        let core = Splitting::new(dims.clone(), proj, shift, opts.dual_floor, opts.method, identity_start(&dims));
        let mut state = DualState { e, h, orig_dims: dims, lift: None, core, searched: false };
        match state.reduce(opts, false)? {
            Reduction::Empty => Ok(None),
            Reduction::Reduced | Reduction::Unchanged => Ok(Some(state)),
        }
    }

    fn solution(&self) -> BlockDiagSym {
        match &self.lift {
            Some(l) => BlockDiagSym::from_svec(&self.orig_dims, &l.matvec(&self.core.z)),
            None => BlockDiagSym::from_svec(&self.orig_dims, &self.core.z),
        }
    }

    /// Facial reduction: while some `W ⪰ 0`, `W ≠ 0` is orthogonal to every
    /// feasible point, restrict each block to the null space of `W`.
    fn reduce(&mut self, opts: &SolveOptions, search: bool) -> Result<Reduction> {
        let mut e = match &self.lift {
            Some(l) => self.e.matmul(l),
            None => self.e.clone(),
        };
        let mut dims = self.core.dims.clone();
        let mut lift = self.lift.clone();
        let mut changed = false;

        while let Some(face) = exposing_face(&e, &self.h, &dims, opts, search)? {
            let mut piece = Matrix::zeros(e.cols(), face.iter().map(|v| v.cols() * (v.cols() + 1) / 2).sum());
            let (mut r0, mut c0) = (0, 0);
            for (v, &n) in face.iter().zip(&dims) {
                let m = congruence_svec(v)?;
                for r in 0..m.rows() {
                    for c in 0..m.cols() {
                        piece[(r0 + r, c0 + c)] = m[(r, c)];
                    }
                }
                r0 += n * (n + 1) / 2;
                c0 += m.cols();
            }
            debug!(
                "facial reduction: block sizes {:?} -> {:?}",
                dims,
                face.iter().map(Matrix::cols).collect::<Vec<_>>()
            );
            e = e.matmul(&piece);
            lift = Some(match lift {
                Some(l) => l.matmul(&piece),
                None => piece,
            });
            dims = face.iter().map(Matrix::cols).filter(|&d| d > 0).collect();
            changed = true;
            if dims.is_empty() {
                return Ok(Reduction::Empty);
            }
        }
        if !changed {
            return Ok(Reduction::Unchanged);
        }
        let Some((proj, shift)) = affine_projector(&e, &self.h)? else { return Ok(Reduction::Empty) };
        let start = identity_start(&dims);
        self.core = Splitting::new(dims, proj, shift, opts.dual_floor, opts.method, start);
        self.lift = lift;
        Ok(Reduction::Reduced)
    }
}

/// Looks for `W ⪰ 0`, `tr W = 1`, `W = Eᵀλ` with `hᵀλ = 0`, and returns per
/// block an orthonormal basis of the null space of `W` (the exposed face).
/// Single homogeneous rows are tried first; `search` enables the auxiliary
/// solve for general `λ`.
fn exposing_face(
    e: &Matrix,
    h: &[f64],
    dims: &[usize],
    opts: &SolveOptions,
    search: bool,
) -> Result<Option<Vec<Matrix>>> {
    let nvar = e.cols();
    if nvar == 0 {
        return Ok(None);
    }
    // A homogeneous row with semidefinite coefficients is itself exposing.
    for r in (0..h.len()).filter(|&r| h[r] == 0.0) {
        let row = BlockDiagSym::from_svec(dims, e.row(r));
        let eigs = row.blocks().iter().map(eig_sym).collect::<Result<Vec<_>>>()?;
        let hi = eigs.iter().map(|e| e.max()).fold(0.0, f64::max);
        let lo = eigs.iter().map(|e| e.min()).fold(0.0, f64::min);
        let sign = if hi > 0.0 && lo >= -NULL_SPACE_CUTOFF * hi {
            1.0
        } else if lo < 0.0 && hi <= -NULL_SPACE_CUTOFF * lo {
            -1.0
        } else {
            continue;
        };
        if let Some(face) = null_spaces(&row.scale(sign), dims)? {
            return Ok(Some(face));
        }
    }
    if !search {
        return Ok(None);
    }
    let hh = h.iter().map(|x| x * x).sum::<f64>();
    let m = if hh > 0.0 {
        let kill = Matrix::from_fn(h.len(), h.len(), |r, c| if r == c { 1.0 } else { 0.0 } - h[r] * h[c] / hh);
        e.transpose().matmul(&kill)
    } else {
        e.transpose()
    };
    let gram = SymMatrix::new(m.transpose().matmul(&m))?;
    let span = m.matmul(&pinv_sym(&gram, PINV_CUTOFF)?.as_matrix().matmul(&m.transpose()));
    let dims: Vec<usize> = dims.to_vec();
    let t = identity_start(&dims);
    let ts = span.matvec(&t);
    let tt = ts.iter().map(|x| x * x).sum::<f64>();
    if tt <= 1e-12 * norm(&t).powi(2) {
        return Ok(None);
    }
    let proj = Matrix::from_fn(nvar, nvar, |r, c| span[(r, c)] - ts[r] * ts[c] / tt);
    let shift: Vec<f64> = ts.iter().map(|x| x / tt).collect();
    let mut aux = Splitting::new(dims.clone(), proj, shift, 0.0, opts.method, t);
    if !aux.run(opts, opts.facial_reduction_iters)? {
        debug!("facial reduction: no exposing matrix (residual {:.3e})", aux.residual()?);
        return Ok(None);
    }

    null_spaces(&BlockDiagSym::from_svec(&dims, &aux.z), &dims)
}

/// Per block, an orthonormal basis of the numerical null space of `w ⪰ 0`;
/// `None` when no block shrinks.
fn null_spaces(w: &BlockDiagSym, dims: &[usize]) -> Result<Option<Vec<Matrix>>> {
    let eigs = w.blocks().iter().map(eig_sym).collect::<Result<Vec<_>>>()?;
    let top = eigs.iter().map(|e| e.max()).fold(0.0, f64::max);
    let cut = NULL_SPACE_CUTOFF * top;
    let mut face = Vec::with_capacity(dims.len());
    let mut shrunk = false;
    for (eig, &n) in eigs.iter().zip(dims) {
        let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] <= cut).collect();
        shrunk |= keep.len() < n;
        face.push(Matrix::from_fn(n, keep.len(), |r, c| eig.vectors[(r, keep[c])]));
    }
    Ok(shrunk.then_some(face))
}

impl Solver {
    pub fn new(problem: &FeasibilityProblem, opts: SolveOptions) -> Result<Self> {
        let (state, done) = match problem.side() {
            Side::Primal => {
                if !problem.equalities().is_empty() {
                    return Err(Error::contract("primal problems take no equality constraints"));
                }
                (Some(State::Primal(PrimalState::new(problem.map(), opts.method)?)), None)
            }
            Side::Dual => match DualState::new(problem, &opts)? {
                Some(state) => (Some(State::Dual(state)), None),
                None => {
                    let r = SolveResult {
                        status: SolveStatus::AffineInfeasible,
                        solution: None,
                        iterations: 0,
                        residual: f64::INFINITY,
                    };
                    (None, Some(r))
                }
            },
        };
        Ok(Solver { state, opts, iterations: 0, residual: f64::INFINITY, done })
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn result(&self) -> Option<&SolveResult> {
        self.done.as_ref()
    }

    fn finish(&mut self, status: SolveStatus, solution: Option<BlockDiagSym>) -> SolveResult {
        let r = SolveResult { status, solution, iterations: self.iterations, residual: self.residual };
        self.done = Some(r.clone());
        r
    }

    /// Runs at most `budget` more iterations. Returns the final result once the
    /// solver has terminated, `None` while it is still running.
    pub fn run(&mut self, budget: usize) -> Result<Option<SolveResult>> {
        if let Some(r) = &self.done {
            return Ok(Some(r.clone()));
        }
        let check_every = self.opts.check_every.max(1);
        for _ in 0..budget {
            if self.iterations >= self.opts.max_iters {
                return Ok(Some(self.finish(SolveStatus::IterationCap, None)));
            }
            let (moved, scale, settled) = match self.state.as_mut().expect("running solver has state") {
                State::Primal(s) => (s.core.step()?, norm(&s.core.z), s.core.disjoint()),
                State::Dual(s) => {
                    let due = self.opts.facial_reduction_after.is_some_and(|n| self.iterations >= n);
                    if due && !s.searched {
                        s.searched = true;
                        match s.reduce(&self.opts, true)? {
                            Reduction::Empty => return Ok(Some(self.finish(SolveStatus::AffineInfeasible, None))),
                            Reduction::Reduced | Reduction::Unchanged => {}
                        }
                    }
                    (s.core.step()?, norm(&s.core.z), s.core.disjoint())
                }
            };
            self.iterations += 1;
            if !moved.is_finite() {
                return Err(Error::numerical("solve", format!("non-finite iterate at iteration {}", self.iterations)));
            }
            let stalled = moved <= self.opts.stall_tol * (1.0 + scale) || settled;
            if stalled || self.iterations.is_multiple_of(check_every) {
                if let Some(sol) = self.check()? {
                    return Ok(Some(self.finish(SolveStatus::Feasible, Some(sol))));
                }
                if stalled {
                    return Ok(Some(self.finish(SolveStatus::Stalled, None)));
                }
            }
        }
        Ok(None)
    }

    fn check(&mut self) -> Result<Option<BlockDiagSym>> {
        match self.state.as_ref().expect("running solver has state") {
            State::Primal(s) => {
                let (x, residual) = s.candidate(self.opts.strictness)?;
                self.residual = residual;
                Ok(x)
            }
            State::Dual(s) => {
                self.residual = s.core.residual()?;
                if self.residual <= self.opts.tol_feas {
                    Ok(Some(s.solution()))
                } else {
                    Ok(None)
                }
            }
        }
    }
}

/// Runs the feasibility engine to completion.
pub fn solve(problem: &FeasibilityProblem, opts: SolveOptions) -> Result<SolveResult> {
    let mut solver = Solver::new(problem, opts)?;
    loop {
        if let Some(r) = solver.run(usize::MAX)? {
            debug!("{:?} solve finished: {:?} after {} iterations", problem.side(), r.status, r.iterations);
            return Ok(r);
        }
    }
}
