//! Brute-force joint spectral radius bounds over all products up to a depth.

use nalgebra::{DMatrix, Schur};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, Matrix, SymMatrix};
use crate::model::PolytopicSystem;

/// Largest number of words the enumeration may visit at its deepest level.
pub const ENUMERATION_BUDGET: u64 = 1 << 24;

/// Largest modulus among the (complex) eigenvalues of a square matrix.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    if !a.is_square() || !a.is_finite() {
        return Err(Error::contract("spectral radius needs a finite square matrix"));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(0.0);
    }
    let m = DMatrix::from_row_slice(n, n, a.as_slice());
    let schur = Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("spectral radius", "Schur iteration did not converge"))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Largest singular value, `√λ_max(AᵀA)`.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    let gram = SymMatrix::new(a.transpose().matmul(a))?;
    Ok(eig_sym(&gram)?.max().max(0.0).sqrt())
}

/// Bounds reached at one word length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthLevel {
    pub depth: usize,
    /// `max_w ρ(A_w)^{1/t}` over words of this length.
    pub lower: f64,
    /// `(max_w ‖A_w‖₂)^{1/t}` over words of this length.
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JsrBounds {
    pub lower: f64,
    pub upper: f64,
    pub depth: usize,
    /// Zero-based vertex indices; the product is `A_{w_last} ⋯ A_{w_1}`.
    pub witness_word: Vec<usize>,
    pub levels: Vec<DepthLevel>,
}

struct Walk<'a> {
    vertices: &'a [Matrix],
    word: Vec<usize>,
    levels: Vec<(f64, f64)>,
    best: (f64, Vec<usize>),
}

impl Walk<'_> {
    fn descend(&mut self, product: &Matrix) -> Result<()> {
        let t = self.word.len();
        let rho = spectral_radius(product)?.powf(1.0 / t as f64);
        let norm = spectral_norm(product)?;
        let level = &mut self.levels[t - 1];
        level.0 = level.0.max(rho);
        level.1 = level.1.max(norm);
        if rho > self.best.0 {
            self.best = (rho, self.word.clone());
        }
        if t == self.levels.len() {
            return Ok(());
        }
        for (i, a) in self.vertices.iter().enumerate() {
            self.word.push(i);
            self.descend(&a.matmul(product))?;
            self.word.pop();
        }
        Ok(())
    }
}

/// Enumerates every product of at most `max_depth` vertices.
pub fn bounds(system: &PolytopicSystem, max_depth: usize) -> Result<JsrBounds> {
    if max_depth == 0 {
        return Err(Error::contract("max_depth must be at least 1"));
    }
    let nv = system.num_vertices() as u64;
    let within = u32::try_from(max_depth).ok().and_then(|d| nv.checked_pow(d)).is_some_and(|w| w <= ENUMERATION_BUDGET);
    if !within {
        return Err(Error::contract(format!(
            "{nv}^{max_depth} words exceed the enumeration budget of {ENUMERATION_BUDGET}"
        )));
    }

    let mut walk = Walk {
        vertices: system.vertices(),
        word: Vec::with_capacity(max_depth),
        levels: vec![(0.0, 0.0); max_depth],
        best: (f64::NEG_INFINITY, Vec::new()),
    };
    for (i, a) in system.vertices().iter().enumerate() {
        walk.word.push(i);
        walk.descend(a)?;
        walk.word.pop();
    }

    let levels: Vec<DepthLevel> = walk
        .levels
        .iter()
        .enumerate()
        .map(|(k, &(lower, norm))| DepthLevel { depth: k + 1, lower, upper: norm.powf(1.0 / (k + 1) as f64) })
        .collect();
    let mut upper = levels.iter().map(|l| l.upper).fold(f64::INFINITY, f64::min);
    if nv == 1 {
        // A singleton set has joint spectral radius ρ(A) exactly.
        upper = upper.min(walk.best.0);
    }
    Ok(JsrBounds { lower: walk.best.0, upper, depth: max_depth, witness_word: walk.best.1, levels })
}
