#![allow(dead_code)]

use std::path::PathBuf;

use cone_lpv::{BlockDiagSym, LinearMatrixMap, Matrix, PolytopicSystem, SymMatrix};
use rand::distributions::{Distribution, Uniform};
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join("data").join(name)
}

pub fn mat(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, half_width: f64) -> Matrix {
    let d = Uniform::new_inclusive(-half_width, half_width);
    Matrix::from_fn(rows, cols, |_, _| d.sample(rng))
}

pub fn random_sym(rng: &mut impl Rng, n: usize) -> SymMatrix {
    SymMatrix::new(random_matrix(rng, n, n, 1.0)).unwrap()
}

pub fn random_blocks(rng: &mut impl Rng, dims: &[usize]) -> BlockDiagSym {
    BlockDiagSym::new(dims.iter().map(|&n| random_sym(rng, n)).collect())
}

/// Two 2×2 vertices with entries uniform in [−1.5, 1.5].
pub fn random_system(rng: &mut impl Rng) -> PolytopicSystem {
    PolytopicSystem::autonomous(vec![random_matrix(rng, 2, 2, 1.5), random_matrix(rng, 2, 2, 1.5)]).unwrap()
}

/// A map with random block structure and a handful of random terms.
pub fn random_map(rng: &mut impl Rng) -> LinearMatrixMap {
    let ins: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=4)).collect();
    let outs: Vec<usize> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(1..=4)).collect();
    let mut map = LinearMatrixMap::new(ins.clone(), outs.clone());
    for _ in 0..rng.gen_range(1..=6) {
        let o = rng.gen_range(0..outs.len());
        let v = rng.gen_range(0..ins.len());
        let left = random_matrix(rng, outs[o], ins[v], 1.0);
        let right = random_matrix(rng, ins[v], outs[o], 1.0);
        map.term(o, v, rng.gen_range(-2.0..2.0), left, right).unwrap();
    }
    map
}
