//! Polytopic systems, certificates and verdicts, plus their JSON file forms.
//!
//! Vertices are zero-based in the API. Dual blocks are doubly indexed
//! `Q[i][j]`; on disk they may also appear as a flat list `R_1..R_{N²}`,
//! related by `R_{N(j-1)+i} = Q_{i,j}` (one-based, see [`flat_to_pair`]).
//!
//! The analyses assume the system is strictly polytopic, i.e. that the
//! scheduling map reaches every vertex. That property constrains the
//! parameter set, which is not part of the input, so it is not checked.

use std::fmt;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    /// Poly-quadratic stability of the autonomous system.
    Stability,
    /// Existence of an observer with poly-QS error dynamics (needs `C`).
    Detectability,
    /// Necessary LMI condition for poly-Q stabilizability (needs `B`).
    Stabilizability,
    /// Common quadratic Lyapunov function of the vertices read as continuous-time modes.
    CtCqlf,
}

impl Analysis {
    pub const ALL: [Analysis; 4] =
        [Analysis::Stability, Analysis::Detectability, Analysis::Stabilizability, Analysis::CtCqlf];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Stability => "stability",
            Analysis::Detectability => "detectability",
            Analysis::Stabilizability => "stabilizability",
            Analysis::CtCqlf => "ct_cqlf",
        }
    }

    /// Number of primal matrices in an existence certificate.
    pub fn primal_count(self, num_vertices: usize) -> usize {
        match self {
            Analysis::CtCqlf => 1,
            _ => num_vertices,
        }
    }

    /// Number of dual blocks in a nonexistence certificate (`R_0` excluded for ct_cqlf).
    pub fn dual_count(self, num_vertices: usize) -> usize {
        match self {
            Analysis::CtCqlf => num_vertices,
            _ => num_vertices * num_vertices,
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps a one-based flat index `k ∈ 1..=N²` to the one-based pair `(i, j)`
/// with `k = N(j-1) + i`.
pub fn flat_to_pair(k: usize, n: usize) -> Result<(usize, usize)> {
    if n == 0 || k == 0 || k > n * n {
        return Err(Error::contract(format!("flat index {k} out of range 1..={}", n * n)));
    }
    Ok(((k - 1) % n + 1, (k - 1) / n + 1))
}

/// Inverse of [`flat_to_pair`].
pub fn pair_to_flat(i: usize, j: usize, n: usize) -> Result<usize> {
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::contract(format!("pair ({i}, {j}) out of range for N = {n}")));
    }
    Ok(n * (j - 1) + i)
}

/// A single well-formedness violation found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub field: String,
    pub message: String,
}

impl Finding {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Finding { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Discrete-time polytopic system `x⁺ = (Σ ξ_i A_i) x + B u`, `y = C x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolytopicSystem {
    vertices: Vec<Matrix>,
    input: Option<Matrix>,
    output: Option<Matrix>,
}

impl PolytopicSystem {
    pub fn new(vertices: Vec<Matrix>, input: Option<Matrix>, output: Option<Matrix>) -> Result<Self> {
        let findings = check_parts(&vertices, input.as_ref(), output.as_ref());
        if !findings.is_empty() {
            return Err(Error::InvalidSystem(findings));
        }
        Ok(PolytopicSystem { vertices, input, output })
    }

    pub fn autonomous(vertices: Vec<Matrix>) -> Result<Self> {
        Self::new(vertices, None, None)
    }

    pub fn state_dim(&self) -> usize {
        self.vertices[0].rows()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Matrix] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Matrix {
        &self.vertices[i]
    }

    pub fn input_matrix(&self) -> Option<&Matrix> {
        self.input.as_ref()
    }

    pub fn output_matrix(&self) -> Option<&Matrix> {
        self.output.as_ref()
    }

    pub fn with_input(mut self, b: Matrix) -> Result<Self> {
        self.input = Some(b);
        Self::new(self.vertices, self.input, self.output)
    }

    pub fn with_output(mut self, c: Matrix) -> Result<Self> {
        self.output = Some(c);
        Self::new(self.vertices, self.input, self.output)
    }

    /// Same system with every vertex multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.vertices.iter().map(|a| a.scale(s)).collect(), self.input.clone(), self.output.clone())
    }

    /// Same system with the vertices reordered: new vertex `k` is old vertex `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.num_vertices() {
            return Err(Error::contract("permutation length differs from vertex count"));
        }
        let vertices = order.iter().map(|&k| self.vertices[k].clone()).collect();
        Self::new(vertices, self.input.clone(), self.output.clone())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: SystemFile = serde_json::from_str(&text)?;
        file.into_system()
    }

    pub fn to_file(&self) -> SystemFile {
        SystemFile {
            n_x: self.state_dim(),
            num_vertices: self.num_vertices(),
            vertices: self.vertices.iter().map(Matrix::to_rows).collect(),
            input: self.input.as_ref().map(Matrix::to_rows),
            output: self.output.as_ref().map(Matrix::to_rows),
        }
    }
}

fn check_parts(vertices: &[Matrix], input: Option<&Matrix>, output: Option<&Matrix>) -> Vec<Finding> {
    let mut findings = Vec::new();
    let Some(first) = vertices.first() else {
        findings.push(Finding::new("vertices", "at least one vertex matrix is required"));
        return findings;
    };
    let n = first.rows();
    for (i, a) in vertices.iter().enumerate() {
        if a.rows() != n || a.cols() != n {
            findings.push(Finding::new(
                format!("vertices[{i}]"),
                format!("expected {n}x{n}, got {}x{}", a.rows(), a.cols()),
            ));
        }
        if !a.is_finite() {
            findings.push(Finding::new(format!("vertices[{i}]"), "non-finite entry"));
        }
    }
    if let Some(b) = input {
        if b.rows() != n {
            findings.push(Finding::new("B", format!("expected {n} rows, got {}", b.rows())));
        }
        if !b.is_finite() {
            findings.push(Finding::new("B", "non-finite entry"));
        }
    }
    if let Some(c) = output {
        if c.cols() != n {
            findings.push(Finding::new("C", format!("expected {n} columns, got {}", c.cols())));
        }
        if !c.is_finite() {
            findings.push(Finding::new("C", "non-finite entry"));
        }
    }
    findings
}

/// System file: `{"n_x", "N", "vertices", "B"?, "C"?}`; matrices are arrays of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub n_x: usize,
    #[serde(rename = "N")]
    pub num_vertices: usize,
    pub vertices: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<Vec<f64>>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub output: Option<Vec<Vec<f64>>>,
}

impl SystemFile {
    pub fn into_system(self) -> Result<PolytopicSystem> {
        let findings = validate(&self);
        if !findings.is_empty() {
            return Err(Error::InvalidSystem(findings));
        }
        let vertices = self.vertices.into_iter().map(Matrix::from_rows).collect::<Result<Vec<_>>>()?;
        let input = self.input.map(Matrix::from_rows).transpose()?;
        let output = self.output.map(Matrix::from_rows).transpose()?;
        PolytopicSystem::new(vertices, input, output)
    }
}

fn shape_of(rows: &[Vec<f64>]) -> std::result::Result<(usize, usize), String> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err("empty matrix".into());
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err("ragged rows".into());
    }
    Ok((r, c))
}

/// Dimension and finiteness violations of a system file; empty means well-formed.
pub fn validate(file: &SystemFile) -> Vec<Finding> {
    let mut findings = Vec::new();
    let n = file.n_x;
    if n == 0 {
        findings.push(Finding::new("n_x", "state dimension must be positive"));
    }
    if file.num_vertices == 0 {
        findings.push(Finding::new("N", "at least one vertex is required"));
    }
    if file.vertices.len() != file.num_vertices {
        findings.push(Finding::new(
            "vertices",
            format!("N = {} but {} vertex matrices given", file.num_vertices, file.vertices.len()),
        ));
    }
    let nonfinite = |rows: &[Vec<f64>]| rows.iter().flatten().any(|v| !v.is_finite());
    for (i, a) in file.vertices.iter().enumerate() {
        let field = format!("vertices[{i}]");
        match shape_of(a) {
            Err(e) => findings.push(Finding::new(&field, e)),
            Ok((r, c)) if r != n || c != n => {
                findings.push(Finding::new(&field, format!("expected {n}x{n}, got {r}x{c}")))
            }
            Ok(_) => {}
        }
        if nonfinite(a) {
            findings.push(Finding::new(&field, "non-finite entry"));
        }
    }
    if let Some(b) = &file.input {
        match shape_of(b) {
            Err(e) => findings.push(Finding::new("B", e)),
            Ok((r, _)) if r != n => findings.push(Finding::new("B", format!("expected {n} rows, got {r}"))),
            Ok(_) => {}
        }
        if nonfinite(b) {
            findings.push(Finding::new("B", "non-finite entry"));
        }
    }
    if let Some(c) = &file.output {
        match shape_of(c) {
            Err(e) => findings.push(Finding::new("C", e)),
            Ok((_, cols)) if cols != n => findings.push(Finding::new("C", format!("expected {n} columns, got {cols}"))),
            Ok(_) => {}
        }
        if nonfinite(c) {
            findings.push(Finding::new("C", "non-finite entry"));
        }
    }
    findings
}

/// Matrices `P_i` (or `S_i` for stabilizability, a single `P` for ct_cqlf)
/// claimed to satisfy the primal LMIs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExistenceCertificate {
    pub analysis: Analysis,
    pub matrices: Vec<SymMatrix>,
}

/// Dual matrices claimed to satisfy the alternative conditions.
///
/// For the discrete-time analyses `blocks` holds `Q_{i,j}` in flat order
/// (`blocks[N*j + i]`, zero-based). For ct_cqlf it holds `R_1..R_N`, and
/// `r0` optionally carries `R_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonexistenceCertificate {
    pub analysis: Analysis,
    pub num_vertices: usize,
    pub blocks: Vec<SymMatrix>,
    pub r0: Option<SymMatrix>,
    /// Declared trace of the sum of all blocks.
    pub normalization: f64,
}

impl NonexistenceCertificate {
    /// Builds a certificate whose normalization is the actual trace of the blocks.
    pub fn new(analysis: Analysis, num_vertices: usize, blocks: Vec<SymMatrix>, r0: Option<SymMatrix>) -> Result<Self> {
        let expected = analysis.dual_count(num_vertices);
        if blocks.len() != expected {
            return Err(Error::contract(format!(
                "{analysis} nonexistence certificate needs {expected} blocks, got {}",
                blocks.len()
            )));
        }
        let normalization = blocks.iter().map(SymMatrix::trace).sum();
        Ok(NonexistenceCertificate { analysis, num_vertices, blocks, r0, normalization })
    }

    /// `Q_{i,j}`, zero-based.
    pub fn pair(&self, i: usize, j: usize) -> &SymMatrix {
        &self.blocks[self.num_vertices * j + i]
    }

    pub fn total(&self) -> SymMatrix {
        let mut it = self.blocks.iter();
        let first = it.next().expect("certificate has blocks").clone();
        it.fold(first, |acc, b| acc.add(b))
    }

    /// All blocks (and `R_0`) multiplied by `s`, normalization updated.
    pub fn scaled(&self, s: f64) -> Self {
        NonexistenceCertificate {
            analysis: self.analysis,
            num_vertices: self.num_vertices,
            blocks: self.blocks.iter().map(|b| b.scale(s)).collect(),
            r0: self.r0.as_ref().map(|b| b.scale(s)),
            normalization: self.normalization * s,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Existence(ExistenceCertificate),
    Nonexistence(NonexistenceCertificate),
}

impl Certificate {
    pub fn analysis(&self) -> Analysis {
        match self {
            Certificate::Existence(c) => c.analysis,
            Certificate::Nonexistence(c) => c.analysis,
        }
    }

    pub fn to_file(&self) -> CertificateFile {
        match self {
            Certificate::Existence(c) => CertificateFile {
                schema_version: SCHEMA_VERSION,
                analysis: c.analysis,
                kind: CertificateKind::Existence,
                blocks: BlocksFile::Plain(c.matrices.clone()),
                normalization: None,
                r0: None,
            },
            Certificate::Nonexistence(c) => {
                let blocks = match c.analysis {
                    Analysis::CtCqlf => BlocksFile::Plain(c.blocks.clone()),
                    _ => BlocksFile::Paired(
                        c.blocks
                            .iter()
                            .enumerate()
                            .map(|(k, m)| {
                                let (i, j) = flat_to_pair(k + 1, c.num_vertices).expect("index in range");
                                PairedBlock { i, j, matrix: m.clone() }
                            })
                            .collect(),
                    ),
                };
                CertificateFile {
                    schema_version: SCHEMA_VERSION,
                    analysis: c.analysis,
                    kind: CertificateKind::Nonexistence,
                    blocks,
                    normalization: Some(c.normalization),
                    r0: c.r0.clone(),
                }
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, num_vertices: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, num_vertices)
    }

    /// Parses a certificate file. `num_vertices` resolves flat block lists.
    pub fn from_json(text: &str, num_vertices: usize) -> Result<Self> {
        let file: CertificateFile = serde_json::from_str(text)?;
        file.into_certificate(num_vertices)
    }
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Existence,
    Nonexistence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedBlock {
    pub i: usize,
    pub j: usize,
    pub matrix: SymMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlocksFile {
    Plain(Vec<SymMatrix>),
    Paired(Vec<PairedBlock>),
}

/// Certificate file: `{"analysis", "kind", "blocks", "normalization"?, "r0"?}`.
///
/// `blocks` is either a list of matrices (the `P_i`/`S_i`, the ct_cqlf `R_i`,
/// or the flat list `R_1..R_{N²}`) or a list of `{"i", "j", "matrix"}` with
/// one-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub analysis: Analysis,
    pub kind: CertificateKind,
    pub blocks: BlocksFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<SymMatrix>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

impl CertificateFile {
    pub fn into_certificate(self, num_vertices: usize) -> Result<Certificate> {
        match self.kind {
            CertificateKind::Existence => {
                let BlocksFile::Plain(matrices) = self.blocks else {
                    return Err(Error::contract("existence certificate blocks must be a plain list"));
                };
                let expected = self.analysis.primal_count(num_vertices);
                if matrices.len() != expected {
                    return Err(Error::contract(format!(
                        "{} existence certificate needs {expected} matrices, got {}",
                        self.analysis,
                        matrices.len()
                    )));
                }
                Ok(Certificate::Existence(ExistenceCertificate { analysis: self.analysis, matrices }))
            }
            CertificateKind::Nonexistence => {
                let blocks = match self.blocks {
                    BlocksFile::Plain(m) => m,
                    BlocksFile::Paired(pairs) => {
                        if self.analysis == Analysis::CtCqlf {
                            return Err(Error::contract("ct_cqlf certificates use a plain block list"));
                        }
                        let mut slots: Vec<Option<SymMatrix>> = vec![None; num_vertices * num_vertices];
                        for p in pairs {
                            let k = pair_to_flat(p.i, p.j, num_vertices)?;
                            if slots[k - 1].replace(p.matrix).is_some() {
                                return Err(Error::contract(format!("duplicate block ({}, {})", p.i, p.j)));
                            }
                        }
                        slots
                            .into_iter()
                            .enumerate()
                            .map(|(k, s)| {
                                s.ok_or_else(|| {
                                    let (i, j) = flat_to_pair(k + 1, num_vertices).expect("in range");
                                    Error::contract(format!("missing block ({i}, {j})"))
                                })
                            })
                            .collect::<Result<Vec<_>>>()?
                    }
                };
                let mut cert = NonexistenceCertificate::new(self.analysis, num_vertices, blocks, self.r0)?;
                if let Some(norm) = self.normalization {
                    if !norm.is_finite() {
                        return Err(Error::contract("normalization must be finite"));
                    }
                    cert.normalization = norm;
                }
                Ok(Certificate::Nonexistence(cert))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    ExistenceProven,
    /// Stabilizability only: the necessary LMI condition is feasible, which
    /// does not prove stabilizability.
    NecessaryConditionFeasible,
    NonexistenceProven,
    Inconclusive,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub primal_iterations: usize,
    pub dual_iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Smallest verification margin of the returned certificate.
    pub certificate_margin: Option<f64>,
    #[serde(with = "secs")]
    pub wall_time: Duration,
}

mod secs {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub analysis: Analysis,
    pub outcome: Outcome,
    pub certificate: Option<Certificate>,
    pub diagnostics: Diagnostics,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn flat_index_convention() {
        assert_eq!(flat_to_pair(1, 2).unwrap(), (1, 1));
        assert_eq!(flat_to_pair(2, 2).unwrap(), (2, 1));
        assert_eq!(flat_to_pair(3, 2).unwrap(), (1, 2));
        assert_eq!(flat_to_pair(4, 2).unwrap(), (2, 2));
        assert!(flat_to_pair(0, 2).is_err());
        assert!(flat_to_pair(5, 2).is_err());
        assert!(pair_to_flat(3, 1, 2).is_err());
    }

    #[test]
    fn flat_pair_bijection() {
        for n in 1..=6 {
            for i in 1..=n {
                for j in 1..=n {
                    let k = pair_to_flat(i, j, n).unwrap();
                    assert_eq!(flat_to_pair(k, n).unwrap(), (i, j));
                }
            }
            for k in 1..=n * n {
                let (i, j) = flat_to_pair(k, n).unwrap();
                assert_eq!(pair_to_flat(i, j, n).unwrap(), k);
            }
        }
    }

    fn file(vertices: Vec<Vec<Vec<f64>>>) -> SystemFile {
        SystemFile { n_x: 2, num_vertices: vertices.len(), vertices, input: None, output: None }
    }

    #[test]
    fn validate_findings() {
        let good = file(vec![vec![vec![0.5, 0.0], vec![0.0, 0.5]], vec![vec![0.1, 0.2], vec![0.3, 0.4]]]);
        assert!(validate(&good).is_empty());

        let bad = file(vec![vec![vec![0.5, 0.0], vec![0.0, 0.5]], vec![vec![0.1, 0.2, 0.0], vec![0.3, 0.4, 0.0]]]);
        assert_eq!(validate(&bad).len(), 1);

        let mut bad_b = good.clone();
        bad_b.input = Some(vec![vec![1.0], vec![0.0], vec![0.0]]);
        let f = validate(&bad_b);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].field, "B");

        let mut nan = good.clone();
        nan.vertices[0][0][0] = f64::NAN;
        assert_eq!(validate(&nan).len(), 1);

        let mut wrong_n = good;
        wrong_n.num_vertices = 3;
        assert_eq!(validate(&wrong_n).len(), 1);
    }

    #[test]
    fn system_constructor_validates() {
        assert!(PolytopicSystem::autonomous(vec![]).is_err());
        let e = PolytopicSystem::new(vec![Matrix::identity(2)], None, Some(m(&[&[1.0, 0.0, 0.0]]))).unwrap_err();
        assert!(matches!(e, Error::InvalidSystem(ref f) if f.len() == 1));
    }

    #[test]
    fn paired_blocks_roundtrip_through_flat_order() {
        let blocks: Vec<SymMatrix> = (0..4).map(|k| SymMatrix::scalar(k as f64 + 1.0)).collect();
        let cert =
            Certificate::Nonexistence(NonexistenceCertificate::new(Analysis::Stability, 2, blocks, None).unwrap());
        let json = cert.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        // Second stored block is Q_{2,1}.
        assert_eq!(v["blocks"][1]["i"], 2);
        assert_eq!(v["blocks"][1]["j"], 1);
        assert_eq!(Certificate::from_json(&json, 2).unwrap(), cert);
    }

    #[test]
    fn flat_list_certificate_is_accepted() {
        let text = r#"{"analysis": "stability", "kind": "nonexistence",
                       "blocks": [[[1.0]], [[2.0]], [[3.0]], [[4.0]]]}"#;
        let Certificate::Nonexistence(c) = Certificate::from_json(text, 2).unwrap() else { panic!() };
        assert_eq!(c.pair(1, 0)[(0, 0)], 2.0);
        assert_eq!(c.pair(0, 1)[(0, 0)], 3.0);
        assert_eq!(c.normalization, 10.0);
    }

    #[test]
    fn certificate_block_count_is_checked() {
        let text = r#"{"analysis": "stability", "kind": "existence", "blocks": [[[1.0]]]}"#;
        assert!(Certificate::from_json(text, 2).is_err());
        let text = r#"{"analysis": "stability", "kind": "nonexistence",
                       "blocks": [{"i": 1, "j": 1, "matrix": [[1.0]]}]}"#;
        assert!(Certificate::from_json(text, 2).is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e100f64..1e100, -1.0f64..1.0, prop::num::f64::SUBNORMAL]
    }

    proptest! {
        #[test]
        fn system_file_roundtrip_is_lossless(vals in prop::collection::vec(finite(), 12)) {
            let a = Matrix::from_fn(2, 2, |r, c| vals[r * 2 + c]);
            let b = Matrix::from_fn(2, 2, |r, c| vals[4 + r * 2 + c]);
            let bin = Matrix::from_fn(2, 1, |r, _| vals[8 + r]);
            let cout = Matrix::from_fn(1, 2, |_, c| vals[10 + c]);
            let sys = PolytopicSystem::new(vec![a, b], Some(bin), Some(cout)).unwrap();
            let json = serde_json::to_string(&sys.to_file()).unwrap();
            let back: SystemFile = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back.into_system().unwrap(), sys);
        }

        #[test]
        fn certificate_roundtrip_is_lossless(vals in prop::collection::vec(finite(), 12), dual in any::<bool>()) {
            let mats: Vec<SymMatrix> = vals
                .chunks(3)
                .map(|v| SymMatrix::from_rows(vec![vec![v[0], v[1]], vec![v[1], v[2]]]).unwrap())
                .collect();
            let cert = if dual {
                Certificate::Nonexistence(NonexistenceCertificate::new(Analysis::Detectability, 2, mats, None).unwrap())
            } else {
                Certificate::Existence(ExistenceCertificate { analysis: Analysis::Stability, matrices: mats[..2].to_vec() })
            };
            let back = Certificate::from_json(&cert.to_json().unwrap(), 2).unwrap();
            prop_assert_eq!(back, cert);
        }
    }
}
