//! Independent certificate checker.
//!
//! Everything here is re-evaluated from the raw system matrices with plain
//! dense arithmetic and [`min_eigenvalue`]; the engine's maps are never used.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, Matrix, SymMatrix};
use crate::model::{Analysis, Certificate, ExistenceCertificate, NonexistenceCertificate, PolytopicSystem};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub psd: f64,
    pub eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { psd: 1e-6, eq: 1e-8 }
    }
}

/// One semidefinite check: passes iff `min_eigenvalue ≥ threshold`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Margin {
    pub label: String,
    pub min_eigenvalue: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Margin {
    fn new(label: String, m: &SymMatrix, threshold: f64) -> Result<Self> {
        let min_eigenvalue = min_eigenvalue(m)?;
        Ok(Margin { label, min_eigenvalue, threshold, passed: min_eigenvalue >= threshold })
    }

    pub fn slack(&self) -> f64 {
        self.min_eigenvalue - self.threshold
    }
}

/// One equality check: passes iff `residual ≤ threshold` (largest absolute entry).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EqualityResidual {
    pub label: String,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl EqualityResidual {
    fn new(label: String, residual: f64, threshold: f64) -> Self {
        EqualityResidual { label, residual, threshold, passed: residual <= threshold }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Existence,
    Nonexistence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub analysis: Analysis,
    pub kind: ReportKind,
    pub margins: Vec<Margin>,
    pub equalities: Vec<EqualityResidual>,
    /// `trace(ΣQ) / normalization`; must reach 0.5.
    pub trace_ratio: Option<f64>,
    pub passed: bool,
}

impl VerificationReport {
    fn finish(
        analysis: Analysis,
        kind: ReportKind,
        margins: Vec<Margin>,
        equalities: Vec<EqualityResidual>,
        trace_ratio: Option<f64>,
    ) -> Self {
        let passed = margins.iter().all(|m| m.passed)
            && equalities.iter().all(|e| e.passed)
            && trace_ratio.is_none_or(|r| r >= 0.5);
        VerificationReport { analysis, kind, margins, equalities, trace_ratio, passed }
    }

    /// Smallest `λ_min − threshold` over all semidefinite checks.
    pub fn worst_margin(&self) -> f64 {
        self.margins.iter().map(Margin::slack).fold(f64::INFINITY, f64::min)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .margins
            .iter()
            .filter(|m| !m.passed)
            .map(|m| format!("{}: λ_min {:.3e} < {:.3e}", m.label, m.min_eigenvalue, m.threshold))
            .collect();
        out.extend(
            self.equalities
                .iter()
                .filter(|e| !e.passed)
                .map(|e| format!("{}: residual {:.3e} > {:.3e}", e.label, e.residual, e.threshold)),
        );
        if let Some(r) = self.trace_ratio.filter(|&r| r.is_nan() || r < 0.5) {
            out.push(format!("trace ratio {r:.3e} < 0.5"));
        }
        out
    }
}

fn sym(m: Matrix) -> Result<SymMatrix> {
    SymMatrix::new(m)
}

fn check_dims(
    system: &PolytopicSystem,
    analysis: Analysis,
    blocks: &[SymMatrix],
    expected: usize,
    what: &str,
) -> Result<()> {
    if blocks.len() != expected {
        return Err(Error::contract(format!("{analysis} {what} needs {expected} matrices, got {}", blocks.len())));
    }
    let n = system.state_dim();
    if let Some(b) = blocks.iter().find(|b| b.dim() != n) {
        return Err(Error::contract(format!("{what} matrix is {0}×{0}, system state dimension is {n}", b.dim())));
    }
    Ok(())
}

fn input(system: &PolytopicSystem) -> Result<&Matrix> {
    system.input_matrix().ok_or_else(|| Error::contract("stabilizability needs an input matrix B"))
}

fn output(system: &PolytopicSystem) -> Result<&Matrix> {
    system.output_matrix().ok_or_else(|| Error::contract("detectability needs an output matrix C"))
}

fn relative(tol: f64, m: &SymMatrix) -> f64 {
    tol * (1.0 + m.frobenius_norm())
}

/// Checks an existence certificate: every primal constraint and every
/// primal matrix must be positive definite with relative margin `tol`.
pub fn verify_existence(system: &PolytopicSystem, cert: &ExistenceCertificate, tol: f64) -> Result<VerificationReport> {
    let analysis = cert.analysis;
    let nv = system.num_vertices();
    let p = &cert.matrices;
    check_dims(system, analysis, p, analysis.primal_count(nv), "existence certificate")?;

    let mut margins = Vec::new();
    let mut push = |label: String, m: SymMatrix| -> Result<()> {
        let threshold = relative(tol, &m);
        margins.push(Margin::new(label, &m, threshold)?);
        Ok(())
    };

    match analysis {
        Analysis::CtCqlf => {
            for (i, a) in system.vertices().iter().enumerate() {
                let pa = p[0].as_matrix().matmul(a);
                push(format!("-(A{0}'P + PA{0})", i + 1), sym(pa.add(&pa.transpose()).scale(-1.0))?)?;
            }
            push("P".into(), p[0].clone())?;
        }
        Analysis::Stability | Analysis::Detectability => {
            let ctc = match analysis {
                Analysis::Detectability => Some(sym(output(system)?.transpose().matmul(output(system)?))?),
                _ => None,
            };
            for i in 0..nv {
                for j in 0..nv {
                    let a = system.vertex(i);
                    let mut m = p[i].sub(&p[j].congruence(&a.transpose()));
                    if let Some(c) = &ctc {
                        m = m.add(c);
                    }
                    push(format!("({},{}): P{} - A{}'P{}A{}", i + 1, j + 1, i + 1, i + 1, j + 1, i + 1), m)?;
                }
            }
            for (i, pi) in p.iter().enumerate() {
                push(format!("P{}", i + 1), pi.clone())?;
            }
        }
        Analysis::Stabilizability => {
            let b = input(system)?;
            let bbt = sym(b.matmul(&b.transpose()))?;
            for i in 0..nv {
                for j in 0..nv {
                    let a = system.vertex(i);
                    let m = p[j].sub(&p[i].congruence(a)).add(&bbt);
                    push(format!("({},{}): S{} - A{}S{}A{}' + BB'", i + 1, j + 1, j + 1, i + 1, i + 1, i + 1), m)?;
                }
            }
            for (i, si) in p.iter().enumerate() {
                push(format!("S{}", i + 1), si.clone())?;
            }
        }
    }
    Ok(VerificationReport::finish(analysis, ReportKind::Existence, margins, Vec::new(), None))
}

/// Checks a Certificate of Nonexistence against the alternative conditions.
pub fn verify_nonexistence(
    system: &PolytopicSystem,
    cert: &NonexistenceCertificate,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let analysis = cert.analysis;
    let nv = system.num_vertices();
    if cert.num_vertices != nv {
        return Err(Error::contract(format!("certificate is for {} vertices, system has {nv}", cert.num_vertices)));
    }
    check_dims(system, analysis, &cert.blocks, analysis.dual_count(nv), "nonexistence certificate")?;

    let mut margins = Vec::new();
    let mut equalities = Vec::new();
    let total = cert.total();

    let block_label = |k: usize| match analysis {
        Analysis::CtCqlf => format!("R{}", k + 1),
        _ => format!("Q({},{})", k % nv + 1, k / nv + 1),
    };
    for (k, q) in cert.blocks.iter().enumerate() {
        margins.push(Margin::new(format!("{} >= 0", block_label(k)), q, -relative(tol.psd, q))?);
    }

    match analysis {
        Analysis::CtCqlf => {
            let mut combined = SymMatrix::zeros(system.state_dim());
            for (a, r) in system.vertices().iter().zip(&cert.blocks) {
                let ar = a.matmul(r.as_matrix());
                combined = combined.add(&sym(ar.add(&ar.transpose()))?);
            }
            margins.push(Margin::new(
                "R0 = sum(A_i R_i + R_i A_i') >= 0".into(),
                &combined,
                -relative(tol.psd, &combined),
            )?);
            if let Some(r0) = &cert.r0 {
                check_dims(system, analysis, std::slice::from_ref(r0), 1, "R0")?;
                margins.push(Margin::new("R0 >= 0".into(), r0, -relative(tol.psd, r0))?);
                let residual = r0.sub(&combined).as_matrix().max_abs();
                equalities.push(EqualityResidual::new(
                    "R0 - sum(A_i R_i + R_i A_i')".into(),
                    residual,
                    relative(tol.eq, &combined),
                ));
            }
        }
        _ => {
            for i in 0..nv {
                let mut combined = SymMatrix::zeros(system.state_dim());
                for j in 0..nv {
                    let lifted = match analysis {
                        Analysis::Stabilizability => cert.pair(i, j).congruence(&system.vertex(i).transpose()),
                        _ => cert.pair(i, j).congruence(system.vertex(j)),
                    };
                    combined = combined.add(&lifted).sub(cert.pair(j, i));
                }
                margins.push(Margin::new(
                    format!("combined block {}", i + 1),
                    &combined,
                    -relative(tol.psd, &combined),
                )?);
            }
            let annihilated = match analysis {
                Analysis::Detectability => Some(("C (sum Q) C'", total.congruence(output(system)?))),
                Analysis::Stabilizability => Some(("B' (sum Q) B", total.congruence(&input(system)?.transpose()))),
                _ => None,
            };
            if let Some((label, m)) = annihilated {
                equalities.push(EqualityResidual::new(label.into(), m.as_matrix().max_abs(), relative(tol.eq, &total)));
            }
        }
    }

    let trace_ratio = if cert.normalization > 0.0 { total.trace() / cert.normalization } else { f64::NAN };
    Ok(VerificationReport::finish(analysis, ReportKind::Nonexistence, margins, equalities, Some(trace_ratio)))
}

/// Dispatches on the certificate kind; existence uses `tol.psd` as its margin.
pub fn verify(system: &PolytopicSystem, cert: &Certificate, tol: &Tolerances) -> Result<VerificationReport> {
    match cert {
        Certificate::Existence(c) => verify_existence(system, c, tol.psd),
        Certificate::Nonexistence(c) => verify_nonexistence(system, c, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64) -> PolytopicSystem {
        PolytopicSystem::autonomous(vec![Matrix::scalar(a)]).unwrap()
    }

    fn exist(p: f64) -> ExistenceCertificate {
        ExistenceCertificate { analysis: Analysis::Stability, matrices: vec![SymMatrix::scalar(p)] }
    }

    #[test]
    fn scalar_existence_margins() {
        let r = verify_existence(&scalar(0.5), &exist(1.0), 1e-8).unwrap();
        assert!(r.passed);
        assert!((r.margins[0].min_eigenvalue - 0.75).abs() < 1e-15);
        assert_eq!(r.margins[1].min_eigenvalue, 1.0);
        let r = verify_existence(&scalar(1.1), &exist(1.0), 1e-8).unwrap();
        assert!(!r.passed);
        assert!((r.margins[0].min_eigenvalue + 0.21).abs() < 1e-12);
    }

    #[test]
    fn scalar_nonexistence() {
        let c = NonexistenceCertificate::new(Analysis::Stability, 1, vec![SymMatrix::scalar(1.0)], None).unwrap();
        let r = verify_nonexistence(&scalar(1.1), &c, &Tolerances::default()).unwrap();
        assert!(r.passed);
        assert!((r.margins[1].min_eigenvalue - 0.21).abs() < 1e-12);
        assert!(!verify_nonexistence(&scalar(0.5), &c, &Tolerances::default()).unwrap().passed);
    }

    #[test]
    fn zero_certificate_fails_trace_check() {
        let mut c = NonexistenceCertificate::new(Analysis::Stability, 1, vec![SymMatrix::scalar(1.0)], None).unwrap();
        c.blocks[0] = SymMatrix::scalar(0.0);
        let r = verify_nonexistence(&scalar(1.1), &c, &Tolerances::default()).unwrap();
        assert!(!r.passed);
        assert_eq!(r.trace_ratio, Some(0.0));
    }

    #[test]
    fn ct_rotation_dual() {
        let sys = PolytopicSystem::autonomous(vec![Matrix::from_rows(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap()])
            .unwrap();
        let c =
            NonexistenceCertificate::new(Analysis::CtCqlf, 1, vec![SymMatrix::identity(2)], Some(SymMatrix::zeros(2)))
                .unwrap();
        let r = verify_nonexistence(&sys, &c, &Tolerances::default()).unwrap();
        assert!(r.passed, "{:?}", r.failures());
        assert_eq!(r.equalities[0].residual, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let c = ExistenceCertificate { analysis: Analysis::Stability, matrices: vec![SymMatrix::identity(2)] };
        assert!(matches!(verify_existence(&scalar(0.5), &c, 1e-6), Err(Error::Contract(_))));
    }

    #[test]
    fn inputs_are_untouched() {
        let sys = scalar(1.1);
        let c = NonexistenceCertificate::new(Analysis::Stability, 1, vec![SymMatrix::scalar(1.0)], None).unwrap();
        let before = c.clone();
        let a = verify_nonexistence(&sys, &c, &Tolerances::default()).unwrap();
        let b = verify_nonexistence(&sys, &c, &Tolerances::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(c, before);
    }
}
