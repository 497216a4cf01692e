//! Poly-quadratic Lyapunov analysis of discrete-time polytopic LPV systems.
//!
//! Each analysis (stability, detectability, a necessary condition for
//! stabilizability, and a continuous-time common quadratic Lyapunov function)
//! is posed as a pair of alternative LMI feasibility problems. [`analyze`]
//! runs both sides and returns either an existence certificate or a
//! certificate of nonexistence, always re-checked by [`verify`].

pub mod cli;
pub mod conditions;
pub mod engine;
pub mod error;
pub mod jsr;
pub mod linalg;
pub mod model;
pub mod verify;

pub use conditions::{analyze, build, AnalyzeOptions};
pub use engine::{FeasibilityProblem, LinearMatrixMap, Method, Side, SolveOptions, SolveStatus, Solver};
pub use error::{Error, Result};
pub use jsr::JsrBounds;
pub use linalg::{BlockDiagSym, Matrix, SymMatrix};
pub use model::{
    Analysis, Certificate, ExistenceCertificate, NonexistenceCertificate, Outcome, PolytopicSystem, Verdict,
};
pub use verify::{verify, verify_existence, verify_nonexistence, Tolerances, VerificationReport};
