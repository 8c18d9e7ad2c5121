//! Error taxonomy for the geometry kernels.
//!
//! Every fallible operation returns a variant that names the violated
//! precondition or the numerical failure mode, with the offending magnitudes
//! attached so callers can report without re-deriving them.

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("ambient dimension mismatch: expected {expected} complex coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid signature: n={n}, p={p} (need n >= 2 and 1 <= p <= n-1)")]
    InvalidSignature { n: usize, p: usize },

    #[error("invalid hypersurface parameters: {reason}")]
    InvalidSpec { reason: String },

    #[error("invalid tolerance {name}={value}: {reason}")]
    InvalidTolerance {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("precondition violated: {what} (residual {residual:.3e}, tol {tol:.3e})")]
    PreconditionViolated {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("point is off the constraint locus: {which} residual {residual:.3e} exceeds {tol:.3e}")]
    OffSurface {
        which: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("vector is not tangent: pairing with {with} is {pairing:.3e} (tol {tol:.3e})")]
    NotTangent {
        with: &'static str,
        pairing: f64,
        tol: f64,
    },

    #[error("degenerate span: Gram matrix has numerical rank {rank} < {dim}")]
    DegenerateSpan { rank: usize, dim: usize },

    #[error(
        "orthonormalization hit a null direction at step {step}: best pivot |g(v,v)| = {pivot:.3e}"
    )]
    DegeneratePivot { step: usize, pivot: f64 },

    #[error(
        "infeasible constraint: block {block} with ({timelike} timelike, {spacelike} spacelike) \
         directions cannot realize norm {target}"
    )]
    InfeasibleBlock {
        block: &'static str,
        timelike: usize,
        spacelike: usize,
        target: f64,
    },

    #[error("rejection budget exhausted after {attempts} draws while sampling {what}")]
    RejectionBudgetExhausted { what: &'static str, attempts: u32 },

    #[error("Newton retraction did not converge: residual {residual:.3e} after {iterations} iterations")]
    NewtonDidNotConverge { iterations: u32, residual: f64 },

    #[error("singular Newton system: gradient Gram determinant {det:.3e}")]
    SingularNewtonSystem { det: f64 },

    #[error("degenerate induced metric: {what}")]
    DegenerateMetric { what: &'static str },

    #[error(
        "exceptional principal-curvature transfer (2*lambda = mu): lambda={lambda}, mu={mu}, \
         epsilon={epsilon}; lemma coefficient lambda*mu + 2*epsilon = {coefficient:.3e} \
         ({} with the transfer relation)",
        if *consistent { "consistent" } else { "inconsistent" }
    )]
    ExceptionalTransfer {
        lambda: f64,
        mu: f64,
        epsilon: f64,
        coefficient: f64,
        /// True iff lambda*mu + 2*epsilon also vanishes (within tolerance), the
        /// only way eigendata with 2*lambda = mu can exist: epsilon = -1, |lambda| = 1.
        consistent: bool,
    },

    #[error("map does not preserve the hermitian metric: defect {defect:.3e} (tol {tol:.3e})")]
    NotMetricPreserving { defect: f64, tol: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn messages_name_the_magnitudes() {
        let err = GeometryError::OffSurface {
            which: "defining function",
            residual: 2.5e-3,
            tol: 1e-10,
        };
        let msg = err.to_string();
        assert!(msg.contains("2.500e-3"));
        assert!(msg.contains("defining function"));
    }

    #[test]
    fn exceptional_transfer_reports_consistency() {
        let consistent = GeometryError::ExceptionalTransfer {
            lambda: 1.0,
            mu: 2.0,
            epsilon: -1.0,
            coefficient: 0.0,
            consistent: true,
        };
        assert!(consistent.to_string().contains("consistent"));
        let inconsistent = GeometryError::ExceptionalTransfer {
            lambda: 0.5,
            mu: 1.0,
            epsilon: 1.0,
            coefficient: 2.5,
            consistent: false,
        };
        assert!(inconsistent.to_string().contains("inconsistent"));
    }
}
