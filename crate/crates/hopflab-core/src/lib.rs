//! Numerical kernels for real hypersurfaces of the indefinite complex projective
//! space `CP^n_p`.
//!
//! The ambient model is `C^{n+1}` carrying the indefinite hermitian product
//! with `p` timelike axes. Its unit hyperquadric `S^{2n+1}_{2p}` fibers over
//! `CP^n_p` by the unit-circle action, and every geometric object downstairs is
//! represented upstairs by horizontal lifts. The crate constructs four families
//! of circle-invariant hypersurfaces of the hyperquadric, computes their shape
//! operators along two independent routes (closed forms vs a finite-difference
//! oracle on retracted curves), descends them through the submersion, and
//! verifies the almost-contact, curvature, and classification identities that
//! constrain such hypersurfaces.
//!
//! Modules:
//! - [`ambient`]: the indefinite metric, complex structure, hyperquadric
//!   geodesics, and the ambient curvature tensor.
//! - [`frame`]: indefinite orthonormalization and coordinate solves.
//! - [`catalog`]: the hypersurface families, their closed-form normals and
//!   shape operators, exact on-surface samplers, and predicted spectra.
//! - [`weingarten`]: Newton retraction, the finite-difference shape-operator
//!   oracle, descent to the quotient, and differential-identity residuals.
//! - [`spectral`]: eigenstructure summaries, the principal-curvature transfer
//!   law, the eta-umbilical classifier, Killing checks, and curvature
//!   cross-checks.
//!
//! All operations are pure functions; randomness enters only through explicit
//! seeds, and equal inputs produce bitwise-equal outputs.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ambient;
pub mod catalog;
pub mod error;
pub mod frame;
pub(crate) mod math;
pub mod spectral;
pub mod tol;
pub mod weingarten;

pub use ambient::{CausalClass, Signature};
pub use error::GeometryError;
pub use tol::TolerancePolicy;

/// Crate version string, for embedding in reports produced by downstream
/// tools.
pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
