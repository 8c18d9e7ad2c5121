//! Numerical tolerances.
//!
//! Every comparison in the crate routes through one policy value so that error
//! budgets stay auditable: each default below records the budget argument that
//! produced it. All quantities at desk scale (n = 4, curvatures of order one)
//! are O(1), so the budgets are absolute rather than relative.

use crate::error::GeometryError;

/// Membership residual for "this point satisfies a constraint equation".
///
/// Samplers land at ~1e-16 and Newton retraction at ~1e-15, so 1e-10 leaves
/// four orders of headroom while still rejecting genuinely off-surface points.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Width for clustering eigenvalues of descended shape operators.
///
/// Closed-form spectra are exact to roundoff (~1e-14) and the smallest
/// eigenvalue gap over the default parameter set is ~0.35 (B-minus family at
/// t = cosh^2 1), so any width in [1e-12, 1e-2] separates clusters; 1e-6 sits
/// two orders above oracle noise and four below the gap.
pub const EIG_CLUSTER_TOL: f64 = 1e-6;

/// Clustering width for spectra of defective (non-diagonalizable) operators.
///
/// Backward-stable eigensolvers scatter a Jordan block of size k by
/// O(eps^(1/k)): the rank-drop family's cubic block at eigenvalue zero lands
/// its three copies up to ~5e-6 apart, wider than `EIG_CLUSTER_TOL`. 1e-3
/// swallows that scatter while sitting three orders below the operator's
/// only true gap (2.0).
pub const DEFECTIVE_CLUSTER_TOL: f64 = 1e-3;

/// Relative singular-value cutoff for numerical rank: sigma_i is treated as
/// zero when sigma_i <= RANK_TOL * max(1, sigma_max).
///
/// Rank decisions feed geometric multiplicities and span-degeneracy checks;
/// true zero singular values appear at ~1e-15 and true nonzero ones at O(1)
/// for the catalog operators.
pub const RANK_TOL: f64 = 1e-7;

/// Central-difference step for the finite-difference Weingarten oracle.
///
/// Truncation is O(h^2 * |A'''|) ~ 1e-10 and rounding is O(eps/h) ~ 1e-11 at
/// h = 1e-5, both far below the 1e-6 oracle-agreement budget; convergence-order
/// measurements run at larger h where truncation dominates rounding.
pub const FD_STEP: f64 = 1e-5;

/// Newton convergence target for retraction onto the lifted hypersurfaces.
///
/// Quadratic convergence overshoots the last accepted iterate to ~1e-15, so
/// retraction noise enters finite differences at ~1e-15/h = 1e-10, invisible
/// against the 1e-6 budget. Must not exceed CONSTRAINT_TOL: retracted points
/// must pass membership checks.
pub const NEWTON_TOL: f64 = 1e-13;

/// Iteration cap for Newton retraction; basin perturbations of 1e-2 converge
/// in <= 8 steps, so 50 only trips on genuinely divergent inputs.
pub const NEWTON_MAX_ITER: u32 = 50;

/// Attempt cap for rejection sampling. Feasible desk-scale specs accept within
/// a handful of draws; the cap turns an infeasible-in-practice spec into a
/// diagnostic instead of a hang.
pub const REJECTION_BUDGET: u32 = 10_000;

/// The policy bundle threaded through all fallible numerical operations.
#[derive(Clone, Debug, PartialEq)]
pub struct TolerancePolicy {
    pub constraint_tol: f64,
    pub eig_cluster_tol: f64,
    pub rank_tol: f64,
    /// Central-difference step h.
    pub fd_step: f64,
    pub newton_tol: f64,
    pub newton_max_iter: u32,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            constraint_tol: CONSTRAINT_TOL,
            eig_cluster_tol: EIG_CLUSTER_TOL,
            rank_tol: RANK_TOL,
            fd_step: FD_STEP,
            newton_tol: NEWTON_TOL,
            newton_max_iter: NEWTON_MAX_ITER,
        }
    }
}

impl TolerancePolicy {
    /// Checks the policy invariants: strictly positive knobs and
    /// `newton_tol <= constraint_tol` (retracted points must pass membership).
    pub fn validate(&self) -> Result<(), GeometryError> {
        let positive = [
            ("constraint_tol", self.constraint_tol),
            ("eig_cluster_tol", self.eig_cluster_tol),
            ("rank_tol", self.rank_tol),
            ("fd_step", self.fd_step),
            ("newton_tol", self.newton_tol),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(GeometryError::InvalidTolerance {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        if self.newton_max_iter == 0 {
            return Err(GeometryError::InvalidTolerance {
                name: "newton_max_iter",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.newton_tol > self.constraint_tol {
            return Err(GeometryError::InvalidTolerance {
                name: "newton_tol",
                value: self.newton_tol,
                reason: "must not exceed constraint_tol",
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        TolerancePolicy::default().validate().unwrap();
    }

    #[test]
    fn newton_must_be_at_least_as_strict_as_membership() {
        let policy = TolerancePolicy {
            newton_tol: 1e-8,
            ..TolerancePolicy::default()
        };
        assert!(policy.validate().is_err());
    }

    #[test]
    fn rejects_nonpositive_knobs() {
        for field in 0..5 {
            let mut policy = TolerancePolicy::default();
            match field {
                0 => policy.constraint_tol = 0.0,
                1 => policy.eig_cluster_tol = -1.0,
                2 => policy.rank_tol = f64::NAN,
                3 => policy.fd_step = 0.0,
                _ => policy.newton_tol = -1e-13,
            }
            assert!(policy.validate().is_err(), "field {field} accepted");
        }
    }

    #[test]
    fn budget_ordering_holds() {
        // The FD oracle budget chain: newton noise < rounding < truncation < 1e-6.
        let tol = TolerancePolicy::default();
        assert!(tol.newton_tol / tol.fd_step < 1e-6);
        assert!(tol.newton_tol <= tol.constraint_tol);
        assert!(tol.eig_cluster_tol > 1e-12 && tol.eig_cluster_tol < 0.35);
    }
}
