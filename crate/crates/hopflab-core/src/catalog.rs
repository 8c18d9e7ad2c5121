//! The four hypersurface families inside the unit hyperquadric: admissibility
//! and feasibility checks, exact on-surface samplers, closed-form unit normals
//! and shape operators at the hyperquadric level, adapted frames, tube
//! construction, and predicted spectral invariants.
//!
//! Conventions (zero-based coordinates throughout):
//! * Every family is cut out of the hyperquadric `{ g(z, z) = 1 }` by one more
//!   real equation, the "defining function".
//! * `TypeA { q, m, t }`: level set `g(q1 z, q1 z) = t`, where the block
//!   projector `q1` keeps coordinates `{0..q-1} u {m-1..n}` and `q2` keeps the
//!   complementary block `{q..m-2}`. Equivalently `g(q2 z, q2 z) = 1 - t`.
//! * `TypeB { t }`: level set `|Q(z)|^2 = t` of the quadric polynomial
//!   `Q(z) = sum_j beta_j z_j^2`, with `t > 0`, `t != 1`.
//! * `Degenerate`: the lightlike boundary case `|Q(z)|^2 = 1`, restricted to
//!   points where `{z, iz, conj(z), i conj(z)}` has real rank 4. Its normal is
//!   null, so no unit normalization or descent applies.
//! * `Horosphere { t }`: level set `|z_0 - z_n|^2 = t`, `t > 0`, whose unit
//!   normal is timelike for every `t`.
//!
//! The causal character `epsilon = sign(t(1-t))` of the normal is `+1` exactly
//! when `0 < t < 1` for type A and type B; the horosphere always has
//! `epsilon = -1`; the degenerate family stores `epsilon = 0`.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ambient::{apply_j, conjugate_vector, CVec, Signature, C64};
use crate::error::GeometryError;
use crate::frame::{orthonormal_complement, Frame};
use crate::math;
use crate::tol::{TolerancePolicy, REJECTION_BUDGET};

/// How the structure tensor `phi` acts on the dee-level eigenspaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiBehavior {
    /// Each eigenspace is `J`-invariant, so `phi` preserves it and the shape
    /// operator commutes with `phi`.
    EigenspacesJInvariant,
    /// `phi` exchanges the two eigenspaces, so the shape operator and `phi`
    /// do not commute.
    PhiSwapsPair,
}

/// Closed-form spectral data predicted for a non-degenerate family.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictedInvariants {
    /// Hopf curvature `mu = epsilon g(A xi, xi)` for the family's own normal
    /// choice (signs are not normalized here; see `orientation_caveat`).
    pub mu: f64,
    /// Dee-level eigenvalues with multiplicities, ascending by value; zero
    /// multiplicities are dropped. Multiplicities always sum to `2n - 2`.
    pub eigenvalues: Vec<(f64, usize)>,
    pub phi_behavior: PhiBehavior,
    /// True only for type B with `0 < t < 1`: the family's printed invariants
    /// assume the opposite normal orientation, so measured values match the
    /// formulas here, and match the printed table only after a global sign
    /// flip of the operator.
    pub orientation_caveat: bool,
    /// Geodesic radius reconstructed on the principal branch:
    /// `arccos(sqrt t)` for type A with `0 < t < 1`, `arccosh(sqrt t)` for
    /// type A with `t > 1`, `arcsin(sqrt t)/2` for type B with `0 < t < 1`,
    /// `arccosh(sqrt t)/2` for type B with `t > 1`. `None` when no branch
    /// applies (type A with `t < 0`, horosphere).
    pub radius: Option<f64>,
}

/// One of the four hypersurface families.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    TypeA { q: usize, m: usize, t: f64 },
    TypeB { t: f64 },
    Degenerate,
    Horosphere { t: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::TypeA { .. } => "type A",
            Family::TypeB { .. } => "type B",
            Family::Degenerate => "degenerate",
            Family::Horosphere { .. } => "horosphere",
        }
    }
}

/// A validated (signature, family) pair.
///
/// Construction checks *admissibility* (parameter ranges); whether the locus
/// is non-empty for the given signature is the separate *feasibility* check,
/// performed by [`HypersurfaceSpec::feasibility`] and by the sampler.
#[derive(Clone, Debug, PartialEq)]
pub struct HypersurfaceSpec {
    sig: Signature,
    family: Family,
}

impl HypersurfaceSpec {
    pub fn new(sig: Signature, family: Family) -> Result<Self, GeometryError> {
        let n = sig.n();
        let p = sig.p();
        match &family {
            Family::TypeA { q, m, t } => {
                if !(*q <= p && p <= *m && *m <= n + 2) {
                    return Err(GeometryError::InvalidSpec {
                        reason: format!(
                            "type A needs 0 <= q <= p <= m <= n+2; got q={q}, m={m}, p={p}, n={n}"
                        ),
                    });
                }
                if *m <= *q + 1 {
                    return Err(GeometryError::InvalidSpec {
                        reason: format!("type A needs m > q+1; got q={q}, m={m}"),
                    });
                }
                if *q == 0 && *m == n + 2 {
                    return Err(GeometryError::InvalidSpec {
                        reason: "type A excludes q=0 with m=n+2 (empty q2 block)".to_owned(),
                    });
                }
                if !t.is_finite() || *t == 0.0 || *t == 1.0 {
                    return Err(GeometryError::InvalidSpec {
                        reason: format!("type A needs finite t with t != 0, 1; got t={t}"),
                    });
                }
            }
            Family::TypeB { t } => {
                if !t.is_finite() || *t <= 0.0 || *t == 1.0 {
                    return Err(GeometryError::InvalidSpec {
                        reason: format!("type B needs finite t > 0 with t != 1; got t={t}"),
                    });
                }
            }
            Family::Degenerate => {}
            Family::Horosphere { t } => {
                if !t.is_finite() || *t <= 0.0 {
                    return Err(GeometryError::InvalidSpec {
                        reason: format!("horosphere needs finite t > 0; got t={t}"),
                    });
                }
            }
        }
        Ok(Self { sig, family })
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Causal character of the family's normal: `+1` spacelike, `-1`
    /// timelike, `0` for the degenerate family's null normal.
    pub fn epsilon(&self) -> f64 {
        match &self.family {
            Family::TypeA { t, .. } | Family::TypeB { t } => math::signum1(t * (1.0 - t)),
            Family::Degenerate => 0.0,
            Family::Horosphere { .. } => -1.0,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.family, Family::Degenerate)
    }

    /// The two complementary coordinate index sets of a type A spec.
    pub(crate) fn type_a_index_sets(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let Family::TypeA { q, m, .. } = self.family else {
            return None;
        };
        let n = self.sig.n();
        let mut i1: Vec<usize> = (0..q).collect();
        i1.extend((m - 1)..=n);
        let i2: Vec<usize> = (q..(m - 1)).collect();
        Some((i1, i2))
    }

    /// Applies the two block projectors of a type A spec to `z`.
    pub fn block_projectors(&self, z: &CVec) -> Result<(CVec, CVec), GeometryError> {
        let (i1, i2) = self.type_a_index_sets().ok_or(GeometryError::InvalidSpec {
            reason: "block projectors are defined only for type A".to_owned(),
        })?;
        if z.dim() != self.sig.ambient_dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.sig.ambient_dim(),
                got: z.dim(),
            });
        }
        Ok((project_indices(z, &i1), project_indices(z, &i2)))
    }

    /// Signed residuals `(defining function - target, g(z,z) - 1)`.
    pub fn defining_residual(&self, z: &CVec) -> (f64, f64) {
        let quadric = self.sig.g(z, z) - 1.0;
        let family = match &self.family {
            Family::TypeA { t, .. } => {
                let (q1z, _) = self
                    .block_projectors(z)
                    .expect("type A projectors exist for a validated spec");
                self.sig.g(&q1z, &q1z) - t
            }
            Family::TypeB { t } => {
                let q = q_polynomial(z, self.sig);
                q.norm_sqr() - t
            }
            Family::Degenerate => {
                let q = q_polynomial(z, self.sig);
                q.norm_sqr() - 1.0
            }
            Family::Horosphere { t } => {
                let w = z[0] - z[z.dim() - 1];
                w.norm_sqr() - t
            }
        };
        (family, quadric)
    }

    /// Euclidean gradient representers `(u1, u2)` of the two constraints,
    /// so the directional derivative of constraint `k` along a real direction
    /// `V` is `dot_e(V, u_k)`. Used by the Newton retraction and by tangency
    /// checks. `u1` belongs to the hyperquadric constraint, `u2` to the
    /// family's defining function.
    pub fn constraint_gradients(&self, z: &CVec) -> (CVec, CVec) {
        let u1 = self.sig.weighted(z).scale_re(2.0);
        let u2 = match &self.family {
            Family::TypeA { .. } => {
                let (q1z, _) = self
                    .block_projectors(z)
                    .expect("type A projectors exist for a validated spec");
                self.sig.weighted(&q1z).scale_re(2.0)
            }
            Family::TypeB { .. } | Family::Degenerate => {
                let q = q_polynomial(z, self.sig);
                self.sig
                    .weighted(&conjugate_vector(z))
                    .scale(C64::new(4.0 * q.re, 4.0 * q.im))
            }
            Family::Horosphere { .. } => {
                let nn = z.dim() - 1;
                let w = z[0] - z[nn];
                let mut u = CVec::zero(z.dim());
                u.coords_mut()[0] = w * 2.0;
                u.coords_mut()[nn] = -w * 2.0;
                u
            }
        };
        (u1, u2)
    }

    fn check_on_surface(&self, z: &CVec, tol: &TolerancePolicy) -> Result<(), GeometryError> {
        let (family, quadric) = self.defining_residual(z);
        if math::abs(quadric) > tol.constraint_tol {
            return Err(GeometryError::OffSurface {
                which: "hyperquadric",
                residual: math::abs(quadric),
                tol: tol.constraint_tol,
            });
        }
        if math::abs(family) > tol.constraint_tol {
            return Err(GeometryError::OffSurface {
                which: "family level set",
                residual: math::abs(family),
                tol: tol.constraint_tol,
            });
        }
        Ok(())
    }

    fn check_tangent(&self, z: &CVec, x: &CVec, tol: &TolerancePolicy) -> Result<(), GeometryError> {
        let (u1, u2) = self.constraint_gradients(z);
        let p1 = x.dot_e(&u1);
        if math::abs(p1) > tol.constraint_tol {
            return Err(GeometryError::NotTangent {
                with: "hyperquadric",
                pairing: p1,
                tol: tol.constraint_tol,
            });
        }
        let p2 = x.dot_e(&u2);
        if math::abs(p2) > tol.constraint_tol {
            return Err(GeometryError::NotTangent {
                with: "family level set",
                pairing: p2,
                tol: tol.constraint_tol,
            });
        }
        Ok(())
    }

    /// The family's normal field at `z`, together with its causal character.
    ///
    /// For non-degenerate families the vector is a unit normal with
    /// `g(N, N) = epsilon`; for the degenerate family it is the null normal
    /// `Q(z) conj(z) - z` and the returned character is `0`.
    pub fn unit_normal(
        &self,
        z: &CVec,
        tol: &TolerancePolicy,
    ) -> Result<(CVec, f64), GeometryError> {
        self.check_on_surface(z, tol)?;
        let eps = self.epsilon();
        let normal = match &self.family {
            Family::TypeA { t, .. } => {
                let denom = math::sqrt(eps * t * (1.0 - t));
                let alpha = (1.0 - t) / denom;
                let beta = -t / denom;
                let (q1z, q2z) = self.block_projectors(z)?;
                &q1z.scale_re(alpha) + &q2z.scale_re(beta)
            }
            Family::TypeB { t } => {
                let denom = math::sqrt(eps * t * (1.0 - t));
                let q = q_polynomial(z, self.sig);
                (&conjugate_vector(z).scale(q) - &z.scale_re(*t)).scale_re(1.0 / denom)
            }
            Family::Degenerate => {
                let q = q_polynomial(z, self.sig);
                &conjugate_vector(z).scale(q) - z
            }
            Family::Horosphere { t } => {
                let zeta = horosphere_zeta(z);
                &zeta.scale_re(-1.0 / t) - z
            }
        };
        debug_assert!(math::abs(self.sig.g(&normal, &normal) - eps) <= 1e-9);
        debug_assert!(math::abs(self.sig.g(&normal, z)) <= 1e-9);
        debug_assert!(math::abs(self.sig.g(&normal, &apply_j(z))) <= 1e-9);
        Ok((normal, eps))
    }

    /// The closed-form shape operator of the lifted hypersurface applied to a
    /// tangent vector `x` at `z`, i.e. minus the derivative of the normal
    /// field along `x`, projected nowhere: the formulas are exact at the
    /// hyperquadric level and already tangent.
    pub fn analytic_weingarten(
        &self,
        z: &CVec,
        x: &CVec,
        tol: &TolerancePolicy,
    ) -> Result<CVec, GeometryError> {
        self.check_on_surface(z, tol)?;
        self.check_tangent(z, x, tol)?;
        let eps = self.epsilon();
        let image = match &self.family {
            Family::TypeA { t, .. } => {
                let denom = math::sqrt(eps * t * (1.0 - t));
                let alpha = (1.0 - t) / denom;
                let beta = -t / denom;
                let (q1x, q2x) = self.block_projectors(x)?;
                &q1x.scale_re(-alpha) + &q2x.scale_re(-beta)
            }
            Family::TypeB { t } => {
                let denom = math::sqrt(eps * t * (1.0 - t));
                let q = q_polynomial(z, self.sig);
                // g_C(z, conj(x)) = sum_j beta_j z_j x_j
                let zx = self.sig.herm(z, &conjugate_vector(x));
                let term = &(&conjugate_vector(z).scale(zx * 2.0) + &conjugate_vector(x).scale(q))
                    - &x.scale_re(*t);
                term.scale_re(-1.0 / denom)
            }
            Family::Degenerate => {
                let q = q_polynomial(z, self.sig);
                let xz = self.sig.herm(x, &conjugate_vector(z));
                &(&conjugate_vector(z).scale(xz * -2.0) - &conjugate_vector(x).scale(q)) + x
            }
            Family::Horosphere { t } => {
                let zeta_x = horosphere_zeta(x);
                &zeta_x.scale_re(1.0 / t) + x
            }
        };
        Ok(image)
    }

    /// Checks that the family's defining constraints can be met at all in
    /// this signature. Only type A can be infeasible: each block needs a
    /// direction of the right causal sign to carry its prescribed norm.
    pub fn feasibility(&self) -> Result<(), GeometryError> {
        if let Family::TypeA { t, .. } = self.family {
            let (i1, i2) = self
                .type_a_index_sets()
                .expect("type A index sets exist for a validated spec");
            check_block_feasible("q1", &i1, t, self.sig)?;
            check_block_feasible("q2", &i2, 1.0 - t, self.sig)?;
        }
        Ok(())
    }

    /// Draws a point of the lifted hypersurface, exactly on both constraint
    /// loci (residuals at rounding level, well below 1e-12). Deterministic in
    /// `seed`.
    pub fn sample_point(&self, seed: u64) -> Result<CVec, GeometryError> {
        self.feasibility()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match &self.family {
            Family::TypeA { t, .. } => {
                let (i1, i2) = self
                    .type_a_index_sets()
                    .expect("type A index sets exist for a validated spec");
                let dim = self.sig.ambient_dim();
                let mut z = CVec::zero(dim);
                sample_block(&mut rng, &mut z, &i1, *t, self.sig)?;
                sample_block(&mut rng, &mut z, &i2, 1.0 - *t, self.sig)?;
                Ok(z)
            }
            Family::TypeB { t } => {
                // z = x + i y with <x,x> = (1+sqrt t)/2, <y,y> = (1-sqrt t)/2,
                // <x,y> = 0, which makes Q(z) = sqrt(t) and g(z,z) = 1 exactly.
                let root = math::sqrt(*t);
                sample_real_pair(&mut rng, self.sig, (1.0 + root) / 2.0, (1.0 - root) / 2.0)
            }
            Family::Degenerate => {
                // Q(z) = 1 via <x,x> = 1, <y,y> = 0, <x,y> = 0, with y != 0
                // built from one timelike and one spacelike direction; the
                // rank-4 condition is then checked and rarely ever rejects.
                for _ in 0..REJECTION_BUDGET {
                    let z = sample_null_imaginary_part(&mut rng, self.sig)?;
                    if real_rank_four(&z, self.sig) {
                        return Ok(z);
                    }
                }
                Err(GeometryError::RejectionBudgetExhausted {
                    what: "degenerate family rank-4 point",
                    attempts: REJECTION_BUDGET,
                })
            }
            Family::Horosphere { t } => Ok(sample_horosphere(&mut rng, self.sig, *t)),
        }
    }

    /// Builds the adapted frames at a point of the lifted hypersurface.
    ///
    /// Non-degenerate families get all three frames: `full` spans the whole
    /// tangent space (dimension `2n`, ordered `[xi] ++ dee ++ [J chi]`),
    /// `horizontal` spans the lift of the quotient tangent space (dimension
    /// `2n - 1`, ordered `[xi] ++ dee`), and `dee` is the orthonormal frame
    /// of the complex distribution (dimension `2n - 2`, recorded signs).
    /// The degenerate family gets only a spanning (non-orthonormal) full
    /// frame ordered `[normal, xi, J chi, completion...]`, since its induced
    /// metric is degenerate.
    pub fn tangent_and_dee_frames(
        &self,
        z: &CVec,
        tol: &TolerancePolicy,
    ) -> Result<AdaptedFrames, GeometryError> {
        self.check_on_surface(z, tol)?;
        let (normal, eps) = self.unit_normal(z, tol)?;
        let xi = -&apply_j(&normal);
        let chi = z.clone();
        let j_chi = apply_j(z);

        if self.is_degenerate() {
            let full = degenerate_full_frame(self, z, &normal, &xi, &j_chi, tol)?;
            return Ok(AdaptedFrames {
                chi,
                j_chi,
                normal,
                epsilon: eps,
                xi,
                full,
                horizontal: None,
                dee: None,
            });
        }

        let span = [chi.clone(), j_chi.clone(), normal.clone(), xi.clone()];
        let dee_entries = orthonormal_complement(&span, self.sig, tol)?;

        let mut horizontal_entries = Vec::with_capacity(dee_entries.len() + 1);
        horizontal_entries.push((xi.clone(), eps));
        horizontal_entries.extend(dee_entries.iter().cloned());

        let mut full_entries = horizontal_entries.clone();
        full_entries.push((j_chi.clone(), 1.0));

        let dee = Frame::orthonormal(z.clone(), dee_entries, self.sig, tol)?;
        let horizontal = Frame::orthonormal(z.clone(), horizontal_entries, self.sig, tol)?;
        let full = Frame::orthonormal(z.clone(), full_entries, self.sig, tol)?;

        Ok(AdaptedFrames {
            chi,
            j_chi,
            normal,
            epsilon: eps,
            xi,
            full,
            horizontal: Some(horizontal),
            dee: Some(dee),
        })
    }

    /// Closed-form spectral data for a non-degenerate family.
    pub fn predicted_invariants(&self) -> Result<PredictedInvariants, GeometryError> {
        let n = self.sig.n();
        match &self.family {
            Family::TypeA { q, m, t } => {
                let eps = self.epsilon();
                let denom = math::sqrt(eps * t * (1.0 - t));
                let mu = (2.0 * t - 1.0) / denom;
                // Eigenvalue -alpha lives on the q1-block part of the complex
                // distribution (the block minus the span of q1 z and i q1 z),
                // of real dimension 2(n + q + 1 - m); -beta lives on the
                // complementary q2-block part, of dimension 2(m - q - 2).
                let minus_alpha = -(1.0 - t) / denom;
                let minus_beta = t / denom;
                let dim_alpha = 2 * (n + q + 1 - m);
                let dim_beta = 2 * (m - q - 2);
                let mut eigenvalues = Vec::new();
                for (value, mult) in [(minus_alpha, dim_alpha), (minus_beta, dim_beta)] {
                    if mult > 0 {
                        eigenvalues.push((value, mult));
                    }
                }
                eigenvalues.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
                let radius = if *t > 0.0 && *t < 1.0 {
                    Some(math::acos(math::sqrt(*t)))
                } else if *t > 1.0 {
                    Some(math::acosh(math::sqrt(*t)))
                } else {
                    None
                };
                Ok(PredictedInvariants {
                    mu,
                    eigenvalues,
                    phi_behavior: PhiBehavior::EigenspacesJInvariant,
                    orientation_caveat: false,
                    radius,
                })
            }
            Family::TypeB { t } => {
                let eps = self.epsilon();
                let denom = math::sqrt(eps * t * (1.0 - t));
                let mu = 2.0 * (t - 1.0) / denom;
                let root = math::sqrt(*t);
                let mut eigenvalues = alloc::vec![
                    ((t - root) / denom, n - 1),
                    ((t + root) / denom, n - 1),
                ];
                eigenvalues.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
                let radius = if *t < 1.0 {
                    Some(math::asin(root) / 2.0)
                } else {
                    Some(math::acosh(root) / 2.0)
                };
                Ok(PredictedInvariants {
                    mu,
                    eigenvalues,
                    phi_behavior: PhiBehavior::PhiSwapsPair,
                    orientation_caveat: *t < 1.0,
                    radius,
                })
            }
            Family::Degenerate => Err(GeometryError::InvalidSpec {
                reason: "the degenerate family has no unit normal, hence no predicted \
                         descended invariants"
                    .to_owned(),
            }),
            Family::Horosphere { .. } => Ok(PredictedInvariants {
                mu: 2.0,
                eigenvalues: alloc::vec![(1.0, 2 * n - 2)],
                phi_behavior: PhiBehavior::EigenspacesJInvariant,
                orientation_caveat: false,
                radius: None,
            }),
        }
    }
}

/// Adapted frames at a point of a lifted hypersurface: the distinguished
/// vectors and the full / horizontal / dee frames built from them.
#[derive(Clone, Debug)]
pub struct AdaptedFrames {
    /// The position vector (the hyperquadric's own unit normal).
    pub chi: CVec,
    /// The vertical direction `i chi` of the circle action.
    pub j_chi: CVec,
    /// The family's normal field (unit for non-degenerate families, null for
    /// the degenerate one).
    pub normal: CVec,
    /// `g(normal, normal)`: `+1`, `-1`, or `0`.
    pub epsilon: f64,
    /// The structure vector `xi = -J normal`.
    pub xi: CVec,
    /// Spans the full tangent space of the lifted hypersurface (dim `2n`).
    pub full: Frame,
    /// Spans the horizontal lift of the quotient tangent space, first vector
    /// `xi` (dim `2n - 1`); `None` for the degenerate family.
    pub horizontal: Option<Frame>,
    /// Orthonormal frame of the complex distribution (dim `2n - 2`); `None`
    /// for the degenerate family.
    pub dee: Option<Frame>,
}

/// The quadric polynomial `Q(z) = sum_j beta_j z_j^2 = g_C(z, conj z)`.
pub fn q_polynomial(z: &CVec, sig: Signature) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (j, zj) in z.coords().iter().enumerate() {
        acc += zj * zj * sig.metric_sign(j);
    }
    acc
}

/// Geodesic tube construction over the quadric `{Q = 0}`: starting from a
/// hyperquadric point `z0` with `Q(z0) = 0`, returns
/// `cos(s) z0 + sin(s) e^{i theta} conj(z0)`, which stays on the hyperquadric
/// and satisfies `|Q|^2 = sin^2(2s)`.
pub fn tube_point(
    z0: &CVec,
    theta: f64,
    s: f64,
    sig: Signature,
    tol: &TolerancePolicy,
) -> Result<CVec, GeometryError> {
    let on_sphere = math::abs(sig.g(z0, z0) - 1.0);
    if on_sphere > tol.constraint_tol {
        return Err(GeometryError::OffSurface {
            which: "hyperquadric",
            residual: on_sphere,
            tol: tol.constraint_tol,
        });
    }
    let q0 = math::sqrt(q_polynomial(z0, sig).norm_sqr());
    if q0 > tol.constraint_tol {
        return Err(GeometryError::OffSurface {
            which: "base quadric Q = 0",
            residual: q0,
            tol: tol.constraint_tol,
        });
    }
    let eta = conjugate_vector(z0).scale(C64::new(math::cos(theta), math::sin(theta)));
    Ok(&z0.scale_re(math::cos(s)) + &eta.scale_re(math::sin(s)))
}

/// Draws a hyperquadric point on the base quadric `{Q = 0}` (the tube axis):
/// `z = x + i y` with `<x,x> = <y,y> = 1/2`, `<x,y> = 0`.
pub fn sample_quadric_point(sig: Signature, seed: u64) -> Result<CVec, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_real_pair(&mut rng, sig, 0.5, 0.5)
}

fn project_indices(z: &CVec, indices: &[usize]) -> CVec {
    let mut out = CVec::zero(z.dim());
    for &j in indices {
        out.coords_mut()[j] = z[j];
    }
    out
}

fn horosphere_zeta(x: &CVec) -> CVec {
    let nn = x.dim() - 1;
    let w = x[0] - x[nn];
    let mut zeta = CVec::zero(x.dim());
    zeta.coords_mut()[0] = w;
    zeta.coords_mut()[nn] = w;
    zeta
}

fn check_block_feasible(
    block: &'static str,
    indices: &[usize],
    target: f64,
    sig: Signature,
) -> Result<(), GeometryError> {
    let timelike = indices.iter().filter(|&&j| j < sig.p()).count();
    let spacelike = indices.len() - timelike;
    let feasible = if target > 0.0 {
        spacelike > 0
    } else if target < 0.0 {
        timelike > 0
    } else {
        true // zero norm is realized by the zero block
    };
    if feasible {
        Ok(())
    } else {
        Err(GeometryError::InfeasibleBlock {
            block,
            timelike,
            spacelike,
            target,
        })
    }
}

fn draw_standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Fills the coordinates `indices` of `z` with a random complex vector of
/// exact indefinite norm `target`, by rejection (the draw must have a norm of
/// the right sign) and rescale.
fn sample_block<R: Rng>(
    rng: &mut R,
    z: &mut CVec,
    indices: &[usize],
    target: f64,
    sig: Signature,
) -> Result<(), GeometryError> {
    for _ in 0..REJECTION_BUDGET {
        let mut norm = 0.0;
        let mut draws: Vec<C64> = Vec::with_capacity(indices.len());
        for &j in indices {
            let c = C64::new(draw_standard_normal(rng), draw_standard_normal(rng));
            norm += sig.metric_sign(j) * c.norm_sqr();
            draws.push(c);
        }
        if norm * target > 1e-6 {
            let scale = math::sqrt(target / norm);
            for (&j, c) in indices.iter().zip(draws) {
                z.coords_mut()[j] = c * scale;
            }
            return Ok(());
        }
    }
    Err(GeometryError::RejectionBudgetExhausted {
        what: "type A block norm",
        attempts: REJECTION_BUDGET,
    })
}

/// Indefinite inner product of two real coordinate vectors.
fn real_inner(a: &[f64], b: &[f64], sig: Signature) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(j, (x, y))| sig.metric_sign(j) * x * y)
        .sum()
}

/// Draws `z = x + i y` with real vectors satisfying `<x,x> = nx`,
/// `<y,y> = ny`, `<x,y> = 0` exactly (up to rounding). This pins
/// `g(z,z) = nx + ny` and `Q(z) = nx - ny`.
fn sample_real_pair<R: Rng>(
    rng: &mut R,
    sig: Signature,
    nx: f64,
    ny: f64,
) -> Result<CVec, GeometryError> {
    let dim = sig.ambient_dim();
    for _ in 0..REJECTION_BUDGET {
        let x: Vec<f64> = (0..dim).map(|_| draw_standard_normal(rng)).collect();
        let y: Vec<f64> = (0..dim).map(|_| draw_standard_normal(rng)).collect();
        let xx = real_inner(&x, &x, sig);
        if xx * nx <= 1e-6 {
            continue;
        }
        let x: Vec<f64> = x.iter().map(|v| v * math::sqrt(nx / xx)).collect();
        // Project y off x in the indefinite metric; <x,x> = nx now.
        let coef = real_inner(&y, &x, sig) / nx;
        let y: Vec<f64> = y.iter().zip(&x).map(|(v, u)| v - coef * u).collect();
        let yy = real_inner(&y, &y, sig);
        if yy * ny <= 1e-6 {
            continue;
        }
        let scale = math::sqrt(ny / yy);
        let coords: Vec<C64> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| C64::new(*a, b * scale))
            .collect();
        return Ok(CVec::new(coords));
    }
    Err(GeometryError::RejectionBudgetExhausted {
        what: "real pair with prescribed norms",
        attempts: REJECTION_BUDGET,
    })
}

/// Degenerate-family draw: `z = x + i y` with `<x,x> = 1`, `<y,y> = 0`,
/// `<x,y> = 0`, `y != 0`. The null `y` is mixed from one timelike and one
/// spacelike direction orthogonal to `x`.
fn sample_null_imaginary_part<R: Rng>(
    rng: &mut R,
    sig: Signature,
) -> Result<CVec, GeometryError> {
    let dim = sig.ambient_dim();
    for _ in 0..REJECTION_BUDGET {
        let x: Vec<f64> = (0..dim).map(|_| draw_standard_normal(rng)).collect();
        let y1: Vec<f64> = (0..dim).map(|_| draw_standard_normal(rng)).collect();
        let y2: Vec<f64> = (0..dim).map(|_| draw_standard_normal(rng)).collect();
        let xx = real_inner(&x, &x, sig);
        if xx <= 1e-6 {
            continue;
        }
        let x: Vec<f64> = x.iter().map(|v| v / math::sqrt(xx)).collect();
        let project = |v: &[f64], u: &[f64], uu: f64| -> Vec<f64> {
            let coef = real_inner(v, u, sig) / uu;
            v.iter().zip(u).map(|(a, b)| a - coef * b).collect()
        };
        let y1 = project(&y1, &x, 1.0);
        let n1 = real_inner(&y1, &y1, sig);
        if n1 >= -0.3 {
            continue; // need a well-conditioned timelike leg
        }
        let y2 = project(&project(&y2, &x, 1.0), &y1, n1);
        let n2 = real_inner(&y2, &y2, sig);
        if n2 <= 0.3 {
            continue; // need a well-conditioned spacelike leg
        }
        // Normalize both legs to unit indefinite norm so the mixed vector
        // keeps O(1) coordinates, then solve a^2 - 2 a c - 1 = 0 with the
        // measured residual cross term c = <y1, y2>, which makes
        // y = s (a y1 + y2) null to rounding.
        let y1: Vec<f64> = y1.iter().map(|v| v / math::sqrt(-n1)).collect();
        let y2: Vec<f64> = y2.iter().map(|v| v / math::sqrt(n2)).collect();
        let c = real_inner(&y1, &y2, sig);
        let a = c + math::sqrt(c * c + 1.0);
        let s = 0.3 + rng.random::<f64>();
        let coords: Vec<C64> = x
            .iter()
            .zip(y1.iter().zip(&y2))
            .map(|(xv, (v1, v2))| C64::new(*xv, s * (a * v1 + v2)))
            .collect();
        return Ok(CVec::new(coords));
    }
    Err(GeometryError::RejectionBudgetExhausted {
        what: "degenerate family draw",
        attempts: REJECTION_BUDGET,
    })
}

/// Exact horosphere draw: fixes `w = z_0 - z_n = sqrt(t) e^{i psi}`, draws the
/// middle coordinates freely, and solves the hyperquadric constraint for the
/// remaining real degree of freedom in `z_0`.
fn sample_horosphere<R: Rng>(rng: &mut R, sig: Signature, t: f64) -> CVec {
    let dim = sig.ambient_dim();
    let nn = dim - 1;
    let root = math::sqrt(t);
    let psi = rng.random::<f64>() * core::f64::consts::TAU;
    let phase = C64::new(math::cos(psi), math::sin(psi));

    let mut z = CVec::zero(dim);
    let mut nu_mid = 0.0;
    for j in 1..nn {
        let c = C64::new(
            0.5 * draw_standard_normal(rng),
            0.5 * draw_standard_normal(rng),
        );
        nu_mid += sig.metric_sign(j) * c.norm_sqr();
        z.coords_mut()[j] = c;
    }
    let sigma = draw_standard_normal(rng);
    // g(z,z) = -|z_0|^2 + nu_mid + |z_n|^2 with z_n = z_0 - w reduces to
    // 2 Re(conj(z_0) w) = nu_mid + t - 1.
    let a = (nu_mid + t - 1.0) / (2.0 * root);
    let z0 = C64::new(a, sigma) * phase;
    z.coords_mut()[0] = z0;
    z.coords_mut()[nn] = z0 - root * phase;
    z
}

/// Real rank of `{z, iz, conj z, i conj z}`: exactly 4 away from the
/// lower-rank locus the degenerate family excludes.
fn real_rank_four(z: &CVec, sig: Signature) -> bool {
    let dim = 2 * sig.ambient_dim();
    let views = [
        z.real_view(),
        apply_j(z).real_view(),
        conjugate_vector(z).real_view(),
        apply_j(&conjugate_vector(z)).real_view(),
    ];
    let mut m = DMatrix::zeros(4, dim);
    for (i, view) in views.iter().enumerate() {
        for (j, v) in view.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    let svd = m.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    svd.singular_values.len() == 4 && smin > 1e-7 * smax.max(1.0)
}

/// Spanning full tangent frame for the degenerate family: the named vectors
/// `[normal, xi, J chi]` followed by Euclidean-orthogonal completion vectors
/// drawn from the kernel of the two constraint gradients.
fn degenerate_full_frame(
    spec: &HypersurfaceSpec,
    z: &CVec,
    normal: &CVec,
    xi: &CVec,
    j_chi: &CVec,
    tol: &TolerancePolicy,
) -> Result<Frame, GeometryError> {
    let sig = spec.sig();
    let dim = sig.ambient_dim();
    let tangent_dim = 2 * dim - 2;
    let (u1, u2) = spec.constraint_gradients(z);

    // Euclidean-orthonormal basis of the gradient span.
    let b1 = u1.scale_re(1.0 / u1.norm_e());
    let mut b2 = &u2 - &b1.scale_re(u2.dot_e(&b1));
    let b2_norm = b2.norm_e();
    if b2_norm <= tol.rank_tol {
        return Err(GeometryError::DegenerateSpan { rank: 1, dim: 2 });
    }
    b2 = b2.scale_re(1.0 / b2_norm);

    // Euclidean-orthonormalized copies of the named vectors, used only to
    // steer the completion away from directions already present.
    let mut steering: Vec<CVec> = Vec::new();
    for v in [normal, xi, j_chi] {
        let mut w = v.clone();
        for _ in 0..2 {
            w = &w - &b1.scale_re(w.dot_e(&b1));
            w = &w - &b2.scale_re(w.dot_e(&b2));
            for s in &steering {
                w = &w - &s.scale_re(w.dot_e(s));
            }
        }
        let norm = w.norm_e();
        if norm <= tol.rank_tol {
            return Err(GeometryError::DegenerateSpan {
                rank: steering.len(),
                dim: steering.len() + 1,
            });
        }
        steering.push(w.scale_re(1.0 / norm));
    }

    let mut completion: Vec<CVec> = Vec::new();
    let needed = tangent_dim - 3;
    for _ in 0..needed {
        let mut best: Option<(CVec, f64)> = None;
        for j in 0..dim {
            for cand in [CVec::basis(dim, j), CVec::basis(dim, j).mul_i()] {
                let mut v = cand;
                for _ in 0..2 {
                    v = &v - &b1.scale_re(v.dot_e(&b1));
                    v = &v - &b2.scale_re(v.dot_e(&b2));
                    for s in &steering {
                        v = &v - &s.scale_re(v.dot_e(s));
                    }
                    for c in &completion {
                        v = &v - &c.scale_re(v.dot_e(c));
                    }
                }
                let norm = v.norm_e();
                if best.as_ref().map_or(true, |(_, b)| norm > *b) {
                    best = Some((v, norm));
                }
            }
        }
        let (v, norm) = best.expect("candidate set is nonempty");
        if norm <= tol.rank_tol {
            return Err(GeometryError::DegenerateSpan {
                rank: 3 + completion.len(),
                dim: tangent_dim,
            });
        }
        completion.push(v.scale_re(1.0 / norm));
    }

    let mut vectors = alloc::vec![normal.clone(), xi.clone(), j_chi.clone()];
    vectors.extend(completion);
    Frame::spanning(z.clone(), vectors, sig, tol)
}
