//! Finite-difference shape operator and descended operator data.
//!
//! Everything here treats the closed-form shape operator of
//! [`crate::catalog`] as the object under test: `retract` walks perturbed
//! points back onto the two constraint loci, `numeric_weingarten`
//! differentiates the normal field through that retraction to rebuild the
//! shape operator with no reference to the closed form, and `descend`
//! expresses the operator in the horizontal frame, where it becomes the
//! shape operator of the quotient hypersurface. The residual functions
//! check the two derivative identities every later argument leans on: the
//! structure vector's derivative law and the Codazzi equation.


use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ambient::{apply_j, CVec, Signature};
use crate::catalog::HypersurfaceSpec;
use crate::error::GeometryError;
use crate::frame::Frame;
use crate::math;
use crate::tol::TolerancePolicy;

/// The descended shape operator at one point, expressed in the horizontal
/// frame (structure vector first, then the complex distribution).
#[derive(Clone, Debug)]
pub struct WeingartenData {
    /// Matrix of the descended operator: column `a` holds the frame
    /// coordinates of the operator applied to frame vector `a`, so the
    /// `(0,0)` entry is the Hopf curvature.
    pub matrix: DMatrix<f64>,
    /// The horizontal frame the matrix is written in.
    pub frame: Frame,
    /// Causal character of the unit normal.
    pub epsilon: f64,
    /// Hopf curvature `epsilon g(A xi, xi)`.
    pub mu: f64,
    /// How far the structure vector is from being an eigenvector: the
    /// largest off-`xi` coordinate of the operator applied to `xi`.
    pub hopf_residual: f64,
}

/// Structure tensors of the almost-contact structure in the horizontal
/// frame: `phi` as a matrix, `eta` as a covector of frame pairings, `xi` as
/// frame coordinates, plus the normal's causal character.
#[derive(Clone, Debug)]
pub struct StructureTensors {
    pub phi: DMatrix<f64>,
    pub eta: DVector<f64>,
    pub xi: DVector<f64>,
    pub epsilon: f64,
}

/// Newton retraction onto the intersection of the hyperquadric and the
/// family's level set, correcting along the span of the two constraint
/// gradients. Converges quadratically from the `O(h)` neighborhood that
/// finite-difference probes produce.
pub fn retract(
    spec: &HypersurfaceSpec,
    z: &CVec,
    tol: &TolerancePolicy,
) -> Result<CVec, GeometryError> {
    let mut current = z.clone();
    let mut residual = constraint_norm(spec, &current);
    for iteration in 0..tol.newton_max_iter {
        if residual <= tol.newton_tol {
            return Ok(current);
        }
        let (family, quadric) = spec.defining_residual(&current);
        let (u1, u2) = spec.constraint_gradients(&current);
        // Gram system for a correction d1 u1 + d2 u2 cancelling (quadric,
        // family) to first order; u1 carries the quadric constraint.
        let a = u1.dot_e(&u1);
        let b = u1.dot_e(&u2);
        let d = u2.dot_e(&u2);
        let det = a * d - b * b;
        if math::abs(det) <= 1e-14 * (math::abs(a * d) + math::abs(b * b)).max(1e-300) {
            return Err(GeometryError::SingularNewtonSystem { det });
        }
        let d1 = (-quadric * d + family * b) / det;
        let d2 = (-family * a + quadric * b) / det;
        current = &(&current + &u1.scale_re(d1)) + &u2.scale_re(d2);
        residual = constraint_norm(spec, &current);
        let _ = iteration;
    }
    if residual <= tol.newton_tol {
        Ok(current)
    } else {
        Err(GeometryError::NewtonDidNotConverge {
            iterations: tol.newton_max_iter,
            residual,
        })
    }
}

fn constraint_norm(spec: &HypersurfaceSpec, z: &CVec) -> f64 {
    let (family, quadric) = spec.defining_residual(z);
    math::abs(family).max(math::abs(quadric))
}

/// Finite-difference shape operator: minus the central difference of the
/// normal field along the retracted curve through `z` in direction `x`,
/// with the off-tangent (position and normal) components projected away.
/// For the degenerate family no metric projection exists and the raw
/// difference quotient is returned; its closed form is exactly minus the
/// derivative of the null normal field, so no projection is needed.
pub fn numeric_weingarten(
    spec: &HypersurfaceSpec,
    z: &CVec,
    x: &CVec,
    h: f64,
    tol: &TolerancePolicy,
) -> Result<CVec, GeometryError> {
    if !(h.is_finite()) || h <= 0.0 {
        return Err(GeometryError::InvalidTolerance {
            name: "fd_step",
            value: h,
            reason: "must be positive and finite",
        });
    }
    let plus = retract(spec, &(z + &x.scale_re(h)), tol)?;
    let minus = retract(spec, &(z - &x.scale_re(h)), tol)?;
    let (n_plus, _) = spec.unit_normal(&plus, tol)?;
    let (n_minus, eps) = spec.unit_normal(&minus, tol)?;
    let raw = (&n_minus - &n_plus).scale_re(1.0 / (2.0 * h));
    if eps == 0.0 {
        return Ok(raw);
    }
    let sig = spec.sig();
    let (center_normal, _) = spec.unit_normal(z, tol)?;
    let projected = &(&raw - &z.scale_re(sig.g(&raw, z)))
        - &center_normal.scale_re(eps * sig.g(&raw, &center_normal));
    Ok(projected)
}

/// Expresses the shape operator in the horizontal frame, where it is the
/// shape operator of the quotient hypersurface: the vertical output
/// component of the lifted operator pairs to zero against every horizontal
/// frame vector, so the signed pairings drop it automatically.
pub fn descend(
    spec: &HypersurfaceSpec,
    z: &CVec,
    tol: &TolerancePolicy,
) -> Result<WeingartenData, GeometryError> {
    if spec.is_degenerate() {
        return Err(GeometryError::DegenerateMetric {
            what: "the degenerate family's null normal admits no descended operator",
        });
    }
    let frames = spec.tangent_and_dee_frames(z, tol)?;
    let frame = frames
        .horizontal
        .expect("non-degenerate families carry a horizontal frame");
    let dim = frame.dim();
    let mut matrix = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let image = spec.analytic_weingarten(z, frame.vector(a), tol)?;
        let coords = frame.coords_of(&image, tol);
        for (r, value) in coords.iter().enumerate() {
            matrix[(r, a)] = *value;
        }
    }
    let mu = matrix[(0, 0)];
    let mut hopf_residual = 0.0f64;
    for r in 1..dim {
        hopf_residual = hopf_residual.max(math::abs(matrix[(r, 0)]));
    }
    Ok(WeingartenData {
        matrix,
        frame,
        epsilon: frames.epsilon,
        mu,
        hopf_residual,
    })
}

/// Builds the almost-contact structure tensors in the same horizontal frame
/// `descend` uses, so the matrices compose directly.
pub fn structure_tensors(
    spec: &HypersurfaceSpec,
    z: &CVec,
    tol: &TolerancePolicy,
) -> Result<StructureTensors, GeometryError> {
    if spec.is_degenerate() {
        return Err(GeometryError::DegenerateMetric {
            what: "the degenerate family's null normal admits no almost-contact structure",
        });
    }
    let frames = spec.tangent_and_dee_frames(z, tol)?;
    let frame = frames
        .horizontal
        .expect("non-degenerate families carry a horizontal frame");
    let sig = spec.sig();
    let eps = frames.epsilon;
    let dim = frame.dim();
    let mut phi = DMatrix::zeros(dim, dim);
    let mut eta = DVector::zeros(dim);
    for a in 0..dim {
        let v = frame.vector(a);
        eta[a] = sig.g(v, &frames.xi);
        let image = phi_apply(sig, eps, &frames.normal, &frames.xi, v);
        let coords = frame.coords_of(&image, tol);
        for (r, value) in coords.iter().enumerate() {
            phi[(r, a)] = *value;
        }
    }
    let xi = DVector::from_vec(frame.coords_of(&frames.xi, tol));
    Ok(StructureTensors {
        phi,
        eta,
        xi,
        epsilon: eps,
    })
}

/// `phi v = J v - epsilon eta(v) N`: the complex structure with its normal
/// component removed.
pub(crate) fn phi_apply(sig: Signature, eps: f64, normal: &CVec, xi: &CVec, v: &CVec) -> CVec {
    &apply_j(v) - &normal.scale_re(eps * sig.g(v, xi))
}

/// Removes the position, vertical, and normal components, leaving the
/// horizontal part of an ambient vector at the on-surface point `z`.
pub(crate) fn horizontal_part(sig: Signature, eps: f64, z: &CVec, normal: &CVec, v: &CVec) -> CVec {
    let j_chi = apply_j(z);
    let step = &(v - &z.scale_re(sig.g(v, z))) - &j_chi.scale_re(sig.g(v, &j_chi));
    &step - &normal.scale_re(eps * sig.g(&step, normal))
}

/// Largest deviation, over `dirs` random horizontal directions, between the
/// finite-difference derivative of the structure vector field and the
/// closed-form law `phi A X` it must satisfy.
pub fn reeb_derivative_residual(
    spec: &HypersurfaceSpec,
    z: &CVec,
    dirs: usize,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<f64, GeometryError> {
    if spec.is_degenerate() {
        return Err(GeometryError::DegenerateMetric {
            what: "the degenerate family's null normal admits no descended operator",
        });
    }
    let frames = spec.tangent_and_dee_frames(z, tol)?;
    let frame = frames
        .horizontal
        .expect("non-degenerate families carry a horizontal frame");
    let sig = spec.sig();
    let eps = frames.epsilon;
    let h = tol.fd_step;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..dirs {
        let x = random_frame_direction(&mut rng, &frame);
        let plus = retract(spec, &(z + &x.scale_re(h)), tol)?;
        let minus = retract(spec, &(z - &x.scale_re(h)), tol)?;
        let xi_plus = -&apply_j(&spec.unit_normal(&plus, tol)?.0);
        let xi_minus = -&apply_j(&spec.unit_normal(&minus, tol)?.0);
        let derivative = (&xi_plus - &xi_minus).scale_re(1.0 / (2.0 * h));
        let lhs = horizontal_part(sig, eps, z, &frames.normal, &derivative);

        let ax = spec.analytic_weingarten(z, &x, tol)?;
        let ax_horizontal = &ax - &frames.j_chi.scale_re(sig.g(&x, &frames.xi));
        let rhs = phi_apply(sig, eps, &frames.normal, &frames.xi, &ax_horizontal);

        worst = worst.max((&lhs - &rhs).norm_inf());
    }
    Ok(worst)
}

/// Largest deviation, over `dirs` random horizontal direction pairs, of the
/// Codazzi equation: the antisymmetrized covariant derivative of the shape
/// operator against its closed-form value in terms of the structure
/// tensors. Covariant derivatives are taken by finite differences along
/// retracted curves, transporting frozen ambient vectors by horizontal
/// projection at each curve point.
pub fn codazzi_residual(
    spec: &HypersurfaceSpec,
    z: &CVec,
    dirs: usize,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<f64, GeometryError> {
    if spec.is_degenerate() {
        return Err(GeometryError::DegenerateMetric {
            what: "the degenerate family's null normal admits no descended operator",
        });
    }
    let frames = spec.tangent_and_dee_frames(z, tol)?;
    let frame = frames
        .horizontal
        .clone()
        .expect("non-degenerate families carry a horizontal frame");
    let sig = spec.sig();
    let eps = frames.epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..dirs {
        let x = random_frame_direction(&mut rng, &frame);
        let y = random_frame_direction(&mut rng, &frame);
        let nabla_x_a_y = covariant_a_derivative(spec, z, &frames, &x, &y, tol)?;
        let nabla_y_a_x = covariant_a_derivative(spec, z, &frames, &y, &x, tol)?;
        let lhs = &nabla_x_a_y - &nabla_y_a_x;

        let eta_x = sig.g(&x, &frames.xi);
        let eta_y = sig.g(&y, &frames.xi);
        let phi_x = phi_apply(sig, eps, &frames.normal, &frames.xi, &x);
        let phi_y = phi_apply(sig, eps, &frames.normal, &frames.xi, &y);
        let rhs = &(&phi_y.scale_re(eta_x) - &phi_x.scale_re(eta_y))
            + &frames.xi.scale_re(2.0 * sig.g(&x, &phi_y));

        worst = worst.max((&lhs - &rhs).norm_inf());
    }
    Ok(worst)
}

/// `(nabla_X A) Y = nabla_X (A Y') - A (nabla_X Y')` at `z`, for the
/// horizontal-projection extension `Y'` of the frozen vector `y` along the
/// retracted curve in direction `x`. Both terms use the same extension, so
/// the result is the tensorial derivative.
fn covariant_a_derivative(
    spec: &HypersurfaceSpec,
    z: &CVec,
    frames: &crate::catalog::AdaptedFrames,
    x: &CVec,
    y: &CVec,
    tol: &TolerancePolicy,
) -> Result<CVec, GeometryError> {
    let sig = spec.sig();
    let eps = frames.epsilon;
    let h = tol.fd_step;
    let plus = retract(spec, &(z + &x.scale_re(h)), tol)?;
    let minus = retract(spec, &(z - &x.scale_re(h)), tol)?;

    let evaluate = |point: &CVec| -> Result<(CVec, CVec), GeometryError> {
        let (normal, _) = spec.unit_normal(point, tol)?;
        let xi = -&apply_j(&normal);
        let y_field = horizontal_part(sig, eps, point, &normal, y);
        let a_y = spec.analytic_weingarten(point, &y_field, tol)?;
        // Drop the vertical output component before differentiating: its
        // derivative leaks horizontal terms that are not part of A Y.
        let a_y_horizontal = &a_y - &apply_j(point).scale_re(sig.g(&y_field, &xi));
        Ok((y_field, a_y_horizontal))
    };
    let (y_plus, ay_plus) = evaluate(&plus)?;
    let (y_minus, ay_minus) = evaluate(&minus)?;

    let scale = 1.0 / (2.0 * h);
    let dy = (&y_plus - &y_minus).scale_re(scale);
    let nabla_x_y = horizontal_part(sig, eps, z, &frames.normal, &dy);
    let day = (&ay_plus - &ay_minus).scale_re(scale);
    let nabla_x_ay = horizontal_part(sig, eps, z, &frames.normal, &day);

    let a_nabla = spec.analytic_weingarten(z, &nabla_x_y, tol)?;
    let a_nabla_horizontal =
        &a_nabla - &frames.j_chi.scale_re(sig.g(&nabla_x_y, &frames.xi));
    Ok(&nabla_x_ay - &a_nabla_horizontal)
}

/// A unit-Euclidean-norm random combination of frame vectors.
pub(crate) fn random_frame_direction<R: Rng>(rng: &mut R, frame: &Frame) -> CVec {
    let dim = frame.base().dim();
    let mut combo = CVec::zero(dim);
    for v in frame.vectors() {
        let c: f64 = rng.sample(StandardNormal);
        combo = &combo + &v.scale_re(c);
    }
    combo.scale_re(1.0 / combo.norm_e())
}
