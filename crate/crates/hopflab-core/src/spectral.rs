//! Spectral summaries, structure identities, and classification.
//!
//! Everything downstream of [`crate::weingarten::descend`] lives here: the
//! operator matrices become eigenvalue clusters with algebraic and geometric
//! multiplicities, the clusters feed the principal-curvature transfer law and
//! the eta-umbilical model fit, and those in turn drive `classify`, which
//! names the model family a measured operator belongs to. The module also
//! checks the curvature identities (Ricci closed form against the curvature
//! trace, Riemann symmetries, constant holomorphic sectional curvature
//! upstairs) and verifies that metric-preserving linear maps leave every
//! spectral invariant unchanged.

use alloc::{vec, vec::Vec};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ambient::{apply_j, curvature_bar, CVec, Signature, C64};
use crate::catalog::HypersurfaceSpec;
use crate::error::GeometryError;
use crate::math;
use crate::tol::{TolerancePolicy, DEFECTIVE_CLUSTER_TOL};
use crate::weingarten::{self, horizontal_part, random_frame_direction, WeingartenData};

/// Eigenvalue clusters of an operator matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSummary {
    /// `(value, algebraic multiplicity, geometric multiplicity)` per cluster,
    /// ascending by value. Algebraic multiplicities sum to the dimension and
    /// each geometric multiplicity is at most its algebraic one.
    pub clusters: Vec<(f64, usize, usize)>,
    /// True exactly when every cluster has equal multiplicities.
    pub diagonalizable: bool,
    /// The clustering width the summary was computed with.
    pub cluster_tol: f64,
}

/// Eigenvalues of a real matrix, grouped into clusters of width
/// `tol.eig_cluster_tol` (chained transitively), each reported with its
/// algebraic multiplicity and the geometric multiplicity `dim - rank` of the
/// shifted matrix at the cluster value. Complex conjugate pairs, which no
/// catalog operator produces, stay in separate clusters at their shared real
/// part. The rank cutoff widens by the cluster's spread so that a defective
/// cluster's eigensolver scatter cannot masquerade as extra rank.
pub fn spectral_summary(a: &DMatrix<f64>, tol: &TolerancePolicy) -> SpectralSummary {
    let dim = a.nrows();
    debug_assert_eq!(dim, a.ncols(), "spectral summaries need square matrices");
    let eigenvalues = robust_eigenvalues(a);
    let groups = cluster_values(&eigenvalues, tol.eig_cluster_tol);
    let mut clusters = Vec::with_capacity(groups.len());
    for group in groups {
        let alg = group.len();
        let mean = group.iter().copied().sum::<C64>() / (alg as f64);
        let spread = group
            .iter()
            .map(|c| math::sqrt((c - mean).norm_sqr()))
            .fold(0.0f64, f64::max);
        let value = mean.re;
        let mut shifted = a.clone();
        for k in 0..dim {
            shifted[(k, k)] -= value;
        }
        let (singular_values, _) = robust_svd(&shifted);
        let largest = singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
        let cutoff = tol.rank_tol * largest.max(1.0) + 2.0 * spread;
        let rank = singular_values.iter().filter(|s| **s > cutoff).count();
        let geometric = (dim - rank).min(alg);
        clusters.push((value, alg, geometric));
    }
    clusters.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));
    let diagonalizable = clusters.iter().all(|&(_, alg, geo)| alg == geo);
    SpectralSummary {
        clusters,
        diagonalizable,
        cluster_tol: tol.eig_cluster_tol,
    }
}

/// Groups values into transitively chained clusters of the given width.
fn cluster_values(values: &[C64], width: f64) -> Vec<Vec<C64>> {
    fn root(parent: &mut [usize], mut k: usize) -> usize {
        while parent[k] != k {
            parent[k] = parent[parent[k]];
            k = parent[k];
        }
        k
    }
    let count = values.len();
    let mut parent: Vec<usize> = (0..count).collect();
    for i in 0..count {
        for j in (i + 1)..count {
            if math::sqrt((values[i] - values[j]).norm_sqr()) <= width {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for (k, value) in values.iter().enumerate() {
        let r = root(&mut parent, k);
        match groups.iter_mut().find(|(label, _)| *label == r) {
            Some((_, members)) => members.push(*value),
            None => groups.push((r, vec![*value])),
        }
    }
    groups.into_iter().map(|(_, members)| members).collect()
}

/// Eigenvalues through a bounded-iteration Schur decomposition. The default
/// unbounded iteration targets machine precision, which defective matrices
/// never reach (their QR iteration stalls at the Jordan scatter scale), so
/// it can spin forever; a 1e-13 deflation tolerance with a generous cap
/// converges on every catalog operator. Measure-zero stalls are retried
/// under deterministic random orthogonal conjugations, which leave the
/// spectrum unchanged but break the stalling pattern.
fn robust_eigenvalues(a: &DMatrix<f64>) -> Vec<C64> {
    if let Some(schur) = a.clone().try_schur(1e-13, 100_000) {
        return schur.complex_eigenvalues().iter().copied().collect();
    }
    let dim = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c42_7265);
    for _ in 0..4 {
        let random = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
        let q = random.qr().q();
        let conjugated = q.transpose() * a * &q;
        if let Some(schur) = conjugated.try_schur(1e-12, 200_000) {
            return schur.complex_eigenvalues().iter().copied().collect();
        }
    }
    panic!("eigenvalue iteration did not converge after conjugated retries");
}

/// Singular values paired with right singular vectors (as rows of `v_t`)
/// through a bounded-iteration SVD, falling back to the symmetric
/// eigendecomposition of the Gram matrix `m^T m`, whose eigenvectors are the
/// right singular vectors. Bounded iterations keep defective inputs from
/// hanging the solver.
fn robust_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    if let Some(svd) = m.clone().try_svd(false, true, 1e-13, 100_000) {
        let v_t = svd.v_t.expect("right singular vectors were requested");
        return (svd.singular_values.iter().copied().collect(), v_t);
    }
    let eigen = (m.transpose() * m)
        .try_symmetric_eigen(1e-13, 100_000)
        .expect("eigenvalue iteration failed on a symmetric Gram matrix");
    let values = eigen
        .eigenvalues
        .iter()
        .map(|x| math::sqrt(x.max(0.0)))
        .collect();
    (values, eigen.eigenvectors.transpose())
}

/// Basis of the numerical null space of `m` (right singular vectors whose
/// singular values fall below the relative cutoff).
fn null_space(m: &DMatrix<f64>, rank_tol: f64) -> Vec<DVector<f64>> {
    let (singular_values, v_t) = robust_svd(m);
    let largest = singular_values.iter().fold(0.0f64, |acc, s| acc.max(*s));
    let cutoff = rank_tol * largest.max(1.0);
    let mut basis = Vec::new();
    for (k, s) in singular_values.iter().enumerate() {
        if *s <= cutoff {
            basis.push(v_t.row(k).transpose());
        }
    }
    basis
}

/// The structure-vector eigendata of a descended operator: the Hopf principal
/// curvature `mu = epsilon g(A xi, xi)` and the residual `|A xi - mu xi|`
/// measuring how far the structure vector is from being an eigenvector.
pub fn hopf_data(w: &WeingartenData) -> (f64, f64) {
    (w.mu, w.hopf_residual)
}

/// Transfers a principal curvature `lambda` on the complex distribution to
/// the principal curvature of its image under the structure tensor:
/// `hat_lambda = (lambda mu + 2 epsilon) / (2 lambda - mu)`. Fails when
/// `2 lambda = mu` (within `tol`), the exceptional case in which the transfer
/// denominator vanishes; the error records whether the numerator vanishes
/// with it, the only way such eigendata can exist.
pub fn hat_lambda(lambda: f64, mu: f64, epsilon: f64, tol: f64) -> Result<f64, GeometryError> {
    let denominator = 2.0 * lambda - mu;
    let coefficient = lambda * mu + 2.0 * epsilon;
    if math::abs(denominator) <= tol {
        return Err(GeometryError::ExceptionalTransfer {
            lambda,
            mu,
            epsilon,
            coefficient,
            consistent: math::abs(coefficient) <= tol,
        });
    }
    Ok(coefficient / denominator)
}

/// The principal curvatures on the complex distribution that are compatible
/// with Hopf curvature `mu`: the real roots of `x^2 - mu x - epsilon`. Both
/// roots when the discriminant is positive, the double root when it
/// vanishes, and no roots (empty) when it is negative.
pub fn lambda_from_mu(mu: f64, epsilon: f64) -> Vec<f64> {
    let discriminant = mu * mu + 4.0 * epsilon;
    if discriminant < 0.0 {
        return Vec::new();
    }
    if discriminant == 0.0 {
        return vec![mu / 2.0];
    }
    let root = math::sqrt(discriminant);
    vec![(mu - root) / 2.0, (mu + root) / 2.0]
}

/// Worst relative defect of the transfer law over the measured eigenpairs:
/// for every eigenvector `X` of the descended operator lying in the complex
/// distribution, `(2 lambda - mu) A phi X` must equal
/// `(lambda mu + 2 epsilon) phi X`. Requires a Hopf operator (the structure
/// vector must already be an eigenvector). Each defect is scaled by
/// `max(1, |phi X|)` so eigenvectors that `phi` annihilates contribute zero.
pub fn lemma_aphix_residual(
    w: &WeingartenData,
    phi: &DMatrix<f64>,
    tol: &TolerancePolicy,
) -> f64 {
    debug_assert!(
        w.hopf_residual <= tol.constraint_tol,
        "the transfer law only binds Hopf operators"
    );
    let m = &w.matrix;
    let dim = m.nrows();
    let summary = spectral_summary(m, tol);
    let mut worst = 0.0f64;
    for &(value, _, _) in &summary.clusters {
        let mut shifted = m.clone();
        for k in 0..dim {
            shifted[(k, k)] -= value;
        }
        for vector in null_space(&shifted, tol.rank_tol) {
            // Remove the structure-vector coordinate. When the cluster is the
            // structure vector's own, that coordinate vector is itself in the
            // eigenspace, so the remainder still is; what survives spans the
            // complex-distribution part of the eigenspace.
            let mut x = vector;
            x[0] = 0.0;
            let norm = x.norm();
            if norm <= 1e-8 {
                continue;
            }
            x /= norm;
            let phi_x = phi * &x;
            let a_phi_x = m * &phi_x;
            let defect = (a_phi_x * (2.0 * value - w.mu)
                - &phi_x * (value * w.mu + 2.0 * w.epsilon))
                .amax();
            let scale = phi_x.amax().max(1.0);
            worst = worst.max(defect / scale);
        }
    }
    worst
}

/// Commutator of the descended operator with the structure tensor, paired
/// with a finite-difference check of the Killing identity it controls:
/// returns `(|A phi - phi A|, killing_residual)` where the second entry is
/// the worst gap, over `dirs` random horizontal pairs `(X, Y)`, between the
/// finite-difference Lie derivative of the metric along the structure vector
/// field and its closed form `g((phi A - A phi) X, Y)`. The operator
/// commutes with the structure tensor exactly when the structure vector's
/// flow is isometric.
pub fn commutator_killing(
    spec: &HypersurfaceSpec,
    z: &CVec,
    w: &WeingartenData,
    phi: &DMatrix<f64>,
    dirs: usize,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<(f64, f64), GeometryError> {
    if spec.is_degenerate() {
        return Err(GeometryError::DegenerateMetric {
            what: "the degenerate family's null normal admits no descended operator",
        });
    }
    let commutator_norm = (&w.matrix * phi - phi * &w.matrix).amax();

    let sig = spec.sig();
    let frames = spec.tangent_and_dee_frames(z, tol)?;
    let gram = w.frame.gram();
    let model_matrix = phi * &w.matrix - &w.matrix * phi;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..dirs {
        let x = random_frame_direction(&mut rng, &w.frame);
        let y = random_frame_direction(&mut rng, &w.frame);
        let rate_x = reeb_rate(spec, z, &frames, &x, tol)?;
        let rate_y = reeb_rate(spec, z, &frames, &y, tol)?;
        let lie = sig.g(&rate_x, &y) + sig.g(&x, &rate_y);
        let xc = DVector::from_vec(w.frame.coords_of(&x, tol));
        let yc = DVector::from_vec(w.frame.coords_of(&y, tol));
        let model = (&model_matrix * xc).dot(&(&gram * yc));
        worst = worst.max(math::abs(lie - model));
    }
    Ok((commutator_norm, worst))
}

/// Horizontal part of the finite-difference derivative of the structure
/// vector field along the retracted curve through `z` in direction `x`.
fn reeb_rate(
    spec: &HypersurfaceSpec,
    z: &CVec,
    frames: &crate::catalog::AdaptedFrames,
    x: &CVec,
    tol: &TolerancePolicy,
) -> Result<CVec, GeometryError> {
    let sig = spec.sig();
    let h = tol.fd_step;
    let plus = weingarten::retract(spec, &(z + &x.scale_re(h)), tol)?;
    let minus = weingarten::retract(spec, &(z - &x.scale_re(h)), tol)?;
    let xi_plus = -&apply_j(&spec.unit_normal(&plus, tol)?.0);
    let xi_minus = -&apply_j(&spec.unit_normal(&minus, tol)?.0);
    let derivative = (&xi_plus - &xi_minus).scale_re(1.0 / (2.0 * h));
    Ok(horizontal_part(
        sig,
        frames.epsilon,
        z,
        &frames.normal,
        &derivative,
    ))
}

/// Least-squares fit of a descended operator by the eta-umbilical model
/// `A = lambda I + rho xi (x) eta`, returning `(lambda, rho, residual)` with
/// the residual in the max-abs norm. The fit minimizes the Frobenius error
/// over the two-parameter model family spanned by the identity and the
/// structure-vector rank-one term.
pub fn eta_umbilical_fit(
    w: &WeingartenData,
    eta: &DVector<f64>,
    xi: &DVector<f64>,
) -> (f64, f64, f64) {
    let m = &w.matrix;
    let dim = m.nrows() as f64;
    let rank_one = xi * eta.transpose();
    let a11 = dim;
    let a12 = rank_one.trace();
    let a22 = (rank_one.transpose() * &rank_one).trace();
    let b1 = m.trace();
    let b2 = (rank_one.transpose() * m).trace();
    let det = a11 * a22 - a12 * a12;
    let lambda = (a22 * b1 - a12 * b2) / det;
    let rho = (a11 * b2 - a12 * b1) / det;
    let residual = (m - DMatrix::identity(m.nrows(), m.ncols()) * lambda - rank_one * rho).amax();
    (lambda, rho, residual)
}

/// The model families a measured operator can be pinned to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassificationTag {
    /// Positive normal: tube whose distribution curvature is `cot r`.
    APlusClass1,
    /// Positive normal: tube whose distribution curvature is `-tan r`.
    APlusClass2,
    /// Negative normal: tube whose distribution curvature is `coth r`.
    AMinusClass3,
    /// Negative normal: tube whose distribution curvature is `tanh r`.
    AMinusClass4,
    /// Negative normal, Hopf curvature 2, distribution curvature 1.
    Horosphere,
    /// The spectrum does not have the single-curvature shape the models need.
    NotEtaUmbilical,
    /// Eta-umbilical shape, but the eigendata match no model family.
    Indeterminate,
}

impl ClassificationTag {
    /// Stable string form for reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::APlusClass1 => "A_plus_class1",
            Self::APlusClass2 => "A_plus_class2",
            Self::AMinusClass3 => "A_minus_class3",
            Self::AMinusClass4 => "A_minus_class4",
            Self::Horosphere => "Horosphere",
            Self::NotEtaUmbilical => "NotEtaUmbilical",
            Self::Indeterminate => "Indeterminate",
        }
    }
}

/// A classification verdict: the model family, the recovered radius when the
/// family has one, the distribution curvature the verdict was read from, and
/// the block-size constraint any matching model parameters must satisfy.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub tag: ClassificationTag,
    pub r: Option<f64>,
    pub lambda: Option<f64>,
    pub qm_constraint: Option<&'static str>,
}

impl Classification {
    fn bare(tag: ClassificationTag) -> Self {
        Self {
            tag,
            r: None,
            lambda: None,
            qm_constraint: None,
        }
    }
}

/// Names the model family matching a measured spectrum. The operator sign is
/// normalized so the Hopf curvature is nonnegative (flipping the unit normal
/// negates the whole operator, so both orientations classify identically).
/// The spectrum must consist of the structure-vector eigenvalue plus a
/// single cluster of full multiplicity `2n - 2`; anything else is
/// `NotEtaUmbilical`. Eigendata that fail the compatibility equation
/// `lambda^2 - mu lambda - epsilon = 0` or fall outside every model branch
/// come back `Indeterminate`. Radii are recovered on principal branches.
pub fn classify(
    epsilon: f64,
    summary: &SpectralSummary,
    mu: f64,
    tol: &TolerancePolicy,
) -> Classification {
    use ClassificationTag::*;
    let width = tol.eig_cluster_tol;
    let dim: usize = summary.clusters.iter().map(|c| c.1).sum();

    let flip = mu < 0.0;
    let mu = if flip { -mu } else { mu };
    let mut values: Vec<(f64, usize)> = summary
        .clusters
        .iter()
        .map(|&(v, alg, _)| (if flip { -v } else { v }, alg))
        .collect();
    values.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));

    let lambda = match values.len() {
        1 if values[0].1 == dim => {
            // The structure-vector eigenvalue merged with the distribution's.
            if math::abs(values[0].0 - mu) <= width {
                values[0].0
            } else {
                return Classification::bare(Indeterminate);
            }
        }
        2 => {
            let (reeb, rest) = if values[0].1 <= values[1].1 {
                (values[0], values[1])
            } else {
                (values[1], values[0])
            };
            if reeb.1 != 1 || rest.1 != dim - 1 {
                return Classification::bare(NotEtaUmbilical);
            }
            if math::abs(reeb.0 - mu) > width {
                return Classification::bare(Indeterminate);
            }
            rest.0
        }
        _ => return Classification::bare(NotEtaUmbilical),
    };

    // The distribution curvature of a Hopf operator with a single cluster
    // must solve lambda^2 - mu lambda - epsilon = 0.
    if math::abs(lambda * lambda - mu * lambda - epsilon) > width {
        return Classification::bare(Indeterminate);
    }

    let verdict = |tag, r, qm| Classification {
        tag,
        r: Some(r),
        lambda: Some(lambda),
        qm_constraint: Some(qm),
    };
    if epsilon > 0.0 {
        if lambda > width {
            verdict(
                APlusClass1,
                math::atan(1.0 / lambda),
                "m = n + q + 1 (q <= 1)",
            )
        } else if lambda < -width {
            verdict(APlusClass2, math::atan(-lambda), "m = q + 2")
        } else {
            Classification::bare(Indeterminate)
        }
    } else if epsilon < 0.0 {
        if math::abs(mu - 2.0) <= width && math::abs(lambda - 1.0) <= width {
            Classification {
                tag: Horosphere,
                r: None,
                lambda: Some(lambda),
                qm_constraint: None,
            }
        } else if mu > 2.0 && lambda > 1.0 {
            verdict(
                AMinusClass3,
                math::atanh(1.0 / lambda),
                "m = n + q + 1 (q <= 1)",
            )
        } else if mu > 2.0 && lambda > 0.0 && lambda < 1.0 {
            verdict(AMinusClass4, math::atanh(lambda), "m = q + 2")
        } else {
            Classification::bare(Indeterminate)
        }
    } else {
        Classification::bare(Indeterminate)
    }
}

/// Residuals of the three curvature identities at one point: the closed-form
/// Ricci operator against the trace of the Gauss-equation curvature, the
/// worst Riemann symmetry defect (antisymmetry in the first and last slots,
/// pair exchange) over frame 4-tuples, and the deviation of the ambient
/// holomorphic sectional curvature from 4 over deterministically sampled
/// unit spacelike directions.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureReport {
    pub ricci_residual: f64,
    pub symmetry_residual: f64,
    pub holomorphic_residual: f64,
}

/// Checks the curvature identities carried by a descended operator. The
/// Gauss-equation curvature is assembled from the operator and structure
/// tensors in frame coordinates; its metric trace must reproduce the
/// closed-form Ricci operator
/// `S X = (2n+1) X - 3 epsilon eta(X) xi + epsilon tr(A) A X - epsilon A^2 X`.
pub fn curvature_identities(
    w: &WeingartenData,
    phi: &DMatrix<f64>,
    eta: &DVector<f64>,
    xi: &DVector<f64>,
    epsilon: f64,
    n: usize,
    _tol: &TolerancePolicy,
) -> CurvatureReport {
    let m = &w.matrix;
    let dim = m.nrows();
    let gram = w.frame.gram();
    let pair = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&gram * b));
    let riemann = |x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>| -> DVector<f64> {
        let phi_x = phi * x;
        let phi_y = phi * y;
        let phi_z = phi * z;
        let ax = m * x;
        let ay = m * y;
        x * pair(y, z) - y * pair(x, z) + &phi_x * pair(&phi_y, z)
            - &phi_y * pair(&phi_x, z)
            - phi_z * (2.0 * pair(&phi_x, y))
            + (&ax * pair(&ay, z) - &ay * pair(&ax, z)) * epsilon
    };
    let basis: Vec<DVector<f64>> = (0..dim)
        .map(|a| DVector::from_fn(dim, |r, _| if r == a { 1.0 } else { 0.0 }))
        .collect();

    // Closed-form Ricci operator against the metric trace of the curvature.
    let trace_a = m.trace();
    let mut ricci_residual = 0.0f64;
    for (a, ea) in basis.iter().enumerate() {
        let mea = m * ea;
        let closed = ea * ((2 * n + 1) as f64) - xi * (3.0 * epsilon * eta[a])
            + &mea * (epsilon * trace_a)
            - (m * &mea) * epsilon;
        let mut traced = DVector::zeros(dim);
        for (i, ei) in basis.iter().enumerate() {
            traced += riemann(ea, ei, ei) * gram[(i, i)];
        }
        ricci_residual = ricci_residual.max((closed - traced).amax());
    }

    // Riemann symmetry defects over all frame 4-tuples.
    let mut curvature = Vec::with_capacity(dim * dim * dim);
    for ei in &basis {
        for ej in &basis {
            for ek in &basis {
                curvature.push(&gram * riemann(ei, ej, ek));
            }
        }
    }
    let entry = |i: usize, j: usize, k: usize, l: usize| curvature[(i * dim + j) * dim + k][l];
    let mut symmetry_residual = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let this = entry(i, j, k, l);
                    symmetry_residual = symmetry_residual
                        .max(math::abs(this + entry(j, i, k, l)))
                        .max(math::abs(this + entry(i, j, l, k)))
                        .max(math::abs(this - entry(k, l, i, j)));
                }
            }
        }
    }

    // Ambient holomorphic sectional curvature over fixed random directions.
    let sig = w.frame.signature();
    let mut rng = ChaCha8Rng::seed_from_u64(0x484f_4c4f);
    let mut holomorphic_residual = 0.0f64;
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < 20 && attempts < 10_000 {
        attempts += 1;
        let v = CVec::new(
            (0..sig.ambient_dim())
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        );
        let norm = sig.g(&v, &v);
        if norm < 0.1 {
            continue;
        }
        let x = v.scale_re(1.0 / math::sqrt(norm));
        let jx = x.mul_i();
        let sectional = sig.g(&curvature_bar(&x, &jx, &jx, sig), &x);
        holomorphic_residual = holomorphic_residual.max(math::abs(sectional - 4.0));
        accepted += 1;
    }

    CurvatureReport {
        ricci_residual,
        symmetry_residual,
        holomorphic_residual,
    }
}

/// Spectral summary of the shape operator at a point: the descended operator
/// for families with a metric normal, the full lifted operator (in the
/// spanning tangent frame) for the degenerate family, whose defective
/// spectrum is clustered at the wider width scattered Jordan eigenvalues
/// need.
pub fn operator_spectrum(
    spec: &HypersurfaceSpec,
    z: &CVec,
    tol: &TolerancePolicy,
) -> Result<SpectralSummary, GeometryError> {
    if spec.is_degenerate() {
        let frames = spec.tangent_and_dee_frames(z, tol)?;
        let dim = frames.full.dim();
        let mut matrix = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            let image = spec.analytic_weingarten(z, frames.full.vector(a), tol)?;
            for (r, value) in frames.full.coords_of(&image, tol).iter().enumerate() {
                matrix[(r, a)] = *value;
            }
        }
        let mut wide = tol.clone();
        wide.eig_cluster_tol = wide.eig_cluster_tol.max(DEFECTIVE_CLUSTER_TOL);
        Ok(spectral_summary(&matrix, &wide))
    } else {
        let w = weingarten::descend(spec, z, tol)?;
        Ok(spectral_summary(&w.matrix, tol))
    }
}

/// Invariance data for one candidate isometry.
#[derive(Clone, Debug)]
pub struct IsometryReport {
    /// `|U^* G U - G|` over the matrix entries.
    pub metric_defect: f64,
    /// Worst constraint residual of the transformed sample points.
    pub max_defining_residual: f64,
    /// Worst per-cluster eigenvalue difference between the spectra at a
    /// point and at its image (infinite when cluster layouts differ).
    pub max_value_gap: f64,
    /// True when every point's two spectra agree in cluster count and in
    /// algebraic and geometric multiplicities.
    pub multiplicities_match: bool,
    /// Number of base points compared.
    pub points: usize,
}

/// Verifies that a metric-preserving linear map sends the hypersurface to
/// itself with identical spectral invariants: `U` must satisfy
/// `U^* G U = G` (else `NotMetricPreserving`), and at 20 sampled points the
/// transformed point must satisfy the defining equations while its shape
/// spectrum matches the original's cluster for cluster.
pub fn isometry_invariance(
    spec: &HypersurfaceSpec,
    u: &DMatrix<C64>,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<IsometryReport, GeometryError> {
    let sig = spec.sig();
    let dim = sig.ambient_dim();
    if u.nrows() != dim || u.ncols() != dim {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            got: u.nrows().max(u.ncols()),
        });
    }
    let gram = DMatrix::<C64>::from_fn(dim, dim, |r, c| {
        if r == c {
            C64::new(sig.metric_sign(r), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let metric_defect = complex_amax(&(u.adjoint() * &gram * u - &gram));
    if metric_defect > tol.constraint_tol {
        return Err(GeometryError::NotMetricPreserving {
            defect: metric_defect,
            tol: tol.constraint_tol,
        });
    }

    let points = 20;
    let mut max_defining_residual = 0.0f64;
    let mut max_value_gap = 0.0f64;
    let mut multiplicities_match = true;
    for k in 0..points {
        let z = spec.sample_point(seed.wrapping_add(k as u64))?;
        let image = apply_matrix(u, &z);
        let (family, quadric) = spec.defining_residual(&image);
        max_defining_residual = max_defining_residual
            .max(math::abs(family))
            .max(math::abs(quadric));
        let here = operator_spectrum(spec, &z, tol)?;
        let there = operator_spectrum(spec, &image, tol)?;
        if here.clusters.len() != there.clusters.len() {
            multiplicities_match = false;
            max_value_gap = f64::INFINITY;
            continue;
        }
        for (a, b) in here.clusters.iter().zip(there.clusters.iter()) {
            if a.1 != b.1 || a.2 != b.2 {
                multiplicities_match = false;
            }
            max_value_gap = max_value_gap.max(math::abs(a.0 - b.0));
        }
    }
    Ok(IsometryReport {
        metric_defect,
        max_defining_residual,
        max_value_gap,
        multiplicities_match,
        points,
    })
}

/// A pseudo-random metric-preserving linear map that also preserves the
/// spec's family-defining constraint, built as a Cayley transform
/// `(I - X)(I + X)^{-1}` of a metric-skew generator `X = G S`
/// (`S` skew-hermitian). Block-diagonal generators keep the two coordinate
/// blocks of a two-block family invariant; real generators composed with a
/// global phase preserve holomorphic quadric levels; middle-block generators
/// fix the two null coordinates the horosphere family is written in.
pub fn congruence_isometry(spec: &HypersurfaceSpec, seed: u64) -> DMatrix<C64> {
    let sig = spec.sig();
    let dim = sig.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.family() {
        crate::catalog::Family::TypeA { .. } => {
            let (block1, block2) = spec
                .type_a_index_sets()
                .expect("two-block families carry index sets");
            let mut s = DMatrix::<C64>::zeros(dim, dim);
            fill_skew_hermitian(&mut s, &block1, &mut rng);
            fill_skew_hermitian(&mut s, &block2, &mut rng);
            cayley(sig, &s)
        }
        crate::catalog::Family::TypeB { .. } | crate::catalog::Family::Degenerate => {
            let mut s = DMatrix::<C64>::zeros(dim, dim);
            for a in 0..dim {
                for b in (a + 1)..dim {
                    let x: f64 = rng.sample(StandardNormal);
                    s[(a, b)] = C64::new(0.35 * x, 0.0);
                    s[(b, a)] = C64::new(-0.35 * x, 0.0);
                }
            }
            let theta = rng.random::<f64>() * core::f64::consts::TAU;
            cayley(sig, &s) * C64::new(math::cos(theta), math::sin(theta))
        }
        crate::catalog::Family::Horosphere { .. } => {
            let middle: Vec<usize> = (1..dim - 1).collect();
            let mut s = DMatrix::<C64>::zeros(dim, dim);
            fill_skew_hermitian(&mut s, &middle, &mut rng);
            let theta = rng.random::<f64>() * core::f64::consts::TAU;
            cayley(sig, &s) * C64::new(math::cos(theta), math::sin(theta))
        }
    }
}

/// Fills the given index block of `s` with a random skew-hermitian block.
fn fill_skew_hermitian<R: Rng>(s: &mut DMatrix<C64>, indices: &[usize], rng: &mut R) {
    for (k, &a) in indices.iter().enumerate() {
        let d: f64 = rng.sample(StandardNormal);
        s[(a, a)] = C64::new(0.0, 0.35 * d);
        for &b in &indices[k + 1..] {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let c = C64::new(0.35 * re, 0.35 * im);
            s[(a, b)] = c;
            s[(b, a)] = -c.conj();
        }
    }
}

/// Cayley transform of the metric-skew matrix `G S`: exactly metric-unitary
/// whenever `S` is skew-hermitian. Retries at halved generator scales in the
/// measure-zero event that the transform's denominator is singular.
fn cayley(sig: Signature, s: &DMatrix<C64>) -> DMatrix<C64> {
    let dim = sig.ambient_dim();
    let identity = DMatrix::<C64>::identity(dim, dim);
    let mut scale = 1.0f64;
    for _ in 0..8 {
        let mut x = s * C64::new(scale, 0.0);
        for a in 0..dim {
            let sign = sig.metric_sign(a);
            for b in 0..dim {
                x[(a, b)] *= C64::new(sign, 0.0);
            }
        }
        let numerator = &identity - &x;
        if let Some(inverse) = (&identity + &x).try_inverse() {
            return numerator * inverse;
        }
        scale *= 0.5;
    }
    unreachable!("a scaled Cayley denominator is invertible")
}

/// Largest entry modulus of a complex matrix.
fn complex_amax(m: &DMatrix<C64>) -> f64 {
    m.iter()
        .map(|c| math::sqrt(c.norm_sqr()))
        .fold(0.0f64, f64::max)
}

/// Applies a complex matrix to an ambient vector.
fn apply_matrix(u: &DMatrix<C64>, z: &CVec) -> CVec {
    let v = DVector::<C64>::from_column_slice(z.coords());
    let image = u * v;
    CVec::new(image.iter().copied().collect())
}
