//! Frames adapted to the indefinite metric.
//!
//! Two kinds of frame appear downstream. Generic hypersurface points carry
//! orthonormal frames (`g(f_i, f_j) = s_i delta_ij`, signs `s_i = ±1`), built
//! here by pivoted projection against an already-orthonormal prefix. The
//! degenerate family has a lightlike tangent direction, so no orthonormal
//! frame of the natural subspaces exists; those points carry merely spanning
//! frames, and coordinates are recovered by Euclidean least squares instead
//! of signed metric pairings.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::ambient::{CVec, Signature};
use crate::error::GeometryError;
use crate::math;
use crate::tol::TolerancePolicy;

/// Builds an orthonormal basis (with signs) of the `g`-orthogonal complement
/// of `span` inside the full real ambient space.
///
/// `span` must be `g`-nondegenerate as a set: its Gram matrix is rank-checked
/// first, and a rank defect reports [`GeometryError::DegenerateSpan`]. Basis
/// vectors are then drawn from the candidates `e_j`, `i e_j`, each freshly
/// projected off the span and the vectors built so far, pivoting on the
/// largest `|g(v, v)|`; a vanishing pivot means the complement itself is
/// degenerate and reports [`GeometryError::DegeneratePivot`].
pub fn orthonormal_complement(
    span: &[CVec],
    sig: Signature,
    tol: &TolerancePolicy,
) -> Result<Vec<(CVec, f64)>, GeometryError> {
    let k = span.len();
    let dim_c = sig.ambient_dim();
    let real_dim = 2 * dim_c;
    debug_assert!(k <= real_dim);

    let gram = DMatrix::from_fn(k, k, |i, j| sig.g(&span[i], &span[j]));
    let rank = euclidean_rank(&gram, tol);
    if rank < k {
        return Err(GeometryError::DegenerateSpan { rank, dim: k });
    }
    let gram_lu = gram.lu();

    let mut candidates: Vec<CVec> = Vec::with_capacity(real_dim);
    for j in 0..dim_c {
        let e = CVec::basis(dim_c, j);
        candidates.push(e.mul_i());
        candidates.push(e);
    }

    let mut built: Vec<(CVec, f64)> = Vec::new();
    let target = real_dim - k;
    for step in 0..target {
        let mut best: Option<(CVec, f64)> = None;
        for cand in &candidates {
            let mut v = cand.clone();
            // Two projection sweeps: the second removes the roundoff the
            // first leaves behind, which matters once the frame is large.
            for _ in 0..2 {
                if k > 0 {
                    let b = DVector::from_fn(k, |i, _| sig.g(&span[i], &v));
                    if let Some(x) = gram_lu.solve(&b) {
                        for (i, s) in span.iter().enumerate() {
                            v = &v - &s.scale_re(x[i]);
                        }
                    }
                }
                for (u, sign) in &built {
                    v = &v - &u.scale_re(sign * sig.g(&v, u));
                }
            }
            let pivot = math::abs(sig.g(&v, &v));
            if best.as_ref().map_or(true, |(_, p)| pivot > *p) {
                best = Some((v, pivot));
            }
        }
        let (v, pivot) = best.unwrap_or_else(|| unreachable!("candidate set is nonempty"));
        if pivot <= tol.rank_tol {
            return Err(GeometryError::DegeneratePivot { step, pivot });
        }
        let norm = sig.g(&v, &v);
        let sign = math::signum1(norm);
        built.push((v.scale_re(1.0 / math::sqrt(math::abs(norm))), sign));
    }
    Ok(built)
}

fn euclidean_rank(m: &DMatrix<f64>, tol: &TolerancePolicy) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = tol.rank_tol * sigma_max.max(1.0);
    svd.singular_values.iter().filter(|&&s| s > threshold).count()
}

/// A frame of tangent vectors at a base point.
#[derive(Clone, Debug)]
pub struct Frame {
    base: CVec,
    vectors: Vec<CVec>,
    /// `Some(signs)` iff the frame is orthonormal.
    signs: Option<Vec<f64>>,
    sig: Signature,
}

impl Frame {
    /// An orthonormal frame; verifies `g(f_i, f_j) = s_i delta_ij` at the
    /// membership tolerance.
    pub fn orthonormal(
        base: CVec,
        entries: Vec<(CVec, f64)>,
        sig: Signature,
        tol: &TolerancePolicy,
    ) -> Result<Self, GeometryError> {
        let mut worst = 0.0_f64;
        for (i, (fi, si)) in entries.iter().enumerate() {
            if fi.dim() != sig.ambient_dim() {
                return Err(GeometryError::DimensionMismatch {
                    expected: sig.ambient_dim(),
                    got: fi.dim(),
                });
            }
            if *si != 1.0 && *si != -1.0 {
                return Err(GeometryError::DegenerateMetric {
                    what: "frame sign must be +1 or -1",
                });
            }
            for (j, (fj, _)) in entries.iter().enumerate() {
                let expected = if i == j { *si } else { 0.0 };
                worst = worst.max(math::abs(sig.g(fi, fj) - expected));
            }
        }
        if worst > tol.constraint_tol {
            return Err(GeometryError::PreconditionViolated {
                what: "frame orthonormality",
                residual: worst,
                tol: tol.constraint_tol,
            });
        }
        let (vectors, signs) = entries.into_iter().unzip();
        Ok(Self {
            base,
            vectors,
            signs: Some(signs),
            sig,
        })
    }

    /// A merely spanning frame (no orthonormality assumed); verifies linear
    /// independence over the reals by a Euclidean rank check.
    pub fn spanning(
        base: CVec,
        vectors: Vec<CVec>,
        sig: Signature,
        tol: &TolerancePolicy,
    ) -> Result<Self, GeometryError> {
        for f in &vectors {
            if f.dim() != sig.ambient_dim() {
                return Err(GeometryError::DimensionMismatch {
                    expected: sig.ambient_dim(),
                    got: f.dim(),
                });
            }
        }
        let m = real_matrix(&vectors, sig);
        let rank = euclidean_rank(&m, tol);
        if rank < vectors.len() {
            return Err(GeometryError::DegenerateSpan {
                rank,
                dim: vectors.len(),
            });
        }
        Ok(Self {
            base,
            vectors,
            signs: None,
            sig,
        })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn base(&self) -> &CVec {
        &self.base
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &CVec {
        &self.vectors[k]
    }

    pub fn is_orthonormal(&self) -> bool {
        self.signs.is_some()
    }

    /// Metric signs of an orthonormal frame.
    ///
    /// # Panics
    /// If the frame is merely spanning.
    pub fn signs(&self) -> &[f64] {
        self.signs
            .as_deref()
            .unwrap_or_else(|| panic!("signs requested from a non-orthonormal frame"))
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// Gram matrix `g(f_i, f_j)`; diagonal `±1` exactly when orthonormal.
    pub fn gram(&self) -> DMatrix<f64> {
        if let Some(signs) = &self.signs {
            DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
                if i == j {
                    signs[i]
                } else {
                    0.0
                }
            })
        } else {
            DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
                self.sig.g(&self.vectors[i], &self.vectors[j])
            })
        }
    }

    /// Coordinates of `v` in this frame: signed metric pairings when
    /// orthonormal (components of `v` outside the frame's span that are
    /// `g`-orthogonal to it are silently dropped, which is exactly what
    /// tangential projection wants), Euclidean least squares otherwise.
    pub fn coords_of(&self, v: &CVec, tol: &TolerancePolicy) -> Vec<f64> {
        match &self.signs {
            Some(signs) => self
                .vectors
                .iter()
                .zip(signs)
                .map(|(f, s)| s * self.sig.g(v, f))
                .collect(),
            None => {
                let m = real_matrix(&self.vectors, self.sig);
                let b = DVector::from_vec(v.real_view());
                let svd = m.svd(true, true);
                let x = svd
                    .solve(&b, tol.rank_tol)
                    .unwrap_or_else(|_| unreachable!("SVD with both factors solves"));
                x.iter().cloned().collect()
            }
        }
    }

    /// Linear combination `sum_k coords[k] f_k`.
    pub fn expand(&self, coords: &[f64]) -> CVec {
        debug_assert_eq!(coords.len(), self.dim());
        let mut out = CVec::zero(self.sig.ambient_dim());
        for (x, f) in coords.iter().zip(&self.vectors) {
            out = &out + &f.scale_re(*x);
        }
        out
    }

    /// How far `v` sits from the frame's span: the max-abs coordinate of the
    /// reconstruction error. Zero (numerically) iff the frame resolves `v`.
    pub fn span_residual(&self, v: &CVec, tol: &TolerancePolicy) -> f64 {
        (&self.expand(&self.coords_of(v, tol)) - v).norm_inf()
    }

    /// Matrix of a linear operator in this frame: column `a` holds the
    /// coordinates of `op(f_a)`.
    pub fn operator_matrix(
        &self,
        mut op: impl FnMut(&CVec) -> CVec,
        tol: &TolerancePolicy,
    ) -> DMatrix<f64> {
        let k = self.dim();
        let mut m = DMatrix::zeros(k, k);
        for a in 0..k {
            let coords = self.coords_of(&op(&self.vectors[a]), tol);
            for (r, x) in coords.iter().enumerate() {
                m[(r, a)] = *x;
            }
        }
        m
    }
}

fn real_matrix(vectors: &[CVec], sig: Signature) -> DMatrix<f64> {
    let rows = 2 * sig.ambient_dim();
    let cols = vectors.len();
    let mut m = DMatrix::zeros(rows, cols);
    for (c, v) in vectors.iter().enumerate() {
        for (r, x) in v.real_view().into_iter().enumerate() {
            m[(r, c)] = x;
        }
    }
    m
}
