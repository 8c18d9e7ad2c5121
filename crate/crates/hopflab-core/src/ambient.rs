//! Indefinite hermitian linear algebra on `C^{n+1}` and the curvature algebra
//! of the circle quotient.
//!
//! Conventions, fixed once and used by every other module:
//!
//! - The hermitian product puts the minus signs on the *first* `p` complex
//!   axes: `g_C(z, w) = -sum_{j<p} z_j conj(w_j) + sum_{j>=p} z_j conj(w_j)`
//!   (0-based), conjugate-linear in the second slot. The real metric is
//!   `g = Re g_C`, of index `2p`.
//! - The complex structure is `J = multiplication by i` upstairs; on the
//!   quotient it acts through horizontal lifts. (The quotient only pins `J`
//!   up to the lift convention; this choice is recorded here.)
//! - The hyperquadric is `{ g(z,z) = 1 }`; the position vector is a unit
//!   spacelike normal with shape operator `-Id`, and the fiber direction of
//!   the circle action at `z` is `i z`.

use alloc::vec::Vec;
use core::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::GeometryError;
use crate::math;
use crate::tol::TolerancePolicy;

pub type C64 = Complex<f64>;

/// Dimensions of the ambient model: complex projective dimension `n` and
/// index parameter `p` (the real metric index is `2p`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    n: usize,
    p: usize,
}

impl Signature {
    /// Requires `n >= 2` and `1 <= p <= n-1`: outside that range the quotient
    /// metric is definite (or the quadric empty) and none of the families
    /// below exist.
    pub fn new(n: usize, p: usize) -> Result<Self, GeometryError> {
        if n < 2 || p == 0 || p > n - 1 {
            return Err(GeometryError::InvalidSignature { n, p });
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of complex coordinates, `n + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    /// Metric weight of complex axis `j` (0-based): `-1` on the first `p`
    /// axes, `+1` after.
    pub fn metric_sign(&self, j: usize) -> f64 {
        if j < self.p {
            -1.0
        } else {
            1.0
        }
    }

    /// The hermitian product; conjugate-linear in `w`.
    ///
    /// Dimensions must match the signature (checked in debug builds; the
    /// fallible wrapper is [`herm_product`]).
    pub fn herm(&self, z: &CVec, w: &CVec) -> C64 {
        debug_assert_eq!(z.dim(), self.ambient_dim());
        debug_assert_eq!(w.dim(), self.ambient_dim());
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..z.dim() {
            acc += self.metric_sign(j) * z[j] * w[j].conj();
        }
        acc
    }

    /// The real metric `g = Re g_C`.
    pub fn g(&self, z: &CVec, w: &CVec) -> f64 {
        self.herm(z, w).re
    }

    /// Componentwise metric weighting: coordinate `j` scaled by its sign.
    /// With this, `g(x, w) = <x, weighted(w)>_E` for the Euclidean pairing,
    /// which is how constraint gradients are assembled.
    pub fn weighted(&self, v: &CVec) -> CVec {
        CVec::new(
            v.coords()
                .iter()
                .enumerate()
                .map(|(j, c)| self.metric_sign(j) * c)
                .collect(),
        )
    }
}

/// A point or tangent vector of the ambient complex space: `n + 1` complex
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec {
    coords: Vec<C64>,
}

impl CVec {
    pub fn new(coords: Vec<C64>) -> Self {
        Self { coords }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            coords: alloc::vec![C64::new(0.0, 0.0); dim],
        }
    }

    /// Standard basis vector `e_j`.
    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = Self::zero(dim);
        v.coords[j] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_reals(re: &[f64]) -> Self {
        Self {
            coords: re.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [C64] {
        &mut self.coords
    }

    /// Componentwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Multiplication by `i` (the ambient complex structure).
    pub fn mul_i(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| C64::new(0.0, 1.0) * c).collect(),
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| a * c).collect(),
        }
    }

    pub fn scale_re(&self, a: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| a * c).collect(),
        }
    }

    /// Interleaved real coordinates `[re z_0, im z_0, re z_1, ...]`.
    pub fn real_view(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for c in &self.coords {
            out.push(c.re);
            out.push(c.im);
        }
        out
    }

    pub fn from_real_view(view: &[f64]) -> Self {
        debug_assert_eq!(view.len() % 2, 0);
        Self {
            coords: view.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect(),
        }
    }

    /// Euclidean (signature-blind) hermitian pairing, real part:
    /// `Re sum_j u_j conj(v_j)`.
    pub fn dot_e(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    /// Euclidean 2-norm over the real view.
    pub fn norm_e(&self) -> f64 {
        math::sqrt(self.dot_e(self))
    }

    /// Max absolute real coordinate.
    pub fn norm_inf(&self) -> f64 {
        self.coords
            .iter()
            .map(|c| math::abs(c.re).max(math::abs(c.im)))
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for CVec {
    type Output = C64;
    fn index(&self, j: usize) -> &C64 {
        &self.coords[j]
    }
}

impl Add for &CVec {
    type Output = CVec;
    fn add(self, rhs: &CVec) -> CVec {
        debug_assert_eq!(self.dim(), rhs.dim());
        CVec::new(
            self.coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &CVec {
    type Output = CVec;
    fn sub(self, rhs: &CVec) -> CVec {
        debug_assert_eq!(self.dim(), rhs.dim());
        CVec::new(
            self.coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Neg for &CVec {
    type Output = CVec;
    fn neg(self) -> CVec {
        self.scale_re(-1.0)
    }
}

impl Mul<f64> for &CVec {
    type Output = CVec;
    fn mul(self, a: f64) -> CVec {
        self.scale_re(a)
    }
}

/// Causal character of a vector under the real metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CausalClass {
    Spacelike,
    Timelike,
    Null,
}

/// Fallible, dimension-checked hermitian product.
pub fn herm_product(z: &CVec, w: &CVec, sig: Signature) -> Result<C64, GeometryError> {
    for v in [z, w] {
        if v.dim() != sig.ambient_dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: sig.ambient_dim(),
                got: v.dim(),
            });
        }
    }
    Ok(sig.herm(z, w))
}

/// Fallible real metric, `Re` of [`herm_product`].
pub fn real_metric(z: &CVec, w: &CVec, sig: Signature) -> Result<f64, GeometryError> {
    Ok(herm_product(z, w, sig)?.re)
}

/// The ambient complex structure: multiplication by `i`.
pub fn apply_j(v: &CVec) -> CVec {
    v.mul_i()
}

/// Componentwise complex conjugation (used by the quadric polynomial
/// `Q(z) = g_C(z, conj z)`).
pub fn conjugate_vector(v: &CVec) -> CVec {
    v.conj()
}

/// Classifies `v` by the sign of `g(v, v)` at the membership tolerance.
pub fn causal_character(v: &CVec, sig: Signature, tol: &TolerancePolicy) -> CausalClass {
    let norm = sig.g(v, v);
    if norm > tol.constraint_tol {
        CausalClass::Spacelike
    } else if norm < -tol.constraint_tol {
        CausalClass::Timelike
    } else {
        CausalClass::Null
    }
}

/// Hyperquadric geodesic `cos(s) z + sin(s) v` through `z` with unit spacelike
/// direction `v` orthogonal to `z`; stays on the hyperquadric for all `s`.
pub fn sphere_geodesic(
    z: &CVec,
    v: &CVec,
    s: f64,
    sig: Signature,
    tol: &TolerancePolicy,
) -> Result<CVec, GeometryError> {
    let checks = [
        ("geodesic base point is on the hyperquadric", sig.g(z, z) - 1.0),
        ("geodesic direction is unit spacelike", sig.g(v, v) - 1.0),
        ("geodesic direction is orthogonal to the base", sig.g(z, v)),
    ];
    for (what, residual) in checks {
        if math::abs(residual) > tol.constraint_tol {
            return Err(GeometryError::PreconditionViolated {
                what,
                residual: math::abs(residual),
                tol: tol.constraint_tol,
            });
        }
    }
    Ok(&z.scale_re(math::cos(s)) + &v.scale_re(math::sin(s)))
}

/// Curvature tensor of the quotient (constant holomorphic sectional
/// curvature 4), evaluated on horizontal representatives:
///
/// `R(X,Y)Z = g(Y,Z)X - g(X,Z)Y + g(JY,Z)JX - g(JX,Z)JY + 2 g(X,JY) JZ`.
pub fn curvature_bar(x: &CVec, y: &CVec, z: &CVec, sig: Signature) -> CVec {
    let jx = x.mul_i();
    let jy = y.mul_i();
    let jz = z.mul_i();
    let mut out = x.scale_re(sig.g(y, z));
    out = &out - &y.scale_re(sig.g(x, z));
    out = &out + &jx.scale_re(sig.g(&jy, z));
    out = &out - &jy.scale_re(sig.g(&jx, z));
    out = &out + &jz.scale_re(2.0 * sig.g(x, &jy));
    out
}

/// Tests whether `w = e^{i theta} z` for some phase, i.e. whether both points
/// project to the same point of the quotient.
///
/// The candidate phase is read off `g_C(w, z)` (equal to `e^{i theta}` on the
/// hyperquadric when the points match); if that pairing is numerically zero,
/// which the indefinite metric allows even for genuinely equivalent-adjacent
/// points, a coarse 256-sample phase grid decides.
pub fn s1_equivalent(z: &CVec, w: &CVec, sig: Signature, tol: &TolerancePolicy) -> bool {
    let distance_at = |theta: f64| -> f64 {
        let rot = z.scale(C64::new(math::cos(theta), math::sin(theta)));
        (w - &rot).norm_e()
    };
    let pairing = sig.herm(w, z);
    let magnitude = math::sqrt(pairing.norm_sqr());
    if magnitude >= tol.constraint_tol {
        let theta = math::atan2(pairing.im, pairing.re);
        distance_at(theta) <= tol.constraint_tol
    } else {
        let samples = 256;
        let mut best = f64::INFINITY;
        for k in 0..samples {
            let theta = core::f64::consts::TAU * (k as f64) / (samples as f64);
            best = best.min(distance_at(theta));
        }
        best <= tol.constraint_tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sig21() -> Signature {
        Signature::new(2, 1).unwrap()
    }

    #[test]
    fn signature_bounds() {
        assert!(Signature::new(1, 1).is_err());
        assert!(Signature::new(4, 0).is_err());
        assert!(Signature::new(4, 4).is_err());
        assert!(Signature::new(4, 2).is_ok());
    }

    #[test]
    fn herm_axis_signs() {
        let sig = sig21();
        let e0 = CVec::basis(3, 0);
        let e1 = CVec::basis(3, 1);
        assert_eq!(sig.herm(&e0, &e0), c(-1.0, 0.0));
        assert_eq!(sig.herm(&e1, &e1), c(1.0, 0.0));
    }

    #[test]
    fn herm_hand_expansion() {
        // z = (1, i, 0), w = (i, 1, 0):
        // -z_0 conj(w_0) + z_1 conj(w_1) = -(1)(-i) + (i)(1) = 2i.
        let sig = sig21();
        let z = CVec::new(alloc::vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let w = CVec::new(alloc::vec![c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(sig.herm(&z, &w), c(0.0, 2.0));
    }

    #[test]
    fn herm_dimension_check() {
        let sig = sig21();
        let short = CVec::basis(1, 0);
        let ok = CVec::basis(3, 0);
        assert!(matches!(
            herm_product(&short, &ok, sig),
            Err(GeometryError::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn j_basics() {
        let e0 = CVec::basis(2, 0);
        assert_eq!(apply_j(&e0), CVec::new(alloc::vec![c(0.0, 1.0), c(0.0, 0.0)]));
        let v = CVec::new(alloc::vec![c(0.3, -1.2), c(2.0, 0.7)]);
        let jjv = apply_j(&apply_j(&v));
        assert_eq!(jjv, -&v);
    }

    #[test]
    fn conjugation_is_an_involution() {
        let v = CVec::new(alloc::vec![c(1.0, 2.0), c(-0.5, 0.25)]);
        assert_eq!(conjugate_vector(&conjugate_vector(&v)), v);
        assert_eq!(
            conjugate_vector(&CVec::new(alloc::vec![c(1.0, 0.0), c(0.0, 1.0)])),
            CVec::new(alloc::vec![c(1.0, 0.0), c(0.0, -1.0)])
        );
    }

    #[test]
    fn causal_classes() {
        let sig = sig21();
        let tol = TolerancePolicy::default();
        let e0 = CVec::basis(3, 0);
        let e1 = CVec::basis(3, 1);
        let null = &e0 + &e1;
        assert_eq!(causal_character(&e0, sig, &tol), CausalClass::Timelike);
        assert_eq!(causal_character(&e1, sig, &tol), CausalClass::Spacelike);
        assert_eq!(causal_character(&null, sig, &tol), CausalClass::Null);
    }

    #[test]
    fn geodesic_stays_on_hyperquadric() {
        let sig = sig21();
        let tol = TolerancePolicy::default();
        let z = CVec::basis(3, 1);
        let v = CVec::new(alloc::vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        assert_eq!(sphere_geodesic(&z, &v, 0.0, sig, &tol).unwrap(), z);
        for k in 0..20 {
            let s = -core::f64::consts::PI + 0.1 * (k as f64);
            let gamma = sphere_geodesic(&z, &v, s, sig, &tol).unwrap();
            assert_abs_diff_eq!(sig.g(&gamma, &gamma), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn geodesic_rejects_bad_directions() {
        let sig = sig21();
        let tol = TolerancePolicy::default();
        let z = CVec::basis(3, 1);
        let timelike = CVec::basis(3, 0);
        assert!(sphere_geodesic(&z, &timelike, 0.5, sig, &tol).is_err());
    }

    #[test]
    fn holomorphic_sectional_curvature_is_four() {
        // Algebraic identity: for any unit spacelike X, R(X, JX)JX = 4X.
        let sig = Signature::new(2, 1).unwrap();
        let x = CVec::new(alloc::vec![c(0.4, -0.3), c(0.9, 0.1), c(0.2, 0.55)]);
        let norm = sig.g(&x, &x);
        assert!(norm > 0.0, "test vector must be spacelike");
        let x = x.scale_re(1.0 / math::sqrt(norm));
        let jx = apply_j(&x);
        let r = curvature_bar(&x, &jx, &jx, sig);
        let defect = (&r - &x.scale_re(4.0)).norm_inf();
        assert!(defect <= 1e-12, "defect {defect}");
    }

    #[test]
    fn curvature_is_antisymmetric_in_x_y() {
        let sig = Signature::new(2, 1).unwrap();
        let x = CVec::new(alloc::vec![c(0.1, 0.2), c(-0.4, 0.9), c(0.3, -0.8)]);
        let y = CVec::new(alloc::vec![c(1.1, -0.2), c(0.5, 0.3), c(-0.6, 0.4)]);
        let z = CVec::new(alloc::vec![c(-0.7, 0.8), c(0.2, -0.9), c(1.2, 0.1)]);
        let lhs = curvature_bar(&x, &y, &z, sig);
        let rhs = curvature_bar(&y, &x, &z, sig);
        assert!((&lhs + &rhs).norm_inf() <= 1e-12);
    }

    #[test]
    fn phase_equivalence() {
        let sig = sig21();
        let tol = TolerancePolicy::default();
        let z = CVec::basis(3, 1);
        assert!(s1_equivalent(&z, &z.mul_i(), sig, &tol));
        assert!(!s1_equivalent(&z, &z.scale_re(2.0), sig, &tol));
        for k in 0..100 {
            let theta = 0.0628 * (k as f64) + 0.01;
            let w = z.scale(c(math::cos(theta), math::sin(theta)));
            assert!(s1_equivalent(&z, &w, sig, &tol), "theta {theta}");
        }
    }

    #[test]
    fn real_view_round_trip() {
        let v = CVec::new(alloc::vec![c(1.5, -2.5), c(0.0, 3.25)]);
        assert_eq!(CVec::from_real_view(&v.real_view()), v);
        assert_eq!(v.real_view(), alloc::vec![1.5, -2.5, 0.0, 3.25]);
    }
}
