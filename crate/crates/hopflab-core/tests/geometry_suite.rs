//! Full-volume verification of the catalog: every closed-form claim the
//! library makes is checked here against independent numerics, at the sample
//! counts the library is expected to sustain (desk scale `n = 4`, `p = 2`).

use hopflab_core::ambient::{apply_j, CVec};
use hopflab_core::catalog::{
    q_polynomial, sample_quadric_point, tube_point, Family, HypersurfaceSpec,
    PredictedInvariants,
};
use hopflab_core::frame::Frame;
use hopflab_core::spectral::{
    classify, commutator_killing, congruence_isometry, curvature_identities, hat_lambda,
    isometry_invariance, lemma_aphix_residual, operator_spectrum, spectral_summary,
    ClassificationTag,
};
use hopflab_core::weingarten::{
    codazzi_residual, descend, numeric_weingarten, reeb_derivative_residual, structure_tensors,
};
use hopflab_core::{GeometryError, Signature, TolerancePolicy};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sig42() -> Signature {
    Signature::new(4, 2).expect("n = 4, p = 2 is a valid indefinite signature")
}

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn spec(family: Family) -> HypersurfaceSpec {
    HypersurfaceSpec::new(sig42(), family).expect("catalog members are feasible at n = 4, p = 2")
}

/// A catalog member together with its closed-form Hopf curvature and the
/// descended spectrum `(eigenvalue, multiplicity)` in ascending order. These
/// constants were frozen from hand calculations and an independent
/// finite-difference oracle before the analytic code paths existed.
struct FamilyCase {
    spec: HypersurfaceSpec,
    mu: f64,
    clusters: Vec<(f64, usize)>,
}

fn nondegenerate_catalog() -> Vec<FamilyCase> {
    let s2 = 2.0f64.sqrt();
    let s3 = 3.0f64.sqrt();
    let th1 = 1.0f64.tanh();
    let th_half = 0.5f64.tanh();
    vec![
        FamilyCase {
            spec: spec(Family::TypeA { q: 1, m: 4, t: 0.75 }),
            mu: 2.0 / s3,
            clusters: vec![(-1.0 / s3, 4), (2.0 / s3, 1), (s3, 2)],
        },
        FamilyCase {
            spec: spec(Family::TypeA { q: 1, m: 4, t: 2.0 }),
            mu: 3.0 / s2,
            clusters: vec![(1.0 / s2, 4), (s2, 2), (3.0 / s2, 1)],
        },
        FamilyCase {
            spec: spec(Family::TypeB { t: 0.5 }),
            mu: -2.0,
            clusters: vec![(-2.0, 1), (1.0 - s2, 3), (1.0 + s2, 3)],
        },
        FamilyCase {
            spec: spec(Family::TypeB { t: 4.0 }),
            mu: s3,
            clusters: vec![(1.0 / s3, 3), (s3, 4)],
        },
        FamilyCase {
            spec: spec(Family::TypeB { t: 1.0f64.cosh().powi(2) }),
            mu: 2.0 * th1,
            clusters: vec![(th_half, 3), (2.0 * th1, 1), (1.0 / th_half, 3)],
        },
        FamilyCase {
            spec: spec(Family::Horosphere { t: 1.0 }),
            mu: 2.0,
            clusters: vec![(1.0, 6), (2.0, 1)],
        },
    ]
}

/// Unit-Euclidean-norm random combination of the frame's vectors.
fn random_tangent(rng: &mut ChaCha8Rng, frame: &Frame) -> CVec {
    loop {
        let coords: Vec<f64> = (0..frame.dim())
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        let v = frame.expand(&coords);
        let norm = v.norm_e();
        if norm > 0.3 {
            return v.scale_re(1.0 / norm);
        }
    }
}

fn bounded_rank(m: &DMatrix<f64>) -> usize {
    let svd = m
        .clone()
        .try_svd(false, false, 1e-13, 100_000)
        .expect("singular value iteration converges with a bounded budget");
    let largest = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    svd.singular_values
        .iter()
        .filter(|s| **s > 1e-7 * largest.max(1.0))
        .count()
}

/// Collapses the dee-level prediction plus the Hopf eigenvalue into one
/// ascending full-spectrum table, merging values closer than 1e-9.
fn merged_prediction(pred: &PredictedInvariants) -> Vec<(f64, usize)> {
    let mut rows = pred.eigenvalues.clone();
    rows.push((pred.mu, 1));
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
    let mut out: Vec<(f64, usize)> = Vec::new();
    for (value, mult) in rows {
        match out.last_mut() {
            Some((last, m)) if (value - *last).abs() <= 1e-9 => *m += mult,
            _ => out.push((value, mult)),
        }
    }
    out
}

#[test]
fn finite_differences_agree_with_the_closed_form_operator() {
    let tol = tol();
    for (fi, case) in nondegenerate_catalog().iter().enumerate() {
        for pt in 0..10 {
            let z = case
                .spec
                .sample_point(1_000 + (fi * 31 + pt) as u64)
                .expect("catalog members sample points at every seed used here");
            let frames = case.spec.tangent_and_dee_frames(&z, &tol).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5_000 + (fi * 31 + pt) as u64);
            for _ in 0..50 {
                let x = random_tangent(&mut rng, &frames.full);
                let num = numeric_weingarten(&case.spec, &z, &x, 1e-5, &tol).unwrap();
                let ana = case.spec.analytic_weingarten(&z, &x, &tol).unwrap();
                let gap = (&num - &ana).norm_inf();
                assert!(
                    gap <= 1e-6,
                    "{}: finite differences disagree with the closed form by {gap:.3e}",
                    case.spec.family().name()
                );
            }
        }
    }
}

#[test]
fn finite_differences_converge_at_second_order() {
    let tol = tol();
    for (fi, case) in nondegenerate_catalog().iter().enumerate() {
        let z = case.spec.sample_point(123 + fi as u64).unwrap();
        let frames = case.spec.tangent_and_dee_frames(&z, &tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(900 + fi as u64);
        let dirs: Vec<CVec> = (0..5).map(|_| random_tangent(&mut rng, &frames.full)).collect();
        let error_at = |h: f64| -> f64 {
            dirs.iter()
                .map(|x| {
                    let num = numeric_weingarten(&case.spec, &z, x, h, &tol).unwrap();
                    let ana = case.spec.analytic_weingarten(&z, x, &tol).unwrap();
                    (&num - &ana).norm_inf()
                })
                .fold(0.0, f64::max)
        };
        let coarse = error_at(1e-3);
        let fine = error_at(5e-4);
        let order = (coarse / fine).log2();
        assert!(
            (1.8..=2.2).contains(&order),
            "{}: convergence order {order:.3} falls outside [1.8, 2.2]",
            case.spec.family().name()
        );
    }
}

#[test]
fn hopf_curvature_is_constant_across_each_family() {
    let tol = tol();
    for (fi, case) in nondegenerate_catalog().iter().enumerate() {
        let mut mus = Vec::with_capacity(100);
        for pt in 0..100 {
            let z = case
                .spec
                .sample_point(3_000 + (fi * 211 + pt) as u64)
                .unwrap();
            let w = descend(&case.spec, &z, &tol).unwrap();
            assert!(
                w.hopf_residual <= 1e-8,
                "{}: the structure vector drifts from the eigenspace by {:.3e}",
                case.spec.family().name(),
                w.hopf_residual
            );
            assert!(
                (w.mu - case.mu).abs() <= 1e-8,
                "{}: Hopf curvature {} differs from the closed form {}",
                case.spec.family().name(),
                w.mu,
                case.mu
            );
            mus.push(w.mu);
        }
        let mean = mus.iter().sum::<f64>() / mus.len() as f64;
        let variance = mus.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / mus.len() as f64;
        let stddev = variance.sqrt();
        assert!(
            stddev <= 1e-8,
            "{}: Hopf curvature scatters with stddev {stddev:.3e}",
            case.spec.family().name()
        );
    }
}

#[test]
fn descended_spectra_match_the_frozen_tables() {
    let tol = tol();
    for (fi, case) in nondegenerate_catalog().iter().enumerate() {
        for pt in 0..3 {
            let z = case.spec.sample_point(7_000 + (fi * 13 + pt) as u64).unwrap();
            let w = descend(&case.spec, &z, &tol).unwrap();
            let summary = spectral_summary(&w.matrix, &tol);
            assert!(
                summary.diagonalizable,
                "{}: non-degenerate operator should be diagonalizable",
                case.spec.family().name()
            );
            assert_eq!(
                summary.clusters.len(),
                case.clusters.len(),
                "{}: cluster count mismatch: {:?}",
                case.spec.family().name(),
                summary.clusters
            );
            for ((value, alg, geo), (expected, mult)) in
                summary.clusters.iter().zip(&case.clusters)
            {
                assert!(
                    (value - expected).abs() <= 1e-7,
                    "{}: eigenvalue {value} differs from {expected}",
                    case.spec.family().name()
                );
                assert_eq!(alg, mult, "{}: multiplicity", case.spec.family().name());
                assert_eq!(geo, mult, "{}: geometric multiplicity", case.spec.family().name());
            }
        }

        // The catalog's own closed-form prediction must collapse to the same
        // frozen table once the Hopf eigenvalue is merged in.
        let pred = case.spec.predicted_invariants().unwrap();
        assert!((pred.mu - case.mu).abs() <= 1e-12);
        let merged = merged_prediction(&pred);
        assert_eq!(merged.len(), case.clusters.len());
        for ((pv, pm), (ev, em)) in merged.iter().zip(&case.clusters) {
            assert!((pv - ev).abs() <= 1e-12);
            assert_eq!(pm, em);
        }
        let expects_caveat = matches!(case.spec.family(), Family::TypeB { t } if *t < 1.0);
        assert_eq!(pred.orientation_caveat, expects_caveat);
    }
}

#[test]
fn degenerate_family_has_a_null_normal_and_a_jordan_block() {
    let tol = tol();
    let dg = spec(Family::Degenerate);
    for pt in 0..3 {
        let z = dg.sample_point(11_000 + pt).unwrap();
        let frames = dg.tangent_and_dee_frames(&z, &tol).unwrap();
        let normal = &frames.normal;
        assert!(frames.epsilon.abs() <= 1e-12, "normal should be null");
        assert!(sig42().g(normal, normal).abs() <= 1e-12);

        // The three closed-form actions of the operator on the distinguished
        // directions: doubles the null normal, kills the structure vector,
        // and sends the vertical direction to the structure vector.
        let a_normal = dg.analytic_weingarten(&z, normal, &tol).unwrap();
        assert!((&a_normal - &normal.scale_re(2.0)).norm_inf() <= 1e-10);
        let a_xi = dg.analytic_weingarten(&z, &frames.xi, &tol).unwrap();
        assert!(a_xi.norm_inf() <= 1e-10);
        let j_chi = apply_j(&frames.chi);
        let a_vertical = dg.analytic_weingarten(&z, &j_chi, &tol).unwrap();
        assert!((&a_vertical - &frames.xi).norm_inf() <= 1e-10);

        let summary = operator_spectrum(&dg, &z, &tol).unwrap();
        assert!(!summary.diagonalizable, "the lift carries a Jordan block");
        assert_eq!(summary.clusters.len(), 2, "clusters: {:?}", summary.clusters);
        let (zero_value, zero_alg, zero_geo) = summary.clusters[0];
        assert!(zero_value.abs() <= 1e-4);
        assert_eq!(zero_alg, 5);
        assert_eq!(zero_geo, 3, "geometric multiplicity of 0 is n - 1");
        assert!(zero_geo < zero_alg);
        let (two_value, two_alg, two_geo) = summary.clusters[1];
        assert!((two_value - 2.0).abs() <= 1e-8);
        assert_eq!((two_alg, two_geo), (3, 3));

        // Rank chain of the lifted operator pins the Jordan layout: one
        // block of size 3 and two of size 1 over the eigenvalue 0.
        let matrix = frames.full.operator_matrix(
            |v| dg.analytic_weingarten(&z, v, &tol).unwrap(),
            &tol,
        );
        let m2 = &matrix * &matrix;
        let m3 = &m2 * &matrix;
        assert_eq!(bounded_rank(&matrix), 5);
        assert_eq!(bounded_rank(&m2), 4);
        assert_eq!(bounded_rank(&m3), 3);
    }
}

#[test]
fn transfer_law_binds_every_measured_eigenvalue() {
    let tol = tol();
    for (fi, case) in nondegenerate_catalog().iter().enumerate() {
        for pt in 0..10 {
            let z = case.spec.sample_point(13_000 + (fi * 41 + pt) as u64).unwrap();
            let w = descend(&case.spec, &z, &tol).unwrap();
            let st = structure_tensors(&case.spec, &z, &tol).unwrap();
            let residual = lemma_aphix_residual(&w, &st.phi, &tol);
            assert!(
                residual <= 1e-7,
                "{}: transfer law residual {residual:.3e}",
                case.spec.family().name()
            );
        }
    }
}

#[test]
fn eigenvalue_transfer_table_holds_for_random_parameters() {
    // Each row states: for the given Hopf curvature mu(r) and principal
    // curvature lambda(r, theta), the transfer (lambda mu + 2 eps)/(2 lambda
    // - mu) lands on the paired curvature at the reflected radius.
    type Row = (f64, fn(f64) -> f64, fn(f64) -> f64, fn(f64) -> f64);
    let rows: Vec<Row> = vec![
        (1.0, |r| 2.0 / (2.0 * r).tan(), |x| 1.0 / x.tan(), |x| 1.0 / x.tan()),
        (1.0, |r| 2.0 * (2.0 * r).tan(), |x| x.tan(), |x| -1.0 / x.tan()),
        (-1.0, |r| 2.0 / (2.0 * r).tanh(), |x| 1.0 / x.tanh(), |x| 1.0 / x.tanh()),
        (-1.0, |r| 2.0 / (2.0 * r).tanh(), |x| x.tanh(), |x| x.tanh()),
        (-1.0, |r| 2.0 * (2.0 * r).tanh(), |x| 1.0 / x.tanh(), |x| x.tanh()),
        (-1.0, |r| 2.0 * (2.0 * r).tanh(), |x| x.tanh(), |x| 1.0 / x.tanh()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x7472_616e);
    for _ in 0..10_000 {
        // Windows keep every trig argument away from poles: r + theta stays
        // below pi/2 for the circular rows and r - theta stays above 0.05.
        let r = 0.2 + 0.5 * rng.random::<f64>();
        let theta = 0.01 + 0.14 * rng.random::<f64>();
        for (epsilon, mu_of, lambda_of, hat_of) in &rows {
            let mu = mu_of(r);
            let lambda = lambda_of(r + theta);
            let expected = hat_of(r - theta);
            let hat = hat_lambda(lambda, mu, *epsilon, 1e-12)
                .expect("sampled parameters avoid the exceptional branch");
            assert!(
                (hat - expected).abs() <= 1e-9,
                "transfer row (eps {epsilon}) at r {r}, theta {theta}: {hat} vs {expected}"
            );
        }
    }
}

#[test]
fn exceptional_transfer_arises_only_for_unit_timelike_curvature() {
    // On the branch mu = 2 lambda the transfer denominator vanishes; the
    // law then forces (lambda mu + 2 eps) = 0, which over the reals happens
    // exactly when eps = -1 and |lambda| = 1.
    for (lambda, epsilon, consistent) in [
        (1.0, -1.0, true),
        (-1.0, -1.0, true),
        (0.5, -1.0, false),
        (-2.2, -1.0, false),
        (1.0, 1.0, false),
        (-0.3, 1.0, false),
        (0.0, 1.0, false),
    ] {
        match hat_lambda(lambda, 2.0 * lambda, epsilon, 1e-12) {
            Err(GeometryError::ExceptionalTransfer { consistent: c, .. }) => {
                assert_eq!(c, consistent, "lambda {lambda}, epsilon {epsilon}");
            }
            other => panic!("expected the exceptional branch, got {other:?}"),
        }
    }
    // Away from the branch the transfer simply evaluates.
    assert!(hat_lambda(2.0, 1.0, 1.0, 1e-12).is_ok());
}

#[test]
fn almost_contact_identities_hold_on_the_catalog() {
    let tol = tol();
    for (fi, case) in nondegenerate_catalog().iter().enumerate() {
        for pt in 0..4 {
            let seed = 17_000 + (fi * 19 + pt) as u64;
            let z = case.spec.sample_point(seed).unwrap();
            let st = structure_tensors(&case.spec, &z, &tol).unwrap();
            let frames = case.spec.tangent_and_dee_frames(&z, &tol).unwrap();
            let gram = frames
                .horizontal
                .as_ref()
                .expect("non-degenerate members carry a horizontal frame")
                .gram();
            let dim = gram.nrows();
            let name = case.spec.family().name();

            let identity = DMatrix::<f64>::identity(dim, dim);
            let phi2 = &st.phi * &st.phi;
            let reeb_outer = &st.xi * st.eta.transpose();
            let phi_square = (&phi2 + &identity - &(reeb_outer * st.epsilon)).amax();
            assert!(phi_square <= 1e-10, "{name}: phi^2 + I - eps xi eta^T = {phi_square:.3e}");

            let phi_xi = (&st.phi * &st.xi).amax();
            assert!(phi_xi <= 1e-10, "{name}: phi xi = {phi_xi:.3e}");

            let eta_xi = (st.eta.dot(&st.xi) - st.epsilon).abs();
            assert!(eta_xi <= 1e-10, "{name}: eta(xi) - eps = {eta_xi:.3e}");

            let g_phi = &gram * &st.phi;
            let skew = (&g_phi + &g_phi.transpose()).amax();
            assert!(skew <= 1e-10, "{name}: phi skew-symmetry defect {skew:.3e}");

            let push = st.phi.transpose() * &gram * &st.phi;
            let eta_outer = &st.eta * st.eta.transpose();
            let compatibility = (&push - &gram + &(eta_outer * st.epsilon)).amax();
            assert!(
                compatibility <= 1e-10,
                "{name}: g(phi X, phi Y) defect {compatibility:.3e}"
            );

            let reeb = reeb_derivative_residual(&case.spec, &z, 4, seed + 7, &tol).unwrap();
            assert!(reeb <= 1e-4, "{name}: Reeb derivative residual {reeb:.3e}");

            let codazzi = codazzi_residual(&case.spec, &z, 4, seed + 11, &tol).unwrap();
            assert!(codazzi <= 1e-3, "{name}: Codazzi residual {codazzi:.3e}");
        }
    }
}

#[test]
fn gauss_ricci_and_holomorphic_identities_hold() {
    let tol = tol();
    for (fi, case) in nondegenerate_catalog().iter().enumerate() {
        for pt in 0..2 {
            let z = case.spec.sample_point(19_000 + (fi * 7 + pt) as u64).unwrap();
            let w = descend(&case.spec, &z, &tol).unwrap();
            let st = structure_tensors(&case.spec, &z, &tol).unwrap();
            let report = curvature_identities(&w, &st.phi, &st.eta, &st.xi, st.epsilon, 4, &tol);
            let name = case.spec.family().name();
            assert!(
                report.ricci_residual <= 1e-8,
                "{name}: Ricci residual {:.3e}",
                report.ricci_residual
            );
            assert!(
                report.symmetry_residual <= 1e-8,
                "{name}: curvature symmetry residual {:.3e}",
                report.symmetry_residual
            );
            assert!(
                report.holomorphic_residual <= 1e-10,
                "{name}: holomorphic sectional curvature residual {:.3e}",
                report.holomorphic_residual
            );
        }
    }
}

#[test]
fn tube_law_traces_the_quadric_pencil() {
    let tol = tol();
    let sig = sig42();
    let dg = spec(Family::Degenerate);
    for seed in [5_u64, 6] {
        let z0 = sample_quadric_point(sig, seed).unwrap();
        for i in 0..10 {
            let theta = core::f64::consts::TAU * i as f64 / 10.0;
            for j in 0..10 {
                let s = 0.07 + (core::f64::consts::FRAC_PI_2 - 0.14) * j as f64 / 9.0;
                let z = tube_point(&z0, theta, s, sig, &tol).unwrap();
                let on_sphere = (sig.g(&z, &z) - 1.0).abs();
                assert!(on_sphere <= 1e-10, "tube leaves the hyperquadric: {on_sphere:.3e}");
                let q = q_polynomial(&z, sig);
                let law = (q.norm_sqr() - (2.0 * s).sin().powi(2)).abs();
                assert!(law <= 1e-10, "tube law residual {law:.3e} at s = {s}");
            }
            // The quarter-turn slice lands exactly on the degenerate member.
            let z = tube_point(&z0, theta, core::f64::consts::FRAC_PI_4, sig, &tol).unwrap();
            let (family, quadric) = dg.defining_residual(&z);
            assert!(family.abs() <= 1e-10 && quadric.abs() <= 1e-10);
        }
    }
}

#[test]
fn classifier_names_the_single_curvature_families() {
    let tol = tol();
    let radius_circular = core::f64::consts::FRAC_PI_6;
    let radius_hyperbolic = (1.0 / 2.0f64.sqrt()).atanh();
    let grow = "m = n + q + 1 (q <= 1)";
    let shrink = "m = q + 2";
    let witnesses: Vec<(Family, ClassificationTag, Option<f64>, Option<&str>)> = vec![
        (
            Family::TypeA { q: 0, m: 5, t: 0.75 },
            ClassificationTag::APlusClass1,
            Some(radius_circular),
            Some(grow),
        ),
        (
            Family::TypeA { q: 2, m: 4, t: 0.75 },
            ClassificationTag::APlusClass2,
            Some(radius_circular),
            Some(shrink),
        ),
        (
            Family::TypeA { q: 0, m: 5, t: 2.0 },
            ClassificationTag::AMinusClass3,
            Some(radius_hyperbolic),
            Some(grow),
        ),
        (
            Family::TypeA { q: 1, m: 3, t: 2.0 },
            ClassificationTag::AMinusClass4,
            Some(radius_hyperbolic),
            Some(shrink),
        ),
        (
            Family::Horosphere { t: 1.0 },
            ClassificationTag::Horosphere,
            None,
            None,
        ),
    ];
    for (wi, (family, tag, radius, qm)) in witnesses.into_iter().enumerate() {
        let member = spec(family);
        for pt in 0..2 {
            let z = member.sample_point(23_000 + (wi * 5 + pt) as u64).unwrap();
            let w = descend(&member, &z, &tol).unwrap();
            let summary = spectral_summary(&w.matrix, &tol);
            let verdict = classify(w.epsilon, &summary, w.mu, &tol);
            assert_eq!(verdict.tag, tag, "{}", member.family().name());
            match (verdict.r, radius) {
                (Some(found), Some(expected)) => assert!(
                    (found - expected).abs() <= 1e-6,
                    "{}: radius {found} vs {expected}",
                    member.family().name()
                ),
                (None, None) => {}
                other => panic!("{}: radius {:?}", member.family().name(), other),
            }
            assert_eq!(verdict.qm_constraint, qm);

            // Reversing the normal negates the operator and the Hopf
            // curvature; the verdict must not move.
            let flipped = spectral_summary(&(-&w.matrix), &tol);
            let again = classify(w.epsilon, &flipped, -w.mu, &tol);
            assert_eq!(again.tag, tag);
            assert_eq!(again.qm_constraint, qm);
            match (again.r, verdict.r) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9),
                (None, None) => {}
                other => panic!("flip changed the radius: {other:?}"),
            }
        }
    }

    // Members with several distinct curvatures on the complex distribution
    // fall outside the single-curvature model entirely.
    for t in [0.5, 4.0, 1.0f64.cosh().powi(2)] {
        let member = spec(Family::TypeB { t });
        let z = member.sample_point(29_000).unwrap();
        let w = descend(&member, &z, &tol).unwrap();
        let summary = spectral_summary(&w.matrix, &tol);
        assert_eq!(
            classify(w.epsilon, &summary, w.mu, &tol).tag,
            ClassificationTag::NotEtaUmbilical
        );
        let flipped = spectral_summary(&(-&w.matrix), &tol);
        assert_eq!(
            classify(w.epsilon, &flipped, -w.mu, &tol).tag,
            ClassificationTag::NotEtaUmbilical
        );
    }
}

#[test]
fn reeb_commutator_separates_the_families() {
    let tol = tol();
    let commuting = [
        Family::TypeA { q: 1, m: 4, t: 0.75 },
        Family::TypeA { q: 1, m: 4, t: 2.0 },
        Family::Horosphere { t: 1.0 },
    ];
    for (fi, family) in commuting.into_iter().enumerate() {
        let member = spec(family);
        for pt in 0..2 {
            let seed = 31_000 + (fi * 3 + pt) as u64;
            let z = member.sample_point(seed).unwrap();
            let w = descend(&member, &z, &tol).unwrap();
            let st = structure_tensors(&member, &z, &tol).unwrap();
            let (commutator, killing) =
                commutator_killing(&member, &z, &w, &st.phi, 6, seed + 1, &tol).unwrap();
            assert!(
                commutator <= 1e-7,
                "{}: commutator {commutator:.3e}",
                member.family().name()
            );
            assert!(killing <= 1e-3, "{}: Killing gap {killing:.3e}", member.family().name());
        }
    }

    let member = spec(Family::TypeB { t: 1.0f64.cosh().powi(2) });
    for pt in 0..2 {
        let seed = 33_000 + pt as u64;
        let z = member.sample_point(seed).unwrap();
        let w = descend(&member, &z, &tol).unwrap();
        let st = structure_tensors(&member, &z, &tol).unwrap();
        let (commutator, killing) =
            commutator_killing(&member, &z, &w, &st.phi, 6, seed + 1, &tol).unwrap();
        assert!(commutator >= 0.5, "operator should fail to commute: {commutator:.3e}");
        assert!(killing <= 1e-3, "Killing gap {killing:.3e}");
    }
}

#[test]
fn congruences_preserve_spectra_across_the_catalog() {
    let tol = tol();
    let mut members: Vec<HypersurfaceSpec> = nondegenerate_catalog()
        .into_iter()
        .map(|case| case.spec)
        .collect();
    members.push(spec(Family::Degenerate));
    for k in 0..20 {
        let member = &members[k % members.len()];
        let u = congruence_isometry(member, 900 + k as u64);
        let report = isometry_invariance(member, &u, 7_000 + 13 * k as u64, &tol).unwrap();
        let name = member.family().name();
        assert!(
            report.metric_defect <= 1e-10,
            "{name}: metric defect {:.3e}",
            report.metric_defect
        );
        assert!(
            report.max_defining_residual <= 1e-10,
            "{name}: defining residual {:.3e}",
            report.max_defining_residual
        );
        assert!(
            report.multiplicities_match,
            "{name}: congruence changed the multiplicity pattern"
        );
        assert!(
            report.max_value_gap <= 1e-8,
            "{name}: eigenvalue gap {:.3e}",
            report.max_value_gap
        );
        assert_eq!(report.points, 20);
    }
}
