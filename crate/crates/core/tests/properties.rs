use num_complex::Complex64;
use proptest::prelude::*;

use quasilocal::clifford::{a_of_null, build_clifford, killing_spinor, verify_norm_identity, zeta_of_a, CMatrix, Spinor};
use quasilocal::hyperbolic::{
    ball_to_hyperboloid, from_polar, geodesic_distance, hyperboloid_to_ball, BallPoint, HyperboloidPoint,
    MinkowskiVector, PolarCoords,
};
use quasilocal::mass::MassContext;
use quasilocal::surface::riccati_curvature;

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-3).then(|| v.iter().map(|x| x / norm).collect())
}

fn dim_and_vec(lo: usize, hi: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (lo..=hi).prop_flat_map(|n| (Just(n), prop::collection::vec(-1.0f64..1.0, n)))
}

fn spinor(dim: usize, entries: &[(f64, f64)]) -> Spinor<f64> {
    Spinor::new(entries[..dim].iter().map(|&(re, im)| Complex64::new(re, im)).collect()).unwrap()
}

fn ball_point(v: &[f64], radius: f64) -> BallPoint<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    BallPoint::new(v.iter().map(|x| x / norm * radius).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn clifford_square_is_minus_norm((n, v) in dim_and_vec(2, 7)) {
        let rep = build_clifford::<f64>(n).unwrap();
        let c = rep.clifford_of(&v);
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        let sq = &c * &c;
        let target = CMatrix::identity(rep.spinor_dim()).scale(Complex64::new(-norm2, 0.0));
        prop_assert!((&sq - &target).max_abs() < 1e-13);
        prop_assert!((&c.adjoint() + &c).max_abs() < 1e-14);
    }

    #[test]
    fn null_round_trip((n, v) in dim_and_vec(4, 8), t in 0.1f64..10.0) {
        let Some(y) = unit(&v) else { return Ok(()) };
        let rep = build_clifford::<f64>(n).unwrap();
        let zeta = MinkowskiVector::from_parts(&y.iter().map(|c| c * t).collect::<Vec<_>>(), t);
        let a = a_of_null(&rep, &zeta).unwrap();
        let back = zeta_of_a(&rep, &a).unwrap();
        let target = zeta.scale(1.0 / t);
        prop_assert!(back.combine(1.0, &target, -1.0).euclidean_norm() < 1e-12);
    }

    #[test]
    fn zeta_of_a_is_future_causal_and_quadratic(
        n in 2usize..=7,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        lambda in (-3.0f64..3.0, -3.0f64..3.0),
    ) {
        let rep = build_clifford::<f64>(n).unwrap();
        let dim = rep.spinor_dim();
        prop_assume!(entries.len() >= dim);
        let a = spinor(dim, &entries);
        prop_assume!(a.norm_sq() > 1e-6);
        let z = zeta_of_a(&rep, &a).unwrap();
        prop_assert!(z.time() > 0.0);
        // Null for the Hopf map at n = 3, timelike or null in general.
        let q = z.lorentz_dot(&z).unwrap();
        prop_assert!(q < 1e-12 * z.time() * z.time());
        if n == 3 {
            prop_assert!(q.abs() < 1e-12 * z.time() * z.time());
        }
        // `zeta_{lambda a} = |lambda|^2 zeta_a`
        let l = Complex64::new(lambda.0, lambda.1);
        let zl = zeta_of_a(&rep, &a.scale(l)).unwrap();
        let expected = z.scale(l.norm_sqr());
        prop_assert!(zl.combine(1.0, &expected, -1.0).euclidean_norm() < 1e-12 * expected.euclidean_norm().max(1.0));
    }

    #[test]
    fn killing_spinor_at_origin(
        n in 2usize..=7,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        k in 0.1f64..5.0,
    ) {
        let rep = build_clifford::<f64>(n).unwrap();
        let dim = rep.spinor_dim();
        prop_assume!(entries.len() >= dim);
        let a = spinor(dim, &entries);
        let phi = killing_spinor(&rep, &a, &BallPoint::new(vec![0.0; n]).unwrap()).unwrap();
        let expected = a.scale(Complex64::new(2f64.sqrt(), 0.0));
        prop_assert!(phi.sub(&expected).norm_sq().sqrt() < 1e-14);
        prop_assert!((zeta_of_a(&rep, &a).unwrap().time() - a.norm_sq()).abs() < 1e-13);
        prop_assert!(verify_norm_identity(&rep, &a, &BallPoint::new(vec![0.0; n]).unwrap(), k).unwrap() < 1e-12);
    }

    #[test]
    fn norm_identity_in_the_ball(
        (n, v) in dim_and_vec(2, 6),
        radius in 0.0f64..0.95,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        k in 0.1f64..5.0,
    ) {
        let rep = build_clifford::<f64>(n).unwrap();
        let dim = rep.spinor_dim();
        prop_assume!(entries.len() >= dim);
        let a = spinor(dim, &entries);
        let x = ball_point(&v, radius);
        let phi = killing_spinor(&rep, &a, &x).unwrap();
        prop_assert!(verify_norm_identity(&rep, &a, &x, k).unwrap() < 1e-11 * phi.norm_sq().max(1.0));
    }

    #[test]
    fn ball_and_hyperboloid_round_trip((n, v) in dim_and_vec(2, 8), radius in 0.0f64..0.99, k in 0.1f64..5.0) {
        let x = ball_point(&v, radius);
        let p = ball_to_hyperboloid(&x, k).unwrap();
        let q = p.vector();
        prop_assert!((k * k * q.lorentz_dot(q).unwrap() + 1.0).abs() < 1e-9 * (k * q.time()).powi(2));
        let back = hyperboloid_to_ball(&p).unwrap();
        for (a, b) in back.coords().iter().zip(x.coords()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert_eq!(p.dim(), n);
    }

    #[test]
    fn polar_radius_is_distance_from_origin((n, v) in dim_and_vec(2, 6), r in 0.0f64..5.0, k in 0.2f64..3.0) {
        let Some(y) = unit(&v) else { return Ok(()) };
        let p = from_polar(&PolarCoords::new(r / k, y).unwrap(), k).unwrap();
        let o = HyperboloidPoint::origin(n, k);
        let d = geodesic_distance(&o, &p).unwrap();
        prop_assert!((d - r / k).abs() < 1e-10 * (1.0 + r / k));
        prop_assert!((p.to_polar().r - r / k).abs() < 1e-9 * (1.0 + r / k));
    }

    #[test]
    fn geodesic_distance_is_a_metric(
        (n, a) in dim_and_vec(2, 5),
        b in prop::collection::vec(-1.0f64..1.0, 5),
        c in prop::collection::vec(-1.0f64..1.0, 5),
        radii in (0.0f64..0.9, 0.0f64..0.9, 0.0f64..0.9),
        k in 0.2f64..3.0,
    ) {
        let p = ball_to_hyperboloid(&ball_point(&a, radii.0), k).unwrap();
        let q = ball_to_hyperboloid(&ball_point(&b[..n], radii.1), k).unwrap();
        let s = ball_to_hyperboloid(&ball_point(&c[..n], radii.2), k).unwrap();
        let pq = geodesic_distance(&p, &q).unwrap();
        prop_assert!((pq - geodesic_distance(&q, &p).unwrap()).abs() < 1e-12 * (1.0 + pq));
        prop_assert!(geodesic_distance(&p, &p).unwrap() < 1e-12);
        let via = geodesic_distance(&p, &s).unwrap() + geodesic_distance(&s, &q).unwrap();
        prop_assert!(pq <= via + 1e-9 * (1.0 + via));
    }

    #[test]
    fn riccati_is_a_flow(l0 in 0.0f64..10.0, k in 0.1f64..3.0, r1 in 0.0f64..3.0, r2 in 0.0f64..3.0) {
        let two_steps = riccati_curvature(riccati_curvature(l0, k, r1), k, r2);
        let one_step = riccati_curvature(l0, k, r1 + r2);
        prop_assert!((two_steps - one_step).abs() < 1e-12 * one_step.abs().max(1.0));
        // Curvatures above k decrease toward k, those below increase.
        let later = riccati_curvature(l0, k, r1);
        prop_assert!((later - k).abs() <= (l0 - k).abs() * (1.0 + 1e-12));
    }

    #[test]
    fn alpha_grows_with_the_pinching_ratio(k in 0.2f64..3.0, r1 in 0.1f64..3.0, d1 in 0.0f64..2.0, d2 in 0.0f64..2.0) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = MassContext::new(k, r1, r1 + lo).unwrap();
        let b = MassContext::new(k, r1, r1 + hi).unwrap();
        prop_assert!(a.alpha <= b.alpha * (1.0 + 1e-14));
        prop_assert!(a.mu >= 0.0 && a.alpha >= 1.0);
        // `sinh^2(k R1) mu^2 + 1 = sinh^2(k R2) / sinh^2(k R1)`
        let s1 = (k * r1).sinh();
        let s2 = (k * (r1 + hi)).sinh();
        prop_assert!((s1 * s1 * (b.mu * b.mu + 1.0 / (s1 * s1)) - (s2 / s1).powi(2)).abs() < 1e-9 * (s2 / s1).powi(2));
    }
}

#[test]
fn clifford_relations_all_dimensions() {
    for n in 2..=10 {
        let rep = build_clifford::<f64>(n).unwrap();
        assert_eq!(rep.spinor_dim(), 1 << (n / 2));
        assert!(rep.anticommutation_residual() < 1e-14, "n={n}");
        assert!(rep.self_adjoint_residual() < 1e-14, "n={n}");
    }
    let rep = build_clifford::<f32>(5).unwrap();
    assert!(rep.anticommutation_residual() < 1e-6);
    assert!(build_clifford::<f64>(1).is_err());
}

#[test]
fn documented_null_examples() {
    // n = 2, spatial (1, 0): a = (0, 1) up to a phase.
    let rep = build_clifford::<f64>(2).unwrap();
    let a = a_of_null(&rep, &MinkowskiVector::new(vec![1.0, 0.0, 1.0]).unwrap()).unwrap();
    assert!(a.entries()[0].norm() < 1e-15);
    assert!((a.entries()[1].norm() - 1.0).abs() < 1e-15);
    // n = 3, spatial (0, 0, 1): a = (1, -i)/sqrt 2 up to a phase.
    let rep = build_clifford::<f64>(3).unwrap();
    let a = a_of_null(&rep, &MinkowskiVector::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap()).unwrap();
    let ratio = a.entries()[1] / a.entries()[0];
    assert!((ratio - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    assert!((a.norm_sq() - 1.0).abs() < 1e-15);
    // Rejections.
    assert!(a_of_null(&rep, &MinkowskiVector::new(vec![0.0, 0.0, 1.0, 2.0]).unwrap()).is_err());
    assert!(a_of_null(&rep, &MinkowskiVector::new(vec![0.0, 0.0, 1.0, -1.0]).unwrap()).is_err());
}
