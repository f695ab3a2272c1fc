//! Closed-form references for geodesic spheres and pointwise formulas,
//! computed here without the library's geometry.

use std::f64::consts::PI;

use quasilocal::flow::{run, step, FlowConfig, FlowState};
use quasilocal::hyperbolic::{from_polar, MinkowskiVector, PolarCoords};
use quasilocal::mass::{
    classify_causal, compute_context, integrand_b_point, limit_mass_formula, mass_vector, tail_mass_value,
    CausalClass, MassContext, NullDirection,
};
use quasilocal::sampling::{random_unit_vector, seeded_rng, standard_normal};
use quasilocal::surface::{
    build_leaf, riccati_curvature, scalar_curvature_extrinsic, sphere_area, Profile, SurfaceLeaf, SurfaceSpec,
};
use rand::Rng;

fn sphere_leaf(n: usize, k: f64, r0: f64, n_theta: usize) -> SurfaceLeaf<f64> {
    build_leaf(&SurfaceSpec::axisymmetric(n, k, n_theta, Profile::Sphere { r0 }).unwrap()).unwrap()
}

/// `u` on the sphere of radius `r0 + rho` for constant initial value `u0`:
/// `u^{-2} - 1 = (u0^{-2} - 1)(sinh k r0 / sinh k r)^{n-2}(cosh k r0 / cosh k r)^2`.
fn sphere_u(n: usize, k: f64, r0: f64, u0: f64, rho: f64) -> f64 {
    let r = r0 + rho;
    let decay = ((k * r0).sinh() / (k * r).sinh()).powi(n as i32 - 2) * ((k * r0).cosh() / (k * r).cosh()).powi(2);
    (1.0 + (u0.powi(-2) - 1.0) * decay).powf(-0.5)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Largest relative deviation of the discrete `H_0` and `R` from their
/// values on a geodesic sphere.
fn sphere_curvature_error(leaf: &SurfaceLeaf<f64>, r: f64) -> (f64, f64) {
    let (n, k) = (leaf.n(), leaf.k());
    let h = (n - 1) as f64 * k / (k * r).tanh();
    let intrinsic = ((n - 1) * (n - 2)) as f64 * (k / (k * r).sinh()).powi(2);
    let scalar = scalar_curvature_extrinsic(leaf);
    (0..leaf.len()).fold((0.0f64, 0.0f64), |(eh, er), i| {
        (eh.max(rel(leaf.mean_curvature()[i], h)), er.max(rel(scalar[i], intrinsic)))
    })
}

#[test]
fn sphere_leaf_matches_closed_forms() {
    for (n, k, r0) in [(3, 1.0f64, 1.0f64), (4, 0.5, 2.0), (5, 2.0, 0.3)] {
        let coarse = sphere_leaf(n, k, r0, 64);
        let fine = sphere_leaf(n, k, r0, 128);
        let area = sphere_area(n - 1) * ((k * r0).sinh() / k).powi(n as i32 - 1);
        assert!(rel(fine.area(), area) < 1e-3, "n={n}: area {} vs {area}", fine.area());
        let (h1, r1) = sphere_curvature_error(&coarse, r0);
        let (h2, r2) = sphere_curvature_error(&fine, r0);
        assert!(h2 < 1e-3 && r2 < 1e-3, "n={n}: {h2} {r2}");
        assert!((h1 / h2).log2() > 1.8 && (r1 / r2).log2() > 1.8, "n={n}: {h1} {h2} {r1} {r2}");
        // Equidistant leaves stay geodesic spheres.
        let rho = 0.7 / k;
        let later = fine.at(rho).unwrap();
        let (h3, r3) = sphere_curvature_error(&later, r0 + rho);
        assert!(h3 < 1e-3 && r3 < 1e-3, "n={n}: {h3} {r3}");
        for &r in later.radii() {
            assert!(rel(r, r0 + rho) < 1e-12);
        }
    }
}

#[test]
fn off_center_sphere_has_constant_curvature() {
    let k = 1.0f64;
    let radius = 1.2;
    let spec = SurfaceSpec::axisymmetric(3, k, 128, Profile::OffCenterSphere { radius, offset: 0.5 }).unwrap();
    let leaf = build_leaf(&spec).unwrap();
    let h = 2.0 * k / (k * radius).tanh();
    let r = 2.0 * (k / (k * radius).sinh()).powi(2);
    let scalar = scalar_curvature_extrinsic(&leaf);
    for (node, (&hn, &rn)) in leaf.mean_curvature().iter().zip(&scalar).enumerate() {
        assert!(rel(hn, h) < 2e-3, "H at {node}");
        assert!(rel(rn, r) < 5e-3, "R at {node}");
    }
    let area = 4.0 * PI * (k * radius).sinh().powi(2);
    assert!(rel(leaf.area(), area) < 1e-3);
}

/// Gauss curvature of the induced metric `E dtheta^2 + psi^2 dphi^2` of an
/// axisymmetric `n = 3` leaf, `K = -(psi_theta / sqrt E)_theta / (sqrt E psi)`,
/// by central differences of the reduced positions `(x_1, psi, t)`.
fn intrinsic_gauss_curvature(leaf: &SurfaceLeaf<f64>) -> Vec<(usize, f64)> {
    let nt = leaf.len();
    let h = PI / nt as f64;
    let x = |i: usize| leaf.reduced_position(i);
    let d = |i: usize, c: usize| (x(i + 1)[c] - x(i - 1)[c]) / (2.0 * h);
    let speed = |i: usize| (d(i, 0).powi(2) + d(i, 1).powi(2) - d(i, 2).powi(2)).sqrt();
    let f = |i: usize| d(i, 1) / speed(i);
    (2..nt - 2).map(|i| (i, -(f(i + 1) - f(i - 1)) / (2.0 * h) / (speed(i) * x(i)[1]))).collect()
}

#[test]
fn scalar_curvature_is_twice_intrinsic_gauss_curvature() {
    let spec = SurfaceSpec::axisymmetric(3, 1.0, 128, Profile::PerturbedSphere { r0: 1.0, eps: 0.2 }).unwrap();
    let leaf = build_leaf(&spec).unwrap();
    for rho in [0.0, 1.0] {
        let leaf = leaf.at(rho).unwrap();
        let scalar = scalar_curvature_extrinsic(&leaf);
        let scale = scalar.iter().fold(0.0f64, |m: f64, r: &f64| m.max(r.abs()));
        for (i, k) in intrinsic_gauss_curvature(&leaf) {
            assert!((scalar[i] - 2.0 * k).abs() < 0.02 * scale, "rho={rho}, node {i}: {} vs {}", scalar[i], 2.0 * k);
        }
    }
}

#[test]
fn gauss_bonnet_on_perturbed_sphere() {
    for n_theta in [64, 128] {
        let spec = SurfaceSpec::axisymmetric(3, 1.0, n_theta, Profile::PerturbedSphere { r0: 1.0, eps: 0.2 }).unwrap();
        let leaf = build_leaf(&spec).unwrap();
        let total = leaf.integrate(&scalar_curvature_extrinsic(&leaf));
        assert!((total - 8.0 * PI).abs() < 2e-2, "n_theta={n_theta}: {total}");
    }
}

#[test]
fn riccati_matches_sphere_curvature() {
    let k = 0.8f64;
    for r0 in [0.2, 1.0, 3.0] {
        for rho in [0.0, 0.5, 4.0] {
            let got = riccati_curvature(k / (k * r0).tanh(), k, rho);
            assert!(rel(got, k / (k * (r0 + rho)).tanh()) < 1e-13);
        }
    }
    // Horospheres stay horospheres.
    assert!(rel(riccati_curvature(k, k, 2.0), k) < 1e-14);
}

#[test]
fn alpha_closed_forms() {
    for (k, r) in [(1.0, 1.0), (0.5, 3.0), (2.0, 0.1)] {
        let ctx = MassContext::new(k, r, r).unwrap();
        assert_eq!(ctx.mu, 0.0);
        assert!(rel(ctx.alpha, 1.0 / (k * r).tanh()) < 1e-15);
    }
    let ctx = MassContext::new(1.0, 1.0, 2.0).unwrap();
    let mu = ((2.0f64.sinh() / 1.0f64.sinh()).powi(2) - 1.0).sqrt() / 1.0f64.sinh();
    assert!(rel(ctx.mu, mu) < 1e-14);
    assert!(rel(ctx.alpha, 1.0 / 1.0f64.tanh() + mu) < 1e-14);
    assert!(MassContext::new(1.0, 2.0, 1.0).is_err());
    assert!(MassContext::new(-1.0, 1.0, 1.0).is_err());
}

#[test]
fn sphere_mass_vector_is_timelike_closed_form() {
    let (k, r0, u0) = (1.0, 1.0, 1.3);
    for n in [3, 4] {
        let leaf = sphere_leaf(n, k, r0, 128);
        let ctx = compute_context(&leaf).unwrap();
        let state = FlowState::new(leaf, vec![u0; 128]).unwrap();
        let m = mass_vector(&state, &ctx);
        let h0 = (n - 1) as f64 * k / (k * r0).tanh();
        let area = sphere_area(n - 1) * ((k * r0).sinh() / k).powi(n as i32 - 1);
        let expected = h0 * (u0 - 1.0) / u0 * ctx.alpha * (k * r0).cosh() / k * area;
        assert!(rel(m.time(), expected) < 1e-3, "n={n}: {} vs {expected}", m.time());
        for &c in m.spatial() {
            assert!(c.abs() < 1e-10 * expected);
        }
        assert_eq!(classify_causal(&m), CausalClass::FutureNonspacelike);
    }
}

#[test]
fn sphere_flow_tracks_closed_form() {
    let (n, k, r0, u0) = (3, 1.0, 1.0, 1.5);
    let leaf = sphere_leaf(n, k, r0, 128);
    let ctx = compute_context(&leaf).unwrap();
    let state = FlowState::new(leaf, vec![u0; 128]).unwrap();
    let config = FlowConfig { rho_max: 6.0, ..FlowConfig::default() };
    let zeta = NullDirection::from_spatial(&[1.0, 0.0, 0.0]).unwrap();
    let trace = run(state, &config, &ctx, &zeta).unwrap();
    for row in trace.rows() {
        let exact = sphere_u(n, k, r0, u0, row.rho);
        // The discrete curvatures carry an O(h^2) error, so the comparison
        // is on `u - 1`.
        assert!(rel(row.u_max - 1.0, exact - 1.0) < 1e-3, "rho={}", row.rho);
        assert!(rel(row.u_min - 1.0, exact - 1.0) < 1e-3, "rho={}", row.rho);
    }
    // v = lim e^{n k rho}(u - 1)
    let v_exact = -0.5
        * (u0.powi(-2) - 1.0)
        * (k * r0).sinh().powi(n as i32 - 2)
        * (k * r0).cosh().powi(2)
        * 2f64.powi(n as i32)
        * (-(n as f64) * k * r0).exp();
    let limit = trace.limit().unwrap();
    for &v in &limit.v {
        assert!(rel(v, v_exact) < 0.02, "v {v} vs {v_exact}");
    }
    let exponent = trace.decay_exponent(2.0).unwrap();
    assert!(rel(exponent, n as f64 * k) < 0.1);
}

#[test]
fn heun_step_is_second_order() {
    let spec = SurfaceSpec::axisymmetric(3, 1.0, 16, Profile::PerturbedSphere { r0: 1.0, eps: 0.1 }).unwrap();
    let leaf = build_leaf(&spec).unwrap();
    let u: Vec<f64> = (0..16).map(|i| 1.3 + 0.1 * (0.4 * i as f64).cos()).collect();
    let target = 0.2;
    let solve = |steps: usize| {
        let mut state = FlowState::new(leaf.clone(), u.clone()).unwrap();
        for _ in 0..steps {
            state = step(&state, target / steps as f64).unwrap();
        }
        state.u().to_vec()
    };
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let (a, b, c, d) = (solve(20), solve(40), solve(80), solve(160));
    let (p1, p2) = ((diff(&a, &b) / diff(&b, &c)).log2(), (diff(&b, &c) / diff(&c, &d)).log2());
    assert!((p1 - 2.0).abs() < 0.2 && (p2 - 2.0).abs() < 0.2, "orders {p1} {p2}");
    // And the converged solution agrees with the production integrator.
    let ctx = compute_context(&leaf).unwrap();
    let zeta = NullDirection::from_spatial(&[1.0, 0.0, 0.0]).unwrap();
    let config = FlowConfig { rho_max: target, stride: target, ..FlowConfig::default() };
    let trace = run(FlowState::new(leaf.clone(), u.clone()).unwrap(), &config, &ctx, &zeta).unwrap();
    assert!(diff(trace.final_state().u(), &d) < 1e-4);
}

/// `B = k [ (H_0^2 - |A|^2)(x . zeta - alpha t) / 2 + H_0 (N_s . zeta - alpha N_t) ]`.
fn b_vector_form(x: &[f64], normal: &[f64], h0: f64, a2: f64, alpha: f64, k: f64, zeta: &[f64]) -> f64 {
    let n = x.len() - 1;
    let xz: f64 = (0..n).map(|i| x[i] * zeta[i]).sum();
    let nz: f64 = (0..n).map(|i| normal[i] * zeta[i]).sum();
    k * (0.5 * (h0 * h0 - a2) * (xz - alpha * x[n]) + h0 * (nz - alpha * normal[n]))
}

#[test]
fn integrand_matches_vector_form() {
    let mut rng = seeded_rng(11);
    for _ in 0..500 {
        let n = rng.gen_range(2..7);
        let k = rng.gen_range(0.3..2.0);
        let r = rng.gen_range(0.1..3.0) / k;
        let x = from_polar(&PolarCoords::new(r, random_unit_vector(&mut rng, n)).unwrap(), k).unwrap();
        let xv = x.vector();
        // Project a random vector onto the tangent space and normalize.
        let v = MinkowskiVector::new((0..=n).map(|_| standard_normal(&mut rng)).collect()).unwrap();
        let t = v.combine(1.0, xv, k * k * xv.lorentz_dot(&v).unwrap());
        let normal = t.scale(1.0 / t.lorentz_dot(&t).unwrap().sqrt());
        let zeta = NullDirection::from_spatial(&random_unit_vector(&mut rng, n)).unwrap();
        let (h0, a2, alpha) = (rng.gen_range(0.5..5.0), rng.gen_range(0.0..10.0), rng.gen_range(1.0..4.0));
        let got = integrand_b_point(xv.components(), normal.components(), h0, a2, alpha, k, zeta.vector().components());
        let want = b_vector_form(xv.components(), normal.components(), h0, a2, alpha, k, zeta.vector().components());
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn causal_classification_examples() {
    let v = |c: &[f64]| MinkowskiVector::new(c.to_vec()).unwrap();
    assert_eq!(classify_causal(&v(&[0.0, 0.0, 1.0])), CausalClass::FutureNonspacelike);
    assert_eq!(classify_causal(&v(&[1.0, 0.0, 1.0])), CausalClass::FutureNonspacelike);
    assert_eq!(classify_causal(&v(&[0.0, 0.0, 0.0])), CausalClass::FutureNonspacelike);
    assert_eq!(classify_causal(&v(&[1.0, 0.0, 0.5])), CausalClass::Spacelike);
    assert_eq!(classify_causal(&v(&[0.0, 0.0, -1.0])), CausalClass::Past);
    assert_eq!(classify_causal(&v(&[0.0, 1.0, -1.0])), CausalClass::Past);
}

#[test]
fn limit_quantities_are_linear_in_zeta() {
    let spec = SurfaceSpec::axisymmetric(3, 1.0, 32, Profile::PerturbedSphere { r0: 1.0, eps: 0.1 }).unwrap();
    let leaf = build_leaf(&spec).unwrap();
    let ctx = compute_context(&leaf).unwrap();
    let u: Vec<f64> = (0..32).map(|i| 1.2 + 0.1 * (i as f64 * 0.3).sin()).collect();
    let state = FlowState::new(leaf, u).unwrap();
    let zeta = NullDirection::from_spatial(&[1.0, 0.0, 0.0]).unwrap();
    let trace = run(state, &FlowConfig { rho_max: 5.0, ..FlowConfig::default() }, &ctx, &zeta).unwrap();
    let z1 = MinkowskiVector::new(vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let z2 = MinkowskiVector::new(vec![-0.6, 0.8, 0.0, 1.0]).unwrap();
    let mix = z1.combine(2.0, &z2, -3.0);
    let f = |z: &MinkowskiVector<f64>| limit_mass_formula(&trace, z).unwrap();
    let t = |z: &MinkowskiVector<f64>| tail_mass_value(trace.final_state(), z).unwrap();
    let scale = f(&z1).abs() + f(&z2).abs();
    assert!((f(&mix) - (2.0 * f(&z1) - 3.0 * f(&z2))).abs() < 1e-12 * scale);
    assert!((t(&mix) - (2.0 * t(&z1) - 3.0 * t(&z2))).abs() < 1e-12 * scale);
}
