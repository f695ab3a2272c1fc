//! The quasi-spherical flow
//! `2 H_0 du/drho = 2 u^2 Delta_rho u + (u - u^3)(R^rho + n(n-1)k^2)`
//! along the equidistant foliation. [`run`] splits off the reaction term,
//! which it solves exactly, and takes Runge-Kutta-Legendre super steps of
//! the diffusion; [`step`] is a single Heun step under the explicit stability
//! bound.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mass::{
    cosh_mass, mass_derivative_analytic, mass_vector, MassContext, NullDirection,
};
use crate::hyperbolic::MinkowskiVector;
use crate::scalar::Real;
use crate::surface::{advance_leaf, riccati_curvature, SurfaceLeaf};

/// The flow variable `u` on one leaf, kept together with `u - 1` so that
/// the late, nearly converged part of a run does not lose digits.
#[derive(Debug, Clone)]
pub struct FlowState<T> {
    leaf: SurfaceLeaf<T>,
    u: Vec<T>,
    excess: Vec<T>,
}

impl<T: Real> FlowState<T> {
    /// Pairs a leaf with a field `u > 0`.
    pub fn new(leaf: SurfaceLeaf<T>, u: Vec<T>) -> Result<Self> {
        if u.len() != leaf.len() {
            return Err(Error::DimensionMismatch { expected: leaf.len(), found: u.len() });
        }
        if let Some((node, &value)) = u.iter().enumerate().find(|(_, &v)| !(v > T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("u must be positive and finite, got {value} at node {node}")));
        }
        let excess = u.iter().map(|&v| v - T::one()).collect();
        Ok(Self { leaf, u, excess })
    }

    fn from_u(leaf: SurfaceLeaf<T>, u: Vec<T>) -> Self {
        let excess = u.iter().map(|&v| v - T::one()).collect();
        Self { leaf, u, excess }
    }

    fn from_excess(leaf: SurfaceLeaf<T>, excess: Vec<T>) -> Self {
        let u = excess.iter().map(|&e| T::one() + e).collect();
        Self { leaf, u, excess }
    }

    pub fn rho(&self) -> T {
        self.leaf.rho()
    }

    pub fn leaf(&self) -> &SurfaceLeaf<T> {
        &self.leaf
    }

    pub fn u(&self) -> &[T] {
        &self.u
    }

    /// `u - 1`.
    pub fn excess(&self) -> &[T] {
        &self.excess
    }

    /// `H = H_0 / u`.
    pub fn mean_curvature(&self) -> Vec<T> {
        self.leaf.mean_curvature().iter().zip(&self.u).map(|(&h, &u)| h / u).collect()
    }

    pub fn sup_u_minus_1(&self) -> T {
        self.excess.iter().fold(T::zero(), |a, &e| a.max(e.abs()))
    }

    pub fn u_min(&self) -> T {
        self.u.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn u_max(&self) -> T {
        self.u.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// `u(., 0) = H_0 / H` for a prescribed mean curvature `H > 0` of `Sigma`.
pub fn init_u<T: Real>(leaf: SurfaceLeaf<T>, h: &[T]) -> Result<FlowState<T>> {
    if h.len() != leaf.len() {
        return Err(Error::DimensionMismatch { expected: leaf.len(), found: h.len() });
    }
    if let Some((node, &value)) = h.iter().enumerate().find(|(_, &v)| !(v > T::zero()) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!("H must be positive, got {value} at node {node}")));
    }
    if let Some((node, &value)) = leaf.mean_curvature().iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
        return Err(Error::NonPositiveMeanCurvature { node, value: value.to_f64_lossy() });
    }
    let u = leaf.mean_curvature().iter().zip(h).map(|(&h0, &h)| h0 / h).collect();
    FlowState::new(leaf, u)
}

/// `du/drho` on the state's leaf.
fn rate<T: Real>(leaf: &SurfaceLeaf<T>, u: &[T], lap: &mut [T], out: &mut [T]) {
    let n = leaf.n();
    let k = leaf.k();
    // R + n(n-1)k^2 = H_0^2 - |A|^2 + 2(n-1)k^2
    let shift = T::lit(2.0) * T::of(n - 1) * k * k;
    leaf.laplacian().apply_into(u, lap);
    let h0 = leaf.mean_curvature();
    let a2 = leaf.shape_norm_sq();
    let half = T::lit(0.5);
    for i in 0..u.len() {
        let ui = u[i];
        let reaction = (ui - ui * ui * ui) * (h0[i] * h0[i] - a2[i] + shift);
        out[i] = (ui * ui * lap[i] + half * reaction) / h0[i];
    }
}

fn check_field<T: Real>(u: &[T], rho: T, bounds: (T, T)) -> Result<()> {
    for (node, &v) in u.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Divergence { rho: rho.to_f64_lossy() });
        }
        if !(v > T::zero()) {
            return Err(Error::FlowBreakdown { rho: rho.to_f64_lossy(), node, value: v.to_f64_lossy() });
        }
        if v < bounds.0 || v > bounds.1 {
            return Err(Error::Divergence { rho: rho.to_f64_lossy() });
        }
    }
    Ok(())
}

/// One Heun (explicit RK2) step of size `drho`, advancing the leaf with it.
pub fn step<T: Real>(state: &FlowState<T>, drho: T) -> Result<FlowState<T>> {
    step_bounded(state, drho, (T::lit(1e-3), T::lit(1e3)))
}

fn step_bounded<T: Real>(state: &FlowState<T>, drho: T, bounds: (T, T)) -> Result<FlowState<T>> {
    if !(drho > T::zero()) || !drho.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {drho}")));
    }
    let len = state.u.len();
    let mut lap = vec![T::zero(); len];
    let mut k1 = vec![T::zero(); len];
    let mut k2 = vec![T::zero(); len];
    rate(&state.leaf, &state.u, &mut lap, &mut k1);
    let predictor: Vec<T> = state.u.iter().zip(&k1).map(|(&u, &r)| u + drho * r).collect();
    let next = advance_leaf(&state.leaf, drho)?;
    check_field(&predictor, next.rho(), bounds)?;
    rate(&next, &predictor, &mut lap, &mut k2);
    let half = T::lit(0.5) * drho;
    let u: Vec<T> = state.u.iter().zip(k1.iter().zip(&k2)).map(|(&u, (&a, &b))| u + half * (a + b)).collect();
    check_field(&u, next.rho(), bounds)?;
    Ok(FlowState::from_u(next, u))
}

/// Forward-Euler stability bound `2 / lambda_max` of the linearized right-hand
/// side, with `lambda_max <= u^2 G / H_0 + |1 - 3u^2|(R + n(n-1)k^2)/(2 H_0)`
/// per node and `G` the Gershgorin bound of the Laplacian row. Heun's method
/// is stable up to the same step.
pub fn stable_step<T: Real>(state: &FlowState<T>) -> T {
    stable_step_on(&state.leaf, &state.u)
}

fn stable_step_on<T: Real>(leaf: &SurfaceLeaf<T>, u: &[T]) -> T {
    let g = leaf.laplacian().gershgorin();
    let h0 = leaf.mean_curvature();
    let a2 = leaf.shape_norm_sq();
    let k = leaf.k();
    let shift = T::lit(2.0) * T::of(leaf.n() - 1) * k * k;
    let mut best = T::infinity();
    for i in 0..u.len() {
        let u2 = u[i] * u[i];
        let c = h0[i] * h0[i] - a2[i] + shift;
        let lam = (u2 * g[i] + (T::one() - T::lit(3.0) * u2).abs() * c * T::lit(0.5)) / h0[i];
        if lam > T::zero() {
            best = best.min(T::lit(2.0) / lam);
        }
    }
    best
}

/// Coefficients of the `s`-stage second-order Runge-Kutta-Legendre scheme:
/// per stage `(mu, nu, mu_tilde, gamma_tilde)` and the stage times.
fn rkl2_coefficients(s: usize) -> (Vec<[f64; 4]>, Vec<f64>) {
    let b = |j: usize| -> f64 {
        if j < 2 {
            1.0 / 3.0
        } else {
            let j = j as f64;
            (j * j + j - 2.0) / (2.0 * j * (j + 1.0))
        }
    };
    let sf = s as f64;
    let w1 = 4.0 / (sf * sf + sf - 2.0);
    let mut coef = vec![[0.0; 4]; s + 1];
    let mut c = vec![0.0; s + 1];
    coef[1] = [0.0, 0.0, b(1) * w1, 0.0];
    c[1] = b(1) * w1;
    for j in 2..=s {
        let jf = j as f64;
        let mu = (2.0 * jf - 1.0) / jf * b(j) / b(j - 1);
        let nu = -(jf - 1.0) / jf * b(j) / b(j - 2);
        let mu_t = mu * w1;
        let gamma_t = -(1.0 - b(j - 1)) * mu_t;
        coef[j] = [mu, nu, mu_t, gamma_t];
        c[j] = mu * c[j - 1] + nu * c[j - 2] + mu_t + gamma_t;
    }
    (coef, c)
}

/// Diffusion part `u^2 Delta u / H_0`, in terms of `e = u - 1`, on the leaf at
/// `rho_a + theta (rho_b - rho_a)`, with the Laplacian interpolated linearly
/// between the two end leaves and the curvatures evaluated exactly.
#[allow(clippy::too_many_arguments)]
fn blended_diffusion<T: Real>(
    a: &SurfaceLeaf<T>,
    b: &SurfaceLeaf<T>,
    theta: T,
    e: &[T],
    lap_a: &mut [T],
    lap_b: &mut [T],
    out: &mut [T],
) {
    let k = a.k();
    let delta = theta * (b.rho() - a.rho());
    let [m0, m1] = a.multiplicities();
    let (m0, m1) = (T::of(m0), T::of(m1));
    a.laplacian().apply_into(e, lap_a);
    b.laplacian().apply_into(e, lap_b);
    for (i, l) in a.principal_curvatures().iter().enumerate() {
        let h0 = m0 * riccati_curvature(l[0], k, delta) + m1 * riccati_curvature(l[1], k, delta);
        let lap = (T::one() - theta) * lap_a[i] + theta * lap_b[i];
        let u = T::one() + e[i];
        out[i] = u * u * lap / h0;
    }
}

/// Exact solution of the reaction part `du/drho = a (u - u^3)` with
/// `a = (H_0^2 - |A|^2 + 2(n-1)k^2) / (2 H_0)` from `rho_a + d0` to
/// `rho_a + d1`: `1/u^2 - 1` decays by `exp(-2 int a)`, the integral taken
/// by three-point Gauss-Legendre on the exact curvatures. Acts on `e = u - 1`.
fn react<T: Real>(a: &SurfaceLeaf<T>, e: &mut [T], d0: T, d1: T) {
    let k = a.k();
    let shift = T::lit(2.0) * T::of(a.n() - 1) * k * k;
    let [m0, m1] = a.multiplicities();
    let (m0, m1) = (T::of(m0), T::of(m1));
    let half = T::lit(0.5);
    let mid = (d0 + d1) * half;
    let h = (d1 - d0) * half;
    let x = T::lit(0.6).sqrt();
    let nodes = [(mid - h * x, T::lit(5.0 / 9.0)), (mid, T::lit(8.0 / 9.0)), (mid + h * x, T::lit(5.0 / 9.0))];
    for (ei, l) in e.iter_mut().zip(a.principal_curvatures()) {
        let mut integral = T::zero();
        for &(d, w) in &nodes {
            let l0 = riccati_curvature(l[0], k, d);
            let l1 = riccati_curvature(l[1], k, d);
            let h0 = m0 * l0 + m1 * l1;
            let a2 = m0 * l0 * l0 + m1 * l1 * l1;
            integral = integral + w * (h0 * h0 - a2 + shift) * half / h0;
        }
        integral = integral * h;
        // w = 1/u^2 - 1 and back, without cancellation near u = 1.
        let u = T::one() + *ei;
        let w = -*ei * (T::one() + u) / (u * u) * (-T::lit(2.0) * integral).exp();
        let r = (T::one() + w).sqrt();
        *ei = -w / (r * (T::one() + r));
    }
}

/// One Strang-split step of size `tau`: exact reaction over `tau/2`, an
/// `s`-stage RKL2 super step of the diffusion over `tau`, exact reaction
/// over the remaining `tau/2`.
fn super_step<T: Real>(state: &FlowState<T>, tau: T, s: usize, bounds: (T, T)) -> Result<FlowState<T>> {
    let len = state.u.len();
    let next = advance_leaf(&state.leaf, tau)?;
    let half = tau * T::lit(0.5);
    let (coef, c) = rkl2_coefficients(s);
    let mut lap_a = vec![T::zero(); len];
    let mut lap_b = vec![T::zero(); len];
    let mut f0 = vec![T::zero(); len];
    let mut f = vec![T::zero(); len];
    let mut y0 = state.excess.clone();
    react(&state.leaf, &mut y0, T::zero(), half);
    blended_diffusion(&state.leaf, &next, T::zero(), &y0, &mut lap_a, &mut lap_b, &mut f0);
    let mu1 = T::lit(coef[1][2]) * tau;
    let mut prev: Vec<T> = y0.clone();
    let mut cur: Vec<T> = y0.iter().zip(&f0).map(|(&y, &r)| y + mu1 * r).collect();
    for j in 2..=s {
        blended_diffusion(&state.leaf, &next, T::lit(c[j - 1]), &cur, &mut lap_a, &mut lap_b, &mut f);
        let [mu, nu, mu_t, gamma_t] = coef[j].map(T::lit);
        let rest = T::one() - mu - nu;
        let stage: Vec<T> = (0..len)
            .map(|i| mu * cur[i] + nu * prev[i] + rest * y0[i] + tau * (mu_t * f[i] + gamma_t * f0[i]))
            .collect();
        prev = std::mem::replace(&mut cur, stage);
    }
    react(&state.leaf, &mut cur, half, tau);
    let out = FlowState::from_excess(next, cur);
    check_field(&out.u, out.rho(), bounds)?;
    Ok(out)
}

/// Time integrator used by [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Heun steps limited by [`stable_step`].
    Heun,
    /// Strang splitting: the reaction term solved exactly per node around
    /// Runge-Kutta-Legendre super steps of the diffusion, of up to
    /// `max_step` with as many stages as stability requires.
    #[default]
    Rkl2,
}

/// Integration and recording parameters; lengths are in units of `1/k`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// End of the run, `k rho_max`.
    pub rho_max: f64,
    /// Fraction of the stable step actually taken, in `(0, 1]`.
    pub safety: f64,
    /// Spacing `k drho` of recorded rows.
    pub stride: f64,
    /// Cap on `k drho` for accuracy of the reaction term.
    pub max_step: f64,
    /// `u` leaving `[lower, upper]` aborts the run.
    pub u_bounds: (f64, f64),
    pub integrator: Integrator,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            rho_max: 6.0,
            safety: 0.4,
            stride: 0.02,
            max_step: 0.01,
            u_bounds: (1e-3, 1e3),
            integrator: Integrator::Rkl2,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("flow config: {what}")));
        if !(self.rho_max > 0.0) || !self.rho_max.is_finite() {
            return bad("rho_max must be positive");
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad("safety must lie in (0, 1]");
        }
        if !(self.stride > 0.0) || self.stride > self.rho_max {
            return bad("stride must lie in (0, rho_max]");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be positive");
        }
        if !(self.u_bounds.0 > 0.0 && self.u_bounds.0 < 1.0 && self.u_bounds.1 > 1.0) {
            return bad("u_bounds must bracket 1 with a positive lower end");
        }
        Ok(())
    }
}

/// One recorded row of a run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FlowRow<T> {
    pub rho: T,
    pub u_min: T,
    pub u_max: T,
    pub sup_u_minus_1: T,
    pub mass: MinkowskiVector<T>,
    pub cosh_mass: T,
    /// Central difference of `m . zeta` over neighbouring rows.
    pub dmass_fd: T,
    /// `d(m . zeta)/drho` from the integrand `B`.
    pub dmass_analytic: T,
}

/// Limits at `rho -> infinity` extracted from the tail of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitFields<T> {
    /// `v = lim e^{n k rho}(u - 1)`.
    pub v: Vec<T>,
    /// `gamma = lim e^{-k rho} X`, reduced coordinates.
    pub gamma: Vec<Vec<T>>,
    /// `dmu = lim e^{-(n-1) k rho} dSigma_rho`.
    pub dmu: Vec<T>,
    /// `lim e^{-2 k rho} g_rho` as `[g_tt, g_tp, g_pp]`.
    pub metric: Vec<[T; 3]>,
    /// Largest relative change of `v` between the last two extrapolations.
    pub spread: T,
    /// `spread <= 5%`.
    pub converged: bool,
}

/// Complete record of a run.
#[derive(Debug, Clone)]
pub struct FlowTrace<T> {
    rows: Vec<FlowRow<T>>,
    zeta: NullDirection<T>,
    steps: usize,
    final_state: FlowState<T>,
    limit: Option<LimitFields<T>>,
}

/// Column header of [`FlowTrace::to_csv`] for spatial dimension `n`.
pub fn csv_header(n: usize) -> String {
    let mut h = String::from("rho,u_min,u_max,sup_u_minus_1");
    for i in 0..=n {
        let _ = write!(h, ",mass_{i}");
    }
    h.push_str(",cosh_mass,dmass_fd,dmass_analytic");
    h
}

impl<T: Real> FlowTrace<T> {
    pub fn rows(&self) -> &[FlowRow<T>] {
        &self.rows
    }

    /// Direction used for the `dmass_*` columns.
    pub fn zeta(&self) -> &NullDirection<T> {
        &self.zeta
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn final_state(&self) -> &FlowState<T> {
        &self.final_state
    }

    pub fn limit(&self) -> Option<&LimitFields<T>> {
        self.limit.as_ref()
    }

    /// Rows as CSV, columns `rho,u_min,u_max,sup_u_minus_1,mass_0..mass_n,
    /// cosh_mass,dmass_fd,dmass_analytic`. Values use Rust's shortest
    /// round-trip formatting.
    pub fn to_csv(&self) -> String {
        let n = self.final_state.leaf.n();
        let mut out = csv_header(n);
        out.push('\n');
        for r in &self.rows {
            let mut fields = vec![r.rho, r.u_min, r.u_max, r.sup_u_minus_1];
            fields.extend_from_slice(r.mass.components());
            fields.extend([r.cosh_mass, r.dmass_fd, r.dmass_analytic]);
            let line: Vec<String> = fields.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Least-squares slope of `-ln sup|u - 1|` against `rho` over rows with
    /// `rho >= from`; `None` if fewer than two rows have `u != 1`.
    pub fn decay_exponent(&self, from: T) -> Option<T> {
        let pts: Vec<(T, T)> = self
            .rows
            .iter()
            .filter(|r| r.rho >= from && r.sup_u_minus_1 > T::zero())
            .map(|r| (r.rho, -r.sup_u_minus_1.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let m = T::of(pts.len());
        let (sx, sy) = pts.iter().fold((T::zero(), T::zero()), |(a, b), &(x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let (sxy, sxx) = pts
            .iter()
            .fold((T::zero(), T::zero()), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
        Some(sxy / sxx)
    }
}

/// Tail samples kept for Richardson extrapolation.
struct Sample<T> {
    rho: T,
    excess: Vec<T>,
    weights: Vec<T>,
    metric: Vec<[T; 3]>,
}

/// `(f(rho2) - q f(rho1)) / (1 - q)` with `q = e^{-2k(rho2 - rho1)}`: removes
/// the leading `e^{-2 k rho}` correction.
fn richardson<T: Real>(f1: T, f2: T, q: T) -> T {
    (f2 - q * f1) / (T::one() - q)
}

fn extract_limits<T: Real>(leaf: &SurfaceLeaf<T>, tail: &[Sample<T>]) -> Option<LimitFields<T>> {
    if tail.len() < 3 {
        return None;
    }
    let n = leaf.n();
    let k = leaf.k();
    let nk = T::of(n) * k;
    let scaled_v = |s: &Sample<T>| -> Vec<T> {
        let e = (nk * s.rho).exp();
        s.excess.iter().map(|&x| x * e).collect()
    };
    let [a, b, c] = [&tail[tail.len() - 3], &tail[tail.len() - 2], &tail[tail.len() - 1]];
    let q = |x: &Sample<T>, y: &Sample<T>| (-T::lit(2.0) * k * (y.rho - x.rho)).exp();
    let (va, vb, vc) = (scaled_v(a), scaled_v(b), scaled_v(c));
    let (q1, q2) = (q(a, b), q(b, c));
    let v1: Vec<T> = va.iter().zip(&vb).map(|(&x, &y)| richardson(x, y, q1)).collect();
    let v: Vec<T> = vb.iter().zip(&vc).map(|(&x, &y)| richardson(x, y, q2)).collect();
    let scale = v.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let spread = if scale > T::zero() {
        v.iter().zip(&v1).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())) / scale
    } else {
        T::zero()
    };

    let area = |s: &Sample<T>| -> Vec<T> {
        let e = (-T::of(n - 1) * k * s.rho).exp();
        s.weights.iter().map(|&w| w * e).collect()
    };
    let dmu = area(b).iter().zip(area(c)).map(|(&x, y)| richardson(x, y, q2)).collect();
    let metric_of = |s: &Sample<T>| -> Vec<[T; 3]> {
        let e = (-T::lit(2.0) * k * s.rho).exp();
        s.metric.iter().map(|g| [g[0] * e, g[1] * e, g[2] * e]).collect()
    };
    let metric = metric_of(b)
        .iter()
        .zip(metric_of(c))
        .map(|(x, y)| [richardson(x[0], y[0], q2), richardson(x[1], y[1], q2), richardson(x[2], y[2], q2)])
        .collect();
    let inv_k = T::one() / k;
    let half = T::lit(0.5);
    let gamma = (0..leaf.len())
        .map(|node| {
            let x0 = leaf.reduced_initial_position(node);
            let n0 = leaf.reduced_initial_normal(node);
            x0.iter().zip(n0).map(|(&x, &nv)| half * (x + nv * inv_k)).collect()
        })
        .collect();
    Some(LimitFields { v, gamma, dmu, metric, spread, converged: spread <= T::lit(0.05) })
}

/// Integrates from `state` to `rho_max`, recording a row every `stride`;
/// `observe` sees the state at every recorded row.
pub fn run_observed<T: Real>(
    state: FlowState<T>,
    config: &FlowConfig,
    ctx: &MassContext<T>,
    zeta: &NullDirection<T>,
    mut observe: impl FnMut(&FlowState<T>) -> Result<()>,
) -> Result<FlowTrace<T>> {
    config.validate()?;
    let k = state.leaf.k();
    let to_rho = |x: f64| T::lit(x) / k;
    let rho_max = to_rho(config.rho_max);
    let stride = to_rho(config.stride);
    let max_step = to_rho(config.max_step);
    let safety = T::lit(config.safety);
    let bounds = (T::lit(config.u_bounds.0), T::lit(config.u_bounds.1));
    let start = state.rho();
    check_field(&state.u, start, bounds)?;

    let mut rows = Vec::new();
    let mut tail: Vec<Sample<T>> = Vec::new();
    let mut record = |s: &FlowState<T>, rows: &mut Vec<FlowRow<T>>| -> Result<()> {
        observe(s)?;
        rows.push(FlowRow {
            rho: s.rho(),
            u_min: s.u_min(),
            u_max: s.u_max(),
            sup_u_minus_1: s.sup_u_minus_1(),
            mass: mass_vector(s, ctx),
            cosh_mass: cosh_mass(s),
            dmass_fd: T::nan(),
            dmass_analytic: mass_derivative_analytic(s, ctx, zeta)?,
        });
        if tail.len() == 3 {
            tail.remove(0);
        }
        tail.push(Sample {
            rho: s.rho(),
            excess: s.excess.clone(),
            weights: s.leaf.area_weights().to_vec(),
            metric: s.leaf.metric().to_vec(),
        });
        Ok(())
    };

    let mut state = state;
    record(&state, &mut rows)?;
    let mut steps = 0usize;
    let mut index = 1usize;
    // Rows sit at start + index * stride, the last one clipped to rho_max.
    loop {
        let target = (start + T::of(index) * stride).min(rho_max);
        while state.rho() < target {
            let remaining = target - state.rho();
            let explicit = safety * stable_step(&state);
            let h = match config.integrator {
                Integrator::Heun => explicit.min(max_step),
                Integrator::Rkl2 => max_step,
            };
            let h = if remaining <= h * T::lit(1.000001) { remaining } else { h };
            state = match config.integrator {
                Integrator::Heun => step_bounded(&state, h, bounds)?,
                Integrator::Rkl2 => {
                    // (s^2 + s - 2)/4 explicit steps fit in one s-stage step.
                    let ratio = (h / explicit).to_f64_lossy();
                    let s = ((-1.0 + (9.0 + 16.0 * ratio).sqrt()) / 2.0).ceil().max(2.0) as usize;
                    super_step(&state, h, s, bounds)?
                }
            };
            steps += 1;
        }
        record(&state, &mut rows)?;
        if target >= rho_max {
            break;
        }
        index += 1;
    }

    let pair = |r: &FlowRow<T>| r.mass.lorentz_dot(zeta.vector()).unwrap_or(T::nan());
    let last = rows.len() - 1;
    let values: Vec<T> = rows.iter().map(pair).collect();
    for i in 0..rows.len() {
        let (lo, hi) = if last == 0 {
            (0, 0)
        } else if i == 0 {
            (0, 1)
        } else if i == last {
            (last - 1, last)
        } else {
            (i - 1, i + 1)
        };
        rows[i].dmass_fd = if lo == hi {
            T::zero()
        } else {
            (values[hi] - values[lo]) / (rows[hi].rho - rows[lo].rho)
        };
    }

    let limit = extract_limits(&state.leaf, &tail);
    Ok(FlowTrace { rows, zeta: zeta.clone(), steps, final_state: state, limit })
}

/// [`run_observed`] without an observer.
pub fn run<T: Real>(
    state: FlowState<T>,
    config: &FlowConfig,
    ctx: &MassContext<T>,
    zeta: &NullDirection<T>,
) -> Result<FlowTrace<T>> {
    run_observed(state, config, ctx, zeta, |_| Ok(()))
}

/// The limit field `v` of a trace; errors when the run ended before
/// `rho = 4/k` or recorded too few rows.
pub fn extract_v<T: Real>(trace: &FlowTrace<T>) -> Result<&LimitFields<T>> {
    let k = trace.final_state.leaf.k();
    if trace.final_state.rho() < T::lit(4.0) / k {
        return Err(Error::InvalidInput("limit extraction needs a run reaching rho >= 4/k".into()));
    }
    trace.limit().ok_or_else(|| Error::InvalidInput("trace has fewer than three rows".into()))
}
