//! The mass vector `m(Omega, zeta) = int (H_0 - H) W . zeta` with
//! `W = (x_1, ..., x_n, alpha t)`, its derivative along the flow and the
//! pointwise inequalities behind its sign.
//!
//! On axisymmetric leaves a node stands for an `S^{n-2}` orbit. Integrals
//! over an orbit of anything linear in the orbit direction vanish, so
//! quadratures pair with the projection of `zeta` onto the symmetry axis,
//! while pointwise checks are evaluated at the two orbit points where the
//! pairing with `zeta` is extremal.

use crate::error::{Error, Result};
use crate::flow::{FlowState, FlowTrace};
use crate::hyperbolic::MinkowskiVector;
use crate::scalar::Real;
use crate::surface::{Mode, SurfaceLeaf};

/// Radii of the geodesic balls about `o` pinching `Sigma_0`, and the
/// constants of the weighted position vector `W`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MassContext<T> {
    pub r1: T,
    pub r2: T,
    pub alpha: T,
    pub mu: T,
    pub k: T,
}

impl<T: Real> MassContext<T> {
    /// `mu = sqrt(sinh^2(k R2) / sinh^2(k R1) - 1) / sinh(k R1)` and
    /// `alpha = coth(k R1) + mu`.
    pub fn new(k: T, r1: T, r2: T) -> Result<Self> {
        if !(k > T::zero()) || !(r1 > T::zero()) || !(r2 >= r1) || !r2.is_finite() {
            return Err(Error::InvalidInput(format!(
                "need k > 0 and 0 < R1 <= R2, got k = {k}, R1 = {r1}, R2 = {r2}"
            )));
        }
        let (s1, s2) = ((k * r1).sinh(), (k * r2).sinh());
        let ratio = s2 / s1;
        let mu = (ratio * ratio - T::one()).max(T::zero()).sqrt() / s1;
        let alpha = T::one() / (k * r1).tanh() + mu;
        Ok(Self { r1, r2, alpha, mu, k })
    }
}

/// `R1 = min r`, `R2 = max r` over the nodes of `leaf` (meant to be
/// `Sigma_0`).
pub fn compute_context<T: Real>(leaf: &SurfaceLeaf<T>) -> Result<MassContext<T>> {
    let radii = leaf.radii();
    let r1 = radii.iter().copied().fold(T::infinity(), T::min);
    let r2 = radii.iter().copied().fold(T::zero(), T::max);
    MassContext::new(leaf.k(), r1, r2)
}

/// Future null vector normalized to `t = 1`, so its spatial part is a unit
/// vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDirection<T> {
    zeta: MinkowskiVector<T>,
}

impl<T: Real> NullDirection<T> {
    /// Normalizes a future null vector to unit time component.
    pub fn new(zeta: MinkowskiVector<T>) -> Result<Self> {
        let t = zeta.time();
        if !(t > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "null direction must be future pointing, got t = {t}"
            )));
        }
        let z = zeta.scale(T::one() / t);
        let q = z.lorentz_dot(&z)?;
        if q.abs() > T::tol(1e-12) {
            return Err(Error::NotNull { residual: q.to_f64_lossy() });
        }
        Ok(Self { zeta: z })
    }

    /// `(s / |s|, 1)` for a nonzero spatial direction `s`.
    pub fn from_spatial(s: &[T]) -> Result<Self> {
        let norm = s.iter().fold(T::zero(), |a, &c| a + c * c).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::InvalidInput("null direction needs a nonzero spatial part".into()));
        }
        let spatial: Vec<T> = s.iter().map(|&c| c / norm).collect();
        Ok(Self { zeta: MinkowskiVector::from_parts(&spatial, T::one()) })
    }

    pub fn vector(&self) -> &MinkowskiVector<T> {
        &self.zeta
    }

    pub fn spatial(&self) -> &[T] {
        self.zeta.spatial()
    }

    pub fn dim(&self) -> usize {
        self.zeta.dim()
    }
}

fn check_dim<T: Real>(leaf: &SurfaceLeaf<T>, v: &MinkowskiVector<T>) -> Result<()> {
    if v.dim() != leaf.n() {
        return Err(Error::DimensionMismatch { expected: leaf.n() + 1, found: v.dim() + 1 });
    }
    Ok(())
}

/// Orbit average of a vector field paired with `v`: the orbit components
/// of `v` drop out. Identity on full grids.
fn axis_projection<T: Real>(leaf: &SurfaceLeaf<T>, v: &MinkowskiVector<T>) -> MinkowskiVector<T> {
    match leaf.grid().mode {
        Mode::Full => v.clone(),
        Mode::Axisymmetric => {
            let n = leaf.n();
            let mut p = MinkowskiVector::zero(n);
            p[0] = v[0];
            p[n] = v[n];
            p
        }
    }
}

/// Orbit points (unit vectors of `S^{n-2}`) where the pairing with `v` is
/// extremal; one point on full grids.
fn extremal_orbits<T: Real>(leaf: &SurfaceLeaf<T>, v: &MinkowskiVector<T>) -> Vec<Option<Vec<T>>> {
    match leaf.grid().mode {
        Mode::Full => vec![None],
        Mode::Axisymmetric => {
            let n = leaf.n();
            let orbit = &v.components()[1..n];
            let norm = orbit.iter().fold(T::zero(), |a, &c| a + c * c).sqrt();
            let z: Vec<T> = if norm > T::zero() {
                orbit.iter().map(|&c| c / norm).collect()
            } else {
                let mut e = vec![T::zero(); n - 1];
                e[0] = T::one();
                e
            };
            let minus: Vec<T> = z.iter().map(|&c| -c).collect();
            vec![Some(z), Some(minus)]
        }
    }
}

/// `H_0 - H = H_0 (u - 1) / u` per node.
fn mean_curvature_gap<T: Real>(state: &FlowState<T>) -> Vec<T> {
    let h0 = state.leaf().mean_curvature();
    h0.iter().zip(state.u().iter().zip(state.excess())).map(|(&h, (&u, &e))| h * e / u).collect()
}

/// `m = int (H_0 - H) W dSigma` as a vector of `R^{n,1}`, so that
/// `m(Omega, zeta) = <m, zeta>_L`.
pub fn mass_vector<T: Real>(state: &FlowState<T>, ctx: &MassContext<T>) -> MinkowskiVector<T> {
    let leaf = state.leaf();
    let n = leaf.n();
    let d = leaf.reduced_dim();
    let gap = mean_curvature_gap(state);
    let mut m = MinkowskiVector::zero(n);
    for (node, (&f, &w)) in gap.iter().zip(leaf.area_weights()).enumerate() {
        let x = leaf.reduced_position(node);
        let fw = f * w;
        match leaf.grid().mode {
            Mode::Full => {
                for i in 0..n {
                    m[i] = m[i] + fw * x[i];
                }
            }
            Mode::Axisymmetric => m[0] = m[0] + fw * x[0],
        }
        m[n] = m[n] + fw * ctx.alpha * x[d - 1];
    }
    m
}

/// `m(Omega_rho, zeta)` on the current leaf.
pub fn mass_pairing<T: Real>(state: &FlowState<T>, ctx: &MassContext<T>, zeta: &NullDirection<T>) -> Result<T> {
    check_dim(state.leaf(), zeta.vector())?;
    mass_vector(state, ctx).lorentz_dot(zeta.vector())
}

/// `int (H_0 - H) cosh(k r) dSigma`.
pub fn cosh_mass<T: Real>(state: &FlowState<T>) -> T {
    let leaf = state.leaf();
    let k = leaf.k();
    let gap = mean_curvature_gap(state);
    let f: Vec<T> = gap.iter().zip(leaf.radii()).map(|(&g, &r)| g * (k * r).cosh()).collect();
    leaf.integrate(&f)
}

/// Pointwise integrand of the mass derivative,
/// `B = (H_0^2 - |A|^2)(phi sinh kr - alpha cosh kr)/2
///    + k H_0 (phi cosh kr r' + sinh kr phi' / k - alpha sinh kr r')`,
/// with `phi = Y . zeta`, `r' = dr/drho`, `phi' = dphi/drho` taken along the
/// normal geodesic. Arguments are full `(n+1)`-vectors.
#[allow(clippy::too_many_arguments)]
pub fn integrand_b_point<T: Real>(x: &[T], normal: &[T], h0: T, shape_sq: T, alpha: T, k: T, zeta: &[T]) -> T {
    let n = x.len() - 1;
    let s = x[..n].iter().fold(T::zero(), |a, &c| a + c * c).sqrt();
    let sh = k * s;
    let ch = k * x[n];
    let mut phi = T::zero();
    let mut y_dot_n = T::zero();
    let mut zeta_dot_n = T::zero();
    for i in 0..n {
        let y = x[i] / s;
        phi = phi + y * zeta[i];
        y_dot_n = y_dot_n + y * normal[i];
        zeta_dot_n = zeta_dot_n + zeta[i] * normal[i];
    }
    let dr = normal[n] / sh;
    let dphi = (zeta_dot_n - phi * y_dot_n) * k / sh;
    let half = T::lit(0.5);
    half * (h0 * h0 - shape_sq) * (phi * sh - alpha * ch)
        + k * h0 * (phi * ch * dr + sh * dphi / k - alpha * sh * dr)
}

fn b_at<T: Real>(
    state: &FlowState<T>,
    ctx: &MassContext<T>,
    zeta: &MinkowskiVector<T>,
    node: usize,
    orbit: Option<&[T]>,
) -> T {
    let leaf = state.leaf();
    let x = leaf.lift(leaf.reduced_position(node), orbit);
    let nv = leaf.lift(leaf.reduced_normal(node), orbit);
    integrand_b_point(
        x.components(),
        nv.components(),
        leaf.mean_curvature()[node],
        leaf.shape_norm_sq()[node],
        ctx.alpha,
        ctx.k,
        zeta.components(),
    )
}

/// Largest value of `B` over the points a node represents.
pub fn integrand_b<T: Real>(
    state: &FlowState<T>,
    ctx: &MassContext<T>,
    zeta: &NullDirection<T>,
    node: usize,
) -> Result<T> {
    check_dim(state.leaf(), zeta.vector())?;
    if node >= state.leaf().len() {
        return Err(Error::InvalidInput(format!("node {node} out of range")));
    }
    let orbits = extremal_orbits(state.leaf(), zeta.vector());
    Ok(orbits
        .iter()
        .map(|z| b_at(state, ctx, zeta.vector(), node, z.as_deref()))
        .fold(T::neg_infinity(), T::max))
}

/// [`integrand_b`] at every node.
pub fn integrand_b_field<T: Real>(state: &FlowState<T>, ctx: &MassContext<T>, zeta: &NullDirection<T>) -> Result<Vec<T>> {
    (0..state.leaf().len()).map(|node| integrand_b(state, ctx, zeta, node)).collect()
}

/// `d m(Omega_rho, zeta) / d rho = -int u^{-1} (u-1)^2 B / k dSigma`.
pub fn mass_derivative_analytic<T: Real>(
    state: &FlowState<T>,
    ctx: &MassContext<T>,
    zeta: &NullDirection<T>,
) -> Result<T> {
    let leaf = state.leaf();
    check_dim(leaf, zeta.vector())?;
    let projected = axis_projection(leaf, zeta.vector());
    let mut acc = T::zero();
    for (node, ((&u, &e), &w)) in state.u().iter().zip(state.excess()).zip(leaf.area_weights()).enumerate() {
        if e == T::zero() {
            continue;
        }
        let b = b_at(state, ctx, &projected, node, None);
        acc = acc - e * e / u * b / ctx.k * w;
    }
    Ok(acc)
}

/// Finite-difference slopes between two leaves and the slack of each
/// inequality (nonnegative when it holds).
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicReport<T> {
    /// `dr/drho` per node.
    pub dr: Vec<T>,
    /// Largest `|dphi/drho|` over the points a node represents.
    pub dphi: Vec<T>,
    /// `(1 - phi^2)(1 - r'^2) k^2 / sinh^2(kr) - phi'^2`.
    pub slack_angle: Vec<T>,
    /// `r' - sinh(k R1) / sinh(k R2)`.
    pub slack_radial: Vec<T>,
    /// `mu k r' - |phi'|`.
    pub slack_combined: Vec<T>,
}

impl<T: Real> GeodesicReport<T> {
    fn min(v: &[T]) -> T {
        v.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn min_slack_angle(&self) -> T {
        Self::min(&self.slack_angle)
    }

    pub fn min_slack_radial(&self) -> T {
        Self::min(&self.slack_radial)
    }

    pub fn min_slack_combined(&self) -> T {
        Self::min(&self.slack_combined)
    }

    /// Nodes where any slack is below `-tol`.
    pub fn violations(&self, tol: T) -> Vec<usize> {
        (0..self.dr.len())
            .filter(|&i| {
                self.slack_angle[i] < -tol || self.slack_radial[i] < -tol || self.slack_combined[i] < -tol
            })
            .collect()
    }
}

/// Checks `dr/drho >= sinh(k R1)/sinh(k R2)`, `|dphi/drho| <= mu k dr/drho`
/// and the angular bound they come from, by central differences between
/// two leaves of one foliation (evaluated at the midpoint parameter).
pub fn check_geodesic_inequalities<T: Real>(
    a: &SurfaceLeaf<T>,
    b: &SurfaceLeaf<T>,
    ctx: &MassContext<T>,
    zeta: &NullDirection<T>,
) -> Result<GeodesicReport<T>> {
    check_dim(a, zeta.vector())?;
    if a.len() != b.len() || a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let delta = b.rho() - a.rho();
    if !(delta > T::zero()) {
        return Err(Error::InvalidInput("leaves must be ordered by increasing rho".into()));
    }
    let k = ctx.k;
    let floor = (k * ctx.r1).sinh() / (k * ctx.r2).sinh();
    let orbits = extremal_orbits(a, zeta.vector());
    let zs = zeta.spatial();
    let phi_of = |leaf: &SurfaceLeaf<T>, node: usize, z: Option<&[T]>| {
        let x = leaf.lift(leaf.reduced_position(node), z);
        let s = x.spatial().iter().fold(T::zero(), |acc, &c| acc + c * c).sqrt();
        x.spatial().iter().zip(zs).fold(T::zero(), |acc, (&xi, &zi)| acc + xi * zi) / s
    };
    let len = a.len();
    let mut report = GeodesicReport {
        dr: Vec::with_capacity(len),
        dphi: Vec::with_capacity(len),
        slack_angle: Vec::with_capacity(len),
        slack_radial: Vec::with_capacity(len),
        slack_combined: Vec::with_capacity(len),
    };
    let half = T::lit(0.5);
    for node in 0..len {
        let (ra, rb) = (a.radii()[node], b.radii()[node]);
        let dr = (rb - ra) / delta;
        let r_mid = (ra + rb) * half;
        let sh = (k * r_mid).sinh();
        let mut dphi_max = T::zero();
        let mut angle = T::infinity();
        for z in &orbits {
            let (pa, pb) = (phi_of(a, node, z.as_deref()), phi_of(b, node, z.as_deref()));
            let dphi = (pb - pa) / delta;
            let phi = (pa + pb) * half;
            let bound = (T::one() - phi * phi) * (T::one() - dr * dr) * k * k / (sh * sh);
            angle = angle.min(bound - dphi * dphi);
            dphi_max = dphi_max.max(dphi.abs());
        }
        report.slack_radial.push(dr - floor);
        report.slack_combined.push(ctx.mu * k * dr - dphi_max);
        report.slack_angle.push(angle);
        report.dr.push(dr);
        report.dphi.push(dphi_max);
    }
    Ok(report)
}

/// `int (H_0 - H)(-2k X . zeta_a) dSigma` on the current leaf.
pub fn tail_mass_value<T: Real>(state: &FlowState<T>, zeta_a: &MinkowskiVector<T>) -> Result<T> {
    let leaf = state.leaf();
    check_dim(leaf, zeta_a)?;
    let p = axis_projection(leaf, zeta_a);
    let gap = mean_curvature_gap(state);
    let k = leaf.k();
    let f: Vec<T> = (0..leaf.len())
        .map(|node| {
            let x = leaf.lift(leaf.reduced_position(node), None);
            -T::lit(2.0) * k * gap[node] * x.lorentz_dot(&p).unwrap_or(T::nan())
        })
        .collect();
    Ok(leaf.integrate(&f))
}

/// `-2(n-1)k^2 int v (gamma . zeta_a) dmu` from the limit fields of a trace.
pub fn limit_mass_formula<T: Real>(trace: &FlowTrace<T>, zeta_a: &MinkowskiVector<T>) -> Result<T> {
    let limit = trace
        .limit()
        .ok_or_else(|| Error::InvalidInput("trace has no limit fields".into()))?;
    let leaf = trace.final_state().leaf();
    check_dim(leaf, zeta_a)?;
    let p = axis_projection(leaf, zeta_a);
    let n = leaf.n();
    let k = leaf.k();
    let mut acc = T::zero();
    for node in 0..leaf.len() {
        let g = leaf.lift(&limit.gamma[node], None);
        acc = acc + limit.v[node] * g.lorentz_dot(&p)? * limit.dmu[node];
    }
    Ok(-T::lit(2.0) * T::of(n - 1) * k * k * acc)
}

/// Causal character of a vector of `R^{n,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    FutureNonspacelike,
    Spacelike,
    Past,
}

/// Classifies `m` with relative tolerance `1e-8`: future non-spacelike when
/// `<m,m>_L <= 1e-8 |m|^2` and `t >= -1e-8 |m|`.
pub fn classify_causal<T: Real>(m: &MinkowskiVector<T>) -> CausalClass {
    let norm = m.euclidean_norm();
    let tol = T::tol(1e-8);
    let q = m.lorentz_dot(m).unwrap_or(T::nan());
    if q > tol * norm * norm {
        CausalClass::Spacelike
    } else if m.time() >= -tol * norm {
        CausalClass::FutureNonspacelike
    } else {
        CausalClass::Past
    }
}
