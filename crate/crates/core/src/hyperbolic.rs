//! Hyperbolic space `H^n` of curvature `-k^2` as the upper sheet of the
//! hyperboloid `<X,X>_L = -1/k^2` in Minkowski space `R^{n,1}`.
//!
//! Vectors store the spatial components first and the time component last;
//! the Lorentz product is `sum(x_i y_i) - t s`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A vector in `R^{n,1}` with signature `(+, ..., +, -)`, time last.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct MinkowskiVector<T> {
    components: Vec<T>,
}

impl<T: Real> MinkowskiVector<T> {
    /// Builds a vector from `n + 1` components (`n >= 1`, time last).
    pub fn new(components: Vec<T>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "Minkowski vector needs at least 2 components, got {}",
                components.len()
            )));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite Minkowski component".into()));
        }
        Ok(Self { components })
    }

    pub(crate) fn from_vec_unchecked(components: Vec<T>) -> Self {
        Self { components }
    }

    pub fn zero(n: usize) -> Self {
        Self { components: vec![T::zero(); n + 1] }
    }

    /// Basis vector `e_i`; `i == n` is the time direction `e_0` of the
    /// usual physics notation.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.components[i] = T::one();
        v
    }

    /// Future time unit vector `(0, ..., 0, 1)`.
    pub fn time_unit(n: usize) -> Self {
        Self::basis(n, n)
    }

    /// Builds `(spatial, t)`.
    pub fn from_parts(spatial: &[T], t: T) -> Self {
        let mut components = spatial.to_vec();
        components.push(t);
        Self { components }
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        self.components.len() - 1
    }

    pub fn components(&self) -> &[T] {
        &self.components
    }

    pub fn spatial(&self) -> &[T] {
        &self.components[..self.dim()]
    }

    pub fn time(&self) -> T {
        self.components[self.dim()]
    }

    /// Lorentz product `sum u_i v_i - u_t v_t`.
    pub fn lorentz_dot(&self, other: &Self) -> Result<T> {
        if self.components.len() != other.components.len() {
            return Err(Error::DimensionMismatch {
                expected: self.components.len(),
                found: other.components.len(),
            });
        }
        Ok(lorentz_dot_slices(&self.components, &other.components))
    }

    /// Euclidean norm of the components, used for scale-relative tolerances.
    pub fn euclidean_norm(&self) -> T {
        self.components
            .iter()
            .fold(T::zero(), |acc, &c| acc + c * c)
            .sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { components: self.components.iter().map(|&c| c * s).collect() }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        debug_assert_eq!(self.components.len(), other.components.len());
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        }
    }
}

/// Lorentz product on raw component slices (time last).
#[inline]
pub fn lorentz_dot_slices<T: Real>(u: &[T], v: &[T]) -> T {
    debug_assert_eq!(u.len(), v.len());
    let last = u.len() - 1;
    let mut acc = T::zero();
    for i in 0..last {
        acc = acc + u[i] * v[i];
    }
    acc - u[last] * v[last]
}

impl<T> Index<usize> for MinkowskiVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.components[i]
    }
}

impl<T> IndexMut<usize> for MinkowskiVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.components[i]
    }
}

impl<T: Real> Add for &MinkowskiVector<T> {
    type Output = MinkowskiVector<T>;
    fn add(self, rhs: Self) -> MinkowskiVector<T> {
        self.combine(T::one(), rhs, T::one())
    }
}

impl<T: Real> Sub for &MinkowskiVector<T> {
    type Output = MinkowskiVector<T>;
    fn sub(self, rhs: Self) -> MinkowskiVector<T> {
        self.combine(T::one(), rhs, -T::one())
    }
}

impl<T: Real> Mul<T> for &MinkowskiVector<T> {
    type Output = MinkowskiVector<T>;
    fn mul(self, rhs: T) -> MinkowskiVector<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Neg for &MinkowskiVector<T> {
    type Output = MinkowskiVector<T>;
    fn neg(self) -> MinkowskiVector<T> {
        self.scale(-T::one())
    }
}

/// Free-function form of [`MinkowskiVector::lorentz_dot`].
pub fn lorentz_dot<T: Real>(u: &MinkowskiVector<T>, v: &MinkowskiVector<T>) -> Result<T> {
    u.lorentz_dot(v)
}

/// Point of `H^n_{-k^2}`: `<X,X>_L = -1/k^2`, `t > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperboloidPoint<T> {
    vector: MinkowskiVector<T>,
    k: T,
}

impl<T: Real> HyperboloidPoint<T> {
    /// Validates the hyperboloid constraint to relative `1e-12`.
    pub fn new(vector: MinkowskiVector<T>, k: T) -> Result<Self> {
        check_curvature(k)?;
        if vector.dim() < 2 {
            return Err(Error::InvalidInput("hyperbolic space needs n >= 2".into()));
        }
        let target = T::one() / (k * k);
        let q = lorentz_dot_slices(vector.components(), vector.components());
        let residual = (q + target).abs() / target;
        // Relative to the size of the components, since large-radius points
        // carry cancellation of order |X|^2 * eps.
        let scale = vector.euclidean_norm().powi(2) * k * k;
        if residual > T::tol(1e-12) * scale.max(T::one()) || vector.time() <= T::zero() {
            return Err(Error::NotOnHyperboloid { residual: residual.to_f64_lossy() });
        }
        Ok(Self { vector, k })
    }

    pub(crate) fn new_unchecked(vector: MinkowskiVector<T>, k: T) -> Self {
        Self { vector, k }
    }

    /// The base point `o = (0, ..., 0, 1/k)`.
    pub fn origin(n: usize, k: T) -> Self {
        let mut v = MinkowskiVector::zero(n);
        v[n] = T::one() / k;
        Self { vector: v, k }
    }

    pub fn vector(&self) -> &MinkowskiVector<T> {
        &self.vector
    }

    pub fn into_vector(self) -> MinkowskiVector<T> {
        self.vector
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }

    /// Geodesic polar coordinates about `o`.
    pub fn to_polar(&self) -> PolarCoords<T> {
        let k = self.k;
        let spatial = self.vector.spatial();
        let s = spatial.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        // asinh of the spatial radius is better conditioned than acosh(k t)
        // near the origin.
        let r = (k * s).asinh() / k;
        let direction = if s > T::zero() {
            spatial.iter().map(|&x| x / s).collect()
        } else {
            let mut e = vec![T::zero(); spatial.len()];
            e[0] = T::one();
            e
        };
        PolarCoords { r, direction }
    }
}

fn check_curvature<T: Real>(k: T) -> Result<()> {
    if !(k > T::zero()) || !k.is_finite() {
        return Err(Error::InvalidInput(format!("curvature scale k must be positive, got {k}")));
    }
    Ok(())
}

fn same_k<T: Real>(a: T, b: T) -> Result<()> {
    if (a - b).abs() > T::tol(1e-14) * a.abs().max(b.abs()) {
        return Err(Error::CurvatureMismatch { left: a.to_f64_lossy(), right: b.to_f64_lossy() });
    }
    Ok(())
}

/// Point of the unit ball model, `|x| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint<T> {
    x: Vec<T>,
}

impl<T: Real> BallPoint<T> {
    pub fn new(x: Vec<T>) -> Result<Self> {
        let norm = x.iter().fold(T::zero(), |a, &c| a + c * c).sqrt();
        if !(norm < T::one()) {
            return Err(Error::OutsideBall { norm: norm.to_f64_lossy() });
        }
        Ok(Self { x })
    }

    pub fn coords(&self) -> &[T] {
        &self.x
    }

    pub fn norm_squared(&self) -> T {
        self.x.iter().fold(T::zero(), |a, &c| a + c * c)
    }
}

/// Geodesic polar coordinates `(r, Y)` about `o`, `|Y| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCoords<T> {
    pub r: T,
    pub direction: Vec<T>,
}

impl<T: Real> PolarCoords<T> {
    pub fn new(r: T, direction: Vec<T>) -> Result<Self> {
        if r < T::zero() {
            return Err(Error::InvalidInput("polar radius must be >= 0".into()));
        }
        let norm = direction.iter().fold(T::zero(), |a, &c| a + c * c).sqrt();
        if (norm - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidInput(format!("polar direction has norm {norm}")));
        }
        Ok(Self { r, direction })
    }
}

/// `X = (sinh(kr) Y, cosh(kr)) / k`.
pub fn from_polar<T: Real>(p: &PolarCoords<T>, k: T) -> Result<HyperboloidPoint<T>> {
    check_curvature(k)?;
    if p.direction.len() < 2 {
        return Err(Error::InvalidInput("hyperbolic space needs n >= 2".into()));
    }
    let (sh, ch) = ((k * p.r).sinh() / k, (k * p.r).cosh() / k);
    let v = MinkowskiVector::from_parts(
        &p.direction.iter().map(|&y| y * sh).collect::<Vec<_>>(),
        ch,
    );
    HyperboloidPoint::new(v, k)
}

/// Ball model to hyperboloid: `X = (2x, 1 + |x|^2) / ((1 - |x|^2) k)`.
pub fn ball_to_hyperboloid<T: Real>(b: &BallPoint<T>, k: T) -> Result<HyperboloidPoint<T>> {
    check_curvature(k)?;
    if b.coords().len() < 2 {
        return Err(Error::InvalidInput("hyperbolic space needs n >= 2".into()));
    }
    let two = T::lit(2.0);
    let s = b.norm_squared();
    let denom = (T::one() - s) * k;
    let spatial: Vec<T> = b.coords().iter().map(|&x| two * x / denom).collect();
    let v = MinkowskiVector::from_parts(&spatial, (T::one() + s) / denom);
    Ok(HyperboloidPoint::new_unchecked(v, k))
}

/// Inverse of [`ball_to_hyperboloid`]: `x = k X_s / (1 + k t)`.
pub fn hyperboloid_to_ball<T: Real>(p: &HyperboloidPoint<T>) -> Result<BallPoint<T>> {
    let k = p.k();
    let denom = T::one() + k * p.vector().time();
    let x = p.vector().spatial().iter().map(|&c| k * c / denom).collect();
    BallPoint::new(x)
}

/// Geodesic distance, `cosh(k d) = -k^2 <X1, X2>_L`.
///
/// Arguments within `1e-9` below 1 are clamped; anything further below is an
/// error. The value itself is computed from the chord `|X1 - X2|_L`, which
/// keeps full precision for nearby points.
pub fn geodesic_distance<T: Real>(p: &HyperboloidPoint<T>, q: &HyperboloidPoint<T>) -> Result<T> {
    same_k(p.k(), q.k())?;
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim() + 1, found: q.dim() + 1 });
    }
    let k = p.k();
    let arg = -k * k * p.vector().lorentz_dot(q.vector())?;
    if arg < T::one() - T::tol(1e-9) * arg.abs().max(T::one()) {
        return Err(Error::ArccoshDomain { value: arg.to_f64_lossy() });
    }
    let diff = p.vector() - q.vector();
    let chord2 = lorentz_dot_slices(diff.components(), diff.components()).max(T::zero());
    Ok(T::lit(2.0) * (k * chord2.sqrt() / T::lit(2.0)).asinh() / k)
}

/// Moves `X0` a signed distance `rho` along the geodesic with initial unit
/// velocity `N0`:
/// `X = cosh(k rho) X0 + sinh(k rho) N0 / k`, `N = k sinh(k rho) X0 + cosh(k rho) N0`.
pub fn normal_flow<T: Real>(
    x0: &HyperboloidPoint<T>,
    n0: &MinkowskiVector<T>,
    rho: T,
) -> Result<(HyperboloidPoint<T>, MinkowskiVector<T>)> {
    if n0.dim() != x0.dim() {
        return Err(Error::DimensionMismatch { expected: x0.dim() + 1, found: n0.dim() + 1 });
    }
    let k = x0.k();
    let nn = n0.lorentz_dot(n0)?;
    let xn = x0.vector().lorentz_dot(n0)?;
    let scale = x0.vector().euclidean_norm() * n0.euclidean_norm() * k;
    if (nn - T::one()).abs() > T::tol(1e-10) * n0.euclidean_norm().powi(2).max(T::one()) {
        return Err(Error::NormalFrame(format!("<N,N> = {nn}, expected 1")));
    }
    if xn.abs() * k > T::tol(1e-10) * scale.max(T::one()) {
        return Err(Error::NormalFrame(format!("<X,N> = {xn}, expected 0")));
    }
    let (x, n) = flow_slices(x0.vector().components(), n0.components(), k, rho);
    Ok((
        HyperboloidPoint::new_unchecked(MinkowskiVector::from_vec_unchecked(x), k),
        MinkowskiVector::from_vec_unchecked(n),
    ))
}

/// Unchecked normal flow on raw slices.
pub(crate) fn flow_slices<T: Real>(x0: &[T], n0: &[T], k: T, rho: T) -> (Vec<T>, Vec<T>) {
    let (sh, ch) = ((k * rho).sinh(), (k * rho).cosh());
    let x = x0.iter().zip(n0).map(|(&x, &n)| ch * x + sh / k * n).collect();
    let n = x0.iter().zip(n0).map(|(&x, &n)| k * sh * x + ch * n).collect();
    (x, n)
}
