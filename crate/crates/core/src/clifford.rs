//! Complex Clifford matrices `c_1..c_n` with `c_i c_j + c_j c_i = -2 delta_ij`,
//! Killing spinors on the ball model, the map `a -> zeta_a` onto future null
//! vectors with a constructive inverse, and the hypersurface Dirac identity
//! on geodesic spheres.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hyperbolic::{ball_to_hyperboloid, BallPoint, MinkowskiVector};
use crate::scalar::Real;

/// Dense square complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// 2x2 matrix from rows.
    fn two(rows: [[Complex<T>; 2]; 2]) -> Self {
        Self { dim: 2, data: vec![rows[0][0], rows[0][1], rows[1][0], rows[1][1]] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        m
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let d = a * b;
        let mut m = Self::zeros(d);
        for i in 0..a {
            for j in 0..a {
                let s = self.data[i * a + j];
                if s == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        m.data[(i * b + k) * d + j * b + l] = s * other.data[k * b + l];
                    }
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                self.data[i * d..i * d + d]
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&m, &x)| acc + m * x)
            })
            .collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: Self) -> CMatrix<T> {
        let d = self.dim;
        let mut m = CMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                for j in 0..d {
                    m.data[i * d + j] = m.data[i * d + j] + a * rhs.data[k * d + j];
                }
            }
        }
        m
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: Self) -> CMatrix<T> {
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: Self) -> CMatrix<T> {
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect() }
    }
}

/// Element of `C^{2^m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spinor<T> {
    entries: Vec<Complex<T>>,
}

impl<T: Real> Spinor<T> {
    pub fn new(entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("spinor entries must be finite".into()));
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: vec![Complex::new(T::zero(), T::zero()); dim] }
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Hermitian product `<x, y> = sum x_i conj(y_i)`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&x, &y)| acc + x * y.conj())
    }

    pub fn norm_sq(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { entries: self.entries.iter().map(|&z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { entries: self.entries.iter().zip(&other.entries).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { entries: self.entries.iter().zip(&other.entries).map(|(&a, &b)| a - b).collect() }
    }

    /// `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut entries = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.entries {
            for &b in &other.entries {
                entries.push(a * b);
            }
        }
        Self { entries }
    }

    fn apply(m: &CMatrix<T>, s: &Self) -> Self {
        Self { entries: m.apply(&s.entries) }
    }
}

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `g_1 = diag(i, -i)`.
pub fn g1<T: Real>() -> CMatrix<T> {
    CMatrix::two([[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]])
}

/// `g_2 = [[0, i], [i, 0]]`.
pub fn g2<T: Real>() -> CMatrix<T> {
    CMatrix::two([[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

/// `T = [[0, -i], [i, 0]]`, with `T^2 = I` anticommuting with `g_1`, `g_2`.
pub fn t_matrix<T: Real>() -> CMatrix<T> {
    CMatrix::two([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

/// Clifford matrices `c_1..c_n` of size `2^{floor(n/2)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep<T> {
    n: usize,
    matrices: Vec<CMatrix<T>>,
}

/// Builds the representation: `{g_1, g_2}` for `n = 2`, `{g_1, g_2, iT}` for
/// `n = 3`, then
/// * odd `n = 2m+1` from `c_1..c_{2m-1}`: `I (x) c_j` for `j <= 2m-2`,
///   `-i g_1 (x) c_{2m-1}`, `-i g_2 (x) c_{2m-1}`, `T (x) c_{2m-1}`;
/// * even `n = 2m+2` from `c_1..c_{2m}`: `I (x) g_1`, `I (x) g_2`,
///   `c_j (x) T`.
pub fn build_clifford<T: Real>(n: usize) -> Result<CliffordRep<T>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("Clifford representation needs n >= 2, got {n}")));
    }
    let i = c::<T>(0.0, 1.0);
    let matrices = match n {
        2 => vec![g1(), g2()],
        3 => vec![g1(), g2(), t_matrix().scale(i)],
        _ if n % 2 == 1 => {
            let prev = build_clifford::<T>(n - 2)?.matrices;
            let last = &prev[n - 3];
            let id = CMatrix::identity(2);
            let mut out: Vec<CMatrix<T>> = prev[..n - 3].iter().map(|cj| id.kron(cj)).collect();
            out.push(g1::<T>().scale(-i).kron(last));
            out.push(g2::<T>().scale(-i).kron(last));
            out.push(t_matrix::<T>().kron(last));
            out
        }
        _ => {
            let prev = build_clifford::<T>(n - 2)?.matrices;
            let id = CMatrix::identity(prev[0].dim());
            let mut out = vec![id.kron(&g1()), id.kron(&g2())];
            out.extend(prev.iter().map(|cj| cj.kron(&t_matrix())));
            out
        }
    };
    Ok(CliffordRep { n, matrices })
}

impl<T: Real> CliffordRep<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Spinor dimension `2^{floor(n/2)}`.
    pub fn spinor_dim(&self) -> usize {
        self.matrices[0].dim()
    }

    /// `c_j = c(e_j)` for `j = 1..n`.
    pub fn matrix(&self, j: usize) -> &CMatrix<T> {
        &self.matrices[j - 1]
    }

    pub fn matrices(&self) -> &[CMatrix<T>] {
        &self.matrices
    }

    /// `c(v) = sum v_j c_j`.
    pub fn clifford_of(&self, v: &[T]) -> CMatrix<T> {
        let mut m = CMatrix::zeros(self.spinor_dim());
        for (vj, cj) in v.iter().zip(&self.matrices) {
            m = &m + &cj.scale(Complex::new(*vj, T::zero()));
        }
        m
    }

    /// `max_{i,j} |c_i c_j + c_j c_i + 2 delta_ij I|`.
    pub fn anticommutation_residual(&self) -> T {
        let id2 = CMatrix::identity(self.spinor_dim()).scale(c(2.0, 0.0));
        let mut worst = T::zero();
        for (a, ca) in self.matrices.iter().enumerate() {
            for (b, cb) in self.matrices.iter().enumerate().skip(a) {
                let mut s = &(ca * cb) + &(cb * ca);
                if a == b {
                    s = &s + &id2;
                }
                worst = worst.max(s.max_abs());
            }
        }
        worst
    }

    /// `max_j |i c_j - (i c_j)^*|`.
    pub fn self_adjoint_residual(&self) -> T {
        let i = c::<T>(0.0, 1.0);
        self.matrices
            .iter()
            .map(|cj| {
                let m = cj.scale(i);
                (&m - &m.adjoint()).max_abs()
            })
            .fold(T::zero(), T::max)
    }

    fn check_spinor(&self, a: &Spinor<T>) -> Result<()> {
        if a.dim() != self.spinor_dim() {
            return Err(Error::DimensionMismatch { expected: self.spinor_dim(), found: a.dim() });
        }
        Ok(())
    }
}

/// `zeta_a = (<i c_1 a, a>, ..., <i c_n a, a>, |a|^2)`.
pub fn zeta_of_a<T: Real>(rep: &CliffordRep<T>, a: &Spinor<T>) -> Result<MinkowskiVector<T>> {
    rep.check_spinor(a)?;
    let i = c::<T>(0.0, 1.0);
    let mut comps: Vec<T> = rep
        .matrices
        .iter()
        .map(|cj| Spinor::apply(cj, a).scale(i).inner(a).re)
        .collect();
    comps.push(a.norm_sq());
    Ok(MinkowskiVector::from_vec_unchecked(comps))
}

fn unit_spinor2<T: Real>(x: Complex<T>, y: Complex<T>) -> Spinor<T> {
    Spinor { entries: vec![x, y] }
}

/// Unit `a in C^2` with `zeta_a = (z, 1)` for the `n = 3` representation,
/// `z` a unit vector.
fn invert_three<T: Real>(z: &[T]) -> Spinor<T> {
    // |a_2|^2 - |a_1|^2 = z_1 and a_1 conj(a_2) = (-z_2 + i z_3) / 2.
    let half = T::lit(0.5);
    let w = Complex::new(-z[1] * half, z[2] * half);
    let p1 = ((T::one() - z[0]) * half).max(T::zero());
    let p2 = ((T::one() + z[0]) * half).max(T::zero());
    if p1 >= p2 {
        let a1 = p1.sqrt();
        unit_spinor2(Complex::new(a1, T::zero()), w.conj() / a1)
    } else {
        let a2 = p2.sqrt();
        unit_spinor2(w / a2, Complex::new(a2, T::zero()))
    }
}

/// Unit spinor with `zeta_a = (z, 1)`, `z` a unit vector of `R^n`.
fn invert<T: Real>(z: &[T]) -> Spinor<T> {
    let n = z.len();
    let norm = |v: &[T]| v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
    match n {
        2 => {
            // a = (-sin(theta/2), cos(theta/2)) for z = (cos theta, sin theta)
            let theta = z[1].atan2(z[0]);
            let h = theta * T::lit(0.5);
            unit_spinor2(Complex::new(-h.sin(), T::zero()), Complex::new(h.cos(), T::zero()))
        }
        3 => invert_three(z),
        _ if n % 2 == 1 => {
            // z = (y, y_{n-2} w) with w in S^2; a (x) b where eta(a) = -w.
            let rest = &z[n - 3..];
            let s = norm(rest);
            let w: Vec<T> = if s > T::zero() {
                rest.iter().map(|&x| -x / s).collect()
            } else {
                vec![-T::one(), T::zero(), T::zero()]
            };
            let mut y = z[..n - 3].to_vec();
            y.push(s);
            invert_three(&w).kron(&invert(&y))
        }
        _ => {
            // z = (z_1, z_2, z_3 y) with y in S^{n-3}; a (x) b where
            // eta(b) = (z_1, z_2, -z_3) and zeta(a) = y.
            let rest = &z[2..];
            let s = norm(rest);
            let y: Vec<T> = if s > T::zero() {
                rest.iter().map(|&x| x / s).collect()
            } else {
                let mut e = vec![T::zero(); n - 2];
                e[0] = T::one();
                e
            };
            invert(&y).kron(&invert_three(&[z[0], z[1], -s]))
        }
    }
}

/// Unit spinor `a` with `zeta_a = zeta`, for a future null `zeta` (rescaled
/// to unit time component first).
pub fn a_of_null<T: Real>(rep: &CliffordRep<T>, zeta: &MinkowskiVector<T>) -> Result<Spinor<T>> {
    if zeta.dim() != rep.n() {
        return Err(Error::DimensionMismatch { expected: rep.n() + 1, found: zeta.dim() + 1 });
    }
    let t = zeta.time();
    if !(t > T::zero()) {
        return Err(Error::InvalidInput(format!("null vector must be future pointing, got t = {t}")));
    }
    let z: Vec<T> = zeta.spatial().iter().map(|&x| x / t).collect();
    let q = z.iter().fold(T::zero(), |a, &x| a + x * x) - T::one();
    if q.abs() > T::tol(1e-10) {
        return Err(Error::NotNull { residual: q.to_f64_lossy() });
    }
    // Project onto the unit sphere to absorb rounding in the input.
    let s = (q + T::one()).sqrt();
    let z: Vec<T> = z.iter().map(|&x| x / s).collect();
    Ok(invert(&z))
}

/// `phi_a(x) = sqrt(2 / (1 - |x|^2)) (a - i c(x) a)` on the unit ball model.
pub fn killing_spinor<T: Real>(rep: &CliffordRep<T>, a: &Spinor<T>, x: &BallPoint<T>) -> Result<Spinor<T>> {
    rep.check_spinor(a)?;
    if x.coords().len() != rep.n() {
        return Err(Error::DimensionMismatch { expected: rep.n(), found: x.coords().len() });
    }
    let cx = rep.clifford_of(x.coords());
    let ica = Spinor::apply(&cx, a).scale(c(0.0, 1.0));
    let f = (T::lit(2.0) / (T::one() - x.norm_squared())).sqrt();
    Ok(a.sub(&ica).scale(Complex::new(f, T::zero())))
}

/// `| |phi_a(x)|^2 + 2k <X, zeta_a>_L |` with `X` the hyperboloid point of
/// curvature `-k^2` corresponding to `x`.
pub fn verify_norm_identity<T: Real>(rep: &CliffordRep<T>, a: &Spinor<T>, x: &BallPoint<T>, k: T) -> Result<T> {
    let phi = killing_spinor(rep, a, x)?;
    let zeta = zeta_of_a(rep, a)?;
    let xh = ball_to_hyperboloid(x, k)?;
    let rhs = -T::lit(2.0) * k * xh.vector().lorentz_dot(&zeta)?;
    Ok((phi.norm_sq() - rhs).abs())
}

/// Orthonormal frame `(e_1, ..., e_{n-1}, e_n)` at a point of a sphere about
/// the origin with `e_n` the outward radial direction; the tangent vectors
/// are mixed by `rotation` (an orthogonal `(n-1) x (n-1)` matrix) if given.
pub fn sphere_frame<T: Real>(direction: &[T], rotation: Option<&[Vec<T>]>) -> Result<Vec<Vec<T>>> {
    let n = direction.len();
    let norm = direction.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
    if !(norm > T::zero()) {
        return Err(Error::InvalidInput("frame direction must be nonzero".into()));
    }
    let en: Vec<T> = direction.iter().map(|&x| x / norm).collect();
    let mut basis: Vec<Vec<T>> = vec![en.clone()];
    for j in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![T::zero(); n];
        v[j] = T::one();
        for _ in 0..2 {
            for b in &basis {
                let d = v.iter().zip(b).fold(T::zero(), |a, (&x, &y)| a + x * y);
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi = *vi - d * bi;
                }
            }
        }
        let l = v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        if l > T::lit(1e-3) {
            basis.push(v.into_iter().map(|x| x / l).collect());
        }
    }
    let mut tangent: Vec<Vec<T>> = basis.split_off(1);
    if let Some(r) = rotation {
        if r.len() != n - 1 || r.iter().any(|row| row.len() != n - 1) {
            return Err(Error::DimensionMismatch { expected: n - 1, found: r.len() });
        }
        tangent = r
            .iter()
            .map(|row| {
                (0..n)
                    .map(|c| row.iter().zip(&tangent).fold(T::zero(), |a, (&w, t)| a + w * t[c]))
                    .collect()
            })
            .collect();
    }
    tangent.push(en);
    Ok(tangent)
}

/// Hypersurface Dirac operator `D^S psi = sum_a c(e_a) c(e_n) nabla^S_{e_a} psi`
/// on a round sphere with second fundamental form `h delta_ab`, where
/// `nabla_{e_a} psi = -(i/2) k c(e_a) psi` (Killing spinors) and
/// `nabla^S_{e_a} = nabla_{e_a} + (1/2) sum_b h_ab c(e_b) c(e_n)`.
pub fn sphere_dirac<T: Real>(rep: &CliffordRep<T>, frame: &[Vec<T>], h: T, k: T, psi: &Spinor<T>) -> Spinor<T> {
    let n = rep.n();
    let cn = rep.clifford_of(&frame[n - 1]);
    let cn_psi = Spinor::apply(&cn, psi);
    let half = T::lit(0.5);
    let mut out = Spinor::zeros(psi.dim());
    for e in &frame[..n - 1] {
        let ca = rep.clifford_of(e);
        let killing = Spinor::apply(&ca, psi).scale(Complex::new(T::zero(), -half * k));
        let shape = Spinor::apply(&ca, &cn_psi).scale(Complex::new(half * h, T::zero()));
        let nabla = killing.add(&shape);
        let term = Spinor::apply(&ca, &Spinor::apply(&cn, &nabla));
        out = out.add(&term);
    }
    out
}

/// Boundary operator `B psi = -D^S psi - (H/2) psi - (i/2) k (n-1) c(e_n) psi`.
pub fn boundary_operator<T: Real>(
    rep: &CliffordRep<T>,
    frame: &[Vec<T>],
    h: T,
    mean_curvature: T,
    k: T,
    psi: &Spinor<T>,
) -> Spinor<T> {
    let n = rep.n();
    let half = T::lit(0.5);
    let d = sphere_dirac(rep, frame, h, k, psi);
    let cn_psi = Spinor::apply(&rep.clifford_of(&frame[n - 1]), psi);
    d.scale(c(-1.0, 0.0))
        .sub(&psi.scale(Complex::new(half * mean_curvature, T::zero())))
        .sub(&cn_psi.scale(Complex::new(T::zero(), half * k * T::of(n - 1))))
}

/// `|D^S phi + (H_0/2) phi + (i (n-1) k / 2) c(e_n) phi|` for the Killing
/// spinor `phi_a` at the point of the geodesic sphere of radius `r` (about
/// the ball origin) in direction `direction`, with
/// `h_ab = k coth(k r) delta_ab` and `H_0 = (n-1) k coth(k r)`. Returns the
/// residual and `|phi|`.
pub fn dirac_identity_check<T: Real>(
    rep: &CliffordRep<T>,
    r: T,
    k: T,
    a: &Spinor<T>,
    direction: &[T],
    rotation: Option<&[Vec<T>]>,
) -> Result<(T, T)> {
    let n = rep.n();
    if direction.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: direction.len() });
    }
    if !(r > T::zero()) || !(k > T::zero()) {
        return Err(Error::InvalidInput("sphere radius and k must be positive".into()));
    }
    let frame = sphere_frame(direction, rotation)?;
    // |x| = tanh(k r / 2) on the unit ball model.
    let rad = (k * r * T::lit(0.5)).tanh();
    let x = BallPoint::new(frame[n - 1].iter().map(|&e| e * rad).collect())?;
    let phi = killing_spinor(rep, a, &x)?;
    let h = k / (k * r).tanh();
    let h0 = T::of(n - 1) * h;
    let b = boundary_operator(rep, &frame, h, h0, k, &phi);
    Ok((b.norm_sq().sqrt(), phi.norm_sq().sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spinor(v: &[(f64, f64)]) -> Spinor<f64> {
        Spinor::new(v.iter().map(|&(r, i)| Complex::new(r, i)).collect()).unwrap()
    }

    #[test]
    fn dimensions_follow_floor_half() {
        for (n, d) in [(2, 2), (3, 2), (4, 4), (5, 4), (6, 8), (7, 8), (8, 16)] {
            let rep = build_clifford::<f64>(n).unwrap();
            assert_eq!(rep.spinor_dim(), d);
            assert_eq!(rep.matrices().len(), n);
        }
        assert!(build_clifford::<f64>(1).is_err());
    }

    #[test]
    fn relations_hold_exactly() {
        for n in 2..=9 {
            let rep = build_clifford::<f64>(n).unwrap();
            assert_eq!(rep.anticommutation_residual(), 0.0, "n = {n}");
            assert_eq!(rep.self_adjoint_residual(), 0.0, "n = {n}");
        }
    }

    #[test]
    fn base_spinors_in_three_dimensions() {
        let rep = build_clifford::<f64>(3).unwrap();
        let z = zeta_of_a(&rep, &spinor(&[(1.0, 0.0), (0.0, 0.0)])).unwrap();
        assert_eq!(z.components(), &[-1.0, 0.0, 0.0, 1.0]);
        let z = zeta_of_a(&rep, &spinor(&[(0.0, 0.0), (1.0, 0.0)])).unwrap();
        assert_eq!(z.components(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn inverse_round_trips_axes() {
        for n in 2..=7 {
            let rep = build_clifford::<f64>(n).unwrap();
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; n];
                    v[i] = s;
                    let zeta = MinkowskiVector::from_parts(&v, 1.0);
                    let a = a_of_null(&rep, &zeta).unwrap();
                    let back = zeta_of_a(&rep, &a).unwrap();
                    for (x, y) in back.components().iter().zip(zeta.components()) {
                        assert!((x - y).abs() < 1e-14, "n = {n}, axis {i}, sign {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_rejects_non_null() {
        let rep = build_clifford::<f64>(3).unwrap();
        let v = MinkowskiVector::from_parts(&[0.5, 0.0, 0.0], 1.0);
        assert!(matches!(a_of_null(&rep, &v), Err(Error::NotNull { .. })));
        let v = MinkowskiVector::from_parts(&[1.0, 0.0, 0.0], -1.0);
        assert!(a_of_null(&rep, &v).is_err());
    }

    #[test]
    fn killing_spinor_at_origin_is_scaled_a() {
        let rep = build_clifford::<f64>(4).unwrap();
        let a = spinor(&[(0.3, 0.1), (0.0, -0.2), (0.5, 0.0), (0.1, 0.4)]);
        let phi = killing_spinor(&rep, &a, &BallPoint::new(vec![0.0; 4]).unwrap()).unwrap();
        for (p, q) in phi.entries().iter().zip(a.entries()) {
            assert!((p - q * 2f64.sqrt()).norm() < 1e-15);
        }
    }

    #[test]
    fn norm_identity_at_sample_point() {
        let rep = build_clifford::<f64>(3).unwrap();
        let a = spinor(&[(0.6, -0.2), (0.1, 0.7)]);
        let x = BallPoint::new(vec![0.2, -0.5, 0.4]).unwrap();
        for k in [0.5, 1.0, 3.0] {
            assert!(verify_norm_identity(&rep, &a, &x, k).unwrap() < 1e-13);
        }
    }

    #[test]
    fn sphere_frame_is_orthonormal() {
        let f = sphere_frame(&[1.0, 2.0, -0.5, 0.3], None).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = f[i].iter().zip(&f[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dirac_identity_on_sphere() {
        let rep = build_clifford::<f64>(5).unwrap();
        let a = Spinor::new((0..4).map(|i| Complex::new(0.1 * i as f64, 0.3 - 0.05 * i as f64)).collect()).unwrap();
        let (res, norm) = dirac_identity_check(&rep, 0.8, 1.3, &a, &[0.2, -0.4, 0.1, 0.7, 0.3], None).unwrap();
        assert!(res < 1e-13 * norm.max(1.0), "residual {res}");
    }

    #[test]
    fn single_precision_builds() {
        let rep = build_clifford::<f32>(4).unwrap();
        assert_eq!(rep.anticommutation_residual(), 0.0);
    }
}
