//! Star-shaped closed hypersurfaces `Sigma_0` of `H^n`, given as radial graphs
//! `r(Y)` over `S^{n-1}` about `o`, and the equidistant leaves `Sigma_rho`
//! outside them.

mod grid;
mod laplacian;
mod leaf;
mod linalg;

use std::fmt;
use std::sync::Arc;

pub use grid::{sphere_area, Grid, Mode};
pub use laplacian::Laplacian;
pub use leaf::{
    advance_leaf, build_leaf, laplace_beltrami, riccati_curvature, scalar_curvature_extrinsic,
    verify_position_laplacian, verify_w_laplacian, LeafDiagnostics, SurfaceLeaf,
};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Radial profile `r(theta, phi)` of the initial surface. `theta` is the
/// angle from the `x_1` axis.
#[derive(Clone)]
pub enum Profile<T> {
    /// Geodesic sphere of radius `r0` centred at `o`.
    Sphere { r0: T },
    /// `r0 (1 + eps cos^2 theta)`.
    PerturbedSphere { r0: T, eps: T },
    /// Geodesic sphere of radius `radius` whose centre sits at distance
    /// `offset < radius` from `o` along `+x_1`.
    OffCenterSphere { radius: T, offset: T },
    /// `r0 (1 + eps sin^2 theta cos 2 phi)`; not axisymmetric.
    Harmonic { r0: T, eps: T },
    /// One radius per grid node, row-major in `(theta, phi)`.
    Table(Vec<T>),
    Custom(Arc<dyn Fn(T, T) -> T + Send + Sync>),
}

impl<T: fmt::Debug> fmt::Debug for Profile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Sphere { r0 } => write!(f, "Sphere {{ r0: {r0:?} }}"),
            Profile::PerturbedSphere { r0, eps } => {
                write!(f, "PerturbedSphere {{ r0: {r0:?}, eps: {eps:?} }}")
            }
            Profile::OffCenterSphere { radius, offset } => {
                write!(f, "OffCenterSphere {{ radius: {radius:?}, offset: {offset:?} }}")
            }
            Profile::Harmonic { r0, eps } => write!(f, "Harmonic {{ r0: {r0:?}, eps: {eps:?} }}"),
            Profile::Table(v) => write!(f, "Table(len = {})", v.len()),
            Profile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl<T: Real> Profile<T> {
    pub fn radius(&self, k: T, theta: T, phi: T) -> T {
        match self {
            Profile::Sphere { r0 } => *r0,
            Profile::PerturbedSphere { r0, eps } => {
                let c = theta.cos();
                *r0 * (T::one() + *eps * c * c)
            }
            Profile::OffCenterSphere { radius, offset } => {
                // cosh(kr)cosh(kd) - sinh(kr)sinh(kd)cos(theta) = cosh(kR)
                let a = (k * *offset).cosh();
                let b = (k * *offset).sinh() * theta.cos();
                let amp = (a * a - b * b).sqrt();
                let beta = (b / a).atanh();
                (beta + ((k * *radius).cosh() / amp).acosh()) / k
            }
            Profile::Harmonic { r0, eps } => {
                let s = theta.sin();
                *r0 * (T::one() + *eps * s * s * (T::lit(2.0) * phi).cos())
            }
            Profile::Table(_) => unreachable!("tabulated profiles are read per node"),
            Profile::Custom(f) => f(theta, phi),
        }
    }
}

/// What to do when the initial surface is not strictly convex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvexityPolicy {
    #[default]
    Warn,
    Enforce,
}

/// Everything needed to build `Sigma_0`.
#[derive(Debug, Clone)]
pub struct SurfaceSpec<T> {
    pub n: usize,
    pub k: T,
    pub grid: Grid,
    pub profile: Profile<T>,
    /// Rapidity of a boost along `x_1` applied after construction. Zero keeps
    /// the profile centred on `o`; nonzero moves `o` inside the surface.
    pub center_shift: T,
    pub convexity: ConvexityPolicy,
}

impl<T: Real> SurfaceSpec<T> {
    pub fn new(n: usize, k: T, grid: Grid, profile: Profile<T>) -> Result<Self> {
        let spec = Self {
            n,
            k,
            grid,
            profile,
            center_shift: T::zero(),
            convexity: ConvexityPolicy::Warn,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Axisymmetric spec with `n_theta` meridian nodes.
    pub fn axisymmetric(n: usize, k: T, n_theta: usize, profile: Profile<T>) -> Result<Self> {
        Self::new(n, k, Grid::new(Mode::Axisymmetric, n_theta, 1)?, profile)
    }

    /// Full latitude-longitude spec on `S^2` (`n = 3`).
    pub fn full(k: T, n_theta: usize, n_phi: usize, profile: Profile<T>) -> Result<Self> {
        Self::new(3, k, Grid::new(Mode::Full, n_theta, n_phi)?, profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidInput(format!("surface dimension needs n >= 3, got {}", self.n)));
        }
        if !(self.k > T::zero()) || !self.k.is_finite() {
            return Err(Error::InvalidInput(format!("k must be positive, got {}", self.k)));
        }
        if self.grid.mode == Mode::Full && self.n != 3 {
            return Err(Error::InvalidInput("full2sphere mode requires n = 3".into()));
        }
        match &self.profile {
            Profile::Harmonic { .. } if self.grid.mode == Mode::Axisymmetric => {
                return Err(Error::InvalidInput(
                    "harmonic profile is not axisymmetric; use full2sphere".into(),
                ));
            }
            Profile::OffCenterSphere { radius, offset } if !(offset.abs() < *radius) => {
                return Err(Error::InvalidInput(
                    "off-centre sphere must contain o (|offset| < radius)".into(),
                ));
            }
            Profile::Table(v) if v.len() != self.grid.len() => {
                return Err(Error::InvalidInput(format!(
                    "table has {} radii, grid has {} nodes",
                    v.len(),
                    self.grid.len()
                )));
            }
            _ => {}
        }
        if !self.center_shift.is_finite() {
            return Err(Error::InvalidInput("center_shift must be finite".into()));
        }
        Ok(())
    }

    /// Radius at grid node `(i, j)`.
    pub fn node_radius(&self, i: usize, j: usize) -> T {
        match &self.profile {
            Profile::Table(v) => v[self.grid.node(i, j)],
            p => p.radius(self.k, self.grid.theta(i), self.grid.phi(j)),
        }
    }
}
