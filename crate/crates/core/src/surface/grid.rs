use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Discretization mode of a star-shaped surface over `S^{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Rotationally symmetric about the `x_1` axis; one meridian in any `n`.
    Axisymmetric,
    /// Full latitude-longitude grid on `S^2` (`n = 3` only).
    #[serde(rename = "full2sphere")]
    Full,
}

/// Cell-centred chart grid. Polar angle `theta` is measured from the `x_1`
/// axis, so no node sits on a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub mode: Mode,
    pub n_theta: usize,
    pub n_phi: usize,
}

/// Node referenced from a stencil, possibly through reflection across a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Neighbor {
    pub node: usize,
    /// Axisymmetric only: the neighbour is the node seen from the opposite
    /// side of the axis, so the orbit component changes sign.
    pub flipped: bool,
}

impl Grid {
    pub fn new(mode: Mode, n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 4 {
            return Err(Error::InvalidInput(format!("n_theta must be >= 4, got {n_theta}")));
        }
        let n_phi = match mode {
            Mode::Axisymmetric => 1,
            Mode::Full => {
                if n_phi < 4 || !n_phi.is_multiple_of(2) {
                    return Err(Error::InvalidInput(format!(
                        "n_phi must be even and >= 4, got {n_phi}"
                    )));
                }
                n_phi
            }
        };
        Ok(Self { mode, n_theta, n_phi })
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension of the reduced Minkowski space nodes live in: the meridian
    /// `R^{2,1}` for axisymmetric grids, `R^{3,1}` for full grids.
    pub fn reduced_dim(&self) -> usize {
        match self.mode {
            Mode::Axisymmetric => 3,
            Mode::Full => 4,
        }
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    #[inline]
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node / self.n_phi, node % self.n_phi)
    }

    pub fn dtheta<T: Real>(&self) -> T {
        T::lit(PI / self.n_theta as f64)
    }

    pub fn dphi<T: Real>(&self) -> T {
        T::lit(2.0 * PI / self.n_phi as f64)
    }

    pub fn theta<T: Real>(&self, i: usize) -> T {
        T::lit((i as f64 + 0.5) * PI / self.n_theta as f64)
    }

    pub fn phi<T: Real>(&self, j: usize) -> T {
        T::lit(j as f64 * 2.0 * PI / self.n_phi as f64)
    }

    /// Unit direction of node `(i, j)` in reduced spatial coordinates.
    pub fn direction<T: Real>(&self, i: usize, j: usize) -> Vec<T> {
        let th: T = self.theta(i);
        match self.mode {
            Mode::Axisymmetric => vec![th.cos(), th.sin()],
            Mode::Full => {
                let ph: T = self.phi(j);
                vec![th.cos(), th.sin() * ph.cos(), th.sin() * ph.sin()]
            }
        }
    }

    /// Node at row `i` (which may be `-1` or `n_theta`) and column `j`
    /// (taken modulo `n_phi`).
    pub(crate) fn neighbor(&self, i: isize, j: isize) -> Neighbor {
        let nt = self.n_theta as isize;
        let np = self.n_phi as isize;
        let wrap = |j: isize| j.rem_euclid(np) as usize;
        if i >= 0 && i < nt {
            return Neighbor { node: self.node(i as usize, wrap(j)), flipped: false };
        }
        let mirrored = if i < 0 { -1 - i } else { 2 * nt - 1 - i };
        match self.mode {
            Mode::Axisymmetric => Neighbor { node: self.node(mirrored as usize, 0), flipped: true },
            Mode::Full => Neighbor {
                node: self.node(mirrored as usize, wrap(j + np / 2)),
                flipped: false,
            },
        }
    }
}

/// Area of the unit sphere `S^m`.
pub fn sphere_area(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_area(m - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn pole_reflection() {
        let g = Grid::new(Mode::Full, 8, 16).unwrap();
        assert_eq!(g.neighbor(-1, 3), Neighbor { node: g.node(0, 11), flipped: false });
        assert_eq!(g.neighbor(8, 15), Neighbor { node: g.node(7, 7), flipped: false });
        assert_eq!(g.neighbor(2, -1).node, g.node(2, 15));
        let a = Grid::new(Mode::Axisymmetric, 8, 0).unwrap();
        assert_eq!(a.neighbor(-1, 0), Neighbor { node: 0, flipped: true });
        assert_eq!(a.neighbor(8, 0), Neighbor { node: 7, flipped: true });
    }

    #[test]
    fn rejects_odd_longitudes() {
        assert!(Grid::new(Mode::Full, 8, 15).is_err());
        assert!(Grid::new(Mode::Axisymmetric, 2, 1).is_err());
    }
}
