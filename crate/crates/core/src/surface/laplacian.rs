//! Conservative finite-volume Laplace-Beltrami operator on the chart grid.
//!
//! The operator is assembled from face fluxes `F = sqrt(g) g^{ab} d_b f`, so
//! `sum_i w_i (L f)_i` telescopes to zero and `L 1 = 0` holds exactly: only
//! off-diagonal entries are stored and rows are applied as
//! `sum_j L_ij (f_j - f_i)`.

use std::sync::Arc;

use super::grid::{Grid, Mode};
use crate::scalar::Real;

/// Face metric data feeding the flux stencil.
#[derive(Debug, Clone)]
pub(crate) enum FaceCoefficients<T> {
    /// `c[i]` multiplies `f_{i} - f_{i-1}` across the face below row `i`;
    /// `c[0]` and `c[n_theta]` are the polar faces and must be zero.
    Axisymmetric(Vec<T>),
    /// `theta[i * n_phi + j]` for the face between rows `i` and `i + 1`,
    /// holding `(sqrt(g) g^{tt}, sqrt(g) g^{tp})`; `phi[i * n_phi + j]` for
    /// the face between columns `j` and `j + 1`, holding
    /// `(sqrt(g) g^{pp}, sqrt(g) g^{tp})`.
    Full { theta: Vec<[T; 2]>, phi: Vec<[T; 2]> },
}

/// Sparsity pattern shared by every leaf on one grid.
#[derive(Debug)]
pub(crate) struct Pattern {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    /// CSR slot of every emitted contribution, `usize::MAX` for diagonal ones.
    slots: Vec<usize>,
}

impl Pattern {
    pub(crate) fn new(grid: &Grid) -> Self {
        let coeffs = match grid.mode {
            Mode::Axisymmetric => FaceCoefficients::Axisymmetric(vec![1.0f64; grid.n_theta + 1]),
            Mode::Full => FaceCoefficients::Full {
                theta: vec![[1.0, 1.0]; grid.len()],
                phi: vec![[1.0, 1.0]; grid.len()],
            },
        };
        let mut emitted = Vec::new();
        emit(grid, &coeffs, &mut |row, col, _| emitted.push((row, col)));
        let mut pairs: Vec<(usize, usize)> =
            emitted.iter().copied().filter(|(r, c)| r != c).collect();
        pairs.sort_unstable();
        pairs.dedup();
        let mut row_ptr = vec![0usize; grid.len() + 1];
        for &(r, _) in &pairs {
            row_ptr[r + 1] += 1;
        }
        for i in 0..grid.len() {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols: Vec<usize> = pairs.iter().map(|&(_, c)| c).collect();
        let slots = emitted
            .iter()
            .map(|&(r, c)| {
                if r == c {
                    usize::MAX
                } else {
                    let span = &cols[row_ptr[r]..row_ptr[r + 1]];
                    row_ptr[r] + span.binary_search(&c).expect("pattern contains entry")
                }
            })
            .collect();
        Self { row_ptr, cols, slots }
    }
}

/// Emits `(row, col, value)` contributions of the unnormalized divergence
/// operator `M` with `(L f)_row = (M f)_row / w_row`.
fn emit<T: Real>(grid: &Grid, coeffs: &FaceCoefficients<T>, sink: &mut impl FnMut(usize, usize, T)) {
    match coeffs {
        FaceCoefficients::Axisymmetric(c) => {
            for i in 0..grid.n_theta - 1 {
                let v = c[i + 1];
                sink(i, i + 1, v);
                sink(i, i, -v);
                sink(i + 1, i + 1, -v);
                sink(i + 1, i, v);
            }
        }
        FaceCoefficients::Full { theta, phi } => {
            let dt: T = grid.dtheta();
            let dp: T = grid.dphi();
            let quarter = T::lit(0.25);
            let (nt, np) = (grid.n_theta as isize, grid.n_phi as isize);
            let at = |i: isize, j: isize| grid.neighbor(i, j).node;
            for i in 0..nt - 1 {
                for j in 0..np {
                    let [a, b] = theta[grid.node(i as usize, j as usize)];
                    let a = a * dp / dt;
                    let b = b * quarter;
                    let terms = [
                        (at(i + 1, j), a),
                        (at(i, j), -a),
                        (at(i, j + 1), b),
                        (at(i, j - 1), -b),
                        (at(i + 1, j + 1), b),
                        (at(i + 1, j - 1), -b),
                    ];
                    let (lo, hi) = (at(i, j), at(i + 1, j));
                    for &(col, v) in &terms {
                        sink(lo, col, v);
                    }
                    for &(col, v) in &terms {
                        sink(hi, col, -v);
                    }
                }
            }
            for i in 0..nt {
                for j in 0..np {
                    let [c, d] = phi[grid.node(i as usize, j as usize)];
                    let c = c * dt / dp;
                    let d = d * quarter;
                    let terms = [
                        (at(i, j + 1), c),
                        (at(i, j), -c),
                        (at(i + 1, j), d),
                        (at(i - 1, j), -d),
                        (at(i + 1, j + 1), d),
                        (at(i - 1, j + 1), -d),
                    ];
                    let (lo, hi) = (at(i, j), at(i, j + 1));
                    for &(col, v) in &terms {
                        sink(lo, col, v);
                    }
                    for &(col, v) in &terms {
                        sink(hi, col, -v);
                    }
                }
            }
        }
    }
}

/// Assembled Laplace-Beltrami operator of one leaf.
#[derive(Debug, Clone)]
pub struct Laplacian<T> {
    pattern: Arc<Pattern>,
    values: Vec<T>,
    weights: Vec<T>,
    gershgorin: Vec<T>,
}

impl<T: Real> Laplacian<T> {
    pub(crate) fn assemble(
        pattern: Arc<Pattern>,
        grid: &Grid,
        coeffs: &FaceCoefficients<T>,
        weights: Vec<T>,
    ) -> Self {
        let mut values = vec![T::zero(); pattern.cols.len()];
        let mut t = 0usize;
        emit(grid, coeffs, &mut |row, _col, v| {
            let slot = pattern.slots[t];
            t += 1;
            if slot != usize::MAX {
                values[slot] = values[slot] + v / weights[row];
            }
        });
        debug_assert_eq!(t, pattern.slots.len());
        let gershgorin = (0..grid.len())
            .map(|i| {
                let row = &values[pattern.row_ptr[i]..pattern.row_ptr[i + 1]];
                let sum = row.iter().fold(T::zero(), |a, &v| a + v);
                let abs = row.iter().fold(T::zero(), |a, &v| a + v.abs());
                sum.abs() + abs
            })
            .collect();
        Self { pattern, values, weights, gershgorin }
    }

    /// Area weight `dSigma` of every node.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Gershgorin bound on the magnitude of row `i`'s eigenvalue disc.
    pub fn gershgorin(&self) -> &[T] {
        &self.gershgorin
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `out = L f`.
    pub fn apply_into(&self, f: &[T], out: &mut [T]) {
        let p = &self.pattern;
        for (i, o) in out.iter_mut().enumerate() {
            let fi = f[i];
            let mut acc = T::zero();
            for s in p.row_ptr[i]..p.row_ptr[i + 1] {
                acc = acc + self.values[s] * (f[p.cols[s]] - fi);
            }
            *o = acc;
        }
    }

    pub fn apply(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); f.len()];
        self.apply_into(f, &mut out);
        out
    }

    /// Dense copy of the operator, diagonal included. Test helper.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.len();
        let p = &self.pattern;
        let mut m = vec![vec![T::zero(); n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for s in p.row_ptr[i]..p.row_ptr[i + 1] {
                row[p.cols[s]] = row[p.cols[s]] + self.values[s];
                row[i] = row[i] - self.values[s];
            }
        }
        m
    }
}
