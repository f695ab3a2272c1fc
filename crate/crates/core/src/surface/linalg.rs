use crate::hyperbolic::lorentz_dot_slices;
use crate::scalar::Real;

/// Solves a small dense system in place by Gaussian elimination with partial
/// pivoting. Returns `None` for a numerically singular matrix.
pub(crate) fn solve_small<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() <= T::min_positive_value() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, &v) in bottom[0][col..n].iter_mut().zip(&top[col][col..n]) {
                *x = *x - f * v;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s = s - a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Unit spacelike vector Lorentz-orthogonal to `span` (the position and the
/// tangent vectors), oriented to have positive product with `seed`.
pub(crate) fn lorentz_normal<T: Real>(span: &[&[T]], seed: &[T]) -> Option<Vec<T>> {
    let m = span.len();
    let gram: Vec<Vec<T>> = (0..m)
        .map(|i| (0..m).map(|j| lorentz_dot_slices(span[i], span[j])).collect())
        .collect();
    let rhs: Vec<T> = span.iter().map(|s| lorentz_dot_slices(s, seed)).collect();
    let coef = solve_small(gram, rhs)?;
    let mut v = seed.to_vec();
    for (c, s) in coef.iter().zip(span) {
        for (vi, &si) in v.iter_mut().zip(s.iter()) {
            *vi = *vi - *c * si;
        }
    }
    let q = lorentz_dot_slices(&v, &v);
    if !(q > T::zero()) {
        return None;
    }
    let s = q.sqrt();
    Some(v.into_iter().map(|x| x / s).collect())
}

/// Eigenvalues (ascending) of the pencil `h v = lambda g v` for symmetric
/// 2x2 `h` and positive definite `g`, both given as `[xx, xy, yy]`.
pub(crate) fn pencil_eigenvalues<T: Real>(g: [T; 3], h: [T; 3]) -> [T; 2] {
    let two = T::lit(2.0);
    let det_g = g[0] * g[2] - g[1] * g[1];
    let tr = (g[0] * h[2] + g[2] * h[0] - two * g[1] * h[1]) / det_g;
    let det = (h[0] * h[2] - h[1] * h[1]) / det_g;
    let disc = (tr * tr - T::lit(4.0) * det).max(T::zero()).sqrt();
    // Roots of l^2 - tr l + det; the smaller one via det / q avoids
    // cancellation.
    let q = (tr + tr.signum() * disc) / two;
    if q == T::zero() {
        return [T::zero(), T::zero()];
    }
    let (x, y) = (q, det / q);
    if x <= y {
        [x, y]
    } else {
        [y, x]
    }
}

/// Condition number of a symmetric positive definite 2x2 `[xx, xy, yy]`.
pub(crate) fn condition2<T: Real>(m: [T; 3]) -> T {
    let tr = m[0] + m[2];
    let det = m[0] * m[2] - m[1] * m[1];
    if !(det > T::zero()) {
        return T::infinity();
    }
    let disc = ((m[0] - m[2]) * (m[0] - m[2]) + T::lit(4.0) * m[1] * m[1]).sqrt();
    let hi = (tr + disc) / T::lit(2.0);
    hi * hi / det
}
