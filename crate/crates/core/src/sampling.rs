//! Deterministic sampling: the fixed set of null directions used by the mass
//! checks and seeded random spinors, ball points and rotations.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::Spinor;
use crate::error::{Error, Result};
use crate::hyperbolic::{BallPoint, MinkowskiVector};
use crate::mass::NullDirection;
use crate::scalar::Real;

/// Number of null directions sampled by the monotonicity checks.
pub const DIRECTION_COUNT: usize = 32;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Radical inverse of `i` in base `b`.
fn halton(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Two standard normals from two uniforms in `(0, 1]`.
fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.ln()).sqrt();
    let a = 2.0 * std::f64::consts::PI * u2;
    (r * a.cos(), r * a.sin())
}

fn normalize(v: Vec<f64>) -> Option<Vec<f64>> {
    let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (l > 1e-9).then(|| v.into_iter().map(|x| x / l).collect())
}

/// Unit vectors of `R^n`: `+-e_1, ..., +-e_n` first, then Halton points
/// pushed through Box-Muller and normalized, `count` in total.
pub fn sphere_directions(n: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 || n > 2 * PRIMES.len() {
        return Err(Error::InvalidInput(format!("direction sampling supports 2 <= n <= 32, got {n}")));
    }
    let mut out = Vec::with_capacity(count);
    'axes: for i in 0..n {
        for s in [1.0, -1.0] {
            if out.len() == count {
                break 'axes;
            }
            let mut v = vec![0.0; n];
            v[i] = s;
            out.push(v);
        }
    }
    let pairs = n.div_ceil(2);
    let mut index = 1u64;
    while out.len() < count {
        let mut g = Vec::with_capacity(2 * pairs);
        for p in 0..pairs {
            // 1 - h keeps the argument of ln away from zero.
            let u1 = 1.0 - halton(index, PRIMES[2 * p]);
            let u2 = halton(index, PRIMES[2 * p + 1]);
            let (a, b) = box_muller(u1, u2);
            g.push(a);
            g.push(b);
        }
        g.truncate(n);
        if let Some(v) = normalize(g) {
            out.push(v);
        }
        index += 1;
    }
    Ok(out)
}

/// The future null directions `(y, 1)` for [`sphere_directions`].
pub fn null_directions<T: Real>(n: usize, count: usize) -> Result<Vec<NullDirection<T>>> {
    sphere_directions(n, count)?
        .into_iter()
        .map(|v| NullDirection::from_spatial(&v.into_iter().map(T::lit).collect::<Vec<_>>()))
        .collect()
}

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    box_muller(u1, u2).0
}

pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        if let Some(v) = normalize((0..n).map(|_| standard_normal(rng)).collect()) {
            return v;
        }
    }
}

/// Future null vector `(y, 1)` with `y` uniform on the sphere.
pub fn random_null<T: Real>(rng: &mut impl Rng, n: usize) -> MinkowskiVector<T> {
    let y: Vec<T> = random_unit_vector(rng, n).into_iter().map(T::lit).collect();
    MinkowskiVector::from_parts(&y, T::one())
}

/// Spinor with independent standard complex normal entries.
pub fn random_spinor<T: Real>(rng: &mut impl Rng, dim: usize) -> Spinor<T> {
    let entries = (0..dim)
        .map(|_| Complex::new(T::lit(standard_normal(rng)), T::lit(standard_normal(rng))))
        .collect();
    Spinor::new(entries).expect("normal samples are finite")
}

/// Point uniform in the ball of radius `max_norm < 1`.
pub fn random_ball_point<T: Real>(rng: &mut impl Rng, n: usize, max_norm: f64) -> Result<BallPoint<T>> {
    let r = max_norm * rng.gen::<f64>().powf(1.0 / n as f64);
    BallPoint::new(random_unit_vector(rng, n).into_iter().map(|x| T::lit(x * r)).collect())
}

/// Orthogonal `m x m` matrix from Gram-Schmidt on a Gaussian matrix.
pub fn random_rotation(rng: &mut impl Rng, m: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    while rows.len() < m {
        let mut v: Vec<f64> = (0..m).map(|_| standard_normal(rng)).collect();
        for _ in 0..2 {
            for r in &rows {
                let d: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(r).for_each(|(x, y)| *x -= d * y);
            }
        }
        if let Some(v) = normalize(v) {
            rows.push(v);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_base_two() {
        let h: Vec<f64> = (1..5).map(|i| halton(i, 2)).collect();
        assert_eq!(h, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn directions_start_with_axes() {
        let d = sphere_directions(3, DIRECTION_COUNT).unwrap();
        assert_eq!(d.len(), 32);
        assert_eq!(d[0], vec![1.0, 0.0, 0.0]);
        assert_eq!(d[5], vec![0.0, 0.0, -1.0]);
        for v in &d {
            let l: f64 = v.iter().map(|x| x * x).sum();
            assert!((l - 1.0).abs() < 1e-14);
        }
        assert_eq!(sphere_directions(4, 3).unwrap().len(), 3);
        assert!(sphere_directions(1, 4).is_err());
    }

    #[test]
    fn directions_are_deterministic() {
        assert_eq!(sphere_directions(5, 32).unwrap(), sphere_directions(5, 32).unwrap());
    }

    #[test]
    fn seeded_streams_repeat() {
        let a: Vec<f64> = (0..4).map(|_| standard_normal(&mut seeded_rng(7))).collect();
        assert!(a.iter().all(|&x| x == a[0]));
        let mut r = seeded_rng(7);
        let b = random_unit_vector(&mut r, 3);
        let mut r = seeded_rng(7);
        assert_eq!(b, random_unit_vector(&mut r, 3));
    }

    #[test]
    fn rotation_is_orthogonal() {
        let q = random_rotation(&mut seeded_rng(3), 4);
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ball_points_stay_inside() {
        let mut r = seeded_rng(11);
        for _ in 0..100 {
            let p = random_ball_point::<f64>(&mut r, 4, 0.9).unwrap();
            assert!(p.norm_squared() < 0.81 + 1e-12);
        }
    }
}
