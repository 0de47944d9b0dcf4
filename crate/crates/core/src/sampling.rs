//! Deterministic point sets and seeded random draws.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k` unit vectors in `R^dim`. Equally spaced on the circle for `dim = 2`,
/// a Fibonacci lattice for `dim = 3`, seeded Gaussian directions above.
pub fn sphere_points(dim: usize, k: usize) -> Vec<DVector<f64>> {
    match dim {
        0 => Vec::new(),
        1 => (0..k)
            .map(|j| DVector::from_element(1, if j % 2 == 0 { 1.0 } else { -1.0 }))
            .collect(),
        2 => (0..k)
            .map(|j| {
                let th = std::f64::consts::TAU * j as f64 / k as f64;
                DVector::from_vec(vec![th.cos(), th.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|j| {
                    let z = 1.0 - (2.0 * j as f64 + 1.0) / k as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * j as f64;
                    DVector::from_vec(vec![r * th.cos(), r * th.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut r = rng(0x5eed_0000 ^ k as u64);
            (0..k).map(|_| random_unit(&mut r, dim)).collect()
        }
    }
}

/// Van der Corput radical inverse, the building block of Halton sequences.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

pub fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, dim);
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// A random element of `O(gram)`, the exponential of `gram⁻¹ K` with `K`
/// antisymmetric and Gaussian with standard deviation `scale`.
pub fn random_orthogonal<R: Rng>(rng: &mut R, gram: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    let d = gram.nrows();
    let mut k = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let x: f64 = rng.sample::<f64, _>(StandardNormal) * scale;
            k[(i, j)] = x;
            k[(j, i)] = -x;
        }
    }
    let ginv = gram.clone().try_inverse().expect("gram matrix is nondegenerate");
    (ginv * k).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::minkowski_gram;

    #[test]
    fn sphere_points_are_unit() {
        for dim in 1..6 {
            for p in sphere_points(dim, 17) {
                assert!((p.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radical_inverse_base_two() {
        let seq: Vec<f64> = (1..5).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(seq, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn random_orthogonal_preserves_form() {
        let g = minkowski_gram(4);
        let mut r = rng(3);
        for _ in 0..50 {
            let a = random_orthogonal(&mut r, &g, 0.5);
            assert!((a.transpose() * &g * &a - &g).amax() < 1e-10);
        }
    }
}
