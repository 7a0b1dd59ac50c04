//! Seeded sampling used by every multistart routine.
//!
//! Stream `i` of master seed `s` is `ChaCha8Rng::seed_from_u64(split_seed(s, i))`,
//! so results never depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::channels::DensityMatrix;
use crate::linalg::{inner, norm, ComplexMatrix, C64};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn split_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn rng_for(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split_seed(master, index))
}

/// Entries with independent standard normal real and imaginary parts.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Haar-random unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    loop {
        let v = complex_gaussian(rng, d);
        let n = norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    DensityMatrix::from_pure(&random_pure_vector(rng, d))
}

/// Ginibre state `G G^dagger / tr` with `G` of shape `d x rank`.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> DensityMatrix {
    let g = ComplexMatrix::from_vec(d, rank, complex_gaussian(rng, d * rank)).expect("finite");
    let mut w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    w = w.scale_real(1.0 / tr).hermitian_part();
    DensityMatrix::new(w).expect("Ginibre matrix is a state")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_vec(d, d, complex_gaussian(rng, d * d)).expect("finite");
    g.hermitian_part()
}

/// Orthonormalizes the columns of `a` in place (modified Gram-Schmidt).
/// Returns `false` if a column is numerically dependent on earlier ones.
pub fn orthonormalize_columns(a: &mut ComplexMatrix) -> bool {
    let (rows, cols) = (a.rows(), a.cols());
    for j in 0..cols {
        let mut v = a.column(j);
        for k in 0..j {
            let q = a.column(k);
            let c = inner(&q, &v);
            for (x, y) in v.iter_mut().zip(&q) {
                *x -= c * y;
            }
        }
        let n = norm(&v);
        if n < 1e-12 {
            return false;
        }
        for i in 0..rows {
            a[(i, j)] = v[i] / n;
        }
    }
    true
}

/// Haar-random unitary: Q of the QR decomposition of a Ginibre matrix.
/// Gram-Schmidt yields a positive diagonal in R, which fixes the phases.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    loop {
        let mut g = ComplexMatrix::from_vec(d, d, complex_gaussian(rng, d * d)).expect("finite");
        if orthonormalize_columns(&mut g) {
            return g;
        }
    }
}

/// Uniform point on the probability simplex.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = rng_for(7, 3).random();
        let b: u64 = rng_for(7, 3).random();
        let c: u64 = rng_for(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_for(1, 0);
        for d in 1..6 {
            let u = haar_unitary(&mut rng, d);
            assert!(u.adjoint().matmul(&u).approx_eq(&ComplexMatrix::identity(d), 1e-12));
        }
    }

    #[test]
    fn simplex_sums_to_one() {
        let p = random_simplex(&mut rng_for(2, 0), 9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn ginibre_state_is_valid() {
        let rho = random_density_matrix(&mut rng_for(3, 0), 4, 2);
        assert_eq!(rho.eig().eigenvalues.iter().filter(|&&l| l > 1e-10).count(), 2);
    }
}
