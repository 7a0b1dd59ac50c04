//! Group samplings used for twirls and weak-covariance checks.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, tensor, ComplexMatrix, C64};
use crate::random::{haar_unitary, rng_for};
use crate::zoo::{phase_unitary, weyl_shift};

pub const UNITARY_TOL: f64 = 1e-10;
pub const CLOSURE_TOL: f64 = 1e-8;
pub const DEFAULT_EULER_NODES: usize = 32;
pub const DEFAULT_HAAR_SAMPLES: usize = 512;

#[derive(Clone, Debug)]
pub enum TwirlSpec {
    /// Uniform average over a finite group of unitaries.
    FiniteGroup { unitaries: Vec<ComplexMatrix> },
    /// SU(2) Haar integral in z-y-z Euler angles,
    /// `U_x = exp(i x1 J3) exp(i x2 J2) exp(i x3 J3)` on `[0,4pi] x [0,pi] x [0,2pi]`
    /// with weight `sin(x2)/(16 pi^2)`, by tensor Gauss-Legendre quadrature.
    Su2Euler {
        generators: [ComplexMatrix; 3],
        grid: (usize, usize, usize),
    },
    /// `V (x) I_D` for Haar-random `V` in U(n). Each sample `V` is expanded to
    /// `V X` over the n^2 Weyl-Heisenberg operators `X`, which keeps the
    /// distribution Haar while making the average of the `n` factor exact.
    BlockUnitaryHaar {
        n: usize,
        block: usize,
        samples: usize,
        seed: u64,
    },
    /// Entrywise complex conjugate of another sampling, element by element.
    Conjugate(Box<TwirlSpec>),
}

/// Weighted group elements; weights sum to one.
#[derive(Clone, Debug)]
pub struct GroupSample {
    pub weights: Vec<f64>,
    pub unitaries: Vec<ComplexMatrix>,
    /// True for exact finite-group sums.
    pub exact: bool,
}

impl GroupSample {
    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    /// `sum_g w_g U_g X U_g^dagger`
    pub fn twirl(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(x.rows(), x.cols());
        for (w, u) in self.weights.iter().zip(&self.unitaries) {
            acc.add_scaled(&u.conjugate_by(x), C64::new(*w, 0.0));
        }
        acc
    }
}

/// Gauss-Legendre nodes and weights on `[a, b]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let prev = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

/// `exp(i t H)` for Hermitian `H`, via its eigenbasis.
struct HermitianExp {
    vectors: ComplexMatrix,
    values: Vec<f64>,
}

impl HermitianExp {
    fn new(h: &ComplexMatrix) -> Result<Self> {
        let e = eig_hermitian(h)?;
        Ok(Self {
            vectors: e.eigenvectors,
            values: e.eigenvalues,
        })
    }

    fn at(&self, t: f64) -> ComplexMatrix {
        let phases: Vec<C64> = self.values.iter().map(|&l| C64::from_polar(1.0, t * l)).collect();
        self.vectors.conjugate_by(&ComplexMatrix::diag(&phases))
    }
}

fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    u.is_square() && (&u.adjoint().matmul(u) - &ComplexMatrix::identity(u.rows())).max_abs() <= tol
}

impl TwirlSpec {
    pub fn dim(&self) -> usize {
        match self {
            TwirlSpec::FiniteGroup { unitaries } => unitaries.first().map_or(0, |u| u.rows()),
            TwirlSpec::Su2Euler { generators, .. } => generators[0].rows(),
            TwirlSpec::BlockUnitaryHaar { n, block, .. } => n * block,
            TwirlSpec::Conjugate(inner) => inner.dim(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            TwirlSpec::FiniteGroup { .. } => true,
            TwirlSpec::Conjugate(inner) => inner.is_finite(),
            _ => false,
        }
    }

    pub fn check(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::SpecInvalid(msg));
        match self {
            TwirlSpec::FiniteGroup { unitaries } => {
                let Some(first) = unitaries.first() else {
                    return invalid("finite group has no elements".into());
                };
                let d = first.rows();
                for (k, u) in unitaries.iter().enumerate() {
                    if u.rows() != d || !is_unitary(u, UNITARY_TOL) {
                        return invalid(format!("group element {k} is not a {d}x{d} unitary"));
                    }
                }
                for (a, ua) in unitaries.iter().enumerate() {
                    for (b, ub) in unitaries.iter().enumerate() {
                        let prod = ua.matmul(ub);
                        if !unitaries.iter().any(|uc| (&prod - uc).max_abs() <= CLOSURE_TOL) {
                            return invalid(format!(
                                "product of elements {a} and {b} is not in the set"
                            ));
                        }
                    }
                }
                Ok(())
            }
            TwirlSpec::Su2Euler { generators, grid } => {
                let d = generators[0].rows();
                if generators
                    .iter()
                    .any(|g| !g.is_square() || g.rows() != d || g.hermitian_defect() > UNITARY_TOL)
                {
                    return invalid("SU(2) generators must be Hermitian and of equal size".into());
                }
                if grid.0 == 0 || grid.1 == 0 || grid.2 == 0 {
                    return invalid("quadrature grid must be positive".into());
                }
                Ok(())
            }
            TwirlSpec::BlockUnitaryHaar { n, block, samples, .. } => {
                if *n == 0 || *block == 0 || *samples == 0 {
                    return invalid("n, D and samples must be positive".into());
                }
                Ok(())
            }
            TwirlSpec::Conjugate(inner) => inner.check(),
        }
    }

    pub fn sample(&self) -> Result<GroupSample> {
        self.check()?;
        match self {
            TwirlSpec::FiniteGroup { unitaries } => Ok(GroupSample {
                weights: vec![1.0 / unitaries.len() as f64; unitaries.len()],
                unitaries: unitaries.clone(),
                exact: true,
            }),
            TwirlSpec::Su2Euler { generators, grid } => {
                let exps = [
                    HermitianExp::new(&generators[0])?,
                    HermitianExp::new(&generators[1])?,
                    HermitianExp::new(&generators[2])?,
                ];
                let (x1, w1) = gauss_legendre(grid.0, 0.0, 4.0 * PI);
                let (x2, w2) = gauss_legendre(grid.1, 0.0, PI);
                let (x3, w3) = gauss_legendre(grid.2, 0.0, 2.0 * PI);
                let e1: Vec<ComplexMatrix> = x1.iter().map(|&t| exps[2].at(t)).collect();
                let e2: Vec<ComplexMatrix> = x2.iter().map(|&t| exps[1].at(t)).collect();
                let e3: Vec<ComplexMatrix> = x3.iter().map(|&t| exps[2].at(t)).collect();
                let norm = 1.0 / (16.0 * PI * PI);
                let mut weights = Vec::with_capacity(grid.0 * grid.1 * grid.2);
                let mut unitaries = Vec::with_capacity(weights.capacity());
                for (i, a) in e1.iter().enumerate() {
                    for (j, b) in e2.iter().enumerate() {
                        let ab = a.matmul(b);
                        for (k, c) in e3.iter().enumerate() {
                            weights.push(w1[i] * w2[j] * w3[k] * x2[j].sin() * norm);
                            unitaries.push(ab.matmul(c));
                        }
                    }
                }
                Ok(GroupSample {
                    weights,
                    unitaries,
                    exact: false,
                })
            }
            TwirlSpec::BlockUnitaryHaar {
                n,
                block,
                samples,
                seed,
            } => {
                let (n, block) = (*n, *block);
                let heisenberg: Vec<ComplexMatrix> = (0..n)
                    .flat_map(|a| (0..n).map(move |b| weyl_shift(n, a).matmul(&phase_unitary(n, b))))
                    .collect();
                let id = ComplexMatrix::identity(block);
                let count = samples * n * n;
                let mut unitaries = Vec::with_capacity(count);
                for s in 0..*samples {
                    let v = haar_unitary(&mut rng_for(*seed, s as u64), n);
                    for x in &heisenberg {
                        unitaries.push(tensor(&v.matmul(x), &id)?);
                    }
                }
                Ok(GroupSample {
                    weights: vec![1.0 / count as f64; count],
                    unitaries,
                    exact: false,
                })
            }
            TwirlSpec::Conjugate(inner) => {
                let mut s = inner.sample()?;
                s.unitaries = s.unitaries.iter().map(|u| u.conj()).collect();
                Ok(s)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::su2_generators;

    #[test]
    fn gauss_legendre_integrates_polynomials_and_sine() {
        let (x, w) = gauss_legendre(5, -1.0, 1.0);
        let quad: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((quad - 2.0 / 9.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(32, 0.0, PI);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.sin()).sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn euler_weights_sum_to_one() {
        let spec = TwirlSpec::Su2Euler {
            generators: su2_generators(2),
            grid: (8, 16, 8),
        };
        let s = spec.sample().unwrap();
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        for u in s.unitaries.iter().take(20) {
            assert!(is_unitary(u, 1e-12));
        }
    }

    #[test]
    fn spin_half_twirl_is_fully_depolarizing() {
        let spec = TwirlSpec::Su2Euler {
            generators: su2_generators(2),
            grid: (16, 16, 16),
        };
        let rho = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let avg = spec.sample().unwrap().twirl(&rho);
        assert!(avg.approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-12));
    }

    #[test]
    fn irreducible_twirls_are_fully_depolarizing() {
        for d in [3, 4] {
            let spec = TwirlSpec::Su2Euler {
                generators: su2_generators(d),
                grid: (DEFAULT_EULER_NODES, DEFAULT_EULER_NODES, DEFAULT_EULER_NODES),
            };
            let rho = ComplexMatrix::diag_real(&{
                let mut v = vec![0.0; d];
                v[0] = 1.0;
                v
            });
            let avg = spec.sample().unwrap().twirl(&rho);
            let target = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
            assert!(avg.approx_eq(&target, 1e-12), "d = {d}");
        }
    }

    #[test]
    fn closure_is_enforced() {
        let shifts: Vec<_> = (1..=3).map(|i| weyl_shift(3, i)).collect();
        assert!(TwirlSpec::FiniteGroup { unitaries: shifts.clone() }.check().is_ok());
        let partial = TwirlSpec::FiniteGroup {
            unitaries: shifts[..2].to_vec(),
        };
        assert!(matches!(partial.check(), Err(Error::SpecInvalid(_))));
    }

    #[test]
    fn symmetrized_block_haar_averages_exactly() {
        let spec = TwirlSpec::BlockUnitaryHaar {
            n: 2,
            block: 2,
            samples: 3,
            seed: 9,
        };
        let s = spec.sample().unwrap();
        assert_eq!(s.len(), 12);
        let x = ComplexMatrix::outer(&crate::linalg::basis(4, 1), &crate::linalg::basis(4, 1));
        let avg = s.twirl(&x);
        // tr_n of |0,1><0,1| is |1><1| on the block; the n factor becomes I/2.
        let expected = ComplexMatrix::diag_real(&[0.0, 0.5, 0.0, 0.5]);
        assert!(avg.approx_eq(&expected, 1e-14));
    }
}
