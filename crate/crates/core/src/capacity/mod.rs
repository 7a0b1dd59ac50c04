//! Holevo quantities, weak-covariance checks and the capacity formula
//! `C(T) = S(T(rho_bar)) - nu_1(T)` for weakly covariant channels.

mod twirl;

pub use twirl::{
    gauss_legendre, GroupSample, TwirlSpec, CLOSURE_TOL, DEFAULT_EULER_NODES,
    DEFAULT_HAAR_SAMPLES, UNITARY_TOL,
};

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{tensor_channels, DensityMatrix, QuantumChannel};
use crate::entropy::{
    min_output_entropy_with_warm_starts, von_neumann_entropy, OptConfig, RenyiOrder,
};
use crate::error::{Error, Result};
use crate::linalg::{basis, eig_hermitian, ComplexMatrix};
use crate::random::{random_pure_state, random_simplex, rng_for};
use crate::zoo::{
    casimir_reducible_witness, flat_state, phase_unitary, reducible_generators, su2_generators,
    weyl_shift, ChannelSpec,
};

pub const PROB_TOL: f64 = 1e-12;
/// Residual above which a channel is not treated as weakly covariant.
pub const COVARIANCE_TOL: f64 = 1e-6;
pub const OPTIMALITY_TOL: f64 = 1e-6;
pub const COVARIANCE_POINTS: usize = 64;
const COVARIANCE_SEED: u64 = 0x0c0f_fee5;

#[derive(Clone, Debug, Serialize)]
pub struct Ensemble {
    pub probs: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.len() != states.len() || states.is_empty() {
            return Err(Error::Validation(format!(
                "ensemble has {} probabilities and {} states",
                probs.len(),
                states.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::Validation(format!("negative probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Validation(format!("probabilities sum to {total}")));
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        Ok(Self { probs, states })
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// More members than the `d^2` needed to reach the Holevo capacity.
    pub fn is_oversized(&self) -> bool {
        self.len() > self.dim() * self.dim()
    }

    pub fn average(&self) -> DensityMatrix {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (p, s) in self.probs.iter().zip(&self.states) {
            acc.add_scaled(s.matrix(), (*p).into());
        }
        DensityMatrix::from_matrix_unchecked(acc.hermitian_part())
    }
}

/// `chi = S(sum p_i T(rho_i)) - sum p_i S(T(rho_i))`, in bits.
pub fn holevo_chi(ch: &QuantumChannel, e: &Ensemble) -> Result<f64> {
    if e.dim() != ch.dim() {
        return Err(Error::DimMismatch {
            expected: ch.dim(),
            found: e.dim(),
        });
    }
    let d = ch.dim();
    let mut avg = ComplexMatrix::zeros(d, d);
    let mut mean_entropy = 0.0;
    for (p, s) in e.probs.iter().zip(&e.states) {
        let out = ch.apply_state_unchecked(s);
        mean_entropy += p * von_neumann_entropy(&out);
        avg.add_scaled(out.matrix(), (*p).into());
    }
    let avg = DensityMatrix::from_matrix_unchecked(avg.hermitian_part());
    Ok((von_neumann_entropy(&avg) - mean_entropy).max(0.0))
}

/// Largest absolute eigenvalue of the Hermitian part.
fn hermitian_norm(x: &ComplexMatrix) -> Result<f64> {
    let e = eig_hermitian(&x.hermitian_part())?;
    Ok(e.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs())))
}

fn check_dims(ch: &QuantumChannel, rho0: &DensityMatrix, g: &TwirlSpec) -> Result<()> {
    for found in [rho0.dim(), g.dim()] {
        if found != ch.dim() {
            return Err(Error::DimMismatch {
                expected: ch.dim(),
                found,
            });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitAverage {
    pub avg_output: DensityMatrix,
    pub average_residual: f64,
}

/// Averages `Pi(g) T(rho0) Pi(g)^dagger` over `g` and compares it with `I/d`.
pub fn orbit_average(ch: &QuantumChannel, rho0: &DensityMatrix, g: &TwirlSpec) -> Result<OrbitAverage> {
    check_dims(ch, rho0, g)?;
    let out = ch.apply(rho0)?;
    let avg = g.sample()?.twirl(out.matrix()).hermitian_part();
    let d = ch.dim();
    let residual = hermitian_norm(&(&avg - &ComplexMatrix::identity(d).scale_real(1.0 / d as f64)))?;
    Ok(OrbitAverage {
        avg_output: DensityMatrix::from_matrix_unchecked(avg),
        average_residual: residual,
    })
}

/// The ensemble `{w_g, pi(g) rho0 pi(g)^dagger}`.
pub fn orbit_ensemble(rho0: &DensityMatrix, pi: &TwirlSpec) -> Result<Ensemble> {
    if pi.dim() != rho0.dim() {
        return Err(Error::DimMismatch {
            expected: rho0.dim(),
            found: pi.dim(),
        });
    }
    let s = pi.sample()?;
    let total: f64 = s.weights.iter().sum();
    let states = s
        .unitaries
        .iter()
        .map(|u| DensityMatrix::from_matrix_unchecked(u.conjugate_by(rho0.matrix()).hermitian_part()))
        .collect();
    Ensemble::new(s.weights.iter().map(|w| w / total).collect(), states)
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub covariance_residual: f64,
    pub average_residual: f64,
    /// Group elements at which covariance was tested.
    pub points: usize,
    pub group_elements: usize,
    /// Finite group: every element was tested.
    pub exhaustive: bool,
}

impl CovarianceReport {
    pub fn holds(&self) -> bool {
        self.covariance_residual <= COVARIANCE_TOL && self.average_residual <= COVARIANCE_TOL
    }
}

/// `max_g ||T(pi(g) rho0 pi(g)^dagger) - Pi(g) T(rho0) Pi(g)^dagger||` over all
/// elements of a finite group, or 64 seeded elements of a continuous sampling,
/// together with the residual of the `Pi` orbit average against `I/d`.
pub fn verify_weak_covariance(
    ch: &QuantumChannel,
    rho0: &DensityMatrix,
    pi: &TwirlSpec,
    big_pi: &TwirlSpec,
) -> Result<CovarianceReport> {
    check_dims(ch, rho0, pi)?;
    check_dims(ch, rho0, big_pi)?;
    let a = pi.sample()?;
    let b = big_pi.sample()?;
    if a.len() != b.len() {
        return Err(Error::SpecMismatch(format!(
            "pi has {} elements, Pi has {}",
            a.len(),
            b.len()
        )));
    }
    if a.weights.iter().zip(&b.weights).any(|(x, y)| (x - y).abs() > 1e-15) {
        return Err(Error::SpecMismatch("pi and Pi carry different weights".into()));
    }
    let exhaustive = a.exact || a.len() <= COVARIANCE_POINTS;
    let indices: Vec<usize> = if exhaustive {
        (0..a.len()).collect()
    } else {
        let mut idx = sample_indices(&mut rng_for(COVARIANCE_SEED, 0), a.len(), COVARIANCE_POINTS).into_vec();
        idx.sort_unstable();
        idx
    };
    let out0 = ch.apply(rho0)?;
    let residuals: Vec<f64> = indices
        .par_iter()
        .map(|&k| {
            let lhs = ch.apply_matrix(&a.unitaries[k].conjugate_by(rho0.matrix()));
            let rhs = b.unitaries[k].conjugate_by(out0.matrix());
            hermitian_norm(&(&lhs - &rhs))
        })
        .collect::<Result<_>>()?;
    let avg = b.twirl(out0.matrix()).hermitian_part();
    let d = ch.dim();
    let average_residual =
        hermitian_norm(&(&avg - &ComplexMatrix::identity(d).scale_real(1.0 / d as f64)))?;
    Ok(CovarianceReport {
        covariance_residual: residuals.into_iter().fold(0.0, f64::max),
        average_residual,
        points: indices.len(),
        group_elements: a.len(),
        exhaustive,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityReport {
    pub capacity: f64,
    /// `S(T(rho_bar))`
    pub max_term: f64,
    /// Estimate of `nu_1`.
    pub min_term: f64,
    /// `S(T(rho0))`
    pub reference_entropy: f64,
    pub covariance_residual: f64,
    pub average_residual: f64,
    pub group_elements: usize,
    pub min_term_converged: bool,
}

pub fn capacity_weakcov(
    ch: &QuantumChannel,
    rho0: &DensityMatrix,
    pi: &TwirlSpec,
    big_pi: &TwirlSpec,
    cfg: &OptConfig,
) -> Result<CapacityReport> {
    cfg.check()?;
    let cov = verify_weak_covariance(ch, rho0, pi, big_pi)?;
    if !cov.holds() {
        return Err(Error::NotWeaklyCovariant {
            covariance: cov.covariance_residual,
            average: cov.average_residual,
        });
    }
    let reference = von_neumann_entropy(&ch.apply(rho0)?);
    let warm: Vec<_> = rho0.pure_vector(1e-10).into_iter().collect();
    let nu = min_output_entropy_with_warm_starts(ch, RenyiOrder::VON_NEUMANN, cfg, &warm)?;
    if reference - nu.value > OPTIMALITY_TOL {
        return Err(Error::OptimalStateMismatch {
            reference,
            estimate: nu.value,
        });
    }
    let rho_bar = DensityMatrix::from_matrix_unchecked(pi.sample()?.twirl(rho0.matrix()).hermitian_part());
    let max_term = von_neumann_entropy(&ch.apply_state_unchecked(&rho_bar));
    Ok(CapacityReport {
        capacity: max_term - nu.value,
        max_term,
        min_term: nu.value,
        reference_entropy: reference,
        covariance_residual: cov.covariance_residual,
        average_residual: cov.average_residual,
        group_elements: cov.group_elements,
        min_term_converged: nu.converged,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiBoundReport {
    pub trials: usize,
    pub seed: u64,
    pub capacity: f64,
    pub max_chi: f64,
    /// `max chi(T (x) T) - 2C`
    pub max_excess: f64,
    pub worst_trial: usize,
}

/// Random entangled ensembles on the doubled space never beat `2C`.
/// Ensemble sizes are uniform in `2..=d^4`, members Haar-random pure states,
/// probabilities a flat simplex draw.
pub fn chi_product_bound_check(
    ch: &QuantumChannel,
    capacity: f64,
    trials: usize,
    cfg: &OptConfig,
) -> Result<ChiBoundReport> {
    if trials == 0 {
        return Err(Error::Validation("need at least one trial".into()));
    }
    let doubled = tensor_channels(&[ch.clone(), ch.clone()])?;
    let d = ch.dim();
    let d2 = d * d;
    let chis: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(cfg.seed, t as u64);
            let n = rng.random_range(2..=d2 * d2);
            let probs = random_simplex(&mut rng, n);
            let states = (0..n).map(|_| random_pure_state(&mut rng, d2)).collect();
            holevo_chi(&doubled, &Ensemble::new(probs, states)?)
        })
        .collect::<Result<_>>()?;
    let (worst, max_chi) = chis
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, c)| if c > best.1 { (k, c) } else { best });
    Ok(ChiBoundReport {
        trials,
        seed: cfg.seed,
        capacity,
        max_chi,
        max_excess: max_chi - 2.0 * capacity,
        worst_trial: worst,
    })
}

/// Reference input and representations used by `--group auto`.
#[derive(Clone, Debug)]
pub struct GroupChoice {
    pub name: &'static str,
    pub rho0: DensityMatrix,
    pub pi: TwirlSpec,
    pub big_pi: TwirlSpec,
}

fn shifts(d: usize) -> TwirlSpec {
    TwirlSpec::FiniteGroup {
        unitaries: (1..=d).map(|i| weyl_shift(d, i)).collect(),
    }
}

fn ket(d: usize, i: usize) -> DensityMatrix {
    DensityMatrix::from_pure(&basis(d, i))
}

fn euler(generators: [ComplexMatrix; 3]) -> TwirlSpec {
    let n = DEFAULT_EULER_NODES;
    TwirlSpec::Su2Euler {
        generators,
        grid: (n, n, n),
    }
}

/// The group each family is paired with. Channels defined through a
/// transpose intertwine `pi` with its complex conjugate, so `Pi = conj(pi)`
/// for the phase and block-unitary groups.
pub fn auto_group(spec: &ChannelSpec, seed: u64) -> Result<GroupChoice> {
    spec.check()?;
    let same = |name, rho0, pi: TwirlSpec| GroupChoice {
        name,
        rho0,
        big_pi: pi.clone(),
        pi,
    };
    Ok(match spec {
        ChannelSpec::WernerHolevo { d }
        | ChannelSpec::Pinching { d, .. }
        | ChannelSpec::ShiftsPinching { d, .. }
        | ChannelSpec::Diagonal { d, .. } => same("shifts", ket(*d, 0), shifts(*d)),
        ChannelSpec::Stretching { d, omega, .. } => {
            same("shifts", DensityMatrix::new(omega.matrix().transpose())?, shifts(*d))
        }
        ChannelSpec::WeylShift { d } => {
            let pi = TwirlSpec::FiniteGroup {
                unitaries: (1..=*d).map(|j| phase_unitary(*d, j)).collect(),
            };
            GroupChoice {
                name: "phases",
                rho0: flat_state(*d),
                big_pi: TwirlSpec::Conjugate(Box::new(pi.clone())),
                pi,
            }
        }
        ChannelSpec::CasimirIrreducible { d } => same("su2", ket(*d, 0), euler(su2_generators(*d))),
        ChannelSpec::CasimirReducibleExample => {
            same("su2", casimir_reducible_witness(), euler(reducible_generators()))
        }
        ChannelSpec::CoarseGraining { n, block } => {
            let pi = TwirlSpec::BlockUnitaryHaar {
                n: *n,
                block: *block,
                samples: DEFAULT_HAAR_SAMPLES,
                seed,
            };
            GroupChoice {
                name: "block-unitary",
                rho0: flat_state(n * block),
                big_pi: TwirlSpec::Conjugate(Box::new(pi.clone())),
                pi,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build, werner_holevo};

    fn cfg() -> OptConfig {
        OptConfig {
            starts: 8,
            ..OptConfig::default()
        }
    }

    #[test]
    fn identity_chi_on_basis_states() {
        let e = Ensemble::new(vec![0.5, 0.5], vec![ket(2, 0), ket(2, 1)]).unwrap();
        let chi = holevo_chi(&QuantumChannel::identity(2), &e).unwrap();
        assert!((chi - 1.0).abs() < 1e-12);
        let single = Ensemble::new(vec![1.0], vec![ket(2, 1)]).unwrap();
        assert!(holevo_chi(&werner_holevo(2), &single).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ensemble_validation() {
        assert!(Ensemble::new(vec![0.5, 0.4], vec![ket(2, 0), ket(2, 1)]).is_err());
        assert!(Ensemble::new(vec![1.5, -0.5], vec![ket(2, 0), ket(2, 1)]).is_err());
        assert!(matches!(
            Ensemble::new(vec![0.5, 0.5], vec![ket(2, 0), ket(3, 1)]),
            Err(Error::DimMismatch { .. })
        ));
        let e = Ensemble::new(vec![1.0], vec![ket(2, 0)]).unwrap();
        assert!(matches!(holevo_chi(&werner_holevo(3), &e), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn werner_holevo_orbit_chi() {
        let e = orbit_ensemble(&ket(3, 0), &shifts(3)).unwrap();
        let chi = holevo_chi(&werner_holevo(3), &e).unwrap();
        assert!((chi - (3f64.log2() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn trivial_group_average_is_the_output() {
        let ch = werner_holevo(3);
        let g = TwirlSpec::FiniteGroup {
            unitaries: vec![ComplexMatrix::identity(3)],
        };
        let r = orbit_average(&ch, &ket(3, 0), &g).unwrap();
        assert!(r.avg_output.matrix().approx_eq(ch.apply(&ket(3, 0)).unwrap().matrix(), 1e-15));
        // T(|0><0|) = diag(0, 1/2, 1/2)
        assert!((r.average_residual - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn finite_orbit_average_is_idempotent() {
        let built = build(&ChannelSpec::WeylShift { d: 3 }).unwrap();
        let g = auto_group(&ChannelSpec::WeylShift { d: 3 }, 1).unwrap();
        let s = g.big_pi.sample().unwrap();
        let once = s.twirl(built.channel.apply(&g.rho0).unwrap().matrix());
        assert!(s.twirl(&once).approx_eq(&once, 1e-12));
    }

    #[test]
    fn weyl_shift_intertwines_phases_with_their_conjugates() {
        let spec = ChannelSpec::WeylShift { d: 3 };
        let ch = build(&spec).unwrap().channel;
        let g = auto_group(&spec, 1).unwrap();
        let r = verify_weak_covariance(&ch, &g.rho0, &g.pi, &g.big_pi).unwrap();
        assert!(r.covariance_residual < 1e-12 && r.average_residual < 1e-12);
        let same = verify_weak_covariance(&ch, &g.rho0, &g.pi, &g.pi).unwrap();
        assert!(same.covariance_residual > 0.1);
    }

    #[test]
    fn mismatched_samplings_are_rejected() {
        let ch = werner_holevo(3);
        let pi = shifts(3);
        let big_pi = TwirlSpec::FiniteGroup {
            unitaries: vec![ComplexMatrix::identity(3)],
        };
        assert!(matches!(
            verify_weak_covariance(&ch, &ket(3, 0), &pi, &big_pi),
            Err(Error::SpecMismatch(_))
        ));
    }

    #[test]
    fn werner_holevo_capacity() {
        let spec = ChannelSpec::WernerHolevo { d: 3 };
        let ch = build(&spec).unwrap().channel;
        let g = auto_group(&spec, 1).unwrap();
        let r = capacity_weakcov(&ch, &g.rho0, &g.pi, &g.big_pi, &cfg()).unwrap();
        assert!((r.capacity - (3f64.log2() - 1.0)).abs() < 1e-9);
        assert!((r.min_term - r.reference_entropy).abs() < 1e-6);
        assert_eq!(r.capacity, r.max_term - r.min_term);
    }

    #[test]
    fn suboptimal_reference_input_is_detected() {
        // Dephasing: a superposition input has a mixed output, basis states do not.
        let spec = ChannelSpec::Diagonal {
            d: 2,
            diagonals: vec![vec![1.0.into(), 0.0.into()], vec![0.0.into(), 1.0.into()]],
        };
        let ch = build(&spec).unwrap().channel;
        let g = TwirlSpec::FiniteGroup {
            unitaries: vec![ComplexMatrix::identity(2), crate::zoo::pauli_matrices()[2].clone()],
        };
        let plus = flat_state(2);
        assert!(matches!(
            capacity_weakcov(&ch, &plus, &g, &g, &cfg()),
            Err(Error::OptimalStateMismatch { .. })
        ));
    }

    #[test]
    fn chi_bound_for_the_identity() {
        let r = chi_product_bound_check(&QuantumChannel::identity(2), 1.0, 20, &cfg()).unwrap();
        assert!(r.max_excess <= 1e-9);
        assert!(r.max_chi > 0.0);
    }
}
