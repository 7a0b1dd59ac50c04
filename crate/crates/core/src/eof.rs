//! Bipartite states from Stinespring dilations and upper bounds on the
//! entanglement of formation.
//!
//! `eof_upper` searches over ensembles `|phi_i~> = sum_j V_ij sqrt(l_j) |e_j>`
//! where `rho = sum_j l_j |e_j><e_j|` and `V` is a `k x r` isometry, so every
//! candidate decomposes `rho` exactly. The objective
//! `sum_i p_i S(tr_B |phi_i><phi_i|)` is minimized by Riemannian gradient
//! descent on the Stiefel manifold with QR retraction.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::Ensemble;
use crate::channels::{DensityMatrix, QuantumChannel};
use crate::entropy::OptConfig;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, ComplexMatrix, C64, I, ONE};
use crate::random::{haar_unitary, orthonormalize_columns, rng_for};

/// Purity defect accepted for ensemble members.
pub const PURE_TOL: f64 = 1e-10;
/// Eigenvalues of `rho` below this are outside its support.
const SUPPORT_CUTOFF: f64 = 1e-12;
/// Members with smaller weight are dropped from the reported ensemble.
const WEIGHT_CUTOFF: f64 = 1e-15;
const LOG_FLOOR: f64 = 1e-14;
const TIE_TOL: f64 = 1e-12;
const STALL_LIMIT: usize = 10;
const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

#[derive(Clone, Debug, Serialize)]
pub struct BipartiteState {
    pub dim_a: usize,
    pub dim_b: usize,
    pub state: DensityMatrix,
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, state: DensityMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || dim_a * dim_b != state.dim() {
            return Err(Error::BadDims(format!(
                "{dim_a} x {dim_b} does not match a state of dimension {}",
                state.dim()
            )));
        }
        Ok(Self { dim_a, dim_b, state })
    }

    pub fn reduced_a(&self) -> Result<DensityMatrix> {
        let r = partial_trace(self.state.matrix(), &[self.dim_a, self.dim_b], &[0])?;
        Ok(DensityMatrix::from_matrix_unchecked(r.hermitian_part()))
    }
}

/// On-disk format: `{"dim_a": int, "dim_b": int, "state": {"re": [[..]], "im": [[..]]}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BipartiteFile {
    pub dim_a: usize,
    pub dim_b: usize,
    pub state: ComplexMatrix,
}

impl BipartiteFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_state(self) -> Result<BipartiteState> {
        BipartiteState::new(self.dim_a, self.dim_b, DensityMatrix::new(self.state)?)
    }
}

pub fn load_bipartite_state(path: &Path) -> Result<BipartiteState> {
    BipartiteFile::parse(&std::fs::read_to_string(path)?)?.into_state()
}

/// `S(tr_B |psi><psi|)` in bits for a normalized vector on `C^dim_a (x) C^dim_b`.
pub fn entanglement_entropy(psi: &[C64], dim_a: usize, dim_b: usize) -> Result<f64> {
    if psi.len() != dim_a * dim_b {
        return Err(Error::DimMismatch {
            expected: dim_a * dim_b,
            found: psi.len(),
        });
    }
    let x = ComplexMatrix::from_vec(dim_a, dim_b, psi.to_vec())?;
    let (value, _) = weighted_entropy(&x, false)?;
    Ok(value)
}

/// The uniform mixture of four mutually orthogonal vectors in `C^4 (x) C^4`.
pub fn example9_state() -> BipartiteState {
    // (coefficient, |a, b>) with 1-based labels.
    let vectors: [[(C64, usize, usize); 4]; 4] = [
        [(I, 1, 4), (I, 2, 3), (-I, 3, 2), (ONE, 4, 1)],
        [(-I, 1, 3), (I, 2, 4), (I, 3, 1), (ONE, 4, 2)],
        [(I, 1, 2), (-I, 2, 1), (I, 3, 4), (ONE, 4, 3)],
        [(-I, 1, 1), (-I, 2, 2), (-I, 3, 3), (ONE, 4, 4)],
    ];
    let mut rho = ComplexMatrix::zeros(16, 16);
    for terms in &vectors {
        let mut psi = vec![C64::new(0.0, 0.0); 16];
        for &(c, a, b) in terms {
            psi[(a - 1) * 4 + (b - 1)] += c * 0.5;
        }
        rho.add_scaled(&ComplexMatrix::outer(&psi, &psi), C64::new(0.25, 0.0));
    }
    BipartiteState::new(4, 4, DensityMatrix::from_matrix_unchecked(rho)).expect("16 = 4 x 4")
}

/// `sum_i p_i U phi_i phi_i^dagger U^dagger` on (channel output (x) environment)
/// for the Stinespring isometry `U` of `T`.
pub fn channel_optimal_state(ch: &QuantumChannel, e: &Ensemble) -> Result<BipartiteState> {
    if e.dim() != ch.dim() {
        return Err(Error::DimMismatch {
            expected: ch.dim(),
            found: e.dim(),
        });
    }
    let iso = ch.stinespring();
    let n = iso.dim_out * iso.env_dim;
    let mut rho = ComplexMatrix::zeros(n, n);
    for (index, (p, s)) in e.probs.iter().zip(&e.states).enumerate() {
        let phi = s.pure_vector(PURE_TOL).ok_or(Error::NonPureEnsemble {
            index,
            purity: s.purity(),
        })?;
        let v = iso.mat.matvec(&phi);
        rho.add_scaled(&ComplexMatrix::outer(&v, &v), C64::new(*p, 0.0));
    }
    BipartiteState::new(
        iso.dim_out,
        iso.env_dim,
        DensityMatrix::from_matrix_unchecked(rho.hermitian_part()),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct EofConfig {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub tol: f64,
    pub grad_tol: f64,
    /// Number of ensemble members `k`; `rank^2` when unset.
    pub ensemble_size: Option<usize>,
}

impl Default for EofConfig {
    fn default() -> Self {
        Self::from(&OptConfig::default())
    }
}

impl From<&OptConfig> for EofConfig {
    fn from(c: &OptConfig) -> Self {
        Self {
            starts: c.starts,
            seed: c.seed,
            max_iters: c.max_iters,
            tol: c.tol,
            grad_tol: 1e-9,
            ensemble_size: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EofReport {
    /// Upper bound on `E_F`, in ebits.
    pub value: f64,
    pub ensemble: Ensemble,
    pub converged: bool,
    pub seed: u64,
    pub starts: usize,
    pub best_start: usize,
    pub ensemble_size: usize,
    pub rank: usize,
    pub per_start_values: Vec<f64>,
}

/// `tr(s) S(s / tr s)` for `s = X X^dagger`, with the gradient `G X`
/// (`G = -log2(s / tr s)`) when asked for.
fn weighted_entropy(x: &ComplexMatrix, want_grad: bool) -> Result<(f64, Option<ComplexMatrix>)> {
    let sigma = x.matmul(&x.adjoint());
    let p = sigma.trace().re;
    if p <= 0.0 {
        return Ok((0.0, want_grad.then(|| ComplexMatrix::zeros(x.rows(), x.cols()))));
    }
    let e = eig_hermitian(&sigma.hermitian_part())?;
    let value = -e
        .eigenvalues
        .iter()
        .map(|&l| l / p)
        .filter(|&q| q > 0.0)
        .map(|q| q * q.log2())
        .sum::<f64>()
        * p;
    let grad = want_grad.then(|| {
        let g = e.reconstruct_with(|l| -(l / p).max(LOG_FLOOR).log2());
        g.matmul(x)
    });
    Ok((value, grad))
}

struct Problem {
    dim_a: usize,
    dim_b: usize,
    /// `sqrt(l_j) e_j` reshaped to `dim_a x dim_b`.
    factors: Vec<ComplexMatrix>,
}

impl Problem {
    fn members(&self, v: &ComplexMatrix) -> Vec<ComplexMatrix> {
        (0..v.rows())
            .map(|i| {
                let mut x = ComplexMatrix::zeros(self.dim_a, self.dim_b);
                for (j, y) in self.factors.iter().enumerate() {
                    x.add_scaled(y, v[(i, j)]);
                }
                x
            })
            .collect()
    }

    fn value(&self, v: &ComplexMatrix) -> Result<f64> {
        let mut total = 0.0;
        for x in self.members(v) {
            total += weighted_entropy(&x, false)?.0;
        }
        Ok(total)
    }

    /// Value and Riemannian gradient on the Stiefel manifold.
    fn value_and_grad(&self, v: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
        let (k, r) = (v.rows(), v.cols());
        let mut total = 0.0;
        let mut euclid = ComplexMatrix::zeros(k, r);
        for (i, x) in self.members(v).iter().enumerate() {
            let (h, gx) = weighted_entropy(x, true)?;
            total += h;
            let gx = gx.expect("requested");
            for (j, y) in self.factors.iter().enumerate() {
                euclid[(i, j)] = y.adjoint().trace_product(&gx) * 2.0;
            }
        }
        let sym = v.adjoint().matmul(&euclid).hermitian_part();
        Ok((total, &euclid - &v.matmul(&sym)))
    }
}

fn retract(v: &ComplexMatrix) -> Option<ComplexMatrix> {
    let mut q = v.clone();
    orthonormalize_columns(&mut q).then_some(q)
}

fn real_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x.conj() * y).re).sum()
}

struct Descent {
    value: f64,
    v: ComplexMatrix,
    converged: bool,
}

fn descend(problem: &Problem, mut v: ComplexMatrix, cfg: &EofConfig) -> Result<Descent> {
    let (mut f, mut g) = problem.value_and_grad(&v)?;
    let mut step = 1.0;
    let mut prev: Option<(ComplexMatrix, ComplexMatrix)> = None;
    let mut stalled = 0;
    for _ in 0..cfg.max_iters {
        let gnorm2 = real_inner(&g, &g);
        if gnorm2.sqrt() < cfg.grad_tol {
            return Ok(Descent { value: f, v, converged: true });
        }
        if let Some((pv, pg)) = &prev {
            let s = &v - pv;
            let y = &g - pg;
            let sy = real_inner(&s, &y);
            if sy > 0.0 {
                step = (real_inner(&s, &s) / sy).clamp(1e-8, 1e3);
            }
        }
        let slack = 4.0 * f64::EPSILON * f.abs().max(1.0);
        let mut accepted = None;
        let mut t = step;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial = v.clone();
            trial.add_scaled(&g, C64::new(-t, 0.0));
            if let Some(trial) = retract(&trial) {
                let ft = problem.value(&trial)?;
                if ft <= f - ARMIJO_C * t * gnorm2 + slack {
                    accepted = Some((trial, ft, t));
                    break;
                }
            }
            t /= 2.0;
        }
        let Some((next, fn_, t)) = accepted else {
            return Ok(Descent { value: f, v, converged: true });
        };
        let improvement = f - fn_;
        let (fv, gv) = problem.value_and_grad(&next)?;
        prev = Some((std::mem::replace(&mut v, next), std::mem::replace(&mut g, gv)));
        f = fv;
        step = t;
        if improvement < cfg.tol {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                return Ok(Descent { value: f, v, converged: true });
            }
        } else {
            stalled = 0;
        }
    }
    Ok(Descent { value: f, v, converged: false })
}

/// Upper bound on the entanglement of formation of `rho` on `A (x) B`.
/// Start 0 is the eigen-decomposition; start `s > 0` is a Haar-random isometry
/// seeded by `(seed, s)`, so a larger `starts` only adds candidates.
pub fn eof_upper(rho: &BipartiteState, cfg: &EofConfig) -> Result<EofReport> {
    if cfg.starts == 0 {
        return Err(Error::Validation("need at least one start".into()));
    }
    let e = rho.state.eig();
    let support: Vec<usize> = (0..e.dim()).rev().filter(|&j| e.eigenvalues[j] > SUPPORT_CUTOFF).collect();
    let rank = support.len();
    let factors = support
        .iter()
        .map(|&j| {
            let col: Vec<C64> = e.vector(j).iter().map(|z| z * e.eigenvalues[j].sqrt()).collect();
            ComplexMatrix::from_vec(rho.dim_a, rho.dim_b, col)
        })
        .collect::<Result<Vec<_>>>()?;
    let problem = Problem {
        dim_a: rho.dim_a,
        dim_b: rho.dim_b,
        factors,
    };
    let k = cfg.ensemble_size.unwrap_or(rank * rank).max(rank);

    let runs: Vec<Descent> = (0..cfg.starts)
        .into_par_iter()
        .map(|s| {
            let v0 = if s == 0 {
                ComplexMatrix::from_fn(k, rank, |i, j| if i == j { ONE } else { C64::new(0.0, 0.0) })
            } else {
                let u = haar_unitary(&mut rng_for(cfg.seed, s as u64), k);
                ComplexMatrix::from_fn(k, rank, |i, j| u[(i, j)])
            };
            descend(&problem, v0, cfg)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (s, r) in runs.iter().enumerate() {
        if r.value < runs[best].value - TIE_TOL {
            best = s;
        }
    }
    let winner = &runs[best];

    let mut probs = Vec::new();
    let mut states = Vec::new();
    let mut value = 0.0;
    for x in problem.members(&winner.v) {
        let p = x.matmul(&x.adjoint()).trace().re;
        if p <= WEIGHT_CUTOFF {
            continue;
        }
        let psi: Vec<C64> = x.as_slice().iter().map(|z| z / p.sqrt()).collect();
        value += p * entanglement_entropy(&psi, rho.dim_a, rho.dim_b)?;
        probs.push(p);
        states.push(DensityMatrix::from_pure(&psi));
    }
    let total: f64 = probs.iter().sum();
    value /= total;
    let probs: Vec<f64> = probs.into_iter().map(|p| p / total).collect();

    Ok(EofReport {
        value,
        ensemble: Ensemble::new(probs, states)?,
        converged: winner.converged,
        seed: cfg.seed,
        starts: cfg.starts,
        best_start: best,
        ensemble_size: k,
        rank,
        per_start_values: runs.iter().map(|r| r.value).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis, kron_vec, max_entangled};

    fn cfg(starts: usize) -> EofConfig {
        EofConfig {
            starts,
            ..EofConfig::default()
        }
    }

    #[test]
    fn example9_vectors_are_orthonormal_and_maximally_entangled() {
        let rho = example9_state();
        let e = rho.state.eig();
        let mut spec = e.eigenvalues.clone();
        spec.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (i, l) in spec.iter().enumerate() {
            let want = if i < 4 { 0.25 } else { 0.0 };
            assert!((l - want).abs() < 1e-12);
        }
        assert!((rho.state.matrix().trace().re - 1.0).abs() < 1e-14);
        assert!(rho.reduced_a().unwrap().matrix().approx_eq(&ComplexMatrix::identity(4).scale_real(0.25), 1e-14));
        for j in 12..16 {
            let s = entanglement_entropy(&e.vector(j), 4, 4).unwrap();
            assert!((s - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_states() {
        let prod = kron_vec(&basis(2, 0), &basis(3, 1));
        let r = eof_upper(&BipartiteState::new(2, 3, DensityMatrix::from_pure(&prod)).unwrap(), &cfg(2)).unwrap();
        assert!(r.value.abs() < 1e-9);
        let bell = BipartiteState::new(2, 2, max_entangled(2)).unwrap();
        let r = eof_upper(&bell, &cfg(2)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn separable_mixture_reaches_zero() {
        // Equal weights make the eigenbasis ambiguous; random starts must still find 0.
        let rho = ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]);
        let st = BipartiteState::new(2, 2, DensityMatrix::new(rho).unwrap()).unwrap();
        let r = eof_upper(&st, &cfg(8)).unwrap();
        assert!(r.value < 1e-6, "{}", r.value);
    }

    #[test]
    fn ensemble_reconstructs_the_state() {
        let r = eof_upper(&example9_state(), &cfg(4)).unwrap();
        let avg = r.ensemble.average();
        assert!(avg.matrix().approx_eq(example9_state().state.matrix(), 1e-8));
        let recomputed: f64 = r
            .ensemble
            .probs
            .iter()
            .zip(&r.ensemble.states)
            .map(|(p, s)| p * entanglement_entropy(&s.pure_vector(1e-10).unwrap(), 4, 4).unwrap())
            .sum();
        assert!((recomputed - r.value).abs() < 1e-9);
    }

    #[test]
    fn non_pure_members_are_rejected() {
        let ch = QuantumChannel::identity(2);
        let e = Ensemble::new(vec![1.0], vec![DensityMatrix::maximally_mixed(2)]).unwrap();
        assert!(matches!(channel_optimal_state(&ch, &e), Err(Error::NonPureEnsemble { index: 0, .. })));
    }

    #[test]
    fn bipartite_file_round_trip() {
        let st = example9_state();
        let text = serde_json::to_string(&BipartiteFile {
            dim_a: 4,
            dim_b: 4,
            state: st.state.matrix().clone(),
        })
        .unwrap();
        let back = BipartiteFile::parse(&text).unwrap().into_state().unwrap();
        assert!(back.state.matrix().approx_eq(st.state.matrix(), 1e-15));
        assert!(BipartiteFile::parse(r#"{"dim_a": 2}"#).is_err());
    }
}
