//! Multistart minimization of `psi -> S_alpha(T(|psi><psi|))` on the unit sphere.
//!
//! Each iteration compares two candidates and keeps the lower value:
//! a majorize-minimize step `psi <- lowest eigenvector of T*(grad S)`, and
//! a Riemannian gradient step with a Barzilai-Borwein trial length and Armijo
//! backtracking. The first is monotone for every order (concavity of `S_alpha`
//! for `alpha <= 1`, convexity of `tr sigma^alpha` for `alpha > 1`) and copes
//! with the cusps at rank-deficient outputs; the second polishes smooth minima.
//! `alpha = inf` and the maximal output norm use alternating top-eigenvector
//! iteration of `phi^dagger T(|psi><psi|) phi`.

use rayon::prelude::*;
use serde::Serialize;

use super::{renyi_from_spectrum, RenyiOrder, VON_NEUMANN_WINDOW};
use crate::channels::{DensityMatrix, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, inner, norm, normalized, ComplexMatrix, HermitianEig, C64};
use crate::random::{random_pure_vector, rng_for};

/// Eigenvalue floor inside the gradient when `alpha <= 1`.
pub const EIGEN_FLOOR: f64 = 1e-14;
const TIE_TOL: f64 = 1e-12;
const STALL_LIMIT: usize = 10;
const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

#[derive(Clone, Debug, Serialize)]
pub struct OptConfig {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Improvement below which an iteration counts as stalled.
    pub tol: f64,
    /// Riemannian gradient norm that ends a descent.
    pub grad_tol: f64,
    /// Spread accepted as "equal" when comparing estimates.
    pub tol_equiv: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 12648430,
            max_iters: 2000,
            tol: 1e-12,
            grad_tol: 1e-10,
            tol_equiv: 1e-5,
        }
    }
}

impl OptConfig {
    pub fn check(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::Validation("starts must be positive".into()));
        }
        if !(self.tol >= 0.0 && self.grad_tol >= 0.0 && self.tol_equiv >= 0.0) {
            return Err(Error::Validation("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptReport {
    pub value: f64,
    pub arg_state: DensityMatrix,
    #[serde(skip)]
    pub arg_vector: Vec<C64>,
    pub best_start: usize,
    pub starts: usize,
    pub seed: u64,
    pub per_start_values: Vec<f64>,
    /// At least one start met a stopping criterion before `max_iters`.
    pub converged: bool,
    pub converged_starts: usize,
}

struct StartOutcome {
    value: f64,
    psi: Vec<C64>,
    converged: bool,
}

fn multistart<F>(
    cfg: &OptConfig,
    dim: usize,
    warm: &[Vec<C64>],
    maximize: bool,
    run: F,
) -> Result<OptReport>
where
    F: Fn(Vec<C64>) -> Result<StartOutcome> + Sync,
{
    cfg.check()?;
    if let Some(w) = warm.iter().find(|w| w.len() != dim) {
        return Err(Error::DimMismatch {
            expected: dim,
            found: w.len(),
        });
    }
    let total = cfg.starts.max(warm.len());
    let outcomes: Vec<StartOutcome> = (0..total)
        .into_par_iter()
        .map(|i| {
            let psi0 = match warm.get(i) {
                Some(w) => normalized(w),
                None => random_pure_vector(&mut rng_for(cfg.seed, i as u64), dim),
            };
            run(psi0)
        })
        .collect::<Result<_>>()?;
    let better = |a: f64, b: f64| if maximize { a > b + TIE_TOL } else { a < b - TIE_TOL };
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        if better(o.value, outcomes[best].value) {
            best = i;
        }
    }
    let converged_starts = outcomes.iter().filter(|o| o.converged).count();
    let psi = outcomes[best].psi.clone();
    Ok(OptReport {
        value: outcomes[best].value,
        arg_state: DensityMatrix::from_pure(&psi),
        arg_vector: psi,
        best_start: best,
        starts: total,
        seed: cfg.seed,
        per_start_values: outcomes.iter().map(|o| o.value).collect(),
        converged: converged_starts > 0,
        converged_starts,
    })
}

fn output_eig(ch: &QuantumChannel, psi: &[C64]) -> Result<HermitianEig> {
    eig_hermitian(&ch.apply_vector(psi).hermitian_part())
}

/// Multiplies `v` by a phase so that `<reference, v>` is real and non-negative.
fn align_phase(mut v: Vec<C64>, reference: &[C64]) -> Vec<C64> {
    let ov = inner(reference, &v);
    if ov.norm() > 1e-300 {
        let phase = ov.conj() / ov.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
    v
}

fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Smooth order used for descent: `S_0` is replaced by `S_1/2`.
fn descent_order(alpha: f64) -> f64 {
    if alpha == 0.0 {
        0.5
    } else {
        alpha
    }
}

/// Derivative `f'(lambda)` of the trace function with `S_alpha = F(sum f(lambda))`
/// folded in, so that `dS = tr(G dsigma)` with `G = sum f'(lambda_k) |v_k><v_k|`.
fn spectral_gradient(eig: &HermitianEig, alpha: f64) -> ComplexMatrix {
    let ln2 = std::f64::consts::LN_2;
    if (alpha - 1.0).abs() <= VON_NEUMANN_WINDOW {
        return eig.reconstruct_with(|l| -(l.max(EIGEN_FLOOR).ln() + 1.0) / ln2);
    }
    let q: f64 = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|l| l.powf(alpha))
        .sum();
    let scale = alpha / ((1.0 - alpha) * ln2 * q);
    if alpha < 1.0 {
        eig.reconstruct_with(|l| scale * l.max(EIGEN_FLOOR).powf(alpha - 1.0))
    } else {
        eig.reconstruct_with(|l| scale * l.max(0.0).powf(alpha - 1.0))
    }
}

struct Eval {
    psi: Vec<C64>,
    f: f64,
    g_mat: ComplexMatrix,
    grad: Vec<C64>,
    gnorm: f64,
}

fn value_at(ch: &QuantumChannel, psi: &[C64], alpha: f64) -> Result<f64> {
    Ok(renyi_from_spectrum(
        &output_eig(ch, psi)?.eigenvalues,
        RenyiOrder::Finite(alpha),
    ))
}

fn evaluate(ch: &QuantumChannel, psi: Vec<C64>, alpha: f64) -> Result<Eval> {
    let eig = output_eig(ch, &psi)?;
    let f = renyi_from_spectrum(&eig.eigenvalues, RenyiOrder::Finite(alpha));
    let g_mat = spectral_gradient(&eig, alpha);
    let raw: Vec<C64> = ch
        .apply_adjoint(&g_mat)
        .matvec(&psi)
        .into_iter()
        .map(|z| z * 2.0)
        .collect();
    let radial = real_dot(&psi, &raw);
    let grad: Vec<C64> = raw.iter().zip(&psi).map(|(g, p)| g - p * radial).collect();
    let gnorm = norm(&grad);
    Ok(Eval {
        psi,
        f,
        g_mat,
        grad,
        gnorm,
    })
}

fn noise(f: f64) -> f64 {
    4.0 * f64::EPSILON * f.abs().max(1.0)
}

/// Lowest eigenvector of `T*(G)`, phase-aligned with `psi`.
fn mm_step(ch: &QuantumChannel, cur: &Eval) -> Result<Vec<C64>> {
    let h = ch.apply_adjoint(&cur.g_mat).hermitian_part();
    Ok(align_phase(eig_hermitian(&h)?.vector(0), &cur.psi))
}

fn descend(ch: &QuantumChannel, psi0: Vec<C64>, alpha: f64, cfg: &OptConfig) -> Result<(Vec<C64>, bool)> {
    let mut cur = evaluate(ch, normalized(&psi0), alpha)?;
    let mut prev: Option<(Vec<C64>, Vec<C64>)> = None;
    let mut stalled = 0;
    for _ in 0..cfg.max_iters {
        if cur.gnorm < cfg.grad_tol {
            return Ok((cur.psi, true));
        }
        let mm = evaluate(ch, mm_step(ch, &cur)?, alpha)?;

        let mut t = match &prev {
            Some((p_psi, p_grad)) => {
                let s: Vec<C64> = cur.psi.iter().zip(p_psi).map(|(a, b)| a - b).collect();
                let y: Vec<C64> = cur.grad.iter().zip(p_grad).map(|(a, b)| a - b).collect();
                let sy = real_dot(&s, &y);
                if sy > 0.0 {
                    real_dot(&s, &s) / sy
                } else {
                    1.0 / cur.gnorm
                }
            }
            None => 1.0 / cur.gnorm,
        }
        .clamp(1e-12, 1e6);
        let slack = noise(cur.f);
        let mut gd: Option<Vec<C64>> = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<C64> = cur.psi.iter().zip(&cur.grad).map(|(p, g)| p - g * t).collect();
            let trial = normalized(&trial);
            let f = value_at(ch, &trial, alpha)?;
            if f <= cur.f - ARMIJO_C * t * cur.gnorm * cur.gnorm + slack {
                gd = Some(trial);
                break;
            }
            t *= 0.5;
        }
        let gd = match gd {
            Some(p) => Some(evaluate(ch, p, alpha)?),
            None => None,
        };
        let next = match gd {
            Some(g) if g.f < mm.f => g,
            _ => mm,
        };
        if next.f > cur.f + slack {
            return Ok((cur.psi, true));
        }
        let improvement = cur.f - next.f;
        let old = std::mem::replace(&mut cur, next);
        prev = Some((old.psi, old.grad));
        if improvement < cfg.tol {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                return Ok((cur.psi, true));
            }
        } else {
            stalled = 0;
        }
    }
    Ok((cur.psi, false))
}

/// Alternating maximization of `phi^dagger T(|psi><psi|) phi`; returns the
/// final input and its output norm.
fn alternate(ch: &QuantumChannel, psi0: Vec<C64>, cfg: &OptConfig) -> Result<(Vec<C64>, f64, bool)> {
    let mut psi = normalized(&psi0);
    let eig = output_eig(ch, &psi)?;
    let mut lam = eig.max_eigenvalue();
    let mut phi = eig.top_vector();
    let mut stalled = 0;
    for _ in 0..cfg.max_iters {
        let h = ch.apply_adjoint(&ComplexMatrix::outer(&phi, &phi)).hermitian_part();
        let cand = align_phase(eig_hermitian(&h)?.top_vector(), &psi);
        let eig = output_eig(ch, &cand)?;
        let cand_lam = eig.max_eigenvalue();
        if cand_lam < lam - noise(lam) {
            return Ok((psi, lam, true));
        }
        let improvement = cand_lam - lam;
        psi = cand;
        lam = cand_lam;
        phi = eig.top_vector();
        if improvement < cfg.tol {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                return Ok((psi, lam, true));
            }
        } else {
            stalled = 0;
        }
    }
    Ok((psi, lam, false))
}

/// Estimates `nu_alpha(T) = min_psi S_alpha(T(|psi><psi|))` (an upper bound).
pub fn min_output_entropy(ch: &QuantumChannel, alpha: RenyiOrder, cfg: &OptConfig) -> Result<OptReport> {
    min_output_entropy_with_warm_starts(ch, alpha, cfg, &[])
}

/// As [`min_output_entropy`], with `warm` occupying the first start slots.
pub fn min_output_entropy_with_warm_starts(
    ch: &QuantumChannel,
    alpha: RenyiOrder,
    cfg: &OptConfig,
    warm: &[Vec<C64>],
) -> Result<OptReport> {
    let run = |psi0: Vec<C64>| -> Result<StartOutcome> {
        match alpha {
            RenyiOrder::Infinity => {
                let (psi, lam, converged) = alternate(ch, psi0, cfg)?;
                Ok(StartOutcome {
                    value: -lam.log2(),
                    psi,
                    converged,
                })
            }
            RenyiOrder::Finite(a) => {
                let start = normalized(&psi0);
                let (psi, converged) = descend(ch, start.clone(), descent_order(a), cfg)?;
                let end_value = value_at(ch, &psi, a)?;
                let start_value = value_at(ch, &start, a)?;
                // The surrogate for S_0 may not improve the rank; keep the better end.
                let (value, psi) = if start_value < end_value {
                    (start_value, start)
                } else {
                    (end_value, psi)
                };
                Ok(StartOutcome {
                    value,
                    psi,
                    converged,
                })
            }
        }
    };
    multistart(cfg, ch.dim(), warm, false, run)
}

/// Estimates `sup_rho ||T(rho)||_inf` over pure inputs (a lower bound).
pub fn max_output_norm(ch: &QuantumChannel, cfg: &OptConfig) -> Result<OptReport> {
    max_output_norm_with_warm_starts(ch, cfg, &[])
}

pub fn max_output_norm_with_warm_starts(
    ch: &QuantumChannel,
    cfg: &OptConfig,
    warm: &[Vec<C64>],
) -> Result<OptReport> {
    multistart(cfg, ch.dim(), warm, true, |psi0| {
        let (psi, value, converged) = alternate(ch, psi0, cfg)?;
        Ok(StartOutcome {
            value,
            psi,
            converged,
        })
    })
}

/// Iterates the majorize-minimize map for `S_alpha` to a fixed point, which
/// pins down a minimizer far more tightly than value-based stopping.
pub fn polish_minimizer(
    ch: &QuantumChannel,
    alpha: f64,
    psi: &[C64],
    max_iters: usize,
) -> Result<Vec<C64>> {
    let alpha = descent_order(alpha);
    let mut cur = evaluate(ch, normalized(psi), alpha)?;
    for _ in 0..max_iters {
        let next = evaluate(ch, mm_step(ch, &cur)?, alpha)?;
        if next.f > cur.f + noise(cur.f) {
            break;
        }
        let step: f64 = next
            .psi
            .iter()
            .zip(&cur.psi)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        cur = next;
        if step < 1e-15 {
            break;
        }
    }
    Ok(cur.psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build, ChannelSpec};

    fn small_cfg() -> OptConfig {
        OptConfig {
            starts: 8,
            ..OptConfig::default()
        }
    }

    /// Channel from the first `d` columns of a Haar unitary on `C^d (x) C^k`.
    fn random_channel(d: usize, k: usize, seed: u64) -> QuantumChannel {
        let u = crate::random::haar_unitary(&mut rng_for(seed, 0), d * k);
        let kraus = (0..k)
            .map(|e| ComplexMatrix::from_fn(d, d, |a, i| u[(a * k + e, i)]))
            .collect();
        QuantumChannel::new(kraus).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // Generic outputs are full rank, so every order is smooth here.
        let ch = random_channel(3, 2, 11);
        let mut rng = rng_for(5, 0);
        let psi = random_pure_vector(&mut rng, 3);
        let dir = random_pure_vector(&mut rng, 3);
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let e = evaluate(&ch, psi.clone(), alpha).unwrap();
            let h = 1e-6;
            let shifted = |s: f64| -> f64 {
                let v: Vec<C64> = psi.iter().zip(&dir).map(|(p, q)| p + q * s).collect();
                value_at(&ch, &normalized(&v), alpha).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            // Directional derivative of psi -> S(T(psi psi^dagger / |psi|^2)).
            let tangent: Vec<C64> = {
                let r = real_dot(&psi, &dir);
                dir.iter().zip(&psi).map(|(q, p)| q - p * r).collect()
            };
            let analytic = real_dot(&e.grad, &tangent);
            assert!((fd - analytic).abs() < 1e-6, "alpha {alpha}: {fd} vs {analytic}");
        }
    }

    #[test]
    fn identity_channel_has_zero_minimal_entropy() {
        let ch = QuantumChannel::identity(3);
        let r = min_output_entropy(&ch, RenyiOrder::VON_NEUMANN, &small_cfg()).unwrap();
        assert!(r.value.abs() < 1e-12);
        let n = max_output_norm(&ch, &small_cfg()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn werner_holevo_values() {
        let ch = build(&ChannelSpec::WernerHolevo { d: 3 }).unwrap().channel;
        for a in [0.0, 0.5, 1.0, 2.0, f64::INFINITY] {
            let r = min_output_entropy(&ch, RenyiOrder::new(a).unwrap(), &small_cfg()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-9, "alpha {a}: {}", r.value);
        }
        let n = max_output_norm(&ch, &small_cfg()).unwrap();
        assert!((n.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let ch = build(&ChannelSpec::CasimirIrreducible { d: 3 }).unwrap().channel;
        let cfg = small_cfg();
        let a = min_output_entropy(&ch, RenyiOrder::Finite(2.0), &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool
            .install(|| min_output_entropy(&ch, RenyiOrder::Finite(2.0), &cfg))
            .unwrap();
        assert_eq!(a.per_start_values, b.per_start_values);
        assert_eq!(a.best_start, b.best_start);
    }

    #[test]
    fn zero_starts_is_rejected() {
        let ch = QuantumChannel::identity(2);
        let cfg = OptConfig {
            starts: 0,
            ..OptConfig::default()
        };
        assert!(min_output_entropy(&ch, RenyiOrder::VON_NEUMANN, &cfg).is_err());
    }
}
