//! Finite-N additivity checks: estimated gaps `sum nu(T_i) - nu(tensor T_i)`,
//! the trace-square bound for tensor products of the `M` maps, and the
//! subset expansion of the output purity of a tensor product of
//! projective-form channels.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{tensor_channels, DensityMatrix, LinearMap, ProjectiveForm, QuantumChannel};
use crate::entropy::{min_output_entropy, min_output_entropy_with_warm_starts, OptConfig, RenyiOrder};
use crate::error::{Error, Result};
use crate::linalg::{kron_vec, partial_trace, C64, ZERO};
use crate::random::{random_density_matrix, random_pure_vector, rng_for, split_seed};
use crate::zoo::BuiltChannel;

/// Slack allowed in `lhs <= bound` for the trace-square bound.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    ProductOfArgmins,
    MaximallyEntangled,
    Random,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdditivityReport {
    pub alpha: RenyiOrder,
    pub singles: Vec<f64>,
    pub joint: f64,
    pub gap: f64,
    pub witness_state: DensityMatrix,
    pub witness_start: usize,
    pub witness_kind: WarmStart,
    pub joint_converged: bool,
}

/// `sum_i |i, i, ..., i> / sqrt(k)` over `i < k = min dims`; `Omega` for two equal factors.
pub fn diagonal_entangled_vector(dims: &[usize]) -> Vec<C64> {
    let k = dims.iter().copied().min().unwrap_or(1);
    let total: usize = dims.iter().product();
    let mut v = vec![ZERO; total];
    let amp = C64::new(1.0 / (k as f64).sqrt(), 0.0);
    for i in 0..k {
        let idx = dims.iter().fold(0, |acc, &d| acc * d + i);
        v[idx] = amp;
    }
    v
}

/// Estimates `nu_alpha` for each channel and for their tensor product.
///
/// The joint search uses the product of single-channel argmins as start 0 and
/// the diagonal maximally entangled vector as start 1 (for two or more factors).
pub fn additivity_gap(
    channels: &[QuantumChannel],
    alpha: RenyiOrder,
    cfg: &OptConfig,
) -> Result<AdditivityReport> {
    if channels.is_empty() {
        return Err(Error::Validation("need at least one channel".into()));
    }
    let single_reports = channels
        .iter()
        .map(|ch| min_output_entropy(ch, alpha, cfg))
        .collect::<Result<Vec<_>>>()?;
    let singles: Vec<f64> = single_reports.iter().map(|r| r.value).collect();
    if channels.len() == 1 {
        let r = &single_reports[0];
        return Ok(AdditivityReport {
            alpha,
            singles: singles.clone(),
            joint: r.value,
            gap: 0.0,
            witness_state: r.arg_state.clone(),
            witness_start: r.best_start,
            witness_kind: WarmStart::ProductOfArgmins,
            joint_converged: r.converged,
        });
    }
    let joint_channel = tensor_channels(channels)?;
    let dims: Vec<usize> = channels.iter().map(|c| c.dim()).collect();
    let product = single_reports
        .iter()
        .skip(1)
        .fold(single_reports[0].arg_vector.clone(), |acc, r| {
            kron_vec(&acc, &r.arg_vector)
        });
    let warm = vec![product, diagonal_entangled_vector(&dims)];
    let joint = min_output_entropy_with_warm_starts(&joint_channel, alpha, cfg, &warm)?;
    let witness_kind = match joint.best_start {
        0 => WarmStart::ProductOfArgmins,
        1 => WarmStart::MaximallyEntangled,
        _ => WarmStart::Random,
    };
    Ok(AdditivityReport {
        alpha,
        gap: singles.iter().sum::<f64>() - joint.value,
        singles,
        joint: joint.value,
        witness_state: joint.arg_state,
        witness_start: joint.best_start,
        witness_kind,
        joint_converged: joint.converged,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceSquareReport {
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `tr[(M_1 (x) ... (x) M_N)(rho)^2]` against `prod 1/m_i`.
pub fn trace_square_bound(maps: &[(&LinearMap, usize)], rho: &DensityMatrix) -> Result<TraceSquareReport> {
    if maps.is_empty() {
        return Err(Error::Validation("need at least one map".into()));
    }
    let total: usize = maps.iter().map(|(m, _)| m.dim()).product();
    if rho.dim() != total {
        return Err(Error::DimMismatch {
            expected: total,
            found: rho.dim(),
        });
    }
    let list: Vec<&LinearMap> = maps.iter().map(|(m, _)| *m).collect();
    let out = LinearMap::apply_tensor(&list, rho.matrix())?;
    let lhs = out.trace_product(&out).re;
    let bound = maps.iter().map(|(_, m)| 1.0 / *m as f64).product();
    Ok(TraceSquareReport {
        lhs,
        bound,
        holds: lhs <= bound + BOUND_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundTrialReport {
    pub trials: usize,
    pub seed: u64,
    pub bound: f64,
    pub max_lhs: f64,
    pub max_excess: f64,
    pub violations: usize,
}

/// Random input for trial `i`: pure on even trials, Ginibre of random rank on odd ones.
fn trial_state(seed: u64, i: usize, dim: usize) -> DensityMatrix {
    let mut rng = rng_for(seed, i as u64);
    if i % 2 == 0 {
        DensityMatrix::from_pure(&random_pure_vector(&mut rng, dim))
    } else {
        let rank = 1 + (split_seed(seed, i as u64) % dim as u64) as usize;
        random_density_matrix(&mut rng, dim, rank)
    }
}

/// Runs [`trace_square_bound`] on `trials` seeded random states.
pub fn trace_square_trials(
    maps: &[(&LinearMap, usize)],
    trials: usize,
    seed: u64,
) -> Result<BoundTrialReport> {
    let dim: usize = maps.iter().map(|(m, _)| m.dim()).product();
    let results = (0..trials)
        .into_par_iter()
        .map(|i| trace_square_bound(maps, &trial_state(seed, i, dim)))
        .collect::<Result<Vec<_>>>()?;
    let bound = maps.iter().map(|(_, m)| 1.0 / *m as f64).product::<f64>();
    Ok(summarize(&results.iter().map(|r| r.lhs).collect::<Vec<_>>(), bound, trials, seed))
}

fn summarize(lhs: &[f64], bound: f64, trials: usize, seed: u64) -> BoundTrialReport {
    let max_lhs = lhs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    BoundTrialReport {
        trials,
        seed,
        bound,
        max_lhs,
        max_excess: max_lhs - bound,
        violations: lhs.iter().filter(|&&l| l > bound + BOUND_TOL).count(),
    }
}

/// Output purity of `tensor T_i` on `trials` random pure inputs, against
/// `prod 1/(d_i - m_i)`.
pub fn output_purity_trials(channels: &[BuiltChannel], trials: usize, seed: u64) -> Result<BoundTrialReport> {
    let forms = forms_of(channels)?;
    let list: Vec<QuantumChannel> = channels.iter().map(|b| b.channel.clone()).collect();
    let joint = tensor_channels(&list)?;
    let dim = joint.dim();
    let bound = forms
        .iter()
        .map(|f| 1.0 / (f.d - f.m) as f64)
        .product::<f64>();
    let lhs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let psi = random_pure_vector(&mut rng_for(seed, i as u64), dim);
            let out = joint.apply_vector(&psi);
            out.trace_product(&out).re
        })
        .collect();
    Ok(summarize(&lhs, bound, trials, seed))
}

fn forms_of(channels: &[BuiltChannel]) -> Result<Vec<&ProjectiveForm>> {
    channels
        .iter()
        .enumerate()
        .map(|(i, b)| {
            b.form.as_ref().ok_or_else(|| {
                Error::NotProjectiveClass(format!("channel {i} carries no projective form"))
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub expansion: f64,
    pub direct: f64,
    pub difference: f64,
}

/// Output purity of `tensor T_i` from the reduced states of `omega = (tensor M_i)(rho)`:
///
/// `prod (d_i - m_i)^-2 * sum_G tr[omega_G^2] prod_{k in G} m_k^2 prod_{j not in G} (d_j - 2 m_j)`,
///
/// with subsets `G` enumerated as bitmasks in increasing order, compared with
/// the purity obtained by applying the tensor channel directly.
pub fn purity_expansion(channels: &[BuiltChannel], rho: &DensityMatrix) -> Result<ExpansionReport> {
    if channels.is_empty() {
        return Err(Error::Validation("need at least one channel".into()));
    }
    let forms = forms_of(channels)?;
    let dims: Vec<usize> = forms.iter().map(|f| f.d).collect();
    let total: usize = dims.iter().product();
    if rho.dim() != total {
        return Err(Error::DimMismatch {
            expected: total,
            found: rho.dim(),
        });
    }
    let maps: Vec<&LinearMap> = forms.iter().map(|f| &f.map).collect();
    let omega = LinearMap::apply_tensor(&maps, rho.matrix())?;
    let n = forms.len();
    let mut sum = 0.0;
    for mask in 0u32..(1u32 << n) {
        let keep: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        let purity = if keep.is_empty() {
            let t = omega.trace();
            (t * t).re
        } else {
            let red = partial_trace(&omega, &dims, &keep)?;
            red.trace_product(&red).re
        };
        let weight: f64 = (0..n)
            .map(|k| {
                let (d, m) = (forms[k].d as f64, forms[k].m as f64);
                if mask & (1 << k) != 0 {
                    m * m
                } else {
                    d - 2.0 * m
                }
            })
            .product();
        sum += purity * weight;
    }
    let norm: f64 = forms
        .iter()
        .map(|f| {
            let g = (f.d - f.m) as f64;
            1.0 / (g * g)
        })
        .product();
    let expansion = sum * norm;

    let list: Vec<QuantumChannel> = channels.iter().map(|b| b.channel.clone()).collect();
    let out = tensor_channels(&list)?.apply_matrix(rho.matrix());
    let direct = out.trace_product(&out).re;
    Ok(ExpansionReport {
        expansion,
        direct,
        difference: (expansion - direct).abs(),
    })
}
