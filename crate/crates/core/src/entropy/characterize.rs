use serde::Serialize;

use super::optimize::{
    max_output_norm_with_warm_starts, min_output_entropy, min_output_entropy_with_warm_starts,
    polish_minimizer, OptConfig, OptReport,
};
use super::RenyiOrder;
use crate::channels::{
    extract_projective_form, is_normalized_projection, DensityMatrix, ProjectiveForm,
    QuantumChannel,
};
use crate::error::{Error, Result};
use crate::linalg::C64;

pub const DEFAULT_ALPHA_GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, f64::INFINITY];

/// Tolerance for recognising a candidate output as a normalized projection.
const PROJECTION_TOL: f64 = 1e-6;
const POLISH_ITERS: usize = 2000;

#[derive(Clone, Debug, Serialize)]
pub struct NuEstimate {
    pub alpha: RenyiOrder,
    pub value: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormSummary {
    pub m: usize,
    pub d: usize,
    pub reconstruction_residual: f64,
    pub projector_idempotency_defect: f64,
    pub projector_trace_defect: f64,
}

impl FormSummary {
    pub fn new(form: &ProjectiveForm, channel: &QuantumChannel) -> Self {
        let (idem, tr) = form.projector_defects();
        Self {
            m: form.m,
            d: form.d,
            reconstruction_residual: form.reconstruction_residual(channel),
            projector_idempotency_defect: idem,
            projector_trace_defect: tr,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    /// Some input has a pure output, so every `nu_alpha` is zero.
    PureOutput,
    /// The maximal output is `I/d`; no `m > 0` fits.
    ConstantOutput,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterizationReport {
    pub nu: Vec<NuEstimate>,
    pub nu_spread: f64,
    pub constant_nu: bool,
    pub max_output_norm: f64,
    pub norm_at_projection: bool,
    pub projection_rank: Option<usize>,
    pub witness_state: Option<DensityMatrix>,
    pub projective_form: Option<FormSummary>,
    #[serde(skip)]
    pub form: Option<ProjectiveForm>,
    pub extraction_error: Option<String>,
    /// All three predicates agree (all true or all false).
    pub predicates_agree: bool,
    pub boundary: Option<BoundaryCase>,
}

struct Candidate {
    psi: Vec<C64>,
    rank: usize,
}

fn projection_candidate(
    ch: &QuantumChannel,
    psi: &[C64],
    norm_value: f64,
    tol_equiv: f64,
) -> Option<Candidate> {
    let out = ch.apply(&DensityMatrix::from_pure(psi)).ok()?;
    let check = is_normalized_projection(&out, PROJECTION_TOL);
    let lam = out.eig().max_eigenvalue();
    (check.is_projection && (lam - norm_value).abs() <= tol_equiv).then(|| Candidate {
        psi: psi.to_vec(),
        rank: check.rank,
    })
}

/// Evaluates the three equivalent conditions for membership in the projective
/// class: constant `nu_alpha` over `alphas`, a maximal output that is a
/// normalized projection, and an extractable `(M, m)` form.
pub fn characterize(
    ch: &QuantumChannel,
    alphas: &[RenyiOrder],
    cfg: &OptConfig,
) -> Result<CharacterizationReport> {
    if alphas.is_empty() {
        return Err(Error::Validation("alpha grid is empty".into()));
    }
    let two = RenyiOrder::Finite(2.0);
    let anchor = min_output_entropy(ch, two, cfg)?;
    let warm = vec![anchor.arg_vector.clone()];

    let mut reports: Vec<(RenyiOrder, OptReport)> = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let r = if alpha == two {
            anchor.clone()
        } else {
            min_output_entropy_with_warm_starts(ch, alpha, cfg, &warm)?
        };
        reports.push((alpha, r));
    }
    let norm = max_output_norm_with_warm_starts(ch, cfg, &warm)?;

    let values: Vec<f64> = reports.iter().map(|(_, r)| r.value).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let nu_spread = max - min;
    let constant_nu = nu_spread <= cfg.tol_equiv;

    let mut raw: Vec<&[C64]> = vec![&anchor.arg_vector];
    raw.extend(reports.iter().map(|(_, r)| r.arg_vector.as_slice()));
    raw.push(&norm.arg_vector);
    let mut chosen: Option<Candidate> = None;
    for psi in raw {
        let polished = polish_minimizer(ch, 2.0, psi, POLISH_ITERS)?;
        for v in [polished.as_slice(), psi] {
            if let Some(c) = projection_candidate(ch, v, norm.value, cfg.tol_equiv) {
                chosen = Some(c);
                break;
            }
        }
        if chosen.is_some() {
            break;
        }
    }

    let d = ch.dim();
    let mut boundary = None;
    if min.abs() <= cfg.tol_equiv {
        boundary = Some(BoundaryCase::PureOutput);
    }
    let (form, extraction_error) = match &chosen {
        Some(c) => {
            if c.rank == d {
                boundary = Some(BoundaryCase::ConstantOutput);
            }
            match extract_projective_form(ch, &DensityMatrix::from_pure(&c.psi), norm.value) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
        None => (
            None,
            Some("no candidate input has a normalized projection as output".to_string()),
        ),
    };
    let norm_at_projection = chosen.is_some();
    let has_form = form.is_some();
    Ok(CharacterizationReport {
        nu: reports
            .iter()
            .map(|(alpha, r)| NuEstimate {
                alpha: *alpha,
                value: r.value,
                converged: r.converged,
            })
            .collect(),
        nu_spread,
        constant_nu,
        max_output_norm: norm.value,
        norm_at_projection,
        projection_rank: chosen.as_ref().map(|c| c.rank),
        witness_state: chosen.as_ref().map(|c| DensityMatrix::from_pure(&c.psi)),
        projective_form: form.as_ref().map(|f| FormSummary::new(f, ch)),
        form,
        extraction_error,
        predicates_agree: constant_nu == norm_at_projection && norm_at_projection == has_form,
        boundary,
    })
}
