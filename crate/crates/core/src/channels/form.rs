use serde::Serialize;

use super::channel::QuantumChannel;
use super::map::LinearMap;
use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE};

/// Tolerance for recognising `1 / norm` as an integer.
pub const INTEGER_TOL: f64 = 1e-6;
/// Projector and reconstruction checks on an extracted form.
pub const FORM_TOL: f64 = 1e-8;

/// `T(rho) = (tr(rho) I - m M(rho)) / (d - m)` with a witness input `rho0`
/// for which `m M(rho0)` is a rank-`m` projection.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectiveForm {
    pub m: usize,
    pub d: usize,
    pub map: LinearMap,
    pub rho0: DensityMatrix,
    /// `m M(rho0)`
    pub projector: ComplexMatrix,
}

impl ProjectiveForm {
    /// Builds the form and computes the projector; does not check it.
    pub fn new(m: usize, map: LinearMap, rho0: DensityMatrix) -> Self {
        let d = map.dim();
        let projector = map.apply(rho0.matrix()).scale_real(m as f64);
        Self {
            m,
            d,
            map,
            rho0,
            projector,
        }
    }

    pub fn reconstruct(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::identity(self.d).scale(x.trace());
        out.add_scaled(&self.map.apply(x), ONE * -(self.m as f64));
        out.scale_real(1.0 / (self.d - self.m) as f64)
    }

    /// `max |T(E_ij) - reconstruct(E_ij)|` over matrix units.
    pub fn reconstruction_residual(&self, channel: &QuantumChannel) -> f64 {
        let d = self.d;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut unit = ComplexMatrix::zeros(d, d);
                unit[(i, j)] = ONE;
                let diff = &channel.apply_matrix(&unit) - &self.reconstruct(&unit);
                worst = worst.max(diff.max_abs());
            }
        }
        worst
    }

    /// `(max |P^2 - P|, |tr P - m|)`
    pub fn projector_defects(&self) -> (f64, f64) {
        let p = &self.projector;
        let idem = (&p.matmul(p) - p).max_abs();
        let tr = (p.trace().re - self.m as f64).abs() + p.trace().im.abs();
        (idem, tr)
    }

    /// Checks every invariant of the form against `channel`.
    pub fn check(&self, channel: &QuantumChannel, tol: f64) -> Result<()> {
        if self.m == 0 || self.m >= self.d || channel.dim() != self.d {
            return Err(Error::NotProjectiveClass(format!(
                "need 0 < m < d, got m = {} with d = {}",
                self.m, self.d
            )));
        }
        let (idem, tr) = self.projector_defects();
        if idem > tol || tr > tol {
            return Err(Error::NotProjectiveClass(format!(
                "m M(rho0) is not a rank-{} projection (idempotency {idem:e}, trace {tr:e})",
                self.m
            )));
        }
        let res = self.reconstruction_residual(channel);
        if res > tol {
            return Err(Error::NotProjectiveClass(format!(
                "reconstruction residual {res:e}"
            )));
        }
        Ok(())
    }
}

/// Recovers `(M, m)` from a state whose output attains the maximal output
/// norm `norm_value = 1/m0`.
///
/// `M` is defined by `M(rho) = m0/(d - m0) (tr(rho) I/m0 - T(rho))`, with
/// `m = d - m0`. `M` is positive exactly when `norm_value` is the true
/// supremum of `||T(rho)||_inf`; that part rests on the caller's optimizer.
pub fn extract_projective_form(
    channel: &QuantumChannel,
    argmax_state: &DensityMatrix,
    norm_value: f64,
) -> Result<ProjectiveForm> {
    let d = channel.dim();
    if argmax_state.dim() != d {
        return Err(Error::DimMismatch {
            expected: d,
            found: argmax_state.dim(),
        });
    }
    if !(norm_value > 0.0) {
        return Err(Error::NotProjectiveClass(format!(
            "output norm {norm_value} is not positive"
        )));
    }
    let m0 = (1.0 / norm_value).round() as usize;
    if m0 == 0 || (norm_value - 1.0 / m0 as f64).abs() > INTEGER_TOL {
        return Err(Error::NotProjectiveClass(format!(
            "norm {norm_value} is not 1/m0 for an integer m0"
        )));
    }
    if m0 >= d {
        return Err(Error::NotProjectiveClass(format!(
            "maximal output is rank {m0} = d, leaving no room for m > 0"
        )));
    }
    let m = d - m0;
    let factor = m0 as f64 / m as f64;
    let inv_m0 = 1.0 / m0 as f64;
    let map = LinearMap::from_fn(d, |x| {
        let mut out = ComplexMatrix::identity(d).scale(x.trace() * inv_m0);
        out.add_scaled(&channel.apply_matrix(x), -ONE);
        out.scale_real(factor)
    });
    let form = ProjectiveForm::new(m, map, argmax_state.clone());
    form.check(channel, FORM_TOL)?;
    Ok(form)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ProjectionCheck {
    pub is_projection: bool,
    /// Number of eigenvalues above `tol`.
    pub rank: usize,
}

/// Whether every nonzero eigenvalue equals `1/rank` within `tol`.
pub fn is_normalized_projection(rho: &DensityMatrix, tol: f64) -> ProjectionCheck {
    let eig = rho.eig();
    let rank = eig.eigenvalues.iter().filter(|&&l| l > tol).count();
    if rank == 0 {
        return ProjectionCheck {
            is_projection: false,
            rank,
        };
    }
    let level = 1.0 / rank as f64;
    let is_projection = eig
        .eigenvalues
        .iter()
        .all(|&l| l.abs() <= tol || (l - level).abs() <= tol);
    ProjectionCheck {
        is_projection,
        rank,
    }
}
