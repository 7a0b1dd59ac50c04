use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, normalized, ComplexMatrix, HermitianEig, C64};

/// Hermiticity accepted on construction.
pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-STATE_NEGATIVE_TOL, 0)` are rounding and get clamped to zero.
pub const STATE_NEGATIVE_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-10;

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `mat`. Slightly negative eigenvalues are clamped and the
    /// matrix rebuilt from the clamped spectrum.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() || mat.rows() == 0 {
            return Err(Error::NotAState(format!(
                "expected a non-empty square matrix, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let defect = mat.hermitian_defect();
        if defect > STATE_HERMITIAN_TOL {
            return Err(Error::NotAState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > STATE_TRACE_TOL {
            return Err(Error::NotAState(format!("trace {tr} != 1")));
        }
        let herm = mat.hermitian_part();
        let eig = eig_hermitian(&herm)?;
        let min = eig.min_eigenvalue();
        if min < -STATE_NEGATIVE_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
        }
        let mat = if min < 0.0 {
            eig.reconstruct_with(|l| l.max(0.0))
        } else {
            herm
        };
        Ok(Self { mat })
    }

    /// `|psi><psi| / <psi|psi>`
    pub fn from_pure(psi: &[C64]) -> Self {
        let v = normalized(psi);
        Self {
            mat: ComplexMatrix::outer(&v, &v),
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    /// Wraps a matrix already known to be a state (e.g. a channel output
    /// computed from a state).
    pub(crate) fn from_matrix_unchecked(mat: ComplexMatrix) -> Self {
        Self {
            mat: mat.hermitian_part(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn eig(&self) -> HermitianEig {
        eig_hermitian(&self.mat).expect("density matrices are Hermitian")
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// State vector if the state is pure to within `tol` in purity.
    pub fn pure_vector(&self, tol: f64) -> Option<Vec<C64>> {
        if (self.purity() - 1.0).abs() > tol {
            return None;
        }
        Some(self.eig().top_vector())
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.mat.serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn accepts_and_clamps_rounding() {
        let m = ComplexMatrix::diag_real(&[1.0 + 5e-11, -5e-11]);
        let s = DensityMatrix::new(m).unwrap();
        assert!(s.eig().min_eigenvalue() >= 0.0);
    }

    #[test]
    fn rejects_genuine_negativity() {
        let m = ComplexMatrix::diag_real(&[1.1, -0.1]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotAState(_))));
    }

    #[test]
    fn rejects_bad_trace_and_asymmetry() {
        assert!(DensityMatrix::new(ComplexMatrix::diag_real(&[0.5, 0.4])).is_err());
        let m = ComplexMatrix::from_rows(&[
            vec![C64::new(0.5, 0.0), ONE],
            vec![ZERO, C64::new(0.5, 0.0)],
        ])
        .unwrap();
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn pure_state_helpers() {
        let s = DensityMatrix::from_pure(&[ONE, ONE]);
        assert!((s.purity() - 1.0).abs() < 1e-15);
        let v = s.pure_vector(1e-10).unwrap();
        assert!((v[0].norm() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(DensityMatrix::maximally_mixed(2).pure_vector(1e-10).is_none());
    }
}
