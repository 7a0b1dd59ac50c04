use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::map::LinearMap;
use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, partial_transpose, tensor_with_cap, ComplexMatrix, C64, DEFAULT_DIM_CAP, ZERO,
};

/// Tolerance on `sum_k A_k^dagger A_k = I`.
pub const TP_TOL: f64 = 1e-9;
/// Choi eigenvalues above `-CP_TOL` count as nonnegative.
pub const CP_TOL: f64 = 1e-10;
/// Choi eigenvalues below this are dropped when extracting Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-12;

/// A channel on `d x d` density matrices given by Kraus operators
/// `T(rho) = sum_k A_k rho A_k^dagger`. The Choi matrix
/// `(T (x) id)(Omega)` (trace one) is computed on first use.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    choi: OnceLock<ComplexMatrix>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValidationFlags {
    pub trace_preserving: bool,
    pub completely_positive: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValidationResiduals {
    /// `max |sum A^dagger A - I|`
    pub trace_preservation: f64,
    pub min_choi_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValidationReport {
    pub flags: ValidationFlags,
    pub residuals: ValidationResiduals,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.flags.trace_preserving && self.flags.completely_positive
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PptReport {
    pub ppt: bool,
    pub min_eig: f64,
}

/// Stinespring isometry `U|phi> = sum_k A_k|phi> (x) |k>`, output factor first.
#[derive(Clone, Debug, Serialize)]
pub struct Isometry {
    pub dim_in: usize,
    pub dim_out: usize,
    pub env_dim: usize,
    /// `(dim_out * env_dim) x dim_in`
    pub mat: ComplexMatrix,
}

impl Isometry {
    pub fn apply_vector(&self, phi: &[C64]) -> Vec<C64> {
        self.mat.matvec(phi)
    }

    /// `max |U^dagger U - I|`
    pub fn isometry_defect(&self) -> f64 {
        let g = self.mat.adjoint().matmul(&self.mat);
        (&g - &ComplexMatrix::identity(self.dim_in)).max_abs()
    }

    /// `tr_env(U X U^dagger)`
    pub fn reduced_output(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let joint = self.mat.matmul(x).matmul(&self.mat.adjoint());
        crate::linalg::partial_trace(&joint, &[self.dim_out, self.env_dim], &[0])
    }
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Validation("channel needs at least one Kraus operator".into()))?;
        let dim = first.rows();
        if dim == 0 {
            return Err(Error::Validation("zero-dimensional Kraus operator".into()));
        }
        for (k, a) in kraus.iter().enumerate() {
            if a.rows() != dim || a.cols() != dim {
                return Err(Error::Validation(format!(
                    "Kraus operator {k} is {}x{}, expected {dim}x{dim}",
                    a.rows(),
                    a.cols()
                )));
            }
        }
        Ok(Self {
            dim,
            kraus,
            choi: OnceLock::new(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(dim)]).expect("identity is well formed")
    }

    /// Minimal Kraus representation from a (trace-one) Choi matrix.
    pub fn from_choi(dim: usize, choi: &ComplexMatrix) -> Result<Self> {
        if choi.rows() != dim * dim || !choi.is_square() {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                found: choi.rows(),
            });
        }
        let eig = eig_hermitian(choi)?;
        if eig.min_eigenvalue() < -CP_TOL {
            return Err(Error::Validation(format!(
                "Choi matrix has negative eigenvalue {:e}",
                eig.min_eigenvalue()
            )));
        }
        let d = dim as f64;
        let mut kraus = Vec::new();
        for k in (0..eig.dim()).rev() {
            let mu = eig.eigenvalues[k];
            if mu < KRAUS_CUTOFF {
                continue;
            }
            let v = eig.vector(k);
            let scale = (d * mu).sqrt();
            kraus.push(ComplexMatrix::from_fn(dim, dim, |a, i| v[a * dim + i] * scale));
        }
        let ch = Self::new(kraus)?;
        let _ = ch.choi.set(choi.hermitian_part());
        Ok(ch)
    }

    /// Channel with the action of a trace-preserving completely positive `map`.
    pub fn from_map(map: &LinearMap) -> Result<Self> {
        Self::from_choi(map.dim(), &map.choi())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &ComplexMatrix {
        self.choi.get_or_init(|| {
            let d = self.dim;
            let n = d * d;
            let inv = 1.0 / d as f64;
            let mut c = ComplexMatrix::zeros(n, n);
            for a in &self.kraus {
                let v = a.as_slice();
                for r in 0..n {
                    if v[r] == ZERO {
                        continue;
                    }
                    for s in 0..n {
                        c[(r, s)] += v[r] * v[s].conj() * inv;
                    }
                }
            }
            c
        })
    }

    /// `T(X)` for an arbitrary operator.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for a in &self.kraus {
            out.add_scaled(&a.conjugate_by(x), crate::linalg::ONE);
        }
        out
    }

    /// `T(|psi><psi|)` without forming the projector.
    pub fn apply_vector(&self, psi: &[C64]) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d, d);
        for a in &self.kraus {
            let v = a.matvec(psi);
            for i in 0..d {
                if v[i] == ZERO {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        out
    }

    /// Adjoint map `T*(G) = sum_k A_k^dagger G A_k`.
    pub fn apply_adjoint(&self, g: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for a in &self.kraus {
            out.add_scaled(&a.adjoint().matmul(g).matmul(a), crate::linalg::ONE);
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        DensityMatrix::new(self.apply_matrix(rho.matrix()))
    }

    /// Output for an input the caller knows to be a state; skips validation.
    pub(crate) fn apply_state_unchecked(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.apply_matrix(rho.matrix()))
    }

    pub fn validate(&self) -> ValidationReport {
        let d = self.dim;
        let mut sum = ComplexMatrix::zeros(d, d);
        for a in &self.kraus {
            sum.add_scaled(&a.adjoint().matmul(a), crate::linalg::ONE);
        }
        let tp = (&sum - &ComplexMatrix::identity(d)).max_abs();
        let min_eig = eig_hermitian(self.choi())
            .map(|e| e.min_eigenvalue())
            .unwrap_or(f64::NEG_INFINITY);
        ValidationReport {
            flags: ValidationFlags {
                trace_preserving: tp <= TP_TOL,
                completely_positive: min_eig >= -CP_TOL,
            },
            residuals: ValidationResiduals {
                trace_preservation: tp,
                min_choi_eigenvalue: min_eig,
            },
        }
    }

    pub fn to_linear_map(&self) -> LinearMap {
        LinearMap::from_fn(self.dim, |x| self.apply_matrix(x))
    }

    pub fn stinespring(&self) -> Isometry {
        let kept: Vec<&ComplexMatrix> = self
            .kraus
            .iter()
            .filter(|a| a.frobenius_norm() >= KRAUS_CUTOFF)
            .collect();
        let d = self.dim;
        let env = kept.len();
        let mat = ComplexMatrix::from_fn(d * env, d, |r, i| kept[r % env][(r / env, i)]);
        Isometry {
            dim_in: d,
            dim_out: d,
            env_dim: env,
            mat,
        }
    }

    /// Positivity of the partially transposed Choi matrix, a necessary
    /// condition for the channel to be entanglement breaking.
    pub fn is_ppt_choi(&self) -> Result<PptReport> {
        let pt = partial_transpose(self.choi(), &[self.dim, self.dim], 1)?;
        let min_eig = eig_hermitian(&pt)?.min_eigenvalue();
        Ok(PptReport {
            ppt: min_eig >= -CP_TOL,
            min_eig,
        })
    }

    /// Largest entry deviation between the actions of two channels on matrix units.
    pub fn action_distance(&self, other: &QuantumChannel) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut unit = ComplexMatrix::zeros(d, d);
                unit[(i, j)] = crate::linalg::ONE;
                worst = worst.max((&self.apply_matrix(&unit) - &other.apply_matrix(&unit)).max_abs());
            }
        }
        worst
    }
}

pub fn tensor_channels(list: &[QuantumChannel]) -> Result<QuantumChannel> {
    tensor_channels_with_cap(list, DEFAULT_DIM_CAP)
}

pub fn tensor_channels_with_cap(list: &[QuantumChannel], cap: usize) -> Result<QuantumChannel> {
    let (first, rest) = list
        .split_first()
        .ok_or_else(|| Error::BadDims("empty channel list".into()))?;
    let mut kraus = first.kraus.clone();
    for ch in rest {
        let mut next = Vec::with_capacity(kraus.len() * ch.kraus.len());
        for a in &kraus {
            for b in &ch.kraus {
                next.push(tensor_with_cap(a, b, cap)?);
            }
        }
        kraus = next;
    }
    QuantumChannel::new(kraus)
}

/// On-disk channel format: `{"dim": int, "kraus": [{"re": [[..]], "im": [[..]]}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<ComplexMatrix>,
}

impl ChannelFile {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self {
            dim: ch.dim,
            kraus: ch.kraus.clone(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Shape checks plus full validation.
    pub fn into_channel(self) -> Result<QuantumChannel> {
        if let Some((k, a)) = self
            .kraus
            .iter()
            .enumerate()
            .find(|(_, a)| a.rows() != self.dim || a.cols() != self.dim)
        {
            return Err(Error::Validation(format!(
                "Kraus operator {k} is {}x{} but dim is {}",
                a.rows(),
                a.cols(),
                self.dim
            )));
        }
        let ch = QuantumChannel::new(self.kraus)?;
        let report = ch.validate();
        if !report.is_valid() {
            return Err(Error::Validation(format!(
                "trace-preservation residual {:e}, min Choi eigenvalue {:e}",
                report.residuals.trace_preservation, report.residuals.min_choi_eigenvalue
            )));
        }
        Ok(ch)
    }
}

pub fn load_channel(path: &std::path::Path) -> Result<QuantumChannel> {
    let text = std::fs::read_to_string(path)?;
    ChannelFile::parse(&text)?.into_channel()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis, flip, max_entangled, ONE};

    fn werner_holevo3() -> QuantumChannel {
        let d = 3;
        let mut kraus = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                let mut a = ComplexMatrix::zeros(d, d);
                a[(i, j)] = C64::new(0.5f64.sqrt(), 0.0);
                a[(j, i)] = C64::new(-(0.5f64.sqrt()), 0.0);
                kraus.push(a);
            }
        }
        QuantumChannel::new(kraus).unwrap()
    }

    #[test]
    fn identity_validates() {
        let r = QuantumChannel::identity(3).validate();
        assert!(r.flags.trace_preserving && r.flags.completely_positive);
        assert!(r.residuals.trace_preservation <= 1e-14);
        assert!(r.residuals.min_choi_eigenvalue.abs() <= 1e-14);
    }

    #[test]
    fn scaled_identity_is_not_trace_preserving() {
        let ch = QuantumChannel::new(vec![ComplexMatrix::identity(2).scale_real(0.9)]).unwrap();
        let r = ch.validate();
        assert!(!r.flags.trace_preserving);
        assert!(r.flags.completely_positive);
    }

    #[test]
    fn werner_holevo_choi_is_antisymmetric_projector() {
        let ch = werner_holevo3();
        let expected = (&ComplexMatrix::identity(9) - &flip(3)).scale_real(1.0 / 6.0);
        assert!(ch.choi().approx_eq(&expected, 1e-15));
        let r = ch.validate();
        assert!(r.is_valid());
        assert!(r.residuals.min_choi_eigenvalue.abs() <= 1e-10);
    }

    #[test]
    fn apply_werner_holevo() {
        let ch = werner_holevo3();
        let out = ch.apply(&DensityMatrix::from_pure(&basis(3, 0))).unwrap();
        let expected = ComplexMatrix::diag_real(&[0.0, 0.5, 0.5]);
        assert!(out.matrix().approx_eq(&expected, 1e-15));
        let mixed = ch.apply(&DensityMatrix::maximally_mixed(3)).unwrap();
        assert!(mixed.matrix().approx_eq(DensityMatrix::maximally_mixed(3).matrix(), 1e-15));
        assert!(matches!(
            ch.apply(&DensityMatrix::maximally_mixed(2)),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn kraus_choi_kraus_round_trip() {
        let ch = werner_holevo3();
        let back = QuantumChannel::from_choi(3, ch.choi()).unwrap();
        assert_eq!(back.kraus().len(), 3);
        assert!(back.action_distance(&ch) < 1e-9);
    }

    #[test]
    fn tensoring_identities() {
        let id = QuantumChannel::identity(2);
        let t = tensor_channels(&[id.clone(), id]).unwrap();
        assert_eq!(t.dim(), 4);
        assert!(t.action_distance(&QuantumChannel::identity(4)) < 1e-15);
        assert!(matches!(tensor_channels(&[]), Err(Error::BadDims(_))));
    }

    #[test]
    fn stinespring_dilations() {
        let id = QuantumChannel::identity(3).stinespring();
        assert_eq!(id.env_dim, 1);
        assert!(id.mat.approx_eq(&ComplexMatrix::identity(3), 0.0));

        let wh = werner_holevo3();
        let u = wh.stinespring();
        assert_eq!(u.env_dim, 3);
        assert!(u.isometry_defect() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let mut unit = ComplexMatrix::zeros(3, 3);
                unit[(i, j)] = ONE;
                let r = u.reduced_output(&unit).unwrap();
                assert!(r.approx_eq(&wh.apply_matrix(&unit), 1e-12));
            }
        }
    }

    #[test]
    fn identity_is_not_ppt() {
        for d in [2, 3] {
            let r = QuantumChannel::identity(d).is_ppt_choi().unwrap();
            assert!(!r.ppt);
            assert!((r.min_eig + 1.0 / d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_file_parsing() {
        let ch = werner_holevo3();
        let text = serde_json::to_string(&ChannelFile::from_channel(&ch)).unwrap();
        let back = ChannelFile::parse(&text).unwrap().into_channel().unwrap();
        assert!(back.action_distance(&ch) <= 1e-12);

        let missing_im = r#"{"dim": 1, "kraus": [{"re": [[1.0]]}]}"#;
        assert!(matches!(ChannelFile::parse(missing_im), Err(Error::Parse(_))));

        let wrong_dims = r#"{"dim": 2, "kraus": [{"re": [[1.0]], "im": [[0.0]]}]}"#;
        let parsed = ChannelFile::parse(wrong_dims).unwrap();
        assert!(matches!(parsed.into_channel(), Err(Error::Validation(_))));

        let not_tp = r#"{"dim": 1, "kraus": [{"re": [[0.5]], "im": [[0.0]]}]}"#;
        assert!(matches!(
            ChannelFile::parse(not_tp).unwrap().into_channel(),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn omega_through_identity_is_choi() {
        let id = QuantumChannel::identity(3);
        assert!(id.choi().approx_eq(max_entangled(3).matrix(), 1e-15));
    }
}
