//! Constructors for the projective-output channel families.
//!
//! Every family except the Casimir channel for an irreducible representation
//! and the diagonal channels comes with its [`ProjectiveForm`] witness.

mod spec;
mod su2;

pub use spec::{parse_diagonal_file, DiagonalFile};
pub use su2::{
    casimir_eigenvalue, casimir_operator, commutator_defect, pauli_matrices, reducible_generators,
    su2_generators,
};

use std::f64::consts::PI;

use crate::channels::{DensityMatrix, LinearMap, ProjectiveForm, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{basis, partial_trace, tensor, ComplexMatrix, C64, ONE, ZERO};

const SPEC_TOL: f64 = 1e-10;
const FORM_CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    /// `T(rho) = (I - rho^T)/(d - 1)`
    WernerHolevo { d: usize },
    /// `M(rho) = lambda rho^T + (1 - lambda) omega`, `omega` pure.
    Stretching {
        d: usize,
        lambda: f64,
        omega: DensityMatrix,
    },
    /// `M(rho) = (1/d) sum_i W_i rho^T W_i^dagger` over cyclic shifts.
    WeylShift { d: usize },
    /// `M(rho) = sum_i P_i rho^T P_i`
    Pinching {
        d: usize,
        projections: Vec<ComplexMatrix>,
    },
    /// `T(rho) = (1/lambda) sum_k J_k rho J_k` for spin `(d-1)/2`.
    CasimirIrreducible { d: usize },
    /// The fixed four-dimensional reducible example, `T = (3T' + id)/4`.
    CasimirReducibleExample,
    /// Shifted dephasing with `m = |K|`; `shifts` holds `K` (values in `1..=d`).
    ShiftsPinching { d: usize, shifts: Vec<usize> },
    /// `M(rho) = rho_n^T (x) I_D / D` on `C^n (x) C^D`.
    CoarseGraining { n: usize, block: usize },
    /// Kraus operators diagonal in the computational basis.
    Diagonal { d: usize, diagonals: Vec<Vec<C64>> },
}

#[derive(Clone, Debug)]
pub struct BuiltChannel {
    pub channel: QuantumChannel,
    pub form: Option<ProjectiveForm>,
}

impl ChannelSpec {
    pub fn pinching_blocks(d: usize, blocks: &[usize]) -> Result<Self> {
        if blocks.iter().sum::<usize>() != d || blocks.contains(&0) {
            return Err(Error::SpecInvalid(format!(
                "blocks {blocks:?} must be positive and sum to d = {d}"
            )));
        }
        let mut start = 0;
        let projections = blocks
            .iter()
            .map(|&b| {
                let p = ComplexMatrix::from_fn(d, d, |i, j| {
                    if i == j && (start..start + b).contains(&i) {
                        ONE
                    } else {
                        ZERO
                    }
                });
                start += b;
                p
            })
            .collect();
        Ok(ChannelSpec::Pinching { d, projections })
    }

    /// Dimension of the channel's input and output.
    pub fn dim(&self) -> usize {
        match self {
            ChannelSpec::WernerHolevo { d }
            | ChannelSpec::Stretching { d, .. }
            | ChannelSpec::WeylShift { d }
            | ChannelSpec::Pinching { d, .. }
            | ChannelSpec::CasimirIrreducible { d }
            | ChannelSpec::ShiftsPinching { d, .. }
            | ChannelSpec::Diagonal { d, .. } => *d,
            ChannelSpec::CasimirReducibleExample => 4,
            ChannelSpec::CoarseGraining { n, block } => n * block,
        }
    }

    pub fn check(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::SpecInvalid(msg));
        match self {
            ChannelSpec::WernerHolevo { d } | ChannelSpec::WeylShift { d } if *d < 2 => {
                invalid(format!("need d >= 2, got {d}"))
            }
            ChannelSpec::CasimirIrreducible { d } if *d < 2 => {
                invalid(format!("need d >= 2, got {d}"))
            }
            ChannelSpec::Stretching { d, lambda, omega } => {
                if *d < 2 {
                    return invalid(format!("need d >= 2, got {d}"));
                }
                if !(0.0..=1.0).contains(lambda) {
                    return invalid(format!("lambda = {lambda} outside [0, 1]"));
                }
                if omega.dim() != *d {
                    return invalid(format!("omega has dimension {}, expected {d}", omega.dim()));
                }
                if (omega.purity() - 1.0).abs() > SPEC_TOL {
                    return invalid(format!("omega is not pure (purity {})", omega.purity()));
                }
                Ok(())
            }
            ChannelSpec::Pinching { d, projections } => {
                if *d < 2 || projections.is_empty() {
                    return invalid("pinching needs d >= 2 and at least one projection".into());
                }
                let mut sum = ComplexMatrix::zeros(*d, *d);
                for (i, p) in projections.iter().enumerate() {
                    if p.rows() != *d || p.cols() != *d {
                        return invalid(format!("projection {i} has the wrong shape"));
                    }
                    sum.add_scaled(p, ONE);
                    for (j, q) in projections.iter().enumerate() {
                        let prod = p.matmul(q);
                        let expected = if i == j { p.clone() } else { ComplexMatrix::zeros(*d, *d) };
                        if (&prod - &expected).max_abs() > SPEC_TOL {
                            return invalid(format!("P_{i} P_{j} != delta_ij P_{i}"));
                        }
                    }
                }
                if (&sum - &ComplexMatrix::identity(*d)).max_abs() > SPEC_TOL {
                    return invalid("projections do not resolve the identity".into());
                }
                Ok(())
            }
            ChannelSpec::ShiftsPinching { d, shifts } => {
                let mut seen = shifts.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != shifts.len() {
                    return invalid(format!("K = {shifts:?} has repeated entries"));
                }
                if shifts.is_empty() || shifts.len() >= *d {
                    return invalid(format!("need 0 < |K| < d, got |K| = {}", shifts.len()));
                }
                if shifts.iter().any(|&k| k == 0 || k > *d) {
                    return invalid(format!("K = {shifts:?} must lie in 1..={d}"));
                }
                Ok(())
            }
            ChannelSpec::CoarseGraining { n, block } => {
                if *n < 1 || *block < 1 || n * block < 2 {
                    return invalid(format!("need n, D >= 1 and nD >= 2, got n = {n}, D = {block}"));
                }
                if *n == 1 {
                    return invalid("n = 1 makes the channel constant (m = d)".into());
                }
                Ok(())
            }
            ChannelSpec::Diagonal { d, diagonals } => {
                if *d < 1 || diagonals.is_empty() {
                    return invalid("diagonal channel needs at least one Kraus diagonal".into());
                }
                if let Some(k) = diagonals.iter().position(|a| a.len() != *d) {
                    return invalid(format!("diagonal {k} does not have length {d}"));
                }
                for i in 0..*d {
                    let s: f64 = diagonals.iter().map(|a| a[i].norm_sqr()).sum();
                    if (s - 1.0).abs() > SPEC_TOL {
                        return invalid(format!("sum_k |a_k({i})|^2 = {s} != 1"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Cyclic shift `W_i |j> = |j + i mod d>`.
pub fn weyl_shift(d: usize, i: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |r, c| if r == (c + i) % d { ONE } else { ZERO })
}

/// Phase unitary `U_j = sum_l exp(2 pi i l j / d) |l><l|`.
pub fn phase_unitary(d: usize, j: usize) -> ComplexMatrix {
    let phases: Vec<C64> = (0..d)
        .map(|l| C64::from_polar(1.0, 2.0 * PI * (l * j) as f64 / d as f64))
        .collect();
    ComplexMatrix::diag(&phases)
}

/// Pure state with all entries `<i|rho|j> = 1/d`.
pub fn flat_state(d: usize) -> DensityMatrix {
    DensityMatrix::from_pure(&vec![ONE; d])
}

/// Builds a channel from `M` via `T(X) = (tr(X) I - m M(X)) / (d - m)`.
fn from_projective_map(m: usize, map: LinearMap, rho0: DensityMatrix) -> Result<BuiltChannel> {
    let form = ProjectiveForm::new(m, map, rho0);
    let d = form.d;
    let t_map = LinearMap::from_fn(d, |x| form.reconstruct(x));
    let channel = QuantumChannel::from_map(&t_map)?;
    Ok(BuiltChannel {
        channel,
        form: Some(form),
    })
}

pub fn werner_holevo(d: usize) -> QuantumChannel {
    let s = C64::new(1.0 / ((d - 1) as f64).sqrt(), 0.0);
    let mut kraus = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let mut a = ComplexMatrix::zeros(d, d);
            a[(i, j)] = s;
            a[(j, i)] = -s;
            kraus.push(a);
        }
    }
    QuantumChannel::new(kraus).expect("well-formed Kraus set")
}

pub fn build(spec: &ChannelSpec) -> Result<BuiltChannel> {
    spec.check()?;
    let built = match spec {
        ChannelSpec::WernerHolevo { d } => BuiltChannel {
            channel: werner_holevo(*d),
            form: Some(ProjectiveForm::new(
                1,
                LinearMap::transpose(*d),
                DensityMatrix::from_pure(&basis(*d, 0)),
            )),
        },
        ChannelSpec::Stretching { d, lambda, omega } => {
            let (lambda, omega_m) = (*lambda, omega.matrix().clone());
            let map = LinearMap::from_fn(*d, |x| {
                let mut out = x.transpose().scale_real(lambda);
                out.add_scaled(&omega_m, x.trace() * (1.0 - lambda));
                out
            });
            let rho0 = DensityMatrix::new(omega.matrix().transpose())?;
            from_projective_map(1, map, rho0)?
        }
        ChannelSpec::WeylShift { d } => {
            let d = *d;
            let shifts: Vec<ComplexMatrix> = (1..=d).map(|i| weyl_shift(d, i)).collect();
            let map = LinearMap::from_fn(d, |x| {
                let xt = x.transpose();
                let mut out = ComplexMatrix::zeros(d, d);
                for w in &shifts {
                    out.add_scaled(&w.conjugate_by(&xt), ONE);
                }
                out.scale_real(1.0 / d as f64)
            });
            from_projective_map(1, map, flat_state(d))?
        }
        ChannelSpec::Pinching { d, projections } => {
            let ps = projections.clone();
            let map = LinearMap::from_fn(*d, |x| {
                let xt = x.transpose();
                let mut out = ComplexMatrix::zeros(*d, *d);
                for p in &ps {
                    out.add_scaled(&p.matmul(&xt).matmul(p), ONE);
                }
                out
            });
            // rho0^T supported inside the first block.
            let v = crate::linalg::eig_hermitian(&projections[0])?.top_vector();
            let v: Vec<C64> = v.iter().map(|z| z.conj()).collect();
            from_projective_map(1, map, DensityMatrix::from_pure(&v))?
        }
        ChannelSpec::CasimirIrreducible { d } => {
            let s = 1.0 / casimir_eigenvalue(*d).sqrt();
            let kraus = su2_generators(*d).iter().map(|j| j.scale_real(s)).collect();
            BuiltChannel {
                channel: QuantumChannel::new(kraus)?,
                form: None,
            }
        }
        ChannelSpec::CasimirReducibleExample => {
            let gens = reducible_generators();
            let mut kraus: Vec<ComplexMatrix> = gens.to_vec();
            kraus.push(ComplexMatrix::identity(4).scale_real(0.5));
            let channel = QuantumChannel::new(kraus)?;
            let ch = channel.clone();
            let map = LinearMap::from_fn(4, move |x| {
                let mut out = ComplexMatrix::identity(4).scale(x.trace() * 0.5);
                out.add_scaled(&ch.apply_matrix(x), -ONE);
                out
            });
            let form = ProjectiveForm::new(2, map, casimir_reducible_witness());
            BuiltChannel {
                channel,
                form: Some(form),
            }
        }
        ChannelSpec::ShiftsPinching { d, shifts } => {
            let d = *d;
            let ws: Vec<ComplexMatrix> = shifts.iter().map(|&k| weyl_shift(d, k)).collect();
            let inv = 1.0 / shifts.len() as f64;
            let map = LinearMap::from_fn(d, |x| {
                let mut out = ComplexMatrix::zeros(d, d);
                for w in &ws {
                    let y = w.adjoint().matmul(x).matmul(w);
                    for i in 0..d {
                        out[(i, i)] += y[(i, i)] * inv;
                    }
                }
                out
            });
            from_projective_map(shifts.len(), map, DensityMatrix::from_pure(&basis(d, 0)))?
        }
        ChannelSpec::CoarseGraining { n, block } => {
            let (n, block) = (*n, *block);
            let d = n * block;
            let mixed = ComplexMatrix::identity(block).scale_real(1.0 / block as f64);
            let map = LinearMap::from_fn(d, |x| {
                let reduced = partial_trace(x, &[n, block], &[0]).expect("dims match");
                tensor(&reduced.transpose(), &mixed).expect("within cap")
            });
            from_projective_map(block, map, flat_state(d))?
        }
        ChannelSpec::Diagonal { diagonals, .. } => {
            let kraus = diagonals.iter().map(|a| ComplexMatrix::diag(a)).collect();
            BuiltChannel {
                channel: QuantumChannel::new(kraus)?,
                form: None,
            }
        }
    };
    let report = built.channel.validate();
    if !report.is_valid() {
        return Err(Error::SpecInvalid(format!(
            "constructed channel failed validation: {:?}",
            report.residuals
        )));
    }
    if let Some(form) = &built.form {
        form.check(&built.channel, FORM_CHECK_TOL)?;
    }
    Ok(built)
}

/// `rho0 = (|1><1| + i|1><4| - i|4><1| + |4><4|)/2` in the 1-based labels of the example.
pub fn casimir_reducible_witness() -> DensityMatrix {
    let h = 0.5;
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = C64::new(h, 0.0);
    m[(0, 3)] = C64::new(0.0, h);
    m[(3, 0)] = C64::new(0.0, -h);
    m[(3, 3)] = C64::new(h, 0.0);
    DensityMatrix::new(m).expect("valid witness")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, flip};

    fn all_specs() -> Vec<ChannelSpec> {
        vec![
            ChannelSpec::WernerHolevo { d: 3 },
            ChannelSpec::WernerHolevo { d: 4 },
            ChannelSpec::Stretching {
                d: 3,
                lambda: 0.5,
                omega: DensityMatrix::from_pure(&basis(3, 0)),
            },
            ChannelSpec::WeylShift { d: 3 },
            ChannelSpec::WeylShift { d: 4 },
            ChannelSpec::pinching_blocks(3, &[2, 1]).unwrap(),
            ChannelSpec::CasimirIrreducible { d: 3 },
            ChannelSpec::CasimirIrreducible { d: 4 },
            ChannelSpec::CasimirReducibleExample,
            ChannelSpec::ShiftsPinching { d: 3, shifts: vec![1] },
            ChannelSpec::ShiftsPinching { d: 4, shifts: vec![1, 2] },
            ChannelSpec::CoarseGraining { n: 2, block: 2 },
            ChannelSpec::Diagonal {
                d: 2,
                diagonals: vec![vec![ONE, ZERO], vec![ZERO, ONE]],
            },
        ]
    }

    #[test]
    fn every_family_builds_and_validates() {
        for spec in all_specs() {
            let built = build(&spec).unwrap_or_else(|e| panic!("{spec:?}: {e}"));
            assert!(built.channel.validate().is_valid(), "{spec:?}");
            assert_eq!(built.channel.dim(), spec.dim());
            if let Some(form) = &built.form {
                let (idem, tr) = form.projector_defects();
                assert!(idem < 1e-9 && tr < 1e-9, "{spec:?}");
                assert!(form.reconstruction_residual(&built.channel) < 1e-9, "{spec:?}");
            }
        }
    }

    #[test]
    fn werner_holevo_choi_spectrum() {
        let ch = build(&ChannelSpec::WernerHolevo { d: 3 }).unwrap().channel;
        let expected = (&ComplexMatrix::identity(9) - &flip(3)).scale_real(1.0 / 6.0);
        assert!(ch.choi().approx_eq(&expected, 1e-14));
        let e = eig_hermitian(ch.choi()).unwrap();
        for (k, l) in e.eigenvalues.iter().enumerate() {
            let want = if k < 6 { 0.0 } else { 1.0 / 3.0 };
            assert!((l - want).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_graining_choi_spectrum() {
        // (I/d - F_n (x) I_{D^2} / d)/(d - D) with n = D = 2: {0 x12, 1/4 x4}.
        let ch = build(&ChannelSpec::CoarseGraining { n: 2, block: 2 })
            .unwrap()
            .channel;
        let e = eig_hermitian(ch.choi()).unwrap();
        for (k, l) in e.eigenvalues.iter().enumerate() {
            let want = if k < 12 { 0.0 } else { 0.25 };
            assert!((l - want).abs() < 1e-12, "{k}: {l}");
        }
    }

    #[test]
    fn weyl_witness_is_fixed_by_m() {
        let built = build(&ChannelSpec::WeylShift { d: 4 }).unwrap();
        let form = built.form.unwrap();
        let out = form.map.apply(form.rho0.matrix());
        assert!(out.approx_eq(form.rho0.matrix(), 1e-12));
    }

    #[test]
    fn casimir_reducible_witness_output() {
        let built = build(&ChannelSpec::CasimirReducibleExample).unwrap();
        let out = built.channel.apply(&casimir_reducible_witness()).unwrap();
        let check = crate::channels::is_normalized_projection(&out, 1e-12);
        assert!(check.is_projection);
        assert_eq!(check.rank, 2);
        assert_eq!(built.form.unwrap().m, 2);
    }

    #[test]
    fn shifts_pinching_is_ppt_and_coarse_graining_is_not() {
        let sp = build(&ChannelSpec::ShiftsPinching { d: 3, shifts: vec![1] })
            .unwrap()
            .channel;
        assert!(sp.is_ppt_choi().unwrap().ppt);
        let cg = build(&ChannelSpec::CoarseGraining { n: 2, block: 2 })
            .unwrap()
            .channel;
        let r = cg.is_ppt_choi().unwrap();
        assert!(!r.ppt, "min eig {}", r.min_eig);
    }

    #[test]
    fn dephasing_has_a_pure_output() {
        let ch = build(&ChannelSpec::Diagonal {
            d: 2,
            diagonals: vec![vec![ONE, ZERO], vec![ZERO, ONE]],
        })
        .unwrap()
        .channel;
        let out = ch.apply(&DensityMatrix::from_pure(&basis(2, 0))).unwrap();
        assert!((out.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spec_invariants_are_enforced() {
        let bad = [
            ChannelSpec::WernerHolevo { d: 1 },
            ChannelSpec::Stretching {
                d: 2,
                lambda: 1.5,
                omega: DensityMatrix::from_pure(&basis(2, 0)),
            },
            ChannelSpec::Stretching {
                d: 2,
                lambda: 0.5,
                omega: DensityMatrix::maximally_mixed(2),
            },
            ChannelSpec::Pinching {
                d: 2,
                projections: vec![ComplexMatrix::diag_real(&[1.0, 0.0])],
            },
            ChannelSpec::ShiftsPinching { d: 3, shifts: vec![1, 1] },
            ChannelSpec::ShiftsPinching { d: 3, shifts: vec![1, 2, 3] },
            ChannelSpec::Diagonal {
                d: 2,
                diagonals: vec![vec![ONE, C64::new(0.5, 0.0)]],
            },
        ];
        for spec in bad {
            assert!(matches!(build(&spec), Err(Error::SpecInvalid(_))), "{spec:?}");
        }
        assert!(ChannelSpec::pinching_blocks(3, &[2, 2]).is_err());
    }
}
