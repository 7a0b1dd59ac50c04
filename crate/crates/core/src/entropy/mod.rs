//! Rényi entropies (in bits), minimal output entropies and the maximal
//! output norm, plus the three-way characterization of the projective class.

mod characterize;
mod optimize;

pub use characterize::{
    characterize, BoundaryCase, CharacterizationReport, FormSummary, NuEstimate, DEFAULT_ALPHA_GRID,
};
pub use optimize::{
    max_output_norm, max_output_norm_with_warm_starts, min_output_entropy,
    min_output_entropy_with_warm_starts, polish_minimizer, OptConfig, OptReport, EIGEN_FLOOR,
};

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::channels::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix};

/// `|alpha - 1|` below which the von Neumann entropy is used.
pub const VON_NEUMANN_WINDOW: f64 = 1e-6;
/// Eigenvalues above this count towards the rank in `S_0`.
pub const RANK_CUTOFF: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RenyiOrder {
    Finite(f64),
    Infinity,
}

impl RenyiOrder {
    pub const VON_NEUMANN: RenyiOrder = RenyiOrder::Finite(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::BadAlpha(alpha));
        }
        if alpha.is_infinite() {
            return Ok(RenyiOrder::Infinity);
        }
        Ok(RenyiOrder::Finite(alpha))
    }

    pub fn value(self) -> f64 {
        match self {
            RenyiOrder::Finite(a) => a,
            RenyiOrder::Infinity => f64::INFINITY,
        }
    }

    pub fn is_von_neumann(self) -> bool {
        matches!(self, RenyiOrder::Finite(a) if (a - 1.0).abs() <= VON_NEUMANN_WINDOW)
    }
}

impl fmt::Display for RenyiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenyiOrder::Finite(a) => write!(f, "{a}"),
            RenyiOrder::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for RenyiOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(RenyiOrder::Infinity),
            t => {
                let a: f64 = t
                    .parse()
                    .map_err(|_| Error::Parse(format!("'{s}' is not a Renyi order")))?;
                RenyiOrder::new(a)
            }
        }
    }
}

impl Serialize for RenyiOrder {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RenyiOrder::Finite(a) => serializer.serialize_f64(*a),
            RenyiOrder::Infinity => serializer.serialize_str("inf"),
        }
    }
}

/// Eigenvalues at or below this are treated as rounding noise. Without it
/// `l^alpha` for `alpha < 1` turns 1e-16 noise into 1e-8 entropy errors.
pub const SPECTRUM_FLOOR: f64 = 1e-14;

/// `S_alpha` of a spectrum, in bits.
pub fn renyi_from_spectrum(eigenvalues: &[f64], alpha: RenyiOrder) -> f64 {
    let pos = eigenvalues.iter().copied().filter(|&l| l > SPECTRUM_FLOOR);
    match alpha {
        RenyiOrder::Infinity => {
            let max = eigenvalues.iter().copied().fold(0.0f64, f64::max);
            -max.log2()
        }
        a if a.is_von_neumann() => -pos.map(|l| l * l.log2()).sum::<f64>(),
        RenyiOrder::Finite(0.0) => {
            let rank = eigenvalues.iter().filter(|&&l| l > RANK_CUTOFF).count();
            (rank as f64).log2()
        }
        RenyiOrder::Finite(a) => {
            let q: f64 = pos.map(|l| l.powf(a)).sum();
            q.log2() / (1.0 - a)
        }
    }
}

pub fn renyi_entropy(rho: &DensityMatrix, alpha: RenyiOrder) -> f64 {
    renyi_from_spectrum(&rho.eig().eigenvalues, alpha)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    renyi_entropy(rho, RenyiOrder::VON_NEUMANN)
}

/// `S_alpha` of the Hermitian part of an operator assumed to be a state.
pub fn renyi_of_matrix(sigma: &ComplexMatrix, alpha: RenyiOrder) -> Result<f64> {
    Ok(renyi_from_spectrum(
        &eig_hermitian(&sigma.hermitian_part())?.eigenvalues,
        alpha,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis;

    fn grid() -> Vec<RenyiOrder> {
        [0.0, 0.5, 1.0, 2.0, 5.0, f64::INFINITY]
            .iter()
            .map(|&a| RenyiOrder::new(a).unwrap())
            .collect()
    }

    #[test]
    fn maximally_mixed_and_pure() {
        for d in 2..6 {
            for a in grid() {
                let mixed = renyi_entropy(&DensityMatrix::maximally_mixed(d), a);
                assert!((mixed - (d as f64).log2()).abs() < 1e-12, "{a} {d}");
                let pure = renyi_entropy(&DensityMatrix::from_pure(&basis(d, 1)), a);
                assert!(pure.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn collision_entropy_of_a_three_level_spectrum() {
        let s = renyi_from_spectrum(&[0.5, 0.25, 0.25], RenyiOrder::Finite(2.0));
        assert!((s - (3.0 - 3f64.log2())).abs() < 1e-14);
    }

    #[test]
    fn von_neumann_window() {
        let spec = [0.7, 0.2, 0.1];
        let vn = renyi_from_spectrum(&spec, RenyiOrder::VON_NEUMANN);
        let near = renyi_from_spectrum(&spec, RenyiOrder::Finite(1.0 + 5e-7));
        assert_eq!(vn, near);
        let off = renyi_from_spectrum(&spec, RenyiOrder::Finite(1.0 + 1e-4));
        assert!((off - vn).abs() < 1e-3);
    }

    #[test]
    fn parse_orders() {
        assert_eq!("inf".parse::<RenyiOrder>().unwrap(), RenyiOrder::Infinity);
        assert_eq!("0.5".parse::<RenyiOrder>().unwrap(), RenyiOrder::Finite(0.5));
        assert!(matches!("-1".parse::<RenyiOrder>(), Err(Error::BadAlpha(_))));
        assert!("x".parse::<RenyiOrder>().is_err());
        assert!(matches!(RenyiOrder::new(f64::NAN), Err(Error::BadAlpha(_))));
    }

    #[test]
    fn rank_cutoff_for_alpha_zero() {
        let s = renyi_from_spectrum(&[0.5, 0.5 - 1e-11, 1e-11], RenyiOrder::Finite(0.0));
        assert_eq!(s, 1.0);
    }
}
