//! Dense complex linear algebra used by every other module.

mod eig;
mod matrix;
mod ops;

pub use eig::{eig_hermitian, HermitianEig, HERMITIAN_TOL, MAX_SWEEPS, OFF_DIAGONAL_TOL};
pub use matrix::{basis, inner, kron_vec, norm, normalized, ComplexMatrix, C64, I, ONE, ZERO};
pub use ops::{
    flip, max_entangled, max_entangled_vector, partial_trace, partial_transpose, tensor,
    tensor_all, tensor_with_cap, DEFAULT_DIM_CAP,
};
pub(crate) use ops::{compose, digits};
