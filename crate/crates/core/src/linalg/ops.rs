//! Tensor structure: Kronecker products, partial trace and transpose, the flip
//! operator and maximally entangled states.
//!
//! Composite indices are row-major over the factors, leftmost factor most
//! significant: for dims `[d0, d1, d2]` the basis state `|i0 i1 i2>` sits at
//! `(i0 * d1 + i1) * d2 + i2`.

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::channels::DensityMatrix;
use crate::error::{Error, Result};

/// Largest composite dimension the tensor routines will build.
pub const DEFAULT_DIM_CAP: usize = 4096;

pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows.max(cols) > cap {
        return Err(Error::DimensionOverflow {
            dim: rows.max(cols),
            cap,
        });
    }
    let (br, bc) = (b.rows(), b.cols());
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    }))
}

pub fn tensor_all(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut iter = factors.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::BadDims("empty tensor product".into()))?
        .clone();
    iter.try_fold(first, |acc, f| tensor(&acc, f))
}

fn check_dims(x: &ComplexMatrix, dims: &[usize]) -> Result<usize> {
    let total: usize = dims.iter().product();
    if !x.is_square() || x.rows() != total || dims.is_empty() {
        return Err(Error::BadDims(format!(
            "dims {:?} (product {}) do not match a {}x{} matrix",
            dims,
            total,
            x.rows(),
            x.cols()
        )));
    }
    Ok(total)
}

pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub(crate) fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Reduced operator on the subsystems listed in `keep` (order of `dims` is
/// preserved; `keep` is treated as a set).
pub fn partial_trace(x: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total = check_dims(x, dims)?;
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::BadDims(format!(
            "subsystem {bad} out of range for {} factors",
            dims.len()
        )));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|k| keep.contains(k)).collect();
    if kept.len() == dims.len() {
        return Ok(x.clone());
    }
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    // Entry (r, c) contributes when the traced digits agree.
    let row_digits: Vec<Vec<usize>> = (0..total).map(|i| digits(i, dims)).collect();
    let reduced: Vec<usize> = row_digits
        .iter()
        .map(|d| compose(&kept.iter().map(|&k| d[k]).collect::<Vec<_>>(), &kept_dims))
        .collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let env: Vec<usize> = row_digits
        .iter()
        .map(|d| compose(&traced.iter().map(|&k| d[k]).collect::<Vec<_>>(), &traced_dims))
        .collect();
    for r in 0..total {
        for c in 0..total {
            if env[r] == env[c] {
                out[(reduced[r], reduced[c])] += x[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Transpose of subsystem `sys` only.
pub fn partial_transpose(x: &ComplexMatrix, dims: &[usize], sys: usize) -> Result<ComplexMatrix> {
    let total = check_dims(x, dims)?;
    if sys >= dims.len() {
        return Err(Error::BadDims(format!(
            "subsystem {sys} out of range for {} factors",
            dims.len()
        )));
    }
    let mut out = ComplexMatrix::zeros(total, total);
    for r in 0..total {
        let rd = digits(r, dims);
        for c in 0..total {
            let mut cd = digits(c, dims);
            let mut rd2 = rd.clone();
            std::mem::swap(&mut rd2[sys], &mut cd[sys]);
            out[(compose(&rd2, dims), compose(&cd, dims))] = x[(r, c)];
        }
    }
    Ok(out)
}

/// Flip (swap) operator on `C^d (x) C^d`: `F|i,j> = |j,i>`.
pub fn flip(d: usize) -> ComplexMatrix {
    let n = d * d;
    let mut f = ComplexMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = ONE;
        }
    }
    f
}

/// `(1/sqrt d) sum_i |i,i>`
pub fn max_entangled_vector(d: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d * d];
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}

pub fn max_entangled(d: usize) -> DensityMatrix {
    DensityMatrix::from_pure(&max_entangled_vector(d))
}
