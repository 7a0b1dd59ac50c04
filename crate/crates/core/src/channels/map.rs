use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{compose, digits, ComplexMatrix, C64, ONE, ZERO};

/// A linear map on `d x d` matrices, stored as its superoperator
/// `S[(a,b),(i,j)] = M(|i><j|)[a,b]`.
///
/// The Choi-like matrix uses the channel convention
/// `C = (M (x) id)(Omega) = (1/d) sum_ij M(|i><j|) (x) |i><j|`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    dim: usize,
    superop: ComplexMatrix,
}

impl LinearMap {
    pub fn from_fn(dim: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let n = dim * dim;
        let mut superop = ComplexMatrix::zeros(n, n);
        for i in 0..dim {
            for j in 0..dim {
                let mut unit = ComplexMatrix::zeros(dim, dim);
                unit[(i, j)] = ONE;
                let image = f(&unit);
                for a in 0..dim {
                    for b in 0..dim {
                        superop[(a * dim + b, i * dim + j)] = image[(a, b)];
                    }
                }
            }
        }
        Self { dim, superop }
    }

    pub fn from_choi(dim: usize, choi: &ComplexMatrix) -> Result<Self> {
        if choi.rows() != dim * dim || !choi.is_square() {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                found: choi.rows(),
            });
        }
        let d = dim as f64;
        let n = dim * dim;
        let superop = ComplexMatrix::from_fn(n, n, |r, c| {
            let (a, b) = (r / dim, r % dim);
            let (i, j) = (c / dim, c % dim);
            choi[(a * dim + i, b * dim + j)] * d
        });
        Ok(Self { dim, superop })
    }

    pub fn transpose(dim: usize) -> Self {
        Self::from_fn(dim, ComplexMatrix::transpose)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superoperator(&self) -> &ComplexMatrix {
        &self.superop
    }

    pub fn choi(&self) -> ComplexMatrix {
        let dim = self.dim;
        let inv = 1.0 / dim as f64;
        let n = dim * dim;
        ComplexMatrix::from_fn(n, n, |r, c| {
            let (a, i) = (r / dim, r % dim);
            let (b, j) = (c / dim, c % dim);
            self.superop[(a * dim + b, i * dim + j)] * inv
        })
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.rows(), self.dim, "linear map dimension mismatch");
        let out = self.superop.matvec(x.as_slice());
        ComplexMatrix::from_vec(self.dim, self.dim, out).expect("shape")
    }

    /// Applies the map to factor `sys` of an operator on `dims`, identity elsewhere.
    pub fn apply_on_subsystem(
        &self,
        x: &ComplexMatrix,
        dims: &[usize],
        sys: usize,
    ) -> Result<ComplexMatrix> {
        let total: usize = dims.iter().product();
        if !x.is_square() || x.rows() != total || sys >= dims.len() || dims[sys] != self.dim {
            return Err(Error::BadDims(format!(
                "cannot apply a {}-dim map to factor {sys} of {:?}",
                self.dim, dims
            )));
        }
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(total, total);
        for r in 0..total {
            let rd = digits(r, dims);
            for c in 0..total {
                let v = x[(r, c)];
                if v == ZERO {
                    continue;
                }
                let cd = digits(c, dims);
                let (i, j) = (rd[sys], cd[sys]);
                let col = i * d + j;
                let mut ro = rd.clone();
                let mut co = cd.clone();
                for a in 0..d {
                    ro[sys] = a;
                    let ri = compose(&ro, dims);
                    for b in 0..d {
                        let s = self.superop[(a * d + b, col)];
                        if s == ZERO {
                            continue;
                        }
                        co[sys] = b;
                        out[(ri, compose(&co, dims))] += s * v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(M_1 (x) ... (x) M_N)(x)` on the product space of the maps' dimensions.
    pub fn apply_tensor(maps: &[&LinearMap], x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let dims: Vec<usize> = maps.iter().map(|m| m.dim).collect();
        let mut acc = x.clone();
        for (k, m) in maps.iter().enumerate() {
            acc = m.apply_on_subsystem(&acc, &dims, k)?;
        }
        Ok(acc)
    }

    /// Max deviation from trace preservation over matrix units.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let tr: C64 = (0..d).map(|a| self.superop[(a * d + a, i * d + j)]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr - expected).norm());
            }
        }
        worst
    }
}

impl Serialize for LinearMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            dim: usize,
            choi: ComplexMatrix,
        }
        Wire {
            dim: self.dim,
            choi: self.choi(),
        }
        .serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_entangled, tensor};

    fn sample(d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, d, |i, j| C64::new(i as f64 + 0.5 * j as f64, j as f64 - i as f64))
    }

    #[test]
    fn transpose_map_transposes() {
        let t = LinearMap::transpose(3);
        let x = sample(3);
        assert_eq!(t.apply(&x), x.transpose());
        assert!(t.trace_preservation_defect() < 1e-15);
    }

    #[test]
    fn choi_round_trip() {
        let t = LinearMap::from_fn(3, |x| x.transpose().scale_real(0.5));
        let back = LinearMap::from_choi(3, &t.choi()).unwrap();
        assert!(back.superoperator().approx_eq(t.superoperator(), 1e-15));
    }

    #[test]
    fn transpose_choi_is_scaled_flip() {
        let c = LinearMap::transpose(3).choi();
        let f = crate::linalg::flip(3).scale_real(1.0 / 3.0);
        assert!(c.approx_eq(&f, 1e-15));
    }

    #[test]
    fn subsystem_application_matches_product_action() {
        let a = sample(2);
        let b = sample(3);
        let x = tensor(&a, &b).unwrap();
        let t2 = LinearMap::transpose(2);
        let t3 = LinearMap::transpose(3);
        let y = LinearMap::apply_tensor(&[&t2, &t3], &x).unwrap();
        assert!(y.approx_eq(&tensor(&a.transpose(), &b.transpose()).unwrap(), 1e-15));
        let y = t3.apply_on_subsystem(&x, &[2, 3], 1).unwrap();
        assert!(y.approx_eq(&tensor(&a, &b.transpose()).unwrap(), 1e-15));
    }

    #[test]
    fn full_transpose_of_omega_is_omega() {
        let w = max_entangled(3);
        let t = LinearMap::transpose(3);
        let y = LinearMap::apply_tensor(&[&t, &t], w.matrix()).unwrap();
        assert!(y.approx_eq(w.matrix(), 1e-15));
    }
}
