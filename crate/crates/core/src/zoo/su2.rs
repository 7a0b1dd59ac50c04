//! Spin-`j` representation of su(2) built from ladder operators.

use crate::linalg::{ComplexMatrix, C64, I, ZERO};

/// `(J_x, J_y, J_z)` for spin `j = (d - 1)/2`, basis ordered `m = j, j-1, ..., -j`.
pub fn su2_generators(d: usize) -> [ComplexMatrix; 3] {
    assert!(d >= 2, "su(2) representation needs d >= 2");
    let j = (d as f64 - 1.0) / 2.0;
    let m_of = |k: usize| j - k as f64;
    // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; |m+1> sits at index k-1.
    let mut raise = ComplexMatrix::zeros(d, d);
    for k in 1..d {
        let m = m_of(k);
        raise[(k - 1, k)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower).scale_real(0.5);
    let jy = (&raise - &lower).scale(-I * 0.5);
    let jz = ComplexMatrix::diag_real(&(0..d).map(m_of).collect::<Vec<_>>());
    [jx, jy, jz]
}

/// `lambda` with `sum_k J_k^2 = lambda I` for the irreducible `d`-dimensional representation.
pub fn casimir_eigenvalue(d: usize) -> f64 {
    let d = d as f64;
    (d - 1.0) * (d + 1.0) / 4.0
}

/// Generators of the four-dimensional reducible representation used by the
/// reducible Casimir example, entered in the `|1>..|4>` basis (0-based here).
pub fn reducible_generators() -> [ComplexMatrix; 3] {
    let h = I * 0.5;
    let build = |terms: &[(usize, usize, f64)]| {
        let mut m = ComplexMatrix::zeros(4, 4);
        for &(r, c, s) in terms {
            m[(r - 1, c - 1)] = h * s;
        }
        m
    };
    [
        build(&[(2, 3, 1.0), (4, 1, 1.0), (1, 4, -1.0), (3, 2, -1.0)]),
        build(&[(3, 1, 1.0), (4, 2, 1.0), (1, 3, -1.0), (2, 4, -1.0)]),
        build(&[(1, 2, 1.0), (4, 3, 1.0), (2, 1, -1.0), (3, 4, -1.0)]),
    ]
}

/// `max |[J_a, J_b] - i eps_abc J_c|` over all index pairs.
pub fn commutator_defect(gens: &[ComplexMatrix; 3]) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            let comm = &gens[a].matmul(&gens[b]) - &gens[b].matmul(&gens[a]);
            let mut expected = ComplexMatrix::zeros(comm.rows(), comm.cols());
            for c in 0..3 {
                let eps = levi_civita(a, b, c);
                if eps != 0.0 {
                    expected.add_scaled(&gens[c], I * eps);
                }
            }
            worst = worst.max((&comm - &expected).max_abs());
        }
    }
    worst
}

/// `sum_k J_k^2`
pub fn casimir_operator(gens: &[ComplexMatrix; 3]) -> ComplexMatrix {
    let n = gens[0].rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for g in gens {
        out.add_scaled(&g.matmul(g), C64::new(1.0, 0.0));
    }
    out
}

fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn pauli_matrices() -> [ComplexMatrix; 3] {
    let one = C64::new(1.0, 0.0);
    [
        ComplexMatrix::from_fn(2, 2, |i, j| if i != j { one } else { ZERO }),
        ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => -I,
            (1, 0) => I,
            _ => ZERO,
        }),
        ComplexMatrix::diag_real(&[1.0, -1.0]),
    ]
}
