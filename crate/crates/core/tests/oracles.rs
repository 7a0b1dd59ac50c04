// Cross-checks against nalgebra's Hermitian eigensolver.

use nalgebra::DMatrix;
use projchan_core::channels::QuantumChannel;
use projchan_core::linalg::{eig_hermitian, partial_trace, tensor, ComplexMatrix, C64};
use projchan_core::random::{random_density_matrix, random_hermitian, rng_for};
use projchan_core::zoo::{build, ChannelSpec};

fn to_na(m: &ComplexMatrix) -> DMatrix<nalgebra::Complex<f64>> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        let z = m.row(i)[j];
        nalgebra::Complex::new(z.re, z.im)
    })
}

fn na_spectrum(m: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = to_na(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

#[test]
fn jacobi_matches_nalgebra_on_random_hermitian() {
    for d in 2..=9 {
        let mut rng = rng_for(0x5eed, d as u64);
        for _ in 0..100 {
            let h = random_hermitian(&mut rng, d);
            let ours = eig_hermitian(&h).unwrap();
            let theirs = na_spectrum(&h);
            for (a, b) in ours.eigenvalues.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-10, "d={d}: {a} vs {b}");
            }
            let v = &ours.eigenvectors;
            let u = v.adjoint().matmul(v);
            assert!(u.approx_eq(&ComplexMatrix::identity(d), 1e-12));
            assert!(ours.reconstruct().approx_eq(&h, 1e-11));
        }
    }
}

#[test]
fn werner_holevo_choi_spectrum_matches_oracle() {
    // Choi of WH_3 is (I - F)/6: three eigenvalues 1/3, six zeros.
    let ch = build(&"wh:d=3".parse::<ChannelSpec>().unwrap()).unwrap().channel;
    let ev = na_spectrum(ch.choi());
    assert_eq!(ev.len(), 9);
    for (k, l) in ev.iter().enumerate() {
        let want = if k < 6 { 0.0 } else { 1.0 / 3.0 };
        assert!((l - want).abs() < 1e-12, "{k}: {l}");
    }
}

#[test]
fn zoo_outputs_agree_with_direct_kraus_sum() {
    // T(rho) from the channel against sum_k A rho A^dagger done in nalgebra.
    let specs = [
        "wh:d=3",
        "stretch:d=3,lambda=0.5",
        "weyl:d=4",
        "pinch:d=3,blocks=2+1",
        "casimir:d=3",
        "casimir-reducible",
        "shiftpinch:d=4,K=1,2",
        "coarse:n=2,D=2",
    ];
    for (n, s) in specs.iter().enumerate() {
        let ch: QuantumChannel = build(&s.parse().unwrap()).unwrap().channel;
        let d = ch.dim();
        let mut rng = rng_for(77, n as u64);
        let rho = random_density_matrix(&mut rng, d, d);
        let out = ch.apply(&rho).unwrap();
        let r = to_na(rho.matrix());
        let mut direct = DMatrix::zeros(d, d);
        for a in ch.kraus() {
            let a = to_na(a);
            direct += &a * &r * a.adjoint();
        }
        let ours = to_na(out.matrix());
        assert!((ours - direct).camax() < 1e-12, "{s}");
    }
}

#[test]
fn partial_trace_of_tensor_against_oracle() {
    let mut rng = rng_for(3, 0);
    let a = random_hermitian(&mut rng, 3);
    let b = random_hermitian(&mut rng, 2);
    let ab = tensor(&a, &b).unwrap();
    let kept = partial_trace(&ab, &[3, 2], &[0]).unwrap();
    let tb: C64 = b.trace();
    let want = to_na(&a) * nalgebra::Complex::new(tb.re, tb.im);
    assert!((to_na(&kept) - want).camax() < 1e-12);
}
