use proptest::prelude::*;

use projchan_core::channels::DensityMatrix;
use projchan_core::entropy::{renyi_entropy, RenyiOrder};
use projchan_core::linalg::{
    flip, max_entangled, partial_trace, partial_transpose, tensor, ComplexMatrix,
};
use projchan_core::random::{random_density_matrix, random_hermitian, rng_for};
use projchan_core::zoo::build;

const SPECS: [&str; 8] = [
    "wh:d=3",
    "stretch:d=3,lambda=0.25",
    "weyl:d=3",
    "pinch:d=4,blocks=2+2",
    "casimir:d=4",
    "casimir-reducible",
    "shiftpinch:d=3,K=1",
    "coarse:n=2,D=2",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_undoes_tensor(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let mut rng = rng_for(seed, 0);
        let a = random_hermitian(&mut rng, da);
        let b = random_hermitian(&mut rng, db);
        let ab = tensor(&a, &b).unwrap();
        let got = partial_trace(&ab, &[da, db], &[0]).unwrap();
        prop_assert!(got.approx_eq(&a.scale(b.trace()), 1e-12));
        let got = partial_trace(&ab, &[da, db], &[1]).unwrap();
        prop_assert!(got.approx_eq(&b.scale(a.trace()), 1e-12));
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, sys in 0usize..2) {
        let mut rng = rng_for(seed, 1);
        let x = random_hermitian(&mut rng, da * db);
        let once = partial_transpose(&x, &[da, db], sys).unwrap();
        let twice = partial_transpose(&once, &[da, db], sys).unwrap();
        prop_assert_eq!(twice, x);
    }

    #[test]
    fn entropy_bounds_and_monotone_in_alpha(seed in any::<u64>(), d in 2usize..7) {
        let mut rng = rng_for(seed, 2);
        let rank = 1 + (seed % d as u64) as usize;
        let rho = random_density_matrix(&mut rng, d, rank);
        let grid = [0.0, 0.5, 1.0, 2.0, 5.0, f64::INFINITY];
        let s: Vec<f64> = grid
            .iter()
            .map(|&a| renyi_entropy(&rho, RenyiOrder::new(a).unwrap()))
            .collect();
        for w in s.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert!(s[0] <= (d as f64).log2() + 1e-12);
        prop_assert!(*s.last().unwrap() >= -1e-12);
    }

    #[test]
    fn zoo_channels_preserve_trace(seed in any::<u64>(), which in 0usize..SPECS.len()) {
        let ch = build(&SPECS[which].parse().unwrap()).unwrap().channel;
        prop_assert!(ch.validate().is_valid());
        let mut rng = rng_for(seed, 3);
        let rho = random_density_matrix(&mut rng, ch.dim(), ch.dim());
        let out = ch.apply(&rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flip_trace_identity(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = rng_for(seed, 4);
        let a = random_hermitian(&mut rng, d);
        let aa = tensor(&a, &a).unwrap();
        let lhs = aa.matmul(&flip(d)).trace();
        let rhs = a.matmul(&a).trace();
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
    }
}

#[test]
fn flip_is_partial_transpose_of_max_entangled() {
    for d in 2..=4 {
        let omega = max_entangled(d);
        let ft = partial_transpose(&flip(d), &[d, d], 1).unwrap();
        assert!(ft.approx_eq(&omega.matrix().scale_real(d as f64), 1e-15));
    }
}

#[test]
fn flat_spectra_have_alpha_independent_entropy() {
    for rank in 1..=5usize {
        let mut diag = vec![0.0; 6];
        diag[..rank].fill(1.0 / rank as f64);
        let rho = DensityMatrix::new(ComplexMatrix::diag_real(&diag)).unwrap();
        for a in [0.0, 0.5, 1.0, 2.0, 7.0, f64::INFINITY] {
            let s = renyi_entropy(&rho, RenyiOrder::new(a).unwrap());
            assert!((s - (rank as f64).log2()).abs() < 1e-12);
        }
    }
    let rho = DensityMatrix::new(ComplexMatrix::diag_real(&[0.5, 0.3, 0.2])).unwrap();
    let half = renyi_entropy(&rho, RenyiOrder::new(0.5).unwrap());
    let two = renyi_entropy(&rho, RenyiOrder::new(2.0).unwrap());
    assert!(half > two + 1e-3);
}
