// End-to-end checks across modules on small instances.

use projchan_core::capacity::{auto_group, capacity_weakcov, holevo_chi, orbit_ensemble};
use projchan_core::entropy::{min_output_entropy, renyi_entropy, OptConfig, RenyiOrder};
use projchan_core::eof::{channel_optimal_state, eof_upper, example9_state, EofConfig};
use projchan_core::zoo::{build, ChannelSpec};

fn cfg(starts: usize) -> OptConfig {
    OptConfig {
        starts,
        ..OptConfig::default()
    }
}

#[test]
fn werner_holevo_nu_is_flat_over_alpha() {
    let ch = build(&"wh:d=3".parse().unwrap()).unwrap().channel;
    let mut values = Vec::new();
    for a in [0.0, 0.5, 1.0, 2.0, 5.0, f64::INFINITY] {
        let alpha = RenyiOrder::new(a).unwrap();
        let r = min_output_entropy(&ch, alpha, &cfg(16)).unwrap();
        let again = renyi_entropy(&ch.apply(&r.arg_state).unwrap(), alpha);
        assert!((again - r.value).abs() < 1e-9, "alpha={a}: {again} vs {}", r.value);
        values.push(r.value);
    }
    let spread = values.iter().cloned().fold(f64::MIN, f64::max)
        - values.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 2e-6, "{values:?}");
    assert!((values[0] - 1.0).abs() < 1e-6);
}

#[test]
fn casimir_three_matches_werner_holevo_entropies() {
    let wh = build(&"wh:d=3".parse().unwrap()).unwrap().channel;
    let cas = build(&"casimir:d=3".parse().unwrap()).unwrap().channel;
    for a in [1.0, 2.0] {
        let alpha = RenyiOrder::new(a).unwrap();
        let x = min_output_entropy(&wh, alpha, &cfg(16)).unwrap().value;
        let y = min_output_entropy(&cas, alpha, &cfg(16)).unwrap().value;
        assert!((x - y).abs() < 1e-6, "alpha={a}: {x} vs {y}");
    }
}

#[test]
fn capacities_stay_within_entropy_bounds() {
    for s in ["wh:d=3", "weyl:d=3", "pinch:d=3,blocks=2+1", "shiftpinch:d=3,K=1", "coarse:n=2,D=2"] {
        let spec: ChannelSpec = s.parse().unwrap();
        let ch = build(&spec).unwrap().channel;
        let g = auto_group(&spec, 1).unwrap();
        let rep = capacity_weakcov(&ch, &g.rho0, &g.pi, &g.big_pi, &cfg(16)).unwrap();
        let logd = (ch.dim() as f64).log2();
        assert!(rep.capacity >= -1e-9, "{s}");
        assert!(rep.max_term <= logd + 1e-9, "{s}");
        assert!(rep.min_term <= rep.max_term + 1e-9, "{s}");
        let chi = holevo_chi(&ch, &orbit_ensemble(&g.rho0, &g.pi).unwrap()).unwrap();
        assert!(chi <= rep.capacity + 1e-6, "{s}: chi {chi} > C {}", rep.capacity);
    }
}

#[test]
fn werner_holevo_optimal_state_has_eof_near_nu() {
    // E_F of the channel-optimal state is bounded by the orbit ensemble's
    // average input entropy, which for the orbit of |0> is 0.
    let spec: ChannelSpec = "wh:d=3".parse().unwrap();
    let ch = build(&spec).unwrap().channel;
    let g = auto_group(&spec, 1).unwrap();
    let e = orbit_ensemble(&g.rho0, &g.pi).unwrap();
    let state = channel_optimal_state(&ch, &e).unwrap();
    let rep = eof_upper(&state, &EofConfig { starts: 4, ..EofConfig::default() }).unwrap();
    let nu = min_output_entropy(&ch, RenyiOrder::new(1.0).unwrap(), &cfg(16)).unwrap().value;
    assert!(rep.value <= nu + 1e-3, "E_F {} vs nu {nu}", rep.value);
    assert!(rep.value >= -1e-12);
}

#[test]
fn more_eof_starts_never_hurt() {
    let rho = example9_state();
    let few = eof_upper(&rho, &EofConfig { starts: 2, ..EofConfig::default() }).unwrap();
    let more = eof_upper(&rho, &EofConfig { starts: 6, ..EofConfig::default() }).unwrap();
    assert!(more.value <= few.value + 1e-12);
    assert_eq!(&more.per_start_values[..2], &few.per_start_values[..]);
    assert!((more.value - 1.0).abs() < 1e-6);
}
