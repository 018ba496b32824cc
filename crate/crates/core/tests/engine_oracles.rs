use std::f64::consts::FRAC_PI_4;

use netbell::engine::{self, dense_expectation, expectation, source_expectation, ConditionalDistribution};
use netbell::network::{instances, Network, Source};
use netbell::observables::{Letter, PartyObservable, PauliWord};
use netbell::testkit::{self, RandomNetworkSpec};
use netbell::bell;
use proptest::prelude::*;

fn word(s: &str) -> PauliWord {
    s.parse().unwrap()
}

// cosθ|00⟩ + sinθ|11⟩ mixed with white noise: ⟨ZZ⟩ = v, ⟨XX⟩ = v sin2θ, ⟨ZI⟩ = v cos2θ
#[test]
fn epr_closed_forms() {
    for (theta, v) in [(0.3, 1.0), (0.7, 0.8), (FRAC_PI_4, 0.5)] {
        let s = Source::epr(0, 1, theta, v);
        let ex = |w: &str| source_expectation(&s, &word(w).0).unwrap();
        assert!((ex("ZZ") - v).abs() < 1e-15);
        assert!((ex("XX") - v * (2.0 * theta).sin()).abs() < 1e-15);
        assert!((ex("ZI") - v * (2.0 * theta).cos()).abs() < 1e-15);
        assert!(ex("XZ").abs() < 1e-15);
        assert_eq!(ex("II"), 1.0);
    }
}

#[test]
fn ghz_parity() {
    let s = Source::ghz(&[(0, 2), (1, 1)], FRAC_PI_4, 1.0);
    let ex = |w: &str| source_expectation(&s, &word(w).0).unwrap();
    assert!((ex("XXX") - 1.0).abs() < 1e-15);
    assert!((ex("ZZI") - 1.0).abs() < 1e-15);
    assert!(ex("ZII").abs() < 1e-15);
    assert!(ex("XXI").abs() < 1e-15);
}

#[test]
fn born_table_is_a_nonsignalling_distribution() {
    for v in [1.0, 0.9] {
        let net = instances::triangle([0.5, 0.6, FRAC_PI_4], v);
        let (_, d) = bell::observed_statistics(&net, 0.6, 14).unwrap();
        assert!(d.normalization_error() < 1e-12);
        assert!(d.min_entry() > -1e-14);
        assert!(d.signalling() < 1e-12);
    }
}

#[test]
fn correlators_from_born_match_expectations() {
    let net = instances::triangle([0.4, 0.5, 0.6], 0.9);
    let obs = vec![
        vec![PartyObservable { party: 0, terms: vec![(0.6, word("ZI")), (0.8, word("XI"))] }, PartyObservable::uniform(0, 2, Letter::X)],
        vec![PartyObservable::uniform(1, 2, Letter::Z)],
        vec![PartyObservable::uniform(2, 2, Letter::X), PartyObservable::uniform(2, 2, Letter::Z)],
    ];
    let d = engine::born_distribution(&net, &obs, 14).unwrap();
    for x0 in 0..2 {
        for x2 in 0..2 {
            let c = engine::correlation_from_distribution(&d, &[x0, 0, x2]).unwrap();
            let e = expectation(&net, &[obs[0][x0].clone(), obs[1][0].clone(), obs[2][x2].clone()]).unwrap();
            assert!((c - e).abs() < 1e-12, "{x0} {x2}: {c} vs {e}");
        }
    }
}

#[test]
fn dense_limit_is_enforced() {
    let net = instances::triangle_max();
    let obs: Vec<PartyObservable> = (0..3).map(|p| PartyObservable::uniform(p, 2, Letter::Z)).collect();
    assert!(dense_expectation(&net, &obs, 4).is_err());
}

#[test]
fn uniform_box_has_no_signalling() {
    let d = ConditionalDistribution::uniform(&[2, 3]);
    assert!(d.signalling() < 1e-15);
    assert!(engine::correlation_from_distribution(&d, &[1, 2]).unwrap().abs() < 1e-15);
}

fn random_obs(net: &Network, picks: &[u8], coefs: &[f64]) -> Vec<PartyObservable> {
    let letters = [Letter::I, Letter::Z, Letter::X];
    let mut k = 0;
    (0..net.parties)
        .map(|p| {
            let len = net.particle_count(p).unwrap();
            let terms = (0..2)
                .map(|t| {
                    let w = PauliWord((0..len).map(|_| { k += 1; letters[picks[k % picks.len()] as usize % 3] }).collect());
                    (coefs[(p + t) % coefs.len()], w)
                })
                .collect();
            PartyObservable { party: p, terms }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn analytic_matches_dense(seed in any::<u64>(), picks in prop::collection::vec(0u8..3, 7..20), coefs in prop::collection::vec(-1.0f64..1.0, 3..6)) {
        let net = testkit::gen_connected_network(&RandomNetworkSpec { parties: 2..=4, max_particles: 10, seed, ..Default::default() }).unwrap();
        let obs = random_obs(&net, &picks, &coefs);
        let a = expectation(&net, &obs).unwrap();
        let d = dense_expectation(&net, &obs, 14).unwrap();
        prop_assert!((a - d).abs() <= 1e-10, "{} vs {}", a, d);
    }
}
