use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_4;

use netbell::network::{instances, Network, Source, SourceKind};
use netbell::observables::canonical_bipartitions;
use netbell::testkit::{self, RandomNetworkSpec};
use netbell::transform;
use netbell::Error;
use proptest::prelude::*;

#[test]
fn triangle_layout() {
    let t = instances::triangle_max();
    assert_eq!(t.particle_counts(), vec![2, 2, 2]);
    assert!(t.validate().ok);
    assert!(t.is_connected());
    assert!(!t.is_k_independent(&[0, 1]).unwrap());
}

#[test]
fn invalid_networks_are_reported() {
    let mut bad = Network::new(3).with(Source::epr(0, 1, 0.3, 1.0));
    assert!(matches!(bad.check(), Err(Error::InvalidNetwork(_))));
    bad.sources.push(Source::epr(1, 2, 1.0, 1.0));
    let r = bad.validate();
    assert!(r.violations.iter().any(|v| v.contains("theta")));
    let split = Network::new(4).with(Source::epr(0, 1, 0.3, 1.0)).with(Source::epr(2, 3, 0.3, 1.0));
    assert!(matches!(split.check(), Err(Error::Disconnected)));
}

#[test]
fn data_files_load() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    assert_eq!(Network::load(format!("{dir}/triangle.json")).unwrap(), instances::triangle_max());
    assert_eq!(Network::load(format!("{dir}/square-cycle.json")).unwrap(), instances::square_cycle());
    assert_eq!(Network::load(format!("{dir}/two-cycle.json")).unwrap(), instances::two_cycle());
    assert_eq!(Network::load(format!("{dir}/chain-4.json")).unwrap(), instances::chain(4, FRAC_PI_4, 1.0));
}

// subsets up to complement, counted by brute force
fn bipartitions_by_complement(n: usize) -> usize {
    let mut seen = BTreeSet::new();
    for mask in 1..(1u32 << n) - 1 {
        let comp = !mask & ((1 << n) - 1);
        seen.insert(mask.min(comp));
    }
    seen.len()
}

#[test]
fn bipartition_count_matches_enumeration() {
    for n in 2..=9 {
        let b = canonical_bipartitions(n).unwrap();
        assert_eq!(b.len(), bipartitions_by_complement(n));
        assert_eq!(b.len(), (1 << (n - 1)) - 1);
    }
}

#[test]
fn square_cycle_fixture() {
    let (out, trace) = transform::to_odd_parity(&instances::square_cycle()).unwrap();
    let epr = out.sources.iter().filter(|s| s.kind == SourceKind::Epr).count();
    let ghz4 = out.sources.iter().filter(|s| s.kind == SourceKind::Ghz { m: 4 }).count();
    assert_eq!((epr, ghz4), (2, 2));
    assert_eq!(out.particle_counts(), vec![3; 4]);
    assert_eq!(trace.replay(&instances::square_cycle()), out);
}

#[test]
fn triangle_variants_have_documented_arities() {
    let v = transform::prepare_variants(&instances::triangle_max()).unwrap();
    assert_eq!(v.nets.len(), 2);
    assert_eq!(v.nets[0].particle_counts(), vec![3, 3, 2]);
    assert_eq!(v.nets[1].particle_counts(), vec![3, 4, 3]);
}

fn spec(seed: u64, parties: usize) -> RandomNetworkSpec {
    RandomNetworkSpec { parties: parties..=parties, sources: parties - 1..=parties + 3, max_particles: 0, seed, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_is_deterministic(seed in any::<u64>()) {
        let s = RandomNetworkSpec { seed, ..Default::default() };
        let a = testkit::gen_connected_network(&s).unwrap();
        prop_assert_eq!(&a, &testkit::gen_connected_network(&s).unwrap());
        prop_assert!(a.validate().ok);
        prop_assert!(a.total_particles() <= 12);
    }

    #[test]
    fn json_roundtrip(seed in any::<u64>()) {
        let a = testkit::gen_connected_network(&RandomNetworkSpec { seed, ..Default::default() }).unwrap();
        prop_assert_eq!(Network::from_json_str(&a.to_json_string()).unwrap(), a);
    }

    #[test]
    fn even_networks_become_odd(seed in any::<u64>(), half in 1usize..4) {
        let net = transform::ghz_even_normalize(&testkit::gen_connected_network(&spec(seed, 2 * half)).unwrap());
        let (out, trace) = transform::to_odd_parity(&net).unwrap();
        prop_assert!(out.particle_counts().iter().all(|c| c % 2 == 1));
        prop_assert_eq!(trace.replay(&net), out.clone());
        prop_assert!(out.validate().ok);
        // each source converted at most once
        let set: BTreeSet<usize> = trace.converted.iter().copied().collect();
        prop_assert_eq!(set.len(), trace.converted.len());
    }

    #[test]
    fn odd_variants_cover_every_party(seed in any::<u64>(), k in 1usize..3) {
        let net = testkit::gen_connected_network(&spec(seed, 2 * k + 1)).unwrap();
        let v = transform::prepare_variants(&net).unwrap();
        for p in 0..net.parties {
            prop_assert!(v.nets.iter().any(|n| n.particle_counts()[p] % 2 == 1), "party {} even in every variant", p);
        }
    }

    #[test]
    fn cut_leaves_no_crossing_entanglement(seed in any::<u64>(), mask in 1usize..7) {
        let net = testkit::gen_connected_network(&RandomNetworkSpec { parties: 3..=3, seed, ..Default::default() }).unwrap();
        let cut: Vec<usize> = (0..3).filter(|j| mask >> j & 1 == 1).collect();
        let c = testkit::biseparable_cut(&net, &cut).unwrap();
        prop_assert!(!c.crosses_cut(&cut));
        prop_assert_eq!(c.particle_counts(), net.particle_counts());
    }
}
