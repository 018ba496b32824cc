//! Closed-form correlators against the dense density-matrix route.

use netbell::engine::{dense_expectation, expectation};
use netbell::network::{Network, Source};
use netbell::observables::PartyObservable;

fn main() -> netbell::Result<()> {
    let net = Network::new(3)
        .with(Source::ghz(&[(0, 1), (1, 2), (2, 1)], 0.4, 0.9))
        .with(Source::epr(0, 2, 0.7, 0.95));
    let obs = vec![
        PartyObservable { party: 0, terms: vec![(0.6, "XZ".parse()?), (0.8, "ZX".parse()?)] },
        PartyObservable { party: 1, terms: vec![(1.0, "XX".parse()?)] },
        PartyObservable { party: 2, terms: vec![(0.5, "XI".parse()?), (-0.5, "ZZ".parse()?)] },
    ];
    let a = expectation(&net, &obs)?;
    let d = dense_expectation(&net, &obs, 14)?;
    println!("closed form {a:.15}\ndense       {d:.15}\ngap {:.1e}", (a - d).abs());
    Ok(())
}
