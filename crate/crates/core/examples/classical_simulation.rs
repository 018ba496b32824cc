//! Classical simulation with shared randomness and one bit per link.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

use netbell::sim::{self, SimConfig};

fn main() -> netbell::Result<()> {
    let r = sim::simulate_singlet(sim::xz(0.3), sim::xz(1.1), 1_000_000, 1)?;
    println!("singlet: {:.5} +- {:.5} (target {:.5})", r.estimate, r.stderr, r.target);
    for k in 2..=5 {
        let c = sim::compose_chain(&SimConfig { k, theta_a: FRAC_PI_3, theta_b: FRAC_PI_6, samples: 400_000, seed: k as u64 })?;
        println!("chain k = {k}: {:.5} +- {:.5} (target {:.5}), {} bits per round", c.result.estimate, c.result.stderr, c.result.target, c.result.bits_per_round);
    }
    let c = sim::compose_chain(&SimConfig { k: 2, theta_a: 0.0, theta_b: 0.0, samples: 1, seed: 0 })?;
    println!("aligned ends: branches {:?}, analytic only {}", c.algebra.branches, c.result.analytic_only);
    let g = sim::compose_ghz(4, &[FRAC_PI_4; 4], 0.6)?;
    println!("GHZ k = 4: quantum {:.6}, branches {:?}, realizable {:?}", g.quantum, g.branches, g.realizable);
    Ok(())
}
