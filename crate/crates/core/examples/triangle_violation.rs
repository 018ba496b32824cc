//! Bell functional of the triangle network, at a fixed angle and optimized.

use std::f64::consts::FRAC_PI_4;

use netbell::bell;
use netbell::network::instances;

fn main() -> netbell::Result<()> {
    let tri = instances::triangle_max();
    let r = bell::evaluate(&tri, FRAC_PI_4)?;
    for t in &r.terms {
        println!("CH{:?} = {:.6}", t.bipartition, t.value);
    }
    println!("sum {:.9}  bound {:.9}  max {:.9}  {:?}", r.value, r.biseparable_bound, r.quantum_max, r.verdict);

    // partially entangled sources: optimize the shared angle
    let weak = instances::triangle([0.5, 0.6, 0.7], 1.0);
    let (theta, r) = bell::optimize_theta(&weak)?;
    println!("weak triangle: best theta {theta:.6}, value {:.9}, {:?}", r.value, r.verdict);

    // four parties: two-party bipartitions fall short of the closed form
    let sq = bell::evaluate(&instances::square_cycle(), FRAC_PI_4)?;
    println!("square cycle: {:.6} vs bound {:.6}", sq.value, sq.biseparable_bound);
    for d in &sq.diagnostics {
        println!("  {d}");
    }
    Ok(())
}
